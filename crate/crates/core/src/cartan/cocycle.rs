//! Flags, the Iwasawa cocycle and the θ_n sums along a trajectory.

use crate::error::{Error, Result};
use crate::model::{WalkConfig, Word};

use super::linalg::{qr_log, subspace_distance, Mat};

const GAP_TOL: f64 = 1e-9;

/// A complete flag `V₁ ⊂ … ⊂ V_{d−1}`: `V_k` is spanned by the first `k`
/// columns of the orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    frame: Mat,
}

impl Flag {
    pub fn standard(d: usize) -> Self {
        Self { frame: Mat::identity(d) }
    }

    /// Gram–Schmidt of `vectors` (completed by standard basis vectors).
    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let d = vectors.first().map_or(0, Vec::len);
        let mut m = Mat::zeros(d, d);
        for (j, v) in vectors.iter().enumerate().take(d) {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
            m.set_col(j, v);
        }
        // complete with the basis vectors least aligned with what is there
        let mut j = vectors.len().min(d);
        let mut e = 0;
        while j < d {
            let mut cand = m.clone();
            let mut v = vec![0.0; d];
            v[e] = 1.0;
            cand.set_col(j, &v);
            let prefix = take_cols(&cand, j + 1);
            if qr_log(&prefix).map(|(_, l)| l[j] > -10.0).unwrap_or(false) {
                m = cand;
                j += 1;
            }
            e += 1;
            if e > d {
                return Err(Error::Numerical("cannot complete flag".into()));
            }
        }
        let (q, _) = qr_log(&m)?;
        Ok(Self { frame: q })
    }

    /// A fixed frame in general position with respect to coordinate subspaces.
    pub fn generic(d: usize) -> Self {
        let vectors: Vec<Vec<f64>> = (0..d)
            .map(|j| (0..d).map(|i| (((i + 1) * (j + 2)) as f64 * 0.618_033_988_749_894_9).fract() - 0.5).collect())
            .collect();
        Self::from_vectors(&vectors).unwrap_or_else(|_| Self::standard(d))
    }

    pub fn dim(&self) -> usize {
        self.frame.rows
    }

    pub fn frame(&self) -> &Mat {
        &self.frame
    }

    /// Orthonormal basis of `V_k`.
    pub fn subspace(&self, k: usize) -> Mat {
        take_cols(&self.frame, k)
    }

    /// Unit vector spanning `V₁`.
    pub fn line(&self) -> Vec<f64> {
        self.frame.col(0)
    }
}

fn take_cols(m: &Mat, k: usize) -> Mat {
    let mut out = Mat::zeros(m.rows, k);
    for j in 0..k {
        out.set_col(j, &m.col(j));
    }
    out
}

/// Largest distance between the corresponding subspaces `V_k`, k = 1..d−1.
pub fn flag_distance(a: &Flag, b: &Flag) -> f64 {
    (1..a.dim()).map(|k| subspace_distance(&a.subspace(k), &b.subspace(k))).fold(0.0, f64::max)
}

/// `g·ξ` together with `σ(g, ξ)`.
pub fn transport(g: &Mat, xi: &Flag) -> Result<(Flag, Vec<f64>)> {
    let d = xi.dim();
    if g.rows != d || g.cols != d {
        return Err(Error::DimensionMismatch { expected: d, found: g.rows });
    }
    let (q, logs) = qr_log(&g.mul(&xi.frame))?;
    Ok((Flag { frame: q }, a_vector(&logs)))
}

/// Iwasawa cocycle `σ(g, ξ)`: coordinate `i` is `ln ‖∧^i g·w_i‖ − ln ‖∧^{i−1} g·w_{i−1}‖`
/// with `w_i` the wedge of an orthonormal basis of `V_i`. Coordinates sum to zero.
pub fn iwasawa_cocycle(g: &Mat, xi: &Flag) -> Result<Vec<f64>> {
    transport(g, xi).map(|(_, a)| a)
}

fn a_vector(logs: &[f64]) -> Vec<f64> {
    let d = logs.len();
    let mut a = logs[..d - 1].to_vec();
    a.push(-logs[..d - 1].iter().sum::<f64>());
    a
}

/// `σ(b₁ ⋯ b_n, ξ)` and `b₁ ⋯ b_n · ξ`, by the cocycle relation applied letter
/// by letter from `b_n` down to `b₁`.
pub fn cocycle_of_letters(cfg: &WalkConfig, letters: &[usize], xi: &Flag) -> Result<(Flag, Vec<f64>)> {
    let d = cfg.dim;
    let mut frame = xi.frame.clone();
    let mut acc = vec![0.0; d];
    let mut g = Mat::zeros(d, d);
    for &l in letters.iter().rev() {
        g.data.copy_from_slice(cfg.float_matrix(l));
        let (q, logs) = qr_log(&g.mul(&frame))?;
        for (a, v) in acc.iter_mut().zip(a_vector(&logs)) {
            *a += v;
        }
        frame = q;
    }
    Ok((Flag { frame }, acc))
}

/// Approximates the limit flag of `b_{1} b_{2} ⋯` from the letters `letters`
/// (the density-point flag of their product), applied to a generic frame.
pub fn lookahead_flag(cfg: &WalkConfig, letters: &[usize]) -> Result<Flag> {
    let (flag, sigma) = cocycle_of_letters(cfg, letters, &Flag::generic(cfg.dim))?;
    for i in 0..sigma.len() - 1 {
        let gap = sigma[i] - sigma[i + 1];
        if gap <= GAP_TOL {
            return Err(Error::Gap { index: i + 1, gap });
        }
    }
    Ok(flag)
}

pub const DEFAULT_LOOKAHEAD: usize = 200;
const FLAG_CONVERGED: f64 = 1e-10;

/// Lookahead flag from `letters[..m]`, with `m` doubling from 25 until two
/// successive flags agree to 1e-10 or `m_max` letters are used.
/// Returns the flag and the number of letters consumed.
pub fn adaptive_lookahead(cfg: &WalkConfig, letters: &[usize], m_max: usize) -> Result<(Flag, usize)> {
    let m_max = m_max.min(letters.len());
    if m_max == 0 {
        return Err(Error::Precondition("lookahead needs at least one letter".into()));
    }
    let mut m = 25.min(m_max);
    let mut flag = lookahead_flag(cfg, &letters[..m])?;
    while m < m_max {
        let next_m = (2 * m).min(m_max);
        let next = lookahead_flag(cfg, &letters[..next_m])?;
        let dist = flag_distance(&flag, &next);
        flag = next;
        m = next_m;
        if dist < FLAG_CONVERGED {
            break;
        }
    }
    Ok((flag, m))
}

/// `θ_n(b) = σ(b₁ ⋯ b_n, ξ_{T^n b})` with `ξ_{T^n b}` approximated from the
/// lookahead letters `b_{n+1} … b_{n+m}`.
pub fn theta_n(cfg: &WalkConfig, b: &Word, n: usize, m: usize) -> Result<Vec<f64>> {
    cfg.check_word(b)?;
    if b.len() < n + m {
        return Err(Error::Precondition(format!("word of length {} is shorter than n + m = {}", b.len(), n + m)));
    }
    if n == 0 {
        return Ok(vec![0.0; cfg.dim]);
    }
    let (xi, _) = adaptive_lookahead(cfg, &b.letters[n..n + m], m)?;
    Ok(cocycle_of_letters(cfg, &b.letters[..n], &xi)?.1)
}

/// Highest-weight evaluation `ω(x) = x₁`.
pub fn omega(a: &[f64]) -> f64 {
    a[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_cocycle_vanishes() {
        let xi = Flag::generic(3);
        let a = iwasawa_cocycle(&Mat::identity(3), &xi).unwrap();
        assert!(a.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn diagonal_on_eigenflag() {
        let a = iwasawa_cocycle(&Mat::diag(&[2.0, 0.5]), &Flag::standard(2)).unwrap();
        assert!((a[0] - 2f64.ln()).abs() < 1e-15 && (a[1] + 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn parabolic_on_second_axis() {
        let xi = Flag::from_vectors(&[vec![0.0, 1.0]]).unwrap();
        let g0 = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let a = iwasawa_cocycle(&g0, &xi).unwrap();
        let l = 5f64.sqrt().ln();
        assert!((a[0] - l).abs() < 1e-14 && (a[1] + l).abs() < 1e-14);
    }

    #[test]
    fn theta_zero_steps() {
        let cfg = WalkConfig::reference();
        let b = Word::new(vec![0; 10]);
        assert_eq!(theta_n(&cfg, &b, 0, 10).unwrap(), vec![0.0, 0.0]);
        assert!(theta_n(&cfg, &b, 5, 10).is_err());
    }

    #[test]
    fn from_vectors_completes_frame() {
        let f = Flag::from_vectors(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let q = f.frame();
        let qtq = q.transpose().mul(q);
        for i in 0..3 {
            assert!((qtq.get(i, i) - 1.0).abs() < 1e-12);
        }
    }
}
