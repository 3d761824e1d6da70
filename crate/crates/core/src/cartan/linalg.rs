//! Dense float linear algebra on small matrices.
//!
//! Hot loops (products of thousands of 2×2 or 3×3 matrices) use the flat
//! row-major [`Mat`] with in-place kernels; decompositions go through nalgebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn square(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "square matrix data length");
        Self { rows: n, cols: n, data }
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows.iter().flat_map(|row| row.iter().copied()).collect();
        Self { rows: r, cols: c, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self.set(i, j, *x);
        }
    }

    pub fn mul(&self, rhs: &Mat) -> Mat {
        let mut out = Mat::zeros(self.rows, rhs.cols);
        mul_into(self, rhs, &mut out);
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Mat {
        let mut out = Mat::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }
}

/// `out = a · b`, overwriting `out`.
#[inline]
pub fn mul_into(a: &Mat, b: &Mat, out: &mut Mat) {
    debug_assert_eq!(a.cols, b.rows);
    out.rows = a.rows;
    out.cols = b.cols;
    out.data.resize(a.rows * b.cols, 0.0);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = 0.0;
            for k in 0..a.cols {
                acc += a.data[i * a.cols + k] * b.data[k * b.cols + j];
            }
            out.data[i * b.cols + j] = acc;
        }
    }
}

/// `out = a · x` for a row-major square `a` given as a slice.
#[inline]
pub fn matvec_into(a: &[f64], x: &[f64], out: &mut [f64]) {
    let d = x.len();
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += a[i * d + j] * x[j];
        }
        out[i] = acc;
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Singular value decomposition sorted by decreasing singular value:
/// `m = u · diag(s) · vᵀ`.
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

pub fn svd(m: &Mat) -> Result<Svd> {
    let dm = m.to_nalgebra();
    let dec = dm
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let u = dec.u.ok_or_else(|| Error::Numerical("SVD without U".into()))?;
    let vt = dec.v_t.ok_or_else(|| Error::Numerical("SVD without Vᵀ".into()))?;
    let s = dec.singular_values;
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let mut uu = Mat::zeros(m.rows, k);
    let mut vv = Mat::zeros(m.cols, k);
    let mut ss = Vec::with_capacity(k);
    for (new, &old) in order.iter().enumerate() {
        ss.push(s[old]);
        for i in 0..m.rows {
            uu.set(i, new, u[(i, old)]);
        }
        for j in 0..m.cols {
            vv.set(j, new, vt[(old, j)]);
        }
    }
    if m.rows == m.cols && k > 1 && ss[0] > ss[1] {
        refine_top_pair(m, &mut uu, &mut vv);
    }
    Ok(Svd { u: uu, s: ss, v: vv })
}

/// One power step on the top singular pair. The iterative SVD leaves errors of
/// order `ε·s₀/(s₀ − s₁)·s₀/s_{d−1}` in these columns; after `v₀ ← mᵀu₀`,
/// `u₀ ← m v₀` they are down to `ε` plus the old error times `s₁/s₀`.
fn refine_top_pair(m: &Mat, u: &mut Mat, v: &mut Mat) {
    let v0 = m.transpose().matvec(&u.col(0));
    let u0 = m.matvec(&v0);
    let (nv, nu) = (norm(&v0), norm(&u0));
    if !(nv > 0.0 && nu > 0.0) || !nv.is_finite() || !nu.is_finite() {
        return;
    }
    let old = u.col(0);
    let sign = if dot(&old, &u0) < 0.0 { -1.0 } else { 1.0 };
    u.set_col(0, &u0.iter().map(|x| sign * x / nu).collect::<Vec<_>>());
    v.set_col(0, &v0.iter().map(|x| sign * x / nv).collect::<Vec<_>>());
    reorthonormalize_tail(u);
    reorthonormalize_tail(v);
}

/// Gram–Schmidt (two passes) of columns `1..` against the earlier ones.
fn reorthonormalize_tail(q: &mut Mat) {
    for j in 1..q.cols {
        let mut c = q.col(j);
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.col(k);
                let r = dot(&qk, &c);
                c.iter_mut().zip(&qk).for_each(|(x, y)| *x -= r * y);
            }
        }
        let n = norm(&c);
        c.iter_mut().for_each(|x| *x /= n);
        q.set_col(j, &c);
    }
}

/// Largest singular value.
pub fn top_singular_value(m: &Mat) -> f64 {
    if m.rows == 1 && m.cols == 1 {
        return m.data[0].abs();
    }
    if m.rows == 2 && m.cols == 2 {
        // closed form avoids an iterative SVD in the hot path
        let (a, b, c, d) = (m.data[0], m.data[1], m.data[2], m.data[3]);
        return 0.5 * ((a + d).hypot(b - c) + (a - d).hypot(b + c));
    }
    m.to_nalgebra().singular_values().max()
}

/// Modified Gram–Schmidt QR of the columns of `m` with `R_ii > 0`.
/// Returns `(q, log_diag)` where `log_diag[i] = ln R_ii`.
pub fn qr_log(m: &Mat) -> Result<(Mat, Vec<f64>)> {
    let mut q = m.clone();
    let mut logs = Vec::with_capacity(m.cols);
    for j in 0..m.cols {
        let mut v = q.col(j);
        for k in 0..j {
            let qk = q.col(k);
            let r = dot(&qk, &v);
            v.iter_mut().zip(&qk).for_each(|(x, y)| *x -= r * y);
        }
        // second pass for orthogonality at tiny norms
        for k in 0..j {
            let qk = q.col(k);
            let r = dot(&qk, &v);
            v.iter_mut().zip(&qk).for_each(|(x, y)| *x -= r * y);
        }
        let n = norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numerical(format!("wedge norm underflow at column {j}")));
        }
        v.iter_mut().for_each(|x| *x /= n);
        q.set_col(j, &v);
        logs.push(n.ln());
    }
    Ok((q, logs))
}

/// Orthonormal basis of the orthogonal complement of the columns of `m` (orthonormal).
pub fn orthocomplement(m: &Mat) -> Mat {
    let n = m.rows;
    let mut basis: Vec<Vec<f64>> = (0..m.cols).map(|j| m.col(j)).collect();
    let mut out = Vec::new();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[e] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let r = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= r * y);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            basis.push(v.clone());
            out.push(v);
        }
    }
    let mut res = Mat::zeros(n, out.len());
    for (j, v) in out.iter().enumerate() {
        res.set_col(j, v);
    }
    res
}

/// Projective distance `‖u ∧ v‖ / (‖u‖‖v‖)` (sine of the angle between lines).
pub fn line_distance(u: &[f64], v: &[f64]) -> f64 {
    let nu = norm(u);
    let nv = norm(v);
    let c = dot(u, v) / (nu * nv);
    let s2 = 1.0 - c * c;
    if s2 < 1e-8 {
        // ‖u∧v‖² summed directly avoids cancellation for nearly parallel lines
        let mut w2 = 0.0;
        for i in 0..u.len() {
            for j in i + 1..u.len() {
                let m = u[i] * v[j] - u[j] * v[i];
                w2 += m * m;
            }
        }
        return (w2.sqrt() / (nu * nv)).min(1.0);
    }
    s2.sqrt().min(1.0)
}

/// Distance from the line `Ru` to the subspace spanned by orthonormal columns of `basis`:
/// the norm of the component of `u/‖u‖` orthogonal to the subspace.
pub fn line_to_subspace(u: &[f64], basis: &Mat) -> f64 {
    let nu = norm(u);
    let mut r = u.iter().map(|x| x / nu).collect::<Vec<_>>();
    for j in 0..basis.cols {
        let b = basis.col(j);
        let c = dot(&b, &r);
        r.iter_mut().zip(&b).for_each(|(x, y)| *x -= c * y);
    }
    norm(&r).min(1.0)
}

/// Largest principal-angle sine between two subspaces with orthonormal bases
/// of equal dimension.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    (0..a.cols).map(|j| line_to_subspace(&a.col(j), b)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_sorted_and_reconstructs() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let d = svd(&m).unwrap();
        assert!(d.s[0] >= d.s[1]);
        let rec = d.u.mul(&Mat::diag(&d.s)).mul(&d.v.transpose());
        for (a, b) in rec.data.iter().zip(&m.data) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_top_singular_value() {
        let m = Mat::from_rows(&[&[3.0, -1.5], &[0.25, 7.0]]);
        let s = svd(&m).unwrap().s[0];
        assert!((top_singular_value(&m) - s).abs() < 1e-12 * s);
    }

    #[test]
    fn qr_log_diag_sums_to_log_det() {
        let m = Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]]);
        let (q, logs) = qr_log(&m).unwrap();
        assert!(logs.iter().sum::<f64>().abs() < 1e-12);
        let qtq = q.transpose().mul(&q);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.get(i, j) - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn distances_are_bounded() {
        assert!((line_distance(&[1.0, 0.0], &[0.0, 2.0]) - 1.0).abs() < 1e-15);
        assert_eq!(line_distance(&[1.0, 1.0], &[2.0, 2.0]), 0.0);
        let e1 = Mat::from_rows(&[&[1.0], &[0.0]]);
        assert!((line_to_subspace(&[1.0, 1.0], &e1) - 0.5f64.sqrt()).abs() < 1e-15);
    }
}
