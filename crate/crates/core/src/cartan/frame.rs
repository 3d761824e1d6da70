//! Cartan projection of single matrices and of long products.
//!
//! `kappa_k` is recovered from top singular values of exterior powers:
//! `kappa_1 + … + kappa_k = ln σ₁(∧^k g)`. Top singular values are computed
//! to full relative accuracy even when the lower ones sit far below machine
//! precision, which a plain SVD of the product cannot do.

use crate::error::{Error, Result};
use crate::model::{k_subsets, IntMatrix, WalkConfig, Word};

use super::linalg::{mul_into, orthocomplement, svd, top_singular_value, Mat};

const LN2: f64 = std::f64::consts::LN_2;
const GAP_TOL: f64 = 1e-9;

/// Sorted log singular values with matching singular bases.
#[derive(Clone, Debug)]
pub struct CartanFrame {
    pub kappa: Vec<f64>,
    /// Columns are left singular vectors, matched to `kappa`.
    pub left_basis: Mat,
    /// Columns are right singular vectors, matched to `kappa`.
    pub right_basis: Mat,
}

impl CartanFrame {
    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    /// `left · diag(exp(kappa − log_scale)) · rightᵀ`.
    pub fn reconstruct(&self, log_scale: f64) -> Mat {
        let s: Vec<f64> = self.kappa.iter().map(|k| (k - log_scale).exp()).collect();
        self.left_basis.mul(&Mat::diag(&s)).mul(&self.right_basis.transpose())
    }

    /// Gap `kappa[i] − kappa[i+1]`.
    pub fn gap(&self, i: usize) -> f64 {
        self.kappa[i] - self.kappa[i + 1]
    }

    /// The frame of the transpose: bases swapped, kappa unchanged.
    pub fn transposed(&self) -> CartanFrame {
        CartanFrame { kappa: self.kappa.clone(), left_basis: self.right_basis.clone(), right_basis: self.left_basis.clone() }
    }
}

/// Float minors of every order `1..=d` of a square matrix.
pub(crate) fn float_wedges(g: &Mat) -> Vec<Mat> {
    let d = g.rows;
    (1..=d)
        .map(|k| {
            let subsets = k_subsets(d, k);
            let n = subsets.len();
            let mut w = Mat::zeros(n, n);
            for (a, rows) in subsets.iter().enumerate() {
                for (b, cols) in subsets.iter().enumerate() {
                    let mut sub = Mat::zeros(k, k);
                    for (i, &r) in rows.iter().enumerate() {
                        for (j, &c) in cols.iter().enumerate() {
                            sub.set(i, j, g.get(r, c));
                        }
                    }
                    w.set(a, b, float_det(&sub));
                }
            }
            w
        })
        .collect()
}

fn float_det(m: &Mat) -> f64 {
    match m.rows {
        1 => m.data[0],
        2 => m.data[0] * m.data[3] - m.data[1] * m.data[2],
        _ => m.to_nalgebra().determinant(),
    }
}

fn kappa_from_partial_sums(s: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    s.iter()
        .map(|&v| {
            let k = v - prev;
            prev = v;
            k
        })
        .collect()
}

fn frame_from(kappa: Vec<f64>, renormalized: &Mat) -> Result<CartanFrame> {
    let dec = svd(renormalized)?;
    Ok(CartanFrame { kappa, left_basis: dec.u, right_basis: dec.v })
}

/// Cartan projection of an invertible float matrix (its SVD in log scale).
///
/// Lower singular values are only as accurate as the float minors of `g`;
/// long products must go through [`renormalized_product`] instead.
pub fn cartan_projection(g: &Mat) -> Result<CartanFrame> {
    if g.rows != g.cols {
        return Err(Error::DimensionMismatch { expected: g.rows, found: g.cols });
    }
    let wedges = float_wedges(g);
    let mut s = Vec::with_capacity(g.rows);
    for w in &wedges {
        let top = top_singular_value(w);
        if !(top > 0.0) || !top.is_finite() {
            return Err(Error::Numerical("matrix is singular or out of float range".into()));
        }
        s.push(top.ln());
    }
    frame_from(kappa_from_partial_sums(&s), g)
}

/// Cartan projection of an exact integer matrix. Minors are exact, so every
/// entry of `kappa` keeps full relative accuracy.
pub fn cartan_projection_exact(g: &IntMatrix) -> Result<CartanFrame> {
    let d = g.dim();
    let mut s = Vec::with_capacity(d);
    for k in 1..=d {
        let w = g.wedge(k);
        let (vals, shift) = w.to_f64_scaled();
        let top = top_singular_value(&Mat::square(w.dim(), vals));
        if !(top > 0.0) {
            return Err(Error::Numerical("singular matrix".into()));
        }
        s.push(top.ln() + shift as f64 * LN2);
    }
    let (vals, _) = g.to_f64_scaled();
    frame_from(kappa_from_partial_sums(&s), &Mat::square(d, vals))
}

/// Exterior powers `∧^k g` (k = 1..d−1) of every generator, as floats.
#[derive(Clone, Debug)]
pub struct WedgeTable {
    pub dim: usize,
    /// `per_order[k-1][letter]`.
    pub per_order: Vec<Vec<Mat>>,
}

impl WedgeTable {
    pub fn new(cfg: &WalkConfig) -> Self {
        let d = cfg.dim;
        let per_order = (1..d)
            .map(|k| {
                cfg.generators
                    .iter()
                    .map(|g| {
                        let w = g.matrix.wedge(k);
                        Mat::square(w.dim(), w.to_f64())
                    })
                    .collect()
            })
            .collect();
        Self { dim: d, per_order }
    }
}

#[inline]
fn pow2(e: i32) -> f64 {
    f64::from_bits(((e + 1023) as u64) << 52)
}

/// Running product `b₁ ⋯ b_n` (letters appended on the right), tracked in
/// every exterior power with exact power-of-two renormalization.
#[derive(Clone, Debug)]
pub struct ProductTracker<'a> {
    table: &'a WedgeTable,
    powers: Vec<Mat>,
    log2_scales: Vec<i64>,
    scratch: Mat,
    len: usize,
}

impl<'a> ProductTracker<'a> {
    pub fn new(table: &'a WedgeTable) -> Self {
        let powers: Vec<Mat> = table.per_order.iter().map(|gens| Mat::identity(gens[0].rows)).collect();
        Self { table, log2_scales: vec![0; powers.len()], powers, scratch: Mat::zeros(0, 0), len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn push(&mut self, letter: usize) {
        for (k, p) in self.powers.iter_mut().enumerate() {
            mul_into(p, &self.table.per_order[k][letter], &mut self.scratch);
            std::mem::swap(p, &mut self.scratch);
            let m = p.max_abs();
            let (_, e) = frexp(m);
            if !(-64..=64).contains(&e) {
                p.scale(pow2(-e));
                self.log2_scales[k] += e as i64;
            }
        }
        self.len += 1;
    }

    pub fn push_word(&mut self, w: &Word) {
        for &l in &w.letters {
            self.push(l);
        }
    }

    /// `ln σ₁(∧^k P)` for k = 1..d−1.
    pub fn log_top(&self, k: usize) -> f64 {
        top_singular_value(&self.powers[k - 1]).ln() + self.log2_scales[k - 1] as f64 * LN2
    }

    /// `ln ‖P‖` (operator norm).
    pub fn log_norm(&self) -> f64 {
        self.log_top(1)
    }

    pub fn kappa(&self) -> Vec<f64> {
        let d = self.table.dim;
        let mut s: Vec<f64> = (1..d).map(|k| self.log_top(k)).collect();
        s.push(0.0);
        kappa_from_partial_sums(&s)
    }

    /// The product in the standard representation divided by `e^{log_scale}`.
    pub fn renormalized(&self) -> (&Mat, f64) {
        (&self.powers[0], self.log2_scales[0] as f64 * LN2)
    }

    pub fn frame(&self) -> Result<CartanFrame> {
        frame_from(self.kappa(), &self.powers[0])
    }
}

/// `(mantissa, exponent)` with `x = mantissa · 2^exponent`, mantissa in [0.5, 1).
fn frexp(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        let (m, e) = frexp(x * pow2(64));
        return (m, e - 64);
    }
    let e = exp - 1022;
    (x * pow2(-e), e)
}

/// Cartan frame of `b₁ ⋯ b_n` computed with per-step renormalization.
/// Returns the frame and the log scale removed from the stored product.
pub fn renormalized_product(w: &Word, cfg: &WalkConfig) -> Result<(CartanFrame, f64)> {
    cfg.check_word(w)?;
    let table = WedgeTable::new(cfg);
    let mut tracker = ProductTracker::new(&table);
    tracker.push_word(w);
    let frame = tracker.frame()?;
    Ok((frame, tracker.renormalized().1))
}

/// Density points for proximal dimension `r`: the top-`r` left singular
/// subspace `ξ⁺` and `V⁻`, the orthocomplement of the top-`r` right singular
/// subspace. Both as orthonormal column bases.
pub fn density_points(frame: &CartanFrame, r: usize) -> Result<(Mat, Mat)> {
    let d = frame.dim();
    if r == 0 || r >= d {
        return Err(Error::Precondition(format!("r must be in 1..{d}")));
    }
    let gap = frame.gap(r - 1);
    if gap <= GAP_TOL {
        return Err(Error::Gap { index: r, gap });
    }
    let mut xi_plus = Mat::zeros(d, r);
    let mut top_right = Mat::zeros(d, r);
    for j in 0..r {
        xi_plus.set_col(j, &frame.left_basis.col(j));
        top_right.set_col(j, &frame.right_basis.col(j));
    }
    Ok((xi_plus, orthocomplement(&top_right)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::word_product;

    #[test]
    fn identity_has_zero_kappa() {
        let f = cartan_projection(&Mat::identity(3)).unwrap();
        assert!(f.kappa.iter().all(|k| k.abs() < 1e-15));
    }

    #[test]
    fn diagonal_case() {
        let f = cartan_projection(&Mat::diag(&[2.0, 0.5])).unwrap();
        let l2 = 2f64.ln();
        assert!((f.kappa[0] - l2).abs() < 1e-15 && (f.kappa[1] + l2).abs() < 1e-15);
        assert!((f.left_basis.get(0, 0).abs() - 1.0).abs() < 1e-15);
        assert!((f.right_basis.get(0, 0).abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parabolic_generator() {
        let f = cartan_projection(&Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]])).unwrap();
        let expected = (1.0 + 2f64.sqrt()).ln();
        assert!((f.kappa[0] - expected).abs() < 1e-12);
        assert!((f.kappa[1] + expected).abs() < 1e-12);
        assert!((expected - 0.881374).abs() < 1e-6);
    }

    #[test]
    fn reconstruction_and_kappa_sum() {
        let g = Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 3.0, 1.0]]);
        let f = cartan_projection(&g).unwrap();
        assert!(f.kappa.iter().sum::<f64>().abs() < 1e-9);
        assert!(f.kappa.windows(2).all(|w| w[0] >= w[1]));
        let rec = f.reconstruct(0.0);
        for (a, b) in rec.data.iter().zip(&g.data) {
            assert!((a - b).abs() < 1e-8 * g.max_abs());
        }
    }

    #[test]
    fn length_one_word_matches_projection() {
        let cfg = WalkConfig::reference();
        let (f, _) = renormalized_product(&Word::new(vec![2]), &cfg).unwrap();
        let g = cartan_projection(&Mat::square(2, cfg.float_matrix(2).to_vec())).unwrap();
        for (a, b) in f.kappa.iter().zip(&g.kappa) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cancelling_word_has_zero_kappa() {
        let cfg = WalkConfig::reference();
        let w = Word::new([0, 1].repeat(50));
        let (f, scale) = renormalized_product(&w, &cfg).unwrap();
        assert!(f.kappa.iter().all(|k| k.abs() < 1e-12));
        assert_eq!(scale, 0.0);
    }

    #[test]
    fn density_points_examples() {
        let f = cartan_projection(&Mat::diag(&[2.0, 0.5])).unwrap();
        let (xp, vm) = density_points(&f, 1).unwrap();
        assert!((xp.get(0, 0).abs() - 1.0).abs() < 1e-15);
        assert!((vm.get(1, 0).abs() - 1.0).abs() < 1e-15);

        let g0 = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        let (xp, _) = density_points(&cartan_projection(&g0).unwrap(), 1).unwrap();
        // eigenvector of g0 g0ᵀ = [[5,2],[2,1]] for 3 + 2√2 is (1+√2, 1)
        let e = [1.0 + 2f64.sqrt(), 1.0];
        let ne = (e[0] * e[0] + e[1] * e[1]).sqrt();
        let c = (xp.get(0, 0) * e[0] + xp.get(1, 0) * e[1]) / ne;
        assert!((c.abs() - 1.0).abs() < 1e-12);

        let id = cartan_projection(&Mat::identity(2)).unwrap();
        assert!(matches!(density_points(&id, 1), Err(Error::Gap { .. })));
    }

    #[test]
    fn exact_projection_agrees_on_small_product() {
        let cfg = WalkConfig::reference();
        let w = Word::new(vec![0, 2, 2, 1, 3, 0, 2]);
        let g = word_product(&w, &cfg).unwrap();
        let a = cartan_projection_exact(&g.matrix).unwrap();
        let b = cartan_projection(&Mat::square(2, g.matrix.to_f64())).unwrap();
        for (x, y) in a.kappa.iter().zip(&b.kappa) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn frexp_roundtrip() {
        for x in [1.0, 3.5, 1e-300, 1e300] {
            let (m, e) = frexp(x);
            assert!((0.5..1.0).contains(&m));
            assert_eq!(m * 2f64.powi(e), x);
        }
    }
}
