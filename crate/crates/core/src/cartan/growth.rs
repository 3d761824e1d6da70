//! Numerical check of the growth and contraction inequalities
//!
//! `e^{κ₁} ‖v‖ d(Rv, V⁻) ≤ ‖gv‖ ≤ e^{κ₁} ‖v‖` and
//! `d(R gv, W⁺) ≤ max_i e^{−(κ_i − κ_{i+1})} / d(Rv, V⁻)`.
//!
//! Distances are computed through `∧²`: with `v₁` the top right singular
//! vector, `d(R gv, W⁺) = ‖∧²g (v ∧ v₁)‖ / (‖gv‖ ‖g v₁‖)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::model::{k_subsets, word_product, IntMatrix, WalkConfig, Word};
use crate::rng::replica_rng;

use super::frame::{cartan_projection, cartan_projection_exact, float_wedges, CartanFrame};
use super::linalg::{dot, norm, Mat};

const LN2: f64 = std::f64::consts::LN_2;
pub const GROWTH_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub kappa: Vec<f64>,
    /// `‖gv‖`.
    pub norm_gv: f64,
    /// `e^{κ₁} ‖v‖ d(Rv, V⁻)`.
    pub lower: f64,
    /// `e^{κ₁} ‖v‖`.
    pub upper: f64,
    /// `d(Rv, V⁻)`.
    pub dist_v_minus: f64,
    /// `d(R gv, W⁺)`.
    pub contraction_lhs: f64,
    /// `max_i e^{−(κ_i − κ_{i+1})} / d(Rv, V⁻)`, infinite when `v ∈ V⁻`.
    pub contraction_rhs: f64,
    pub lower_violated: bool,
    pub upper_violated: bool,
    pub contraction_violated: bool,
}

impl GrowthReport {
    pub fn ok(&self) -> bool {
        !(self.lower_violated || self.upper_violated || self.contraction_violated)
    }
}

/// Inputs in log scale: `ln ‖v‖`, `ln ‖gv‖`, `ln ‖g v₁‖`, `ln ‖∧²g (v∧v₁)‖`, and `d(Rv, V⁻)`.
struct LogSides {
    ln_v: f64,
    ln_gv: f64,
    ln_gv1: f64,
    ln_wedge: f64,
    dist: f64,
}

fn finish(frame: &CartanFrame, s: LogSides) -> GrowthReport {
    let k1 = frame.kappa[0];
    let ln_upper = k1 + s.ln_v;
    let ln_lower = ln_upper + s.dist.ln();
    let ln_lhs = s.ln_wedge - s.ln_gv - s.ln_gv1;
    let ln_max = (0..frame.dim() - 1).map(|i| -frame.gap(i)).fold(f64::NEG_INFINITY, f64::max);
    let ln_rhs = ln_max - s.dist.ln();
    GrowthReport {
        kappa: frame.kappa.clone(),
        norm_gv: s.ln_gv.exp(),
        lower: ln_lower.exp(),
        upper: ln_upper.exp(),
        dist_v_minus: s.dist,
        contraction_lhs: ln_lhs.exp(),
        contraction_rhs: ln_rhs.exp(),
        lower_violated: ln_lower > s.ln_gv + GROWTH_SLACK,
        upper_violated: s.ln_gv > ln_upper + GROWTH_SLACK,
        contraction_violated: ln_lhs > ln_rhs + GROWTH_SLACK,
    }
}

fn require_gap(frame: &CartanFrame) -> Result<()> {
    let gap = frame.gap(0);
    if gap <= 1e-9 {
        return Err(Error::Gap { index: 1, gap });
    }
    Ok(())
}

fn wedge2(a: &[f64], b: &[f64]) -> Vec<f64> {
    k_subsets(a.len(), 2).iter().map(|p| a[p[0]] * b[p[1]] - a[p[1]] * b[p[0]]).collect()
}

fn ln_norm(v: &[f64]) -> f64 {
    norm(v).ln()
}

/// Check on a float matrix.
pub fn check_growth_contraction(g: &Mat, v: &[f64]) -> Result<GrowthReport> {
    if v.len() != g.rows {
        return Err(Error::DimensionMismatch { expected: g.rows, found: v.len() });
    }
    if norm(v) == 0.0 {
        return precondition("v must be nonzero");
    }
    let frame = cartan_projection(g)?;
    require_gap(&frame)?;
    let v1 = frame.right_basis.col(0);
    let w2 = &float_wedges(g)[1];
    let dist = dot(v, &v1).abs() / norm(v);
    let sides = LogSides {
        ln_v: ln_norm(v),
        ln_gv: ln_norm(&g.matvec(v)),
        ln_gv1: ln_norm(&g.matvec(&v1)),
        ln_wedge: ln_norm(&w2.matvec(&wedge2(v, &v1))),
        dist,
    };
    Ok(finish(&frame, sides))
}

/// Exact dyadic integer vector `m` and exponent `e` with `v = m · 2^e`.
fn dyadic(v: &[f64]) -> Result<(Vec<BigInt>, i64)> {
    let rats = v
        .iter()
        .map(|&x| BigRational::from_float(x).ok_or_else(|| Error::Precondition("non-finite entry".into())))
        .collect::<Result<Vec<_>>>()?;
    let e = rats.iter().map(|r| r.denom().bits() as i64 - 1).max().unwrap_or(0);
    let m = rats.iter().map(|r| r.numer() * (BigInt::from(1) << (e - (r.denom().bits() as i64 - 1)) as usize)).collect();
    Ok((m, -e))
}

fn big_matvec(m: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    let d = m.dim();
    (0..d).map(|i| (0..d).fold(BigInt::zero(), |acc, j| acc + m.get(i, j) * &v[j])).collect()
}

fn big_ln_norm(v: &[BigInt], exp2: i64) -> f64 {
    let bits = v.iter().map(|x| x.abs().bits()).max().unwrap_or(0) as i64;
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    let shift = (bits - 60).max(0) as usize;
    let f: Vec<f64> = v.iter().map(|x| (x >> shift).to_f64().unwrap_or(f64::NAN)).collect();
    norm(&f).ln() + (shift as i64 + exp2) as f64 * LN2
}

/// Check on an exact integer matrix. Products `gv`, `g v₁` and
/// `∧²g (v ∧ v₁)` are formed in exact arithmetic from the dyadic values of
/// the float inputs, so the only rounding is in `v₁` and the final logs.
pub fn check_growth_contraction_exact(g: &IntMatrix, v: &[f64]) -> Result<GrowthReport> {
    if v.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: v.len() });
    }
    if norm(v) == 0.0 {
        return precondition("v must be nonzero");
    }
    let frame = cartan_projection_exact(g)?;
    require_gap(&frame)?;
    let v1 = frame.right_basis.col(0);
    let (mv, ev) = dyadic(v)?;
    let (m1, e1) = dyadic(&v1)?;
    let wedge: Vec<BigInt> =
        k_subsets(v.len(), 2).iter().map(|p| &mv[p[0]] * &m1[p[1]] - &mv[p[1]] * &m1[p[0]]).collect();
    let sides = LogSides {
        ln_v: ln_norm(v),
        ln_gv: big_ln_norm(&big_matvec(g, &mv), ev),
        ln_gv1: big_ln_norm(&big_matvec(g, &m1), e1),
        ln_wedge: big_ln_norm(&big_matvec(&g.wedge(2), &wedge), ev + e1),
        dist: dot(v, &v1).abs() / (norm(v) * norm(&v1)),
    };
    Ok(finish(&frame, sides))
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GrowthSweep {
    pub samples: usize,
    pub checked: usize,
    pub no_gap: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub contraction_violations: usize,
}

impl GrowthSweep {
    pub fn violations(&self) -> usize {
        self.lower_violations + self.upper_violations + self.contraction_violations
    }
}

/// Draws `samples` pairs `(g, v)`: `g` a product of a uniform number in
/// `1..=max_len` of random letters, `v` uniform on the unit sphere. Products
/// without a gap are counted in `no_gap` and not checked.
pub fn growth_contraction_sweep(cfg: &WalkConfig, samples: usize, max_len: usize, seed: u64) -> Result<GrowthSweep> {
    if max_len == 0 {
        return precondition("max_len must be positive");
    }
    let outcomes: Vec<Result<Option<GrowthReport>>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let len = rng.random_range(1..=max_len);
            let w: Word = cfg.sample_word(&mut rng, len);
            let v: Vec<f64> = (0..cfg.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let nv = norm(&v);
            let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
            let g = word_product(&w, cfg)?;
            match check_growth_contraction_exact(&g.matrix, &v) {
                Ok(r) => Ok(Some(r)),
                Err(Error::Gap { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut sweep = GrowthSweep { samples, ..Default::default() };
    for o in outcomes {
        match o? {
            None => sweep.no_gap += 1,
            Some(r) => {
                sweep.checked += 1;
                sweep.lower_violations += r.lower_violated as usize;
                sweep.upper_violations += r.upper_violated as usize;
                sweep.contraction_violations += r.contraction_violated as usize;
            }
        }
    }
    Ok(sweep)
}
