//! Exponential drift: a small displacement `u` of the base point, pulled back
//! along `b` and pushed forward along a fiber word `a`, grows to unit scale and
//! lines up with `ξ⁺` of the `a`-product.

use num_bigint::BigInt;
use num_traits::{Float, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::linalg::dot;
use crate::cartan::{omega, theta_n, LogVector, ProductTracker, WedgeTable};
use crate::error::{precondition, Result};
use crate::model::{word_product, WalkConfig, Word};
use crate::rng::{derive_seed, replica_rng};
use crate::stats::{linear_fit, quantile_sorted};

use super::base::{window_conditional_sample, BasePoint, FiberContext, WindowSpec};

/// Linearization bound on every intermediate `‖w_k‖`.
pub const WRAP_BOUND: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct DriftParams {
    /// Norm of the first direction; later directions are log-spaced below it.
    pub u_norm: f64,
    pub directions: usize,
    /// Decades spanned by the direction norms.
    pub decades: f64,
    pub per_direction: usize,
    pub eps1: f64,
    pub eps2: f64,
    pub max_n: usize,
    pub lookahead: usize,
    /// Draw budget per direction.
    pub budget: u64,
    pub pilot_directions: usize,
    pub pilot_per_direction: usize,
}

impl Default for DriftParams {
    fn default() -> Self {
        Self {
            u_norm: 1e-6,
            directions: 32,
            decades: 12.0,
            per_direction: 200,
            eps1: 0.01,
            eps2: 0.2,
            max_n: 80,
            lookahead: 200,
            budget: 2_000_000,
            pilot_directions: 8,
            pilot_per_direction: 100,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftRecord {
    pub direction: usize,
    pub n_p: usize,
    pub u_norm: f64,
    pub du_norm: f64,
    /// `ε₁ ≤ ‖D u‖ ≤ ε₂`.
    pub in_norm_window: bool,
    /// `ln ‖D u‖ − ω(θ_{n_p}(b)) − ln ‖w_{n_p}‖`.
    pub log_ratio: f64,
    /// Distance from the line of `D u` to `ξ⁺` of `a₁ ⋯ a_{n_p}`.
    pub ang_dist: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionAbort {
    pub direction: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftDemo {
    /// Norm-control constant calibrated on the pilot run.
    pub c_const: f64,
    pub pilot_samples: usize,
    pub records: Vec<DriftRecord>,
    pub aborted: Vec<DirectionAbort>,
    /// Fraction of records with `|log_ratio| ≤ ln C`.
    pub within_fraction: f64,
    /// `−slope` of `ln ang_dist` against `n_p`.
    pub delta_hat: Option<f64>,
    pub n_p_min: usize,
    pub n_p_max: usize,
}

/// `a₁ ⋯ a_n · w`, applying `a_n` first.
pub fn transport_word(cfg: &WalkConfig, a: &Word, w: &LogVector) -> Result<LogVector> {
    let mut v = w.clone();
    for &l in a.letters.iter().rev() {
        v.apply(cfg.float_matrix(l))?;
    }
    Ok(v)
}

/// `w_n = b_n^{-1} ⋯ b₁^{-1} u`, applying `b₁^{-1}` first.
pub fn pull_back(cfg: &WalkConfig, b: &Word, u: &LogVector) -> Result<LogVector> {
    let mut v = u.clone();
    for &l in &b.letters {
        v.apply(cfg.float_inverse(l))?;
    }
    Ok(v)
}

/// `D u = a₁ ⋯ a_n b_n^{-1} ⋯ b₁^{-1} u` with `D` an exact integer matrix and
/// `u` read as an exact dyadic vector; only the final result is rounded.
pub fn exact_drift(cfg: &WalkConfig, a: &Word, b: &Word, u: &[f64]) -> Result<Vec<f64>> {
    let d = cfg.dim;
    if u.len() != d {
        return precondition("vector dimension does not match the model");
    }
    let pa = word_product(a, cfg)?.matrix;
    let pb = word_product(b, cfg)?.matrix.inverse_unimodular()?;
    let m = pa.mul(&pb)?;
    let parts: Vec<(u64, i16, i8)> = u.iter().map(|x| x.integer_decode()).collect();
    let emin = parts.iter().filter(|p| p.0 != 0).map(|p| p.1).min().unwrap_or(0) as i64;
    let ints: Vec<BigInt> = parts
        .iter()
        .map(|&(mant, e, s)| {
            if mant == 0 {
                BigInt::zero()
            } else {
                (BigInt::from(mant) * i64::from(s)) << ((e as i64 - emin) as usize)
            }
        })
        .collect();
    Ok((0..d)
        .map(|i| {
            let r: BigInt = (0..d).map(|j| m.get(i, j) * &ints[j]).sum();
            scaled_to_f64(&r, emin)
        })
        .collect())
}

/// `r · 2^exp` rounded to f64.
fn scaled_to_f64(r: &BigInt, exp: i64) -> f64 {
    let bits = r.bits() as i64;
    let shift = (bits - 62).max(0);
    let top = (r >> (shift as usize)).to_f64().unwrap_or(0.0);
    let e = exp + shift;
    let half = (e / 2) as i32;
    top * 2f64.powi(half) * 2f64.powi((e - half as i64) as i32)
}

/// Distance from the line of `A w` to `ξ⁺_A`, from the Cartan frame of `A`:
/// `tan∠ = ‖Σ_{i≥2} e^{κ_i} ⟨w, v_i⟩ e_i‖ / (e^{κ₁} |⟨w, v₁⟩|)`. Stays accurate
/// far below the float resolution of the raw product.
pub fn angle_to_top(table: &WedgeTable, a: &Word, w_dir: &[f64]) -> Result<f64> {
    let mut p = ProductTracker::new(table);
    p.push_word(a);
    let f = p.frame()?;
    let c0 = dot(w_dir, &f.right_basis.col(0));
    let rest: f64 = (1..f.dim())
        .map(|i| {
            let c = dot(w_dir, &f.right_basis.col(i));
            ((f.kappa[i] - f.kappa[0]).exp() * c).powi(2)
        })
        .sum();
    Ok((rest / (c0 * c0 + rest)).sqrt())
}

fn random_direction(dim: usize, seed: u64, j: u64) -> Vec<f64> {
    let mut rng = replica_rng(seed, j);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

struct Pass {
    records: Vec<DriftRecord>,
    aborted: Vec<DirectionAbort>,
}

#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn run_pass(
    cfg: &WalkConfig,
    c: &BasePoint,
    w: &WindowSpec,
    p: &DriftParams,
    omegas: &[f64],
    directions: usize,
    per_direction: usize,
    log_c: f64,
    seed: u64,
) -> Result<Pass> {
    let table = WedgeTable::new(cfg);
    let mut records = Vec::new();
    let mut aborted = Vec::new();
    let dir_seed = derive_seed(seed, 0xD1);
    for j in 0..directions {
        let frac = if directions > 1 { j as f64 / (directions - 1) as f64 } else { 0.0 };
        let norm = p.u_norm * 10f64.powf(-p.decades * frac);
        let u: Vec<f64> = random_direction(cfg.dim, dir_seed, j as u64).iter().map(|x| x * norm).collect();
        let mut wk = LogVector::from_vec(&u)?;
        let mut n_p = None;
        let mut wrap = None;
        for k in 1..=p.max_n {
            wk.apply(cfg.float_inverse(c.b_word.letters[k - 1]))?;
            if wk.log_norm >= WRAP_BOUND.ln() {
                wrap = Some(k);
                break;
            }
            if omegas[k] + wk.log_norm - log_c > p.eps1.ln() {
                n_p = Some(k);
                break;
            }
        }
        let n_p = match (n_p, wrap) {
            (Some(n), _) => n,
            (None, Some(k)) => {
                aborted.push(DirectionAbort { direction: j, reason: format!("‖w_{k}‖ reached {WRAP_BOUND}") });
                continue;
            }
            (None, None) => {
                aborted.push(DirectionAbort { direction: j, reason: format!("no crossing of ε₁ up to n = {}", p.max_n) });
                continue;
            }
        };
        let ctx = FiberContext::new(cfg, c, n_p, p.lookahead)?;
        let sample = window_conditional_sample(&ctx, w, per_direction, derive_seed(seed, 0xD200 + j as u64), p.budget)?;
        if sample.exhausted {
            aborted.push(DirectionAbort {
                direction: j,
                reason: format!("budget exhausted with {} accepted", sample.accepted),
            });
        }
        let rows: Vec<DriftRecord> = sample
            .samples
            .par_iter()
            .map(|s| {
                let du = transport_word(cfg, &s.a_word, &wk)?;
                let ang_dist = angle_to_top(&table, &s.a_word, &wk.direction)?;
                let du_norm = du.log_norm.exp();
                Ok(DriftRecord {
                    direction: j,
                    n_p,
                    u_norm: norm,
                    du_norm,
                    in_norm_window: p.eps1 <= du_norm && du_norm <= p.eps2,
                    log_ratio: du.log_norm - omegas[n_p] - wk.log_norm,
                    ang_dist,
                })
            })
            .collect::<Result<_>>()?;
        records.extend(rows);
    }
    Ok(Pass { records, aborted })
}

/// Runs the pilot calibration of `C` and then the main experiment.
pub fn drift_demo(cfg: &WalkConfig, c: &BasePoint, w: &WindowSpec, p: &DriftParams, seed: u64) -> Result<DriftDemo> {
    if !(p.u_norm > 0.0 && p.u_norm <= 1e-4) {
        return precondition("u_norm must lie in (0, 1e-4]");
    }
    if !(p.eps1 > 0.0 && p.eps1 < p.eps2) {
        return precondition("need 0 < eps1 < eps2");
    }
    c.require_len(p.max_n, p.lookahead)?;
    let mut omegas = vec![0.0; p.max_n + 1];
    for (k, o) in omegas.iter_mut().enumerate().skip(1) {
        *o = omega(&theta_n(cfg, &c.b_word, k, p.lookahead)?);
    }

    let pilot = run_pass(cfg, c, w, p, &omegas, p.pilot_directions, p.pilot_per_direction, 0.0, derive_seed(seed, 0xCA11))?;
    if pilot.records.is_empty() {
        return precondition("pilot run produced no samples");
    }
    let mut abs: Vec<f64> = pilot.records.iter().map(|r| r.log_ratio.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let log_c = quantile_sorted(&abs, 0.95);

    let main = run_pass(cfg, c, w, p, &omegas, p.directions, p.per_direction, log_c, seed)?;
    let records = main.records;
    let within = records.iter().filter(|r| r.log_ratio.abs() <= log_c).count();
    let within_fraction = if records.is_empty() { f64::NAN } else { within as f64 / records.len() as f64 };
    let xs: Vec<f64> = records.iter().map(|r| r.n_p as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.ang_dist.max(f64::MIN_POSITIVE).ln()).collect();
    let delta_hat = linear_fit(&xs, &ys).map(|(s, _)| -s);
    Ok(DriftDemo {
        c_const: log_c.exp(),
        pilot_samples: pilot.records.len(),
        n_p_min: records.iter().map(|r| r.n_p).min().unwrap_or(0),
        n_p_max: records.iter().map(|r| r.n_p).max().unwrap_or(0),
        records,
        aborted: main.aborted,
        within_fraction,
        delta_hat,
    })
}
