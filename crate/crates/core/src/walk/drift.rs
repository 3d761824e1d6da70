//! Monte Carlo certificate of the drift inequality `P^k u ≤ a u + C` for the
//! induced walk, with `u(x) = d(x, 0)^{−δ}` on a grid of exact dyadic points.
//!
//! Every grid point has denominator `2^bits`. The action is invertible on
//! such points, so a sampled image is never 0 and `u ≤ 2^{bits·δ}`; a
//! censored return is scored with that bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Result};
use crate::model::WalkConfig;
use crate::rng::{derive_seed, replica_rng};
use crate::stats::{mean_ci, Z95};

use super::stepper::DyadicTorus;

#[derive(Clone, Debug, Serialize)]
pub struct GridSpec {
    pub points: usize,
    /// Smallest distance is `2^{−min_log2}`.
    pub min_log2: u32,
    pub bits: u32,
    /// Points at distance at least this determine `C`.
    pub far_radius: f64,
    pub cap: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 64, min_log2: 90, bits: 100, far_radius: 0.25, cap: super::returns::DEFAULT_CAP }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridPoint {
    pub index: usize,
    #[serde(skip)]
    pub numerators: Vec<u128>,
    pub coords: Vec<f64>,
    pub distance: f64,
}

/// Distances log-spaced from `2^{−min_log2}` to `½√d`. Directions rotate with
/// the index; coordinates are clipped to `[−½, ½]` so that the given lift is
/// the nearest one.
pub fn drift_grid(spec: &GridSpec, dim: usize, stepper: &DyadicTorus) -> Vec<GridPoint> {
    let lo = (-(spec.min_log2 as f64) * std::f64::consts::LN_2).exp();
    let hi = 0.5 * (dim as f64).sqrt();
    (0..spec.points)
        .map(|i| {
            let frac = if spec.points > 1 { i as f64 / (spec.points - 1) as f64 } else { 1.0 };
            let r = lo * (hi / lo).powf(frac);
            let dir: Vec<f64> = if r > 0.5 {
                // only directions near the diagonal reach these distances
                vec![1.0; dim]
            } else {
                (0..dim).map(|j| (0.7 + 1.3 * i as f64 + 2.1 * j as f64).cos()).collect()
            };
            let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let coords: Vec<f64> = dir.iter().map(|v| (r * v / n).clamp(-0.5, 0.5)).collect();
            let numerators = stepper.from_f64(&coords);
            let distance = stepper.distance_to_zero(&numerators);
            GridPoint { index: i, coords: stepper.to_f64(&numerators), numerators, distance }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PointEstimate {
    pub index: usize,
    pub distance: f64,
    pub u_value: f64,
    pub estimate: f64,
    pub ucb: f64,
    pub censored: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub delta: f64,
    pub k: usize,
    pub a: f64,
    pub c: f64,
    pub confidence: f64,
    pub points: Vec<PointEstimate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub delta: f64,
    pub k: usize,
    pub a: f64,
    pub c: f64,
    /// Points with `(ucb − C)/u ≥ 1`.
    pub violating: Vec<usize>,
    pub points: Vec<PointEstimate>,
}

#[derive(Clone, Debug, Serialize)]
pub enum DriftOutcome {
    Certificate(Certificate),
    Failure(Failure),
}

impl DriftOutcome {
    pub fn a(&self) -> f64 {
        match self {
            Self::Certificate(c) => c.a,
            Self::Failure(f) => f.a,
        }
    }

    pub fn points(&self) -> &[PointEstimate] {
        match self {
            Self::Certificate(c) => &c.points,
            Self::Failure(f) => &f.points,
        }
    }
}

/// `u` after `k` first returns from numerators `x`, or `None` if a return
/// exceeded the cap.
fn k_returns<R: rand::Rng>(
    cfg: &WalkConfig,
    chi: &[i64],
    stepper: &DyadicTorus,
    x: &mut [u128],
    k: usize,
    cap: u64,
    rng: &mut R,
) -> Option<()> {
    let mut scratch = vec![0u128; x.len()];
    for _ in 0..k {
        let mut s = 0i64;
        let mut returned = false;
        for _ in 0..cap {
            let l = cfg.sample_letter(rng);
            stepper.step(l, x, &mut scratch);
            s += chi[l];
            if s == 0 {
                returned = true;
                break;
            }
        }
        if !returned {
            return None;
        }
    }
    Some(())
}

/// One certification attempt at fixed `k`.
pub fn drift_certify(
    cfg: &WalkConfig,
    delta: f64,
    k: usize,
    grid: &GridSpec,
    samples: usize,
    seed: u64,
) -> Result<DriftOutcome> {
    if !(delta > 0.0) {
        return precondition("delta must be positive");
    }
    if k == 0 || samples < 2 {
        return precondition("need k >= 1 and at least two samples per point");
    }
    let chi = cfg.require_int_chi()?;
    let stepper = DyadicTorus::new(cfg, grid.bits)?;
    let u_max = 2f64.powf(grid.bits as f64 * delta);
    let u = |d: f64| d.powf(-delta);
    let points = drift_grid(grid, cfg.dim, &stepper);
    let tasks: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..samples).map(move |s| (p, s))).collect();
    let values: Vec<Option<f64>> = tasks
        .par_iter()
        .map(|&(p, s)| {
            let mut rng = replica_rng(seed, ((p as u64) << 32) | s as u64);
            let mut x = points[p].numerators.clone();
            k_returns(cfg, chi, &stepper, &mut x, k, grid.cap, &mut rng).map(|_| u(stepper.distance_to_zero(&x)))
        })
        .collect();
    let estimates: Vec<PointEstimate> = points
        .iter()
        .enumerate()
        .map(|(p, gp)| {
            let chunk = &values[p * samples..(p + 1) * samples];
            let vals: Vec<f64> = chunk.iter().map(|v| v.unwrap_or(u_max)).collect();
            let ci = mean_ci(&vals);
            PointEstimate {
                index: gp.index,
                distance: gp.distance,
                u_value: u(gp.distance),
                estimate: ci.mean,
                ucb: ci.mean + Z95 * ci.std_dev / (samples as f64).sqrt(),
                censored: chunk.iter().filter(|v| v.is_none()).count(),
            }
        })
        .collect();
    Ok(fit(delta, k, grid.far_radius, estimates))
}

/// `C` is the largest upper bound over the far points; `a` is then the least
/// slope with every `ucb ≤ a u + C`.
fn fit(delta: f64, k: usize, far_radius: f64, points: Vec<PointEstimate>) -> DriftOutcome {
    let c = points.iter().filter(|p| p.distance >= far_radius).map(|p| p.ucb).fold(f64::NEG_INFINITY, f64::max);
    let c = if c.is_finite() { c } else { 0.0 };
    let slope = |p: &PointEstimate| (p.ucb - c) / p.u_value;
    let a = points.iter().map(slope).fold(0.0, f64::max);
    if a < 1.0 {
        DriftOutcome::Certificate(Certificate { delta, k, a, c, confidence: 0.95, points })
    } else {
        let violating = points.iter().filter(|p| slope(p) >= 1.0).map(|p| p.index).collect();
        DriftOutcome::Failure(Failure { delta, k, a, c, violating, points })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftSearch {
    /// `(k, a)` for every attempt in order.
    pub attempts: Vec<(usize, f64)>,
    pub outcome: DriftOutcome,
}

/// Tries `k = 1..=k_max` until a certificate with `a ≤ target` is found.
/// Each `k` uses its own derived seed.
pub fn drift_certify_search(
    cfg: &WalkConfig,
    delta: f64,
    k_max: usize,
    target: f64,
    grid: &GridSpec,
    samples: usize,
    seed: u64,
) -> Result<DriftSearch> {
    if k_max == 0 {
        return precondition("k_max must be positive");
    }
    let mut attempts = Vec::new();
    let mut last = None;
    for k in 1..=k_max {
        let out = drift_certify(cfg, delta, k, grid, samples, derive_seed(seed, k as u64))?;
        attempts.push((k, out.a()));
        let done = matches!(&out, DriftOutcome::Certificate(c) if c.a <= target);
        last = Some(out);
        if done {
            break;
        }
    }
    Ok(DriftSearch { attempts, outcome: last.expect("k_max >= 1") })
}
