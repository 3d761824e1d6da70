use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::model::{float_apply, torus_distance, StateXT, WalkConfig};
use crate::rng::replica_rng;
use crate::stats::wilson;

#[derive(Clone, Debug, Serialize)]
pub struct ReturnFraction {
    pub horizon: u64,
    pub fraction: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Fraction of `replicas` trajectories that re-enter the ball of `radius`
/// around `start` (product metric on `T^d × R`) at some step `1 ≤ n ≤ h`,
/// for each horizon `h`.
pub fn conservativity_check(
    cfg: &WalkConfig,
    start: &StateXT,
    radius: f64,
    horizons: &[u64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<ReturnFraction>> {
    if !(radius > 0.0) {
        return precondition("radius must be positive");
    }
    if start.x.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, found: start.x.dim() });
    }
    let hmax = horizons.iter().copied().max().unwrap_or(0);
    let x0 = start.x.to_f64();
    let firsts: Vec<u64> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let mut x = x0.clone();
            let mut y = x0.clone();
            let mut t = start.t;
            for n in 1..=hmax {
                let l = cfg.sample_letter(&mut rng);
                float_apply(cfg.float_matrix(l), &x, &mut y);
                std::mem::swap(&mut x, &mut y);
                t += cfg.chi(l);
                let dx = torus_distance(&x, &x0);
                if (dx * dx + (t - start.t).powi(2)).sqrt() <= radius {
                    return n;
                }
            }
            u64::MAX
        })
        .collect();
    Ok(horizons
        .iter()
        .map(|&h| {
            let hits = firsts.iter().filter(|&&f| f <= h).count() as u64;
            let (fraction, ci_lo, ci_hi) = wilson(hits, replicas as u64);
            ReturnFraction { horizon: h, fraction, ci_lo, ci_hi }
        })
        .collect())
}
