//! Monte Carlo for the joint local limit of `(ω(σ(b₁ ⋯ b_n, ξ)), χ(b₁ ⋯ b_n))`
//! in dimension 2.

use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::{lookahead_flag, Flag};
use crate::error::{precondition, Result};
use crate::model::WalkConfig;
use crate::rng::{derive_seed, replica_rng};
use crate::stats::wilson;

pub const JOINT_N_CAP: usize = 400;

#[derive(Clone, Debug, Serialize)]
pub struct JointRow {
    pub n: usize,
    pub p_hat: f64,
    /// `n · p̂_n` (the scaling `n^{(l+1)/2}` with `l = 1`).
    pub scaled: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Set when the 95% half-width exceeds 10% of the estimate.
    pub wide_ci: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct JointLlt {
    pub rows: Vec<JointRow>,
    pub lambda_hat: f64,
    pub u_window: (f64, f64),
    pub i_window: (f64, f64),
    pub n_cap: usize,
}

impl JointLlt {
    /// `(max − min) / min` of the scaled values over the given rows.
    pub fn variation(&self, ns: &[usize]) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| ns.contains(&r.n)).map(|r| r.scaled).collect();
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / lo
    }
}

/// A flag in the support of the flag stationary measure: the lookahead limit
/// of a long random word.
pub fn stationary_flag(cfg: &WalkConfig, seed: u64) -> Result<Flag> {
    let mut rng = replica_rng(derive_seed(seed, 0xF1A6), 0);
    let w = cfg.sample_word(&mut rng, 200);
    lookahead_flag(cfg, &w.letters)
}

/// Estimates `p_n = P(ω(σ(b₁ ⋯ b_n, ξ)) − n λ̂ ∈ U, χ(b₁ ⋯ b_n) ∈ I)`.
///
/// `ω(σ(g, ξ)) = ln ‖g w‖` for a unit `w` spanning the line of `ξ`. Each
/// replica builds `a_n ⋯ a₁ w` by applying fresh letters on the left, which
/// has the law of `b₁ ⋯ b_n w`, and tests every `n` in `n_list` on one path.
#[allow(clippy::too_many_arguments)]
pub fn joint_llt_estimate(
    cfg: &WalkConfig,
    u_window: (f64, f64),
    i_window: (f64, f64),
    n_list: &[usize],
    replicas: usize,
    seed: u64,
    lambda_hat: f64,
    xi: &Flag,
) -> Result<JointLlt> {
    if cfg.dim != 2 {
        return precondition("the joint local limit is implemented for d = 2");
    }
    if n_list.is_empty() || replicas == 0 {
        return precondition("need n values and replicas");
    }
    if n_list.iter().any(|&n| n > JOINT_N_CAP) {
        return precondition(format!("n is capped at {JOINT_N_CAP} for a frozen centering"));
    }
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let nmax = *ns.last().unwrap_or(&0);
    let w0 = xi.line();
    let mats: Vec<[f64; 4]> = (0..cfg.num_generators())
        .map(|l| {
            let m = cfg.float_matrix(l);
            [m[0], m[1], m[2], m[3]]
        })
        .collect();
    let chis: Vec<f64> = (0..cfg.num_generators()).map(|l| cfg.chi(l)).collect();
    let inside = |v: f64, w: (f64, f64)| v >= w.0 && v <= w.1;
    let hits: Vec<Vec<bool>> = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let (mut x, mut y) = (w0[0], w0[1]);
            let mut log_scale = 0.0;
            let mut chi = 0.0;
            let mut out = Vec::with_capacity(ns.len());
            let mut next = 0;
            for step in 1..=nmax {
                let l = cfg.sample_letter(&mut rng);
                let m = &mats[l];
                let (nx, ny) = (m[0] * x + m[1] * y, m[2] * x + m[3] * y);
                x = nx;
                y = ny;
                chi += chis[l];
                let size = x.abs().max(y.abs());
                if size > 1e100 {
                    x /= size;
                    y /= size;
                    log_scale += size.ln();
                }
                if step == ns[next] {
                    let omega = x.hypot(y).ln() + log_scale;
                    out.push(inside(omega - step as f64 * lambda_hat, u_window) && inside(chi, i_window));
                    next += 1;
                }
            }
            out
        })
        .collect();
    let rows = ns
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let s = hits.iter().filter(|h| h[i]).count() as u64;
            let (p_hat, lo, hi) = wilson(s, replicas as u64);
            let scaled = n as f64 * p_hat;
            JointRow {
                n,
                p_hat,
                scaled,
                ci_lo: n as f64 * lo,
                ci_hi: n as f64 * hi,
                wide_ci: p_hat == 0.0 || (hi - lo) / 2.0 > 0.1 * p_hat,
            }
        })
        .collect();
    Ok(JointLlt { rows, lambda_hat, u_window, i_window, n_cap: JOINT_N_CAP })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_windows_and_disjoint_lattice_window() {
        let cfg = WalkConfig::reference();
        let xi = stationary_flag(&cfg, 1).unwrap();
        let all = (f64::NEG_INFINITY, f64::INFINITY);
        let r = joint_llt_estimate(&cfg, all, all, &[10, 20], 200, 2, 0.3, &xi).unwrap();
        assert!(r.rows.iter().all(|row| row.p_hat == 1.0 && row.scaled == row.n as f64));
        let r = joint_llt_estimate(&cfg, all, (0.2, 0.8), &[10, 20], 200, 2, 0.3, &xi).unwrap();
        assert!(r.rows.iter().all(|row| row.p_hat == 0.0));
    }

    #[test]
    fn matches_cocycle_definition() {
        use crate::cartan::cocycle_of_letters;
        let cfg = WalkConfig::reference();
        let xi = stationary_flag(&cfg, 1).unwrap();
        let letters = [0, 2, 2, 1, 3, 0, 2];
        let (_, sigma) = cocycle_of_letters(&cfg, &letters, &xi).unwrap();
        let w = xi.line();
        let mut v = w.clone();
        for &l in letters.iter().rev() {
            let m = cfg.float_matrix(l);
            v = vec![m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]];
        }
        assert!((v[0].hypot(v[1]).ln() - sigma[0]).abs() < 1e-12);
    }
}
