//! First returns of the χ-coordinate to 0: the induced walk `μ_τ`, its
//! survival curve and the heavy tail of `log ‖b₁ ⋯ b_τ‖`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::{ProductTracker, WedgeTable};
use crate::error::{precondition, Result};
use crate::model::{WalkConfig, Word};
use crate::rng::replica_rng;
use crate::stats::{linear_fit, log_grid, quantile_sorted, wilson};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// One draw of `μ_τ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnSample {
    pub tau: u64,
    pub word: Word,
    /// `ln ‖b₁ ⋯ b_τ‖`.
    pub log_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ReturnOutcome {
    Returned(ReturnSample),
    /// No return within the cap.
    Censored(u64),
}

fn require_discrete(cfg: &WalkConfig) -> Result<&[i64]> {
    cfg.require_int_chi()
}

fn require_nondegenerate(cfg: &WalkConfig) -> Result<()> {
    if cfg.require_int_chi()?.iter().zip(&cfg.probs).all(|(&c, &p)| c == 0 || p == 0.0) {
        return precondition("chi vanishes identically: every return time is 1");
    }
    Ok(())
}

/// Draws letters from `rng` (after the forced `prefix`) until the cumulative
/// χ returns to 0 or `cap` letters have been used.
pub fn sample_first_return<R: Rng + ?Sized>(
    cfg: &WalkConfig,
    table: &WedgeTable,
    rng: &mut R,
    cap: u64,
    prefix: &[usize],
) -> Result<ReturnOutcome> {
    let chi = require_discrete(cfg)?;
    cfg.check_word(&Word::new(prefix.to_vec()))?;
    let mut tracker = ProductTracker::new(table);
    let mut letters = Vec::new();
    let mut s = 0i64;
    let mut forced = prefix.iter();
    for step in 1..=cap {
        let l = match forced.next() {
            Some(&l) => l,
            None => cfg.sample_letter(rng),
        };
        letters.push(l);
        tracker.push(l);
        s += chi[l];
        if s == 0 {
            return Ok(ReturnOutcome::Returned(ReturnSample {
                tau: step,
                word: Word::new(letters),
                log_norm: tracker.log_norm(),
            }));
        }
    }
    Ok(ReturnOutcome::Censored(cap))
}

/// One draw of `μ_τ` from the stream `(seed, 0)`.
pub fn first_return_sampler(cfg: &WalkConfig, seed: u64, cap: u64) -> Result<ReturnOutcome> {
    let table = WedgeTable::new(cfg);
    sample_first_return(cfg, &table, &mut replica_rng(seed, 0), cap, &[])
}

/// Return time only (no matrices). `None` when censored.
#[inline]
pub fn return_time<R: Rng + ?Sized>(cfg: &WalkConfig, chi: &[i64], rng: &mut R, cap: u64) -> Option<u64> {
    let mut s = 0i64;
    for step in 1..=cap {
        s += chi[cfg.sample_letter(rng)];
        if s == 0 {
            return Some(step);
        }
    }
    None
}

/// `ln ‖b₁ ⋯ b_τ‖` only. `None` when censored.
pub fn return_log_norm<R: Rng + ?Sized>(
    cfg: &WalkConfig,
    chi: &[i64],
    table: &WedgeTable,
    rng: &mut R,
    cap: u64,
) -> Option<(u64, f64)> {
    let mut tracker = ProductTracker::new(table);
    let mut s = 0i64;
    for step in 1..=cap {
        let l = cfg.sample_letter(rng);
        tracker.push(l);
        s += chi[l];
        if s == 0 {
            return Some((step, tracker.log_norm()));
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct TailRow {
    pub k: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnTail {
    pub rows: Vec<TailRow>,
    pub samples: usize,
    pub censored: usize,
    pub cap: u64,
    pub fit_window: (u64, u64),
    /// Least-squares slope of `ln P(τ ≥ k)` against `ln k` over the window.
    pub slope: Option<f64>,
}

/// Estimated survival `P(τ ≥ k)` on `k = 1..20` and a log grid up to `kmax`.
/// Censored draws count as surviving every `k ≤ cap + 1`.
pub fn return_tail(
    cfg: &WalkConfig,
    kmax: u64,
    samples: usize,
    seed: u64,
    cap: u64,
    fit_window: (u64, u64),
) -> Result<ReturnTail> {
    let chi = require_discrete(cfg)?;
    require_nondegenerate(cfg)?;
    if samples < 1000 {
        return precondition("return_tail needs N >= 1000");
    }
    if kmax == 0 || kmax > cap {
        return precondition("kmax must be in 1..=cap");
    }
    let mut taus: Vec<u64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| return_time(cfg, chi, &mut replica_rng(seed, i), cap).unwrap_or(u64::MAX))
        .collect();
    taus.sort_unstable();
    let censored = taus.iter().filter(|&&t| t == u64::MAX).count();
    let mut ks: Vec<u64> = (1..=20.min(kmax)).collect();
    if kmax > 20 {
        ks.extend(log_grid(20, kmax, 20).into_iter().filter(|&k| k > 20));
    }
    let n = samples as u64;
    let rows: Vec<TailRow> = ks
        .iter()
        .map(|&k| {
            let surv = (samples - taus.partition_point(|&t| t < k)) as u64;
            let (p_hat, ci_lo, ci_hi) = wilson(surv, n);
            TailRow { k, p_hat, ci_lo, ci_hi }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.k >= fit_window.0 && r.k <= fit_window.1 && r.p_hat > 0.0)
        .map(|r| ((r.k as f64).ln(), r.p_hat.ln()))
        .unzip();
    let slope = linear_fit(&xs, &ys).map(|(s, _)| s);
    Ok(ReturnTail { rows, samples, censored, cap, fit_window, slope })
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyTailRow {
    pub n: usize,
    /// Mean of the first `n` log-norms winsorized at their `1 − n^{−1/2}` quantile.
    pub truncated_mean: f64,
    pub level: f64,
    pub censored: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyTail {
    pub rows: Vec<HeavyTailRow>,
    /// `α̂` with `P(log_norm > s) ≈ c s^{−α̂}`.
    pub tail_exponent: Option<f64>,
    pub censored: usize,
    pub cap: u64,
}

/// Winsorized mean at the `1 − n^{−1/2}` empirical quantile. Censored
/// samples (`+∞`) are clipped like any other large value.
pub fn truncated_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let level = quantile_sorted(&sorted, 1.0 - 1.0 / (n as f64).sqrt());
    let mean = values.iter().map(|v| v.min(level)).sum::<f64>() / n as f64;
    (mean, level)
}

/// Fits the tail exponent of `values` (censored = `+∞`) between survival
/// levels `200/N` and `0.05`.
pub fn tail_exponent(values: &[f64]) -> Option<f64> {
    let n = values.len() as f64;
    let p_hi = 0.05;
    let p_lo = 200.0 / n;
    if p_lo >= p_hi {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let points = 20;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for j in 0..points {
        let p = p_hi * (p_lo / p_hi).powf(j as f64 / (points - 1) as f64);
        let s = quantile_sorted(&sorted, 1.0 - p);
        if s.is_finite() && s > 0.0 {
            xs.push(s.ln());
            ys.push(p.ln());
        }
    }
    linear_fit(&xs, &ys).map(|(slope, _)| -slope)
}

/// Truncated means of `ln ‖b₁ ⋯ b_τ‖` over the first `n` draws for each `n`
/// in `n_list`, and the fitted tail exponent over all draws.
pub fn heavy_tail_diagnostic(cfg: &WalkConfig, n_list: &[usize], seed: u64, cap: u64) -> Result<HeavyTail> {
    let chi = require_discrete(cfg)?;
    require_nondegenerate(cfg)?;
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return precondition("N_list must be positive and increasing");
    }
    let nmax = *n_list.last().unwrap_or(&0);
    let table = WedgeTable::new(cfg);
    let values: Vec<f64> = (0..nmax as u64)
        .into_par_iter()
        .map(|i| {
            return_log_norm(cfg, chi, &table, &mut replica_rng(seed, i), cap).map_or(f64::INFINITY, |(_, l)| l)
        })
        .collect();
    let rows = n_list
        .iter()
        .map(|&n| {
            let head = &values[..n];
            let (truncated_mean, level) = truncated_mean(head);
            HeavyTailRow { n, truncated_mean, level, censored: head.iter().filter(|v| v.is_infinite()).count() }
        })
        .collect();
    Ok(HeavyTail {
        rows,
        tail_exponent: tail_exponent(&values),
        censored: values.iter().filter(|v| v.is_infinite()).count(),
        cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_letter_with_cap_one_is_censored() {
        let cfg = WalkConfig::reference();
        let table = WedgeTable::new(&cfg);
        let out = sample_first_return(&cfg, &table, &mut replica_rng(1, 0), 1, &[2]).unwrap();
        assert_eq!(out, ReturnOutcome::Censored(1));
    }

    #[test]
    fn samples_have_zero_chi() {
        let cfg = WalkConfig::reference();
        for seed in 0..50 {
            if let ReturnOutcome::Returned(s) = first_return_sampler(&cfg, seed, 10_000).unwrap() {
                assert!(s.tau >= 1 && s.tau as usize == s.word.len());
                assert_eq!(crate::model::chi_of_word(&s.word, &cfg), 0.0);
            }
        }
    }

    #[test]
    fn survival_starts_at_one_and_decreases() {
        let t = return_tail(&WalkConfig::reference(), 200, 2000, 3, 10_000, (10, 200)).unwrap();
        assert_eq!(t.rows[0].p_hat, 1.0);
        assert!(t.rows.windows(2).all(|w| w[1].p_hat <= w[0].p_hat));
    }

    #[test]
    fn zero_chi_rejected() {
        let one = num_rational::BigRational::from_integer(1.into());
        let cfg = WalkConfig::new("flat", &[vec![vec![1, 1], vec![0, 1]]], &[one], &[0.0], 1).unwrap();
        assert!(return_tail(&cfg, 100, 1000, 1, 1000, (1, 100)).is_err());
    }

    #[test]
    fn single_sample_mean_is_the_sample() {
        assert_eq!(truncated_mean(&[3.25]).0, 3.25);
    }
}
