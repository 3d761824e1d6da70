//! Monte Carlo estimates of the top Lyapunov exponent and of the convergence
//! of density points along a trajectory.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::model::WalkConfig;
use crate::rng::replica_rng;
use crate::stats::{linear_fit, mean_ci, median, MeanCi};

use super::frame::{density_points, ProductTracker, WedgeTable};
use super::linalg::line_distance;

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    pub n: usize,
    pub replicas: usize,
    pub lambda_hat: f64,
    pub ci: MeanCi,
    /// Mean of `kappa / n`, an estimate of the Lyapunov vector.
    pub sigma_hat: Vec<f64>,
}

/// `kappa(b₁ ⋯ b_n) / n` for one replica.
pub fn lyapunov_replica(cfg: &WalkConfig, table: &WedgeTable, n: usize, seed: u64, replica: u64) -> Vec<f64> {
    let mut rng = replica_rng(seed, replica);
    let mut tracker = ProductTracker::new(table);
    for _ in 0..n {
        tracker.push(cfg.sample_letter(&mut rng));
    }
    tracker.kappa().iter().map(|k| k / n as f64).collect()
}

/// Averages per-replica `kappa / n` vectors (in replica order).
pub fn summarize_lyapunov(n: usize, per_replica: &[Vec<f64>]) -> LyapunovEstimate {
    let tops: Vec<f64> = per_replica.iter().map(|k| k[0]).collect();
    let ci = mean_ci(&tops);
    let d = per_replica.first().map_or(0, Vec::len);
    let sigma_hat = (0..d)
        .map(|i| per_replica.iter().map(|k| k[i]).sum::<f64>() / per_replica.len() as f64)
        .collect();
    LyapunovEstimate { n, replicas: per_replica.len(), lambda_hat: ci.mean, ci, sigma_hat }
}

/// Mean and 95% CI of `kappa₁(b₁ ⋯ b_n) / n` over `replicas` independent products.
pub fn lyapunov_estimate(cfg: &WalkConfig, n: usize, replicas: usize, seed: u64) -> Result<LyapunovEstimate> {
    if n < 100 || replicas < 30 {
        return precondition("lyapunov_estimate needs n >= 100 and N >= 30");
    }
    cfg.require_irreducible()?;
    let table = WedgeTable::new(cfg);
    let per: Vec<Vec<f64>> =
        (0..replicas as u64).into_par_iter().map(|r| lyapunov_replica(cfg, &table, n, seed, r)).collect();
    Ok(summarize_lyapunov(n, &per))
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub n: usize,
    pub median: f64,
    pub samples: usize,
    pub gap_failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityConvergence {
    pub rows: Vec<DensityRow>,
    /// Fitted `ε̂` with `median ≈ A e^{−ε̂ n}`; `None` if fewer than two usable rows.
    pub rate: Option<f64>,
}

/// Median over `replicas` trajectories of `d(ξ⁺_{b₁…b_n}, ξ⁺_{b₁…b_{2n}})` for
/// each `n`, with the exponential rate fitted to the medians.
pub fn density_convergence(cfg: &WalkConfig, n_list: &[usize], replicas: usize, seed: u64) -> Result<DensityConvergence> {
    if n_list.is_empty() || n_list.contains(&0) {
        return precondition("n_list must be nonempty and positive");
    }
    let table = WedgeTable::new(cfg);
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let base = (i as u64) << 32;
        let dists: Vec<Option<f64>> = (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = replica_rng(seed, base + r);
                let mut tracker = ProductTracker::new(&table);
                for _ in 0..n {
                    tracker.push(cfg.sample_letter(&mut rng));
                }
                let first = tracker.frame().ok()?;
                let (a, _) = density_points(&first, 1).ok()?;
                for _ in 0..n {
                    tracker.push(cfg.sample_letter(&mut rng));
                }
                let second = tracker.frame().ok()?;
                let (b, _) = density_points(&second, 1).ok()?;
                Some(line_distance(&a.col(0), &b.col(0)))
            })
            .collect();
        let ok: Vec<f64> = dists.iter().flatten().copied().collect();
        if ok.is_empty() {
            return Err(Error::Gap { index: 1, gap: 0.0 });
        }
        rows.push(DensityRow { n, median: median(&ok), samples: ok.len(), gap_failures: replicas - ok.len() });
    }
    let usable: Vec<&DensityRow> = rows.iter().filter(|r| r.median > 1e-15).collect();
    let xs: Vec<f64> = usable.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = usable.iter().map(|r| r.median.ln()).collect();
    let rate = linear_fit(&xs, &ys).map(|(slope, _)| -slope);
    Ok(DensityConvergence { rows, rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_replicas_have_zero_width() {
        let cfg = WalkConfig::reference();
        let table = WedgeTable::new(&cfg);
        let per: Vec<Vec<f64>> = (0..30).map(|_| lyapunov_replica(&cfg, &table, 200, 9, 0)).collect();
        let est = summarize_lyapunov(200, &per);
        assert_eq!(est.ci.width(), 0.0);
    }

    #[test]
    fn rejects_small_inputs_and_commuting_generators() {
        let cfg = WalkConfig::reference();
        assert!(lyapunov_estimate(&cfg, 10, 30, 1).is_err());
        let id = WalkConfig::new(
            "id",
            &[vec![vec![1, 0], vec![0, 1]]],
            &[num_rational::BigRational::from_integer(1.into())],
            &[0.0],
            1,
        )
        .unwrap();
        assert!(lyapunov_estimate(&id, 100, 30, 1).is_err());
    }

    #[test]
    fn positive_exponent_on_reference() {
        let est = lyapunov_estimate(&WalkConfig::reference(), 1000, 30, 3).unwrap();
        assert!(est.ci.lo() > 0.0);
        assert!((est.sigma_hat.iter().sum::<f64>()).abs() < 1e-9);
    }

    #[test]
    fn density_distances_in_unit_interval() {
        let dc = density_convergence(&WalkConfig::reference(), &[5, 10], 50, 4).unwrap();
        assert!(dc.rows.iter().all(|r| (0.0..=1.0).contains(&r.median)));
    }
}
