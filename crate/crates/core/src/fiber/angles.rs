//! Law of angles: directions `ξ⁻` of window-conditioned fiber products
//! against the stationary direction law of the transposed walk.

use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::{ProductTracker, WedgeTable};
use crate::error::{precondition, Error, Result};
use crate::model::{WalkConfig, Word};
use crate::rng::{derive_seed, replica_rng};

use super::base::{window_conditional_sample, FiberContext, WindowSpec};

const GAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct AngleLaws {
    pub n: usize,
    /// Unit vectors spanning `ξ⁻_{a₁…a_n}` for accepted `a`.
    pub conditioned: Vec<Vec<f64>>,
    /// Unit vectors spanning `ξ⁺` of products of the transposed walk.
    pub unconditioned: Vec<Vec<f64>>,
    /// Angle coordinates in `[0, π)` (dimension 2 only).
    pub angle_cond: Vec<f64>,
    pub angle_uncond: Vec<f64>,
    /// Two-sample Kuiper statistic on the circle of lines (dimension 2 only).
    pub distance: Option<f64>,
    pub accepted: u64,
    pub draws: u64,
    pub exhausted: bool,
    pub gap_dropped: usize,
}

/// Angle of the line through `v` (dimension 2), in `[0, π)`.
pub fn line_angle(v: &[f64]) -> f64 {
    let a = v[1].atan2(v[0]).rem_euclid(std::f64::consts::PI);
    if a >= std::f64::consts::PI {
        0.0
    } else {
        a
    }
}

/// Kuiper's two-sample statistic `max(F − G) − min(F − G)`: the rotation-
/// invariant Kolmogorov–Smirnov distance on a circle.
pub fn kuiper_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        let diff = i as f64 / na - j as f64 / nb;
        lo = lo.min(diff);
        hi = hi.max(diff);
    }
    hi - lo
}

fn top_direction(table: &WedgeTable, letters: &[usize], left: bool) -> Result<Vec<f64>> {
    let mut p = ProductTracker::new(table);
    for &l in letters {
        p.push(l);
    }
    let f = p.frame()?;
    if f.dim() > 1 && f.gap(0) <= GAP_TOL {
        return Err(Error::Gap { index: 1, gap: f.gap(0) });
    }
    Ok(if left { f.left_basis.col(0) } else { f.right_basis.col(0) })
}

/// Conditioned law from the first `n_target` accepted draws of the fiber at
/// `ctx`; unconditioned law from `n_uncond` independent products of the
/// transposed walk. Samples without a gap are dropped and counted.
pub fn law_of_angles(ctx: &FiberContext, w: &WindowSpec, n_target: usize, n_uncond: usize, seed: u64, budget: u64) -> Result<AngleLaws> {
    let cfg = ctx.cfg;
    if cfg.dim != 2 && cfg.dim != 3 {
        return precondition("law of angles needs d = 2 or 3");
    }
    let n = ctx.n;
    let sample = window_conditional_sample(ctx, w, n_target, seed, budget)?;
    let table = WedgeTable::new(cfg);
    let cond: Vec<Result<Vec<f64>>> =
        sample.samples.par_iter().map(|s| top_direction(&table, &s.a_word.letters, false)).collect();

    let tcfg: WalkConfig = cfg.transposed()?;
    let ttable = WedgeTable::new(&tcfg);
    let useed = derive_seed(seed, 0x7A45);
    let uncond: Vec<Result<Vec<f64>>> = (0..n_uncond as u64)
        .into_par_iter()
        .map(|j| {
            let mut rng = replica_rng(useed, j);
            let word: Word = tcfg.sample_word(&mut rng, n);
            top_direction(&ttable, &word.letters, true)
        })
        .collect();

    let mut gap_dropped = 0;
    let mut keep = |v: Vec<Result<Vec<f64>>>| -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(v.len());
        for r in v {
            match r {
                Ok(x) => out.push(x),
                Err(Error::Gap { .. }) => gap_dropped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    };
    let conditioned = keep(cond)?;
    let unconditioned = keep(uncond)?;
    let (angle_cond, angle_uncond, distance) = if cfg.dim == 2 {
        let a: Vec<f64> = conditioned.iter().map(|v| line_angle(v)).collect();
        let b: Vec<f64> = unconditioned.iter().map(|v| line_angle(v)).collect();
        let d = kuiper_distance(&a, &b);
        (a, b, Some(d))
    } else {
        (Vec::new(), Vec::new(), None)
    };
    Ok(AngleLaws {
        n,
        conditioned,
        unconditioned,
        angle_cond,
        angle_uncond,
        distance,
        accepted: sample.accepted,
        draws: sample.draws,
        exhausted: sample.exhausted,
        gap_dropped,
    })
}
