//! Conditional masses of window cells along the fiber pieces `Q_{W,n}`.

use serde::Serialize;

use crate::error::{precondition, Result};
use crate::stats::wilson;

use super::base::{window_conditional_sample, FiberContext, FiberSample, WindowSpec};

/// Regular grid on the window box: `u_cells` per a-coordinate, `i_cells` on `I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub u_cells: usize,
    pub i_cells: usize,
}

impl Partition {
    pub fn num_cells(&self, dim: usize) -> usize {
        self.u_cells.pow((dim - 1) as u32) * self.i_cells
    }

    /// Cell of an accepted sample, in mixed radix (a-coordinates first).
    pub fn cell(&self, w: &WindowSpec, moved: &[f64], t: f64) -> usize {
        let bin = |x: f64, (lo, hi): (f64, f64), k: usize| (((x - lo) / (hi - lo) * k as f64).floor().max(0.0) as usize).min(k - 1);
        let mut idx = 0;
        for (x, &iv) in moved.iter().zip(&w.u) {
            idx = idx * self.u_cells + bin(*x, iv, self.u_cells);
        }
        idx * self.i_cells + bin(t, w.i, self.i_cells)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistRow {
    pub n: usize,
    pub cell: usize,
    pub mass: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberEquidist {
    pub rows: Vec<EquidistRow>,
    /// `(n, accepted)` per n.
    pub accepted: Vec<(usize, u64)>,
    /// `Σ_cells |m_{n_{j+1}} − m_{n_j}|` for successive n.
    pub l1_diffs: Vec<f64>,
}

impl FiberEquidist {
    pub fn masses(&self, n: usize) -> Vec<f64> {
        self.rows.iter().filter(|r| r.n == n).map(|r| r.mass).collect()
    }
}

/// Cell masses of the conditioned fiber pieces at each `n`. `contexts` must
/// share the base point and be listed in increasing `n`.
pub fn fiber_equidistribution(
    contexts: &[FiberContext],
    w: &WindowSpec,
    partition: Partition,
    n_target: usize,
    seed: u64,
    budget: u64,
) -> Result<FiberEquidist> {
    if w.u.iter().chain(std::iter::once(&w.i)).any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
        return precondition("partition needs a bounded window");
    }
    if partition.u_cells == 0 || partition.i_cells == 0 {
        return precondition("partition needs at least one cell per axis");
    }
    let mut rows = Vec::new();
    let mut accepted = Vec::new();
    let mut prev: Option<Vec<f64>> = None;
    let mut l1_diffs = Vec::new();
    for ctx in contexts {
        let dim = ctx.cfg.dim;
        let k = partition.num_cells(dim);
        let s = window_conditional_sample(ctx, w, n_target, seed ^ ctx.n as u64, budget)?;
        let mut counts = vec![0u64; k];
        for f in &s.samples {
            counts[cell_of(ctx, w, partition, f)] += 1;
        }
        let total = s.accepted;
        let masses: Vec<f64> = counts.iter().map(|&c| if total == 0 { f64::NAN } else { c as f64 / total as f64 }).collect();
        for (cell, &c) in counts.iter().enumerate() {
            let (mass, ci_lo, ci_hi) = wilson(c, total);
            rows.push(EquidistRow { n: ctx.n, cell, mass, ci_lo, ci_hi });
        }
        if let Some(p) = &prev {
            l1_diffs.push(p.iter().zip(&masses).map(|(a, b)| (a - b).abs()).sum());
        }
        prev = Some(masses);
        accepted.push((ctx.n, total));
    }
    Ok(FiberEquidist { rows, accepted, l1_diffs })
}

fn cell_of(ctx: &FiberContext, w: &WindowSpec, partition: Partition, f: &FiberSample) -> usize {
    let moved: Vec<f64> = ctx.base.z.iter().zip(&f.theta_shift).map(|(z, s)| z + s).collect();
    partition.cell(w, &moved, ctx.base.state.t + f.chi_shift)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_cover_the_box() {
        let w = WindowSpec { u: vec![(-1.0, 1.0)], i: (-1.0, 1.0) };
        let p = Partition { u_cells: 4, i_cells: 3 };
        assert_eq!(p.num_cells(2), 12);
        assert_eq!(p.cell(&w, &[-1.0], -1.0), 0);
        assert_eq!(p.cell(&w, &[1.0], 1.0), 11);
        assert_eq!(p.cell(&w, &[-0.1], 0.0), 4);
    }
}
