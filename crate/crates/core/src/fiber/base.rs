//! Base points, windows and fiber points `h_{n,c}(a)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cartan::{adaptive_lookahead, cocycle_of_letters, omega, theta_n, Flag, LogVector};
use crate::error::{precondition, Error, Result};
use crate::model::{chi_of_word, StateXT, TorusPoint, WalkConfig, Word};
use crate::rng::{derive_seed, replica_rng};
use crate::stats::wilson;

/// `c = (b, z, O, x)` with `r = 1`, so `O` is a sign. `state` holds `(x, t)`.
#[derive(Clone, Debug)]
pub struct BasePoint {
    pub b_word: Word,
    pub z: Vec<f64>,
    pub sign: i8,
    pub state: StateXT,
}

impl BasePoint {
    pub fn new(cfg: &WalkConfig, b_word: Word, z: Vec<f64>, sign: i8, state: StateXT) -> Result<Self> {
        cfg.check_word(&b_word)?;
        if z.len() != cfg.dim {
            return Err(Error::DimensionMismatch { expected: cfg.dim, found: z.len() });
        }
        if sign != 1 && sign != -1 {
            return precondition("sign must be ±1");
        }
        Ok(Self { b_word, z, sign, state })
    }

    /// Random word of length `len`, `z = 0`, sign `+1`, state `(0, 0)`.
    pub fn random(cfg: &WalkConfig, len: usize, seed: u64) -> Self {
        let mut rng = replica_rng(seed, u64::MAX);
        let b_word = cfg.sample_word(&mut rng, len);
        let state = StateXT::new(TorusPoint::float(&vec![0.0; cfg.dim]), 0.0);
        Self { b_word, z: vec![0.0; cfg.dim], sign: 1, state }
    }

    /// Among `candidates` random base points, the one whose
    /// `(ω(θ_n(b)), χ(b₁ ⋯ b_n))` lies closest to the candidates' mean in
    /// standardized units. At moderate `n`, conditioned laws still carry a bias
    /// that grows with how atypical `b` is.
    pub fn central(cfg: &WalkConfig, len: usize, n: usize, lookahead: usize, candidates: usize, seed: u64) -> Result<Self> {
        if candidates == 0 {
            return precondition("need at least one candidate base point");
        }
        let pts: Vec<Self> = (0..candidates as u64).map(|k| Self::random(cfg, len, derive_seed(seed, k))).collect();
        let stats: Vec<(f64, f64)> = pts
            .iter()
            .map(|c| Ok((omega(&theta_n(cfg, &c.b_word, n, lookahead)?), chi_of_word(&c.b_word.slice(0, n), cfg))))
            .collect::<Result<_>>()?;
        let mean_sd = |v: Vec<f64>| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            (m, if s > 0.0 { s } else { 1.0 })
        };
        let (mo, so) = mean_sd(stats.iter().map(|s| s.0).collect());
        let (mc, sc) = mean_sd(stats.iter().map(|s| s.1).collect());
        let score = |s: &(f64, f64)| ((s.0 - mo) / so).powi(2) + ((s.1 - mc) / sc).powi(2);
        let best = (0..pts.len()).min_by(|&i, &j| score(&stats[i]).total_cmp(&score(&stats[j]))).unwrap_or(0);
        Ok(pts[best].clone())
    }

    pub fn require_len(&self, n: usize, lookahead: usize) -> Result<()> {
        if self.b_word.len() < n + lookahead {
            return precondition(format!(
                "base word of length {} is shorter than n + lookahead = {}",
                self.b_word.len(),
                n + lookahead
            ));
        }
        Ok(())
    }
}

/// `W = B × U × O_r × T^d × I`. `u` constrains the first `d − 1`
/// a-coordinates (the last is fixed by the trace condition).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSpec {
    pub u: Vec<(f64, f64)>,
    pub i: (f64, f64),
}

impl WindowSpec {
    /// Validated window: bounded, nonempty interior and `|I| ≥ 1 + max|χ|`.
    pub fn new(cfg: &WalkConfig, u: Vec<(f64, f64)>, i: (f64, f64)) -> Result<Self> {
        if u.len() + 1 != cfg.dim {
            return Err(Error::DimensionMismatch { expected: cfg.dim - 1, found: u.len() });
        }
        for &(lo, hi) in u.iter().chain(std::iter::once(&i)) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return precondition(format!("window interval [{lo}, {hi}] is not bounded with nonempty interior"));
            }
        }
        let need = 1.0 + cfg.max_abs_chi();
        if i.1 - i.0 < need {
            return precondition(format!("|I| = {} is below 1 + max|χ| = {need}", i.1 - i.0));
        }
        Ok(Self { u, i })
    }

    /// `U = [−1, 1]^{d−1}`, `I` centred of length `1 + max|χ|`.
    pub fn default_for(cfg: &WalkConfig) -> Self {
        let h = 0.5 * (1.0 + cfg.max_abs_chi());
        Self { u: vec![(-1.0, 1.0); cfg.dim - 1], i: (-h, h) }
    }

    /// The whole space; accepts everything. Not a valid window for the
    /// conditioning theorems, only a sanity limit.
    pub fn all(dim: usize) -> Self {
        Self { u: vec![(f64::NEG_INFINITY, f64::INFINITY); dim - 1], i: (f64::NEG_INFINITY, f64::INFINITY) }
    }

    /// Each `U` interval scaled about its midpoint.
    pub fn scale_u(&self, factor: f64) -> Self {
        let u = self
            .u
            .iter()
            .map(|&(lo, hi)| {
                let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo) * factor);
                (m - h, m + h)
            })
            .collect();
        Self { u, i: self.i }
    }

    pub fn contains(&self, a: &[f64], t: f64) -> bool {
        self.u.iter().zip(a).all(|(&(lo, hi), &x)| lo <= x && x <= hi) && self.i.0 <= t && t <= self.i.1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberSample {
    pub a_word: Word,
    /// `θ_n(a T^n b) − θ_n(b)`.
    pub theta_shift: Vec<f64>,
    /// `χ(a₁ ⋯ a_n) − χ(b₁ ⋯ b_n)`.
    pub chi_shift: f64,
    pub accepted: bool,
    pub drift_vector: Option<LogVector>,
}

/// `h_{n,c}(a)` through `θ_n` on `b` and on `a T^n b`.
pub fn fiber_point(cfg: &WalkConfig, c: &BasePoint, a: &Word, n: usize, lookahead: usize, w: &WindowSpec) -> Result<FiberSample> {
    if a.len() != n {
        return precondition(format!("fiber word has length {}, expected {n}", a.len()));
    }
    c.require_len(n, lookahead)?;
    cfg.check_word(a)?;
    let tail = c.b_word.slice(n, c.b_word.len());
    let theta_b = theta_n(cfg, &c.b_word, n, lookahead)?;
    let theta_a = theta_n(cfg, &a.concat(&tail), n, lookahead)?;
    let chi_shift = chi_of_word(a, cfg) - chi_of_word(&c.b_word.slice(0, n), cfg);
    Ok(make_sample(c, a.clone(), &theta_a, &theta_b, chi_shift, w))
}

fn make_sample(c: &BasePoint, a_word: Word, theta_a: &[f64], theta_b: &[f64], chi_shift: f64, w: &WindowSpec) -> FiberSample {
    let theta_shift: Vec<f64> = theta_a.iter().zip(theta_b).map(|(x, y)| x - y).collect();
    let moved: Vec<f64> = c.z.iter().zip(&theta_shift).map(|(z, s)| z + s).collect();
    let accepted = w.contains(&moved, c.state.t + chi_shift);
    FiberSample { a_word, theta_shift, chi_shift, accepted, drift_vector: None }
}

/// Everything about the fiber `F_{n,c}` that does not depend on `a`: the
/// shared lookahead flag `ξ_{T^n b}`, `θ_n(b)` and `χ(b₁ ⋯ b_n)`.
pub struct FiberContext<'a> {
    pub cfg: &'a WalkConfig,
    pub base: &'a BasePoint,
    pub n: usize,
    pub xi: Flag,
    pub theta_b: Vec<f64>,
    pub chi_b: f64,
}

impl<'a> FiberContext<'a> {
    pub fn new(cfg: &'a WalkConfig, base: &'a BasePoint, n: usize, lookahead: usize) -> Result<Self> {
        base.require_len(n, lookahead)?;
        cfg.check_word(&base.b_word)?;
        let letters = &base.b_word.letters;
        let (xi, _) = adaptive_lookahead(cfg, &letters[n..n + lookahead], lookahead)?;
        let theta_b = if n == 0 { vec![0.0; cfg.dim] } else { cocycle_of_letters(cfg, &letters[..n], &xi)?.1 };
        let chi_b = chi_of_word(&base.b_word.slice(0, n), cfg);
        Ok(Self { cfg, base, n, xi, theta_b, chi_b })
    }

    /// `θ_n(a T^n b) = σ(a₁ ⋯ a_n, ξ_{T^n b})`.
    pub fn theta(&self, a: &Word) -> Result<Vec<f64>> {
        if a.len() != self.n {
            return precondition(format!("fiber word has length {}, expected {}", a.len(), self.n));
        }
        if self.n == 0 {
            return Ok(vec![0.0; self.cfg.dim]);
        }
        Ok(cocycle_of_letters(self.cfg, &a.letters, &self.xi)?.1)
    }

    pub fn sample(&self, a: Word, w: &WindowSpec) -> Result<FiberSample> {
        let theta_a = self.theta(&a)?;
        let chi_shift = chi_of_word(&a, self.cfg) - self.chi_b;
        Ok(make_sample(self.base, a, &theta_a, &self.theta_b, chi_shift, w))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowSample {
    pub samples: Vec<FiberSample>,
    pub draws: u64,
    pub accepted: u64,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// The budget ran out before `N_target` acceptances.
    pub exhausted: bool,
}

const CHUNK: u64 = 4096;

/// Rejection sampling of `β⁺_{W,n,c}`: draw `i` uses stream `(seed, i)`, and the
/// first `n_target` acceptances in draw order are kept.
pub fn window_conditional_sample(ctx: &FiberContext, w: &WindowSpec, n_target: usize, seed: u64, budget: u64) -> Result<WindowSample> {
    let mut samples = Vec::new();
    let mut draws = 0u64;
    while samples.len() < n_target && draws < budget {
        let end = (draws + CHUNK).min(budget);
        let chunk: Vec<FiberSample> = (draws..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_rng(seed, i);
                ctx.sample(ctx.cfg.sample_word(&mut rng, ctx.n), w)
            })
            .collect::<Result<_>>()?;
        for s in chunk {
            draws += 1;
            if s.accepted {
                samples.push(s);
                if samples.len() == n_target {
                    break;
                }
            }
        }
    }
    let accepted = samples.len() as u64;
    let (rate, ci_lo, ci_hi) = wilson(accepted, draws);
    Ok(WindowSample { samples, draws, accepted, rate, ci_lo, ci_hi, exhausted: (accepted as usize) < n_target })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (WalkConfig, BasePoint) {
        let cfg = WalkConfig::reference();
        let c = BasePoint::random(&cfg, 300, 7);
        (cfg, c)
    }

    #[test]
    fn same_prefix_is_identity() {
        let (cfg, c) = setup();
        let w = WindowSpec::default_for(&cfg);
        let a = c.b_word.slice(0, 20);
        let s = fiber_point(&cfg, &c, &a, 20, 200, &w).unwrap();
        assert_eq!(s.theta_shift, vec![0.0, 0.0]);
        assert_eq!(s.chi_shift, 0.0);
        assert!(s.accepted);
        let ctx = FiberContext::new(&cfg, &c, 20, 200).unwrap();
        let s2 = ctx.sample(a, &w).unwrap();
        assert_eq!(s2.theta_shift, vec![0.0, 0.0]);
    }

    #[test]
    fn context_matches_theta_n() {
        let (cfg, c) = setup();
        let w = WindowSpec::default_for(&cfg);
        let ctx = FiberContext::new(&cfg, &c, 15, 200).unwrap();
        let a = Word::new(vec![0, 2, 1, 3, 3, 2, 0, 0, 1, 2, 3, 2, 1, 0, 2]);
        let direct = fiber_point(&cfg, &c, &a, 15, 200, &w).unwrap();
        let fast = ctx.sample(a, &w).unwrap();
        assert_eq!(direct.theta_shift, fast.theta_shift);
        assert_eq!(direct.chi_shift, fast.chi_shift);
        assert_eq!(direct.accepted, fast.accepted);
    }

    #[test]
    fn window_validation() {
        let cfg = WalkConfig::reference();
        assert!(WindowSpec::new(&cfg, vec![(-1.0, 1.0)], (-0.5, 0.5)).is_err());
        assert!(WindowSpec::new(&cfg, vec![(1.0, 1.0)], (-1.0, 1.0)).is_err());
        assert!(WindowSpec::new(&cfg, vec![(-1.0, f64::INFINITY)], (-1.0, 1.0)).is_err());
        assert_eq!(WindowSpec::new(&cfg, vec![(-1.0, 1.0)], (-1.0, 1.0)).unwrap(), WindowSpec::default_for(&cfg));
    }

    #[test]
    fn whole_space_accepts_all() {
        let (cfg, c) = setup();
        let ctx = FiberContext::new(&cfg, &c, 10, 200).unwrap();
        let r = window_conditional_sample(&ctx, &WindowSpec::all(2), 500, 3, 10_000).unwrap();
        assert_eq!(r.draws, 500);
        assert_eq!(r.rate, 1.0);
    }

    #[test]
    fn acceptance_is_deterministic() {
        let (cfg, c) = setup();
        let w = WindowSpec::default_for(&cfg);
        let ctx = FiberContext::new(&cfg, &c, 12, 200).unwrap();
        let a = window_conditional_sample(&ctx, &w, 50, 9, 100_000).unwrap();
        let b = window_conditional_sample(&ctx, &w, 50, 9, 100_000).unwrap();
        assert_eq!(a.draws, b.draws);
        for s in &a.samples {
            assert!(ctx.sample(s.a_word.clone(), &w).unwrap().accepted);
        }
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let (cfg, c) = setup();
        let ctx = FiberContext::new(&cfg, &c, 12, 200).unwrap();
        let r = window_conditional_sample(&ctx, &WindowSpec::default_for(&cfg), 1_000_000, 1, 300).unwrap();
        assert!(r.exhausted);
        assert_eq!(r.draws, 300);
    }
}
