//! Weighted sample measures on `T^d × R` and the tests run against them:
//! Weyl sums, atom detection, invariance of the real marginal and
//! convergence of pushforwards along a word.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::model::{torus_distance, word_product, ExactPoint, StateXT, TorusPoint, WalkConfig, Word};

#[derive(Clone, Debug, Default)]
pub struct EmpiricalMeasure {
    samples: Vec<(StateXT, f64)>,
    total_weight: f64,
}

impl EmpiricalMeasure {
    pub fn new(samples: Vec<(StateXT, f64)>) -> Result<Self> {
        if samples.iter().any(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return precondition("weights must be positive and finite");
        }
        let total_weight = samples.iter().map(|(_, w)| w).sum();
        Ok(Self { samples, total_weight })
    }

    /// Equal weights `1/n`.
    pub fn uniform(states: Vec<StateXT>) -> Self {
        let w = 1.0 / states.len().max(1) as f64;
        let samples: Vec<(StateXT, f64)> = states.into_iter().map(|s| (s, w)).collect();
        let total_weight = samples.iter().map(|(_, w)| w).sum();
        Self { samples, total_weight }
    }

    /// Equal-weight float samples from torus coordinates and `t` values.
    pub fn from_float(points: &[Vec<f64>], ts: &[f64]) -> Self {
        Self::uniform(points.iter().zip(ts).map(|(x, &t)| StateXT::new(TorusPoint::float(x), t)).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[(StateXT, f64)] {
        &self.samples
    }

    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.samples.iter().map(|(_, w)| *w).collect()
    }

    fn torus_coords(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|(s, _)| s.x.to_f64()).collect()
    }
}

/// `Σ w e^{2πi k·x} / Σ w`. Exactly 1 at `k = 0`.
pub fn weyl_sum(m: &EmpiricalMeasure, k: &[i64]) -> Complex64 {
    if k.iter().all(|&v| v == 0) {
        return Complex64::new(1.0, 0.0);
    }
    if m.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in &m.samples {
        acc += *w * character(k, &s.x.to_f64());
    }
    acc / m.total_weight
}

#[inline]
fn character(k: &[i64], x: &[f64]) -> Complex64 {
    // reduce k·x mod 1 before scaling by 2π
    let phase: f64 = k.iter().zip(x).map(|(&a, &b)| (a as f64 * b).rem_euclid(1.0)).sum::<f64>().rem_euclid(1.0);
    Complex64::from_polar(1.0, std::f64::consts::TAU * phase)
}

/// All integer vectors in `{−r..r}^d` except 0, in lexicographic order.
pub fn frequency_box(dim: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..dim {
        out = out.into_iter().flat_map(|v| (-r..=r).map(move |a| [v.clone(), vec![a]].concat())).collect();
    }
    out.retain(|v| v.iter().any(|&a| a != 0));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct Atom {
    pub center: Vec<f64>,
    pub mass: f64,
}

/// Greedy clustering of torus coordinates: each sample joins the first
/// cluster whose center is within `radius`, otherwise it starts a new one.
/// Clusters holding a mass fraction of at least `threshold` are reported.
pub fn atom_detect(m: &EmpiricalMeasure, radius: f64, threshold: f64) -> Result<Vec<Atom>> {
    if !(radius > 0.0) {
        return precondition("radius must be positive");
    }
    let mut clusters: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, (_, w)) in m.torus_coords().into_iter().zip(&m.samples) {
        match clusters.iter_mut().find(|(c, _)| torus_distance(c, &x) <= radius) {
            Some(c) => c.1 += w,
            None => clusters.push((x, *w)),
        }
    }
    Ok(clusters
        .into_iter()
        .map(|(center, w)| Atom { center, mass: w / m.total_weight })
        .filter(|a| a.mass >= threshold)
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalRow {
    pub shift: f64,
    pub discrepancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalInvariance {
    pub rows: Vec<MarginalRow>,
    pub max_discrepancy: f64,
}

/// `[c − half, c + half]` around the weighted median `c` of `t`, moved to a
/// half-integer. A single trajectory only covers a neighbourhood of where it
/// spent its time, so windows are placed there.
pub fn median_window(m: &EmpiricalMeasure, half: f64) -> (f64, f64) {
    let mut ts: Vec<(f64, f64)> = m.samples().iter().map(|(s, w)| (s.t, *w)).collect();
    ts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = ts.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    let mut c = 0.0;
    for (t, w) in ts {
        acc += w;
        c = t;
        if acc >= 0.5 * total {
            break;
        }
    }
    let c = c.floor() + 0.5;
    (c - half, c + half)
}

/// Compares the `t`-marginal on interior bins `B` of the window with its
/// translate: `Σ_B |m(B) − m(B − s)| / m(∪B)`. The first and last bins are
/// excluded.
pub fn real_marginal_invariance(
    m: &EmpiricalMeasure,
    shifts: &[f64],
    window: (f64, f64),
    bins: usize,
) -> Result<MarginalInvariance> {
    if bins < 3 || !(window.1 > window.0) {
        return precondition("need at least 3 bins over a nonempty window");
    }
    let mut ts: Vec<(f64, f64)> = m.samples.iter().map(|(s, w)| (s.t, *w)).collect();
    ts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = Vec::with_capacity(ts.len() + 1);
    cum.push(0.0);
    for (_, w) in &ts {
        cum.push(cum.last().unwrap() + w);
    }
    // mass of [a, b)
    let mass = |a: f64, b: f64| {
        let i = ts.partition_point(|p| p.0 < a);
        let j = ts.partition_point(|p| p.0 < b);
        cum[j] - cum[i]
    };
    let width = (window.1 - window.0) / bins as f64;
    let edges: Vec<(f64, f64)> =
        (1..bins - 1).map(|i| (window.0 + i as f64 * width, window.0 + (i + 1) as f64 * width)).collect();
    let interior: f64 = edges.iter().map(|&(a, b)| mass(a, b)).sum();
    let rows: Vec<MarginalRow> = shifts
        .iter()
        .map(|&s| {
            let discrepancy = if s == 0.0 || interior == 0.0 {
                0.0
            } else {
                edges.iter().map(|&(a, b)| (mass(a, b) - mass(a - s, b - s)).abs()).sum::<f64>() / interior
            };
            MarginalRow { shift: s, discrepancy }
        })
        .collect();
    let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    Ok(MarginalInvariance { rows, max_discrepancy })
}

/// Test function `x, t ↦ e^{2πi k·x} · max(0, 1 − |t − c|)`.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    pub k: Vec<i64>,
    pub bump_center: f64,
}

impl TestFunction {
    pub fn eval(&self, x: &[f64], t: f64) -> Complex64 {
        let bump = (1.0 - (t - self.bump_center).abs()).max(0.0);
        if bump == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        bump * character(&self.k, x)
    }
}

/// Weyl characters `k ∈ {−r..r}^d \ {0}` crossed with bumps at `centers`.
pub fn test_dictionary(dim: usize, r: i64, centers: &[f64]) -> Vec<TestFunction> {
    frequency_box(dim, r)
        .into_iter()
        .flat_map(|k| centers.iter().map(move |&c| TestFunction { k: k.clone(), bump_center: c }))
        .collect()
}

pub fn integrate(m: &EmpiricalMeasure, f: &TestFunction) -> Complex64 {
    if m.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (s, w) in &m.samples {
        acc += *w * f.eval(&s.x.to_f64(), s.t);
    }
    acc / m.total_weight
}

#[derive(Clone, Debug, Serialize)]
pub struct PushforwardRow {
    pub n: usize,
    pub values: Vec<Complex64>,
    /// `max_f |value_n(f) − value_{prev}(f)|`; 0 for the first checkpoint.
    pub cauchy: f64,
}

/// `(b₁ ⋯ b_n)_* m0`: each point is mapped exactly (float points through
/// their dyadic value) and `t` is shifted by `χ(b₁ ⋯ b_n)`.
pub fn pushforward(cfg: &WalkConfig, m0: &EmpiricalMeasure, prefix: &Word) -> Result<EmpiricalMeasure> {
    if prefix.is_empty() {
        return Ok(m0.clone());
    }
    let g = word_product(prefix, cfg)?;
    let samples = m0
        .samples
        .iter()
        .map(|(s, w)| {
            let x = match &s.x {
                TorusPoint::Exact(p) => TorusPoint::Exact(p.apply(&g.matrix)?),
                TorusPoint::Float(v) => TorusPoint::Float(ExactPoint::from_f64(v)?.apply(&g.matrix)?.to_f64()),
            };
            Ok((StateXT::new(x, s.t + g.chi), *w))
        })
        .collect::<Result<Vec<_>>>()?;
    EmpiricalMeasure::new(samples)
}

/// Evaluates the test functions on `(b₁ ⋯ b_n)_* m0` at each checkpoint `n`.
pub fn pushforward_convergence(
    cfg: &WalkConfig,
    m0: &EmpiricalMeasure,
    word: &Word,
    checkpoints: &[usize],
    functions: &[TestFunction],
) -> Result<Vec<PushforwardRow>> {
    if let Some(&n) = checkpoints.iter().find(|&&n| n > word.len()) {
        return Err(Error::Precondition(format!("checkpoint {n} beyond word length {}", word.len())));
    }
    let mut rows: Vec<PushforwardRow> = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let m = pushforward(cfg, m0, &word.slice(0, n))?;
        let values: Vec<Complex64> = functions.iter().map(|f| integrate(&m, f)).collect();
        let cauchy = rows
            .last()
            .map(|prev| prev.values.iter().zip(&values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
            .unwrap_or(0.0);
        rows.push(PushforwardRow { n, values, cauchy });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replica_rng;
    use rand::Rng;

    fn haar(n: usize, seed: u64) -> EmpiricalMeasure {
        let mut rng = replica_rng(seed, 0);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let ts: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        EmpiricalMeasure::from_float(&pts, &ts)
    }

    #[test]
    fn median_window_is_centred() {
        let pts = vec![vec![0.0, 0.0]; 5];
        let m = EmpiricalMeasure::from_float(&pts, &[1.0, 2.0, 3.0, 10.0, 11.0]);
        assert_eq!(median_window(&m, 2.0), (1.5, 5.5));
    }

    #[test]
    fn dirac_at_zero_has_unit_sums() {
        let m = EmpiricalMeasure::uniform(vec![StateXT::new(TorusPoint::float(&[0.0, 0.0]), 0.0)]);
        assert!((weyl_sum(&m, &[2, -1]) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(weyl_sum(&haar(10, 1), &[0, 0]), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn haar_sums_are_small() {
        let n = 10_000;
        let m = haar(n, 2);
        assert!(weyl_sum(&m, &[1, 0]).norm() <= 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn atoms_of_two_point_measure() {
        let a = StateXT::new(TorusPoint::exact(&[(1, 4), (0, 1)]).unwrap(), 0.0);
        let b = StateXT::new(TorusPoint::exact(&[(1, 4), (1, 2)]).unwrap(), 0.0);
        let atoms = atom_detect(&EmpiricalMeasure::uniform(vec![a, b]), 0.1, 0.3).unwrap();
        assert_eq!(atoms.len(), 2);
        assert!(atoms.iter().all(|a| (a.mass - 0.5).abs() < 1e-15));
        assert!(atom_detect(&EmpiricalMeasure::default(), 0.1, 0.3).unwrap().is_empty());
        assert!(atom_detect(&haar(10_000, 3), 0.01, 0.05).unwrap().is_empty());
    }

    #[test]
    fn zero_shift_has_zero_discrepancy() {
        let r = real_marginal_invariance(&haar(1000, 4), &[0.0, 1.0], (-5.0, 5.0), 10).unwrap();
        assert_eq!(r.rows[0].discrepancy, 0.0);
        assert!(r.rows[1].discrepancy >= 0.0);
    }

    #[test]
    fn frequency_box_size() {
        assert_eq!(frequency_box(2, 3).len(), 48);
    }

    #[test]
    fn empty_word_pushforward_is_constant() {
        let cfg = WalkConfig::reference();
        let m = haar(50, 5);
        let fs = test_dictionary(2, 1, &[0.0]);
        let rows = pushforward_convergence(&cfg, &m, &Word::new(vec![]), &[0, 0], &fs).unwrap();
        assert_eq!(rows[1].cauchy, 0.0);
    }
}
