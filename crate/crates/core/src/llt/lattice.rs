//! Distributions on `Z` and exact dynamic programming for sums and first
//! returns to 0.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{precondition, Error, Result};
use crate::model::WalkConfig;
use crate::rng::replica_rng;

pub const SUPPORT_GUARD: usize = 10_000_000;
pub const EXACT_RETURN_KMAX: usize = 1000;

#[derive(Clone, Debug, PartialEq)]
pub enum Masses {
    /// `num[i] / den`.
    Exact { den: BigUint, num: Vec<BigUint> },
    Float(Vec<f64>),
}

/// A law on `offset, offset + 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDist {
    pub offset: i64,
    pub masses: Masses,
}

impl LatticeDist {
    /// Exact law from `(value, probability)` pairs; repeated values merge.
    pub fn from_exact(pairs: &[(i64, BigRational)]) -> Result<Self> {
        if pairs.is_empty() {
            return precondition("empty distribution");
        }
        if pairs.iter().any(|(_, p)| p < &BigRational::zero()) {
            return precondition("negative mass");
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let len = (hi - lo) as usize + 1;
        guard(len)?;
        let den = pairs.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        let mut num = vec![BigUint::zero(); len];
        for (v, p) in pairs {
            let n = (p.numer() * (&den / p.denom())).to_biguint().expect("nonnegative");
            num[(v - lo) as usize] += n;
        }
        let den = den.to_biguint().expect("positive");
        let total: BigUint = num.iter().sum();
        if total != den {
            return Err(Error::Precondition("masses do not sum to 1".into()));
        }
        Ok(Self { offset: lo, masses: Masses::Exact { den, num } })
    }

    pub fn from_float(pairs: &[(i64, f64)]) -> Result<Self> {
        if pairs.is_empty() || pairs.iter().any(|(_, p)| !(*p >= 0.0)) {
            return precondition("masses must be nonnegative");
        }
        let lo = pairs.iter().map(|p| p.0).min().unwrap_or(0);
        let hi = pairs.iter().map(|p| p.0).max().unwrap_or(0);
        let len = (hi - lo) as usize + 1;
        guard(len)?;
        let mut m = vec![0.0; len];
        for (v, p) in pairs {
            m[(v - lo) as usize] += p;
        }
        let total: f64 = m.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return precondition(format!("masses sum to {total}"));
        }
        Ok(Self { offset: lo, masses: Masses::Float(m) })
    }

    /// The law of `χ` under the configured probabilities (exact).
    pub fn from_config(cfg: &WalkConfig) -> Result<Self> {
        let chi = cfg.require_int_chi()?;
        let pairs: Vec<(i64, BigRational)> = chi.iter().copied().zip(cfg.exact_probs.iter().cloned()).collect();
        Self::from_exact(&pairs)
    }

    pub fn dirac(v: i64) -> Self {
        Self { offset: v, masses: Masses::Exact { den: BigUint::one(), num: vec![BigUint::one()] } }
    }

    pub fn len(&self) -> usize {
        match &self.masses {
            Masses::Exact { num, .. } => num.len(),
            Masses::Float(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.masses, Masses::Exact { .. })
    }

    pub fn to_float(&self) -> Self {
        match &self.masses {
            Masses::Float(_) => self.clone(),
            Masses::Exact { den, num } => {
                let d = big_to_f64(den);
                Self { offset: self.offset, masses: Masses::Float(num.iter().map(|n| ratio(n, den, d)).collect()) }
            }
        }
    }

    pub fn prob(&self, v: i64) -> f64 {
        let i = v - self.offset;
        if i < 0 || i as usize >= self.len() {
            return 0.0;
        }
        match &self.masses {
            Masses::Float(m) => m[i as usize],
            Masses::Exact { den, num } => ratio(&num[i as usize], den, big_to_f64(den)),
        }
    }

    pub fn exact_prob(&self, v: i64) -> Option<BigRational> {
        let Masses::Exact { den, num } = &self.masses else { return None };
        let i = v - self.offset;
        if i < 0 || i as usize >= num.len() {
            return Some(BigRational::zero());
        }
        Some(BigRational::new(BigInt::from(num[i as usize].clone()), BigInt::from(den.clone())))
    }

    /// Exact total mass in rational mode.
    pub fn exact_total(&self) -> Option<BigRational> {
        let Masses::Exact { den, num } = &self.masses else { return None };
        Some(BigRational::new(BigInt::from(num.iter().sum::<BigUint>()), BigInt::from(den.clone())))
    }

    fn support(&self) -> Vec<i64> {
        (0..self.len() as i64).map(|i| self.offset + i).filter(|&v| self.prob(v) > 0.0 || self.is_positive(v)).collect()
    }

    fn is_positive(&self, v: i64) -> bool {
        match &self.masses {
            Masses::Exact { num, .. } => !num[(v - self.offset) as usize].is_zero(),
            Masses::Float(m) => m[(v - self.offset) as usize] > 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.support().iter().map(|&v| v as f64 * self.prob(v)).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.support().iter().map(|&v| (v as f64 - m).powi(2) * self.prob(v)).sum()
    }

    /// gcd of the differences of support points; 0 for a point mass.
    pub fn period(&self) -> u64 {
        let s = self.support();
        s.iter().skip(1).fold(0u64, |g, &v| g.gcd(&((v - s[0]).unsigned_abs())))
    }
}

fn guard(len: usize) -> Result<()> {
    if len > SUPPORT_GUARD {
        return Err(Error::MemoryGuard(len));
    }
    Ok(())
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// `n / d` as `f64`, also when both exceed the float range.
fn ratio(n: &BigUint, d: &BigUint, d_f: f64) -> f64 {
    if d_f.is_finite() {
        return n.to_f64().unwrap_or(f64::INFINITY) / d_f;
    }
    let shift = d.bits().saturating_sub(60);
    (n >> shift).to_f64().unwrap_or(0.0) / (d >> shift).to_f64().unwrap_or(1.0)
}

/// Law of `S_n`, the sum of `n` independent draws from `dist`.
pub fn lattice_dp(dist: &LatticeDist, n: usize) -> Result<LatticeDist> {
    let span = dist.len() - 1;
    guard(span.saturating_mul(n).saturating_add(1))?;
    let mut acc = match &dist.masses {
        Masses::Exact { .. } => LatticeDist::dirac(0),
        Masses::Float(_) => LatticeDist { offset: 0, masses: Masses::Float(vec![1.0]) },
    };
    for _ in 0..n {
        acc = convolve(&acc, dist);
    }
    Ok(acc)
}

fn convolve(a: &LatticeDist, b: &LatticeDist) -> LatticeDist {
    let len = a.len() + b.len() - 1;
    let offset = a.offset + b.offset;
    match (&a.masses, &b.masses) {
        (Masses::Exact { den: da, num: na }, Masses::Exact { den: db, num: nb }) => {
            let mut num = vec![BigUint::zero(); len];
            for (i, x) in na.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in nb.iter().enumerate() {
                    if !y.is_zero() {
                        num[i + j] += x * y;
                    }
                }
            }
            LatticeDist { offset, masses: Masses::Exact { den: da * db, num } }
        }
        _ => {
            let (fa, fb) = (a.to_float(), b.to_float());
            let (Masses::Float(ma), Masses::Float(mb)) = (&fa.masses, &fb.masses) else { unreachable!() };
            let mut m = vec![0.0; len];
            for (i, x) in ma.iter().enumerate() {
                for (j, y) in mb.iter().enumerate() {
                    m[i + j] += x * y;
                }
            }
            LatticeDist { offset, masses: Masses::Float(m) }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReturnTimes {
    /// `P(τ = k)` for `k = 1..=kmax`, as floats.
    pub probs: Vec<f64>,
    /// The same in exact arithmetic (rational mode only).
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

impl ReturnTimes {
    /// `P(τ ≥ k)`.
    pub fn survival(&self, k: usize) -> f64 {
        1.0 - self.probs[..k.saturating_sub(1).min(self.probs.len())].iter().sum::<f64>()
    }
}

/// `P(τ = k)` for the first return of `S_n` to 0, by propagating the walk
/// killed at 0.
#[allow(clippy::needless_range_loop)]
pub fn return_time_dp(dist: &LatticeDist, kmax: usize) -> Result<ReturnTimes> {
    let lo = dist.offset;
    let hi = dist.offset + dist.len() as i64 - 1;
    // levels reachable in kmax steps
    let min_level = lo.min(0) * kmax as i64;
    let max_level = hi.max(0) * kmax as i64;
    let width = (max_level - min_level) as usize + 1;
    guard(width)?;
    let zero = (-min_level) as usize;
    match &dist.masses {
        Masses::Exact { den, num } => {
            if kmax > EXACT_RETURN_KMAX {
                return precondition(format!("exact return-time DP is limited to kmax <= {EXACT_RETURN_KMAX}"));
            }
            let mut cur = vec![BigUint::zero(); width];
            cur[zero] = BigUint::one();
            let mut den_k = BigUint::one();
            let mut exact = Vec::with_capacity(kmax);
            let (mut a, mut b) = (zero, zero);
            for _ in 0..kmax {
                let mut next = vec![BigUint::zero(); width];
                for i in a..=b {
                    if cur[i].is_zero() {
                        continue;
                    }
                    for (j, m) in num.iter().enumerate() {
                        if !m.is_zero() {
                            let t = (i as i64 + lo + j as i64) as usize;
                            next[t] += &cur[i] * m;
                        }
                    }
                }
                den_k *= den;
                let hit = std::mem::take(&mut next[zero]);
                exact.push(BigRational::new(BigInt::from(hit), BigInt::from(den_k.clone())));
                a = (a as i64 + lo).max(0) as usize;
                b = ((b as i64 + hi) as usize).min(width - 1);
                cur = next;
            }
            let probs = exact.iter().map(|r| r.to_f64().unwrap_or(0.0)).collect();
            Ok(ReturnTimes { probs, exact: Some(exact) })
        }
        Masses::Float(m) => {
            let mut cur = vec![0.0; width];
            cur[zero] = 1.0;
            let mut probs = Vec::with_capacity(kmax);
            let (mut a, mut b) = (zero, zero);
            for _ in 0..kmax {
                let mut next = vec![0.0; width];
                for i in a..=b {
                    if cur[i] == 0.0 {
                        continue;
                    }
                    for (j, p) in m.iter().enumerate() {
                        next[(i as i64 + lo + j as i64) as usize] += cur[i] * p;
                    }
                }
                probs.push(std::mem::take(&mut next[zero]));
                a = (a as i64 + lo).max(0) as usize;
                b = ((b as i64 + hi) as usize).min(width - 1);
                cur = next;
            }
            Ok(ReturnTimes { probs, exact: None })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LltRow {
    pub n: usize,
    /// `P(S_n = 0)`.
    pub exact: f64,
    /// `√n · P(S_n = 0)`.
    pub scaled: f64,
    /// `1/√(2πσ²)`.
    pub limit: f64,
    pub rel_err: f64,
}

/// `√n · P(S_n = 0)` against the Gaussian local limit, for each `n` in
/// `n_list`. The convolution runs in floating point.
pub fn llt_1d_check(dist: &LatticeDist, n_list: &[usize]) -> Result<Vec<LltRow>> {
    let period = dist.period();
    if period != 1 {
        return Err(Error::Periodic(period));
    }
    if dist.mean().abs() > 1e-12 {
        return precondition("distribution must be centered");
    }
    let sigma2 = dist.variance();
    let limit = 1.0 / (2.0 * std::f64::consts::PI * sigma2).sqrt();
    let mut targets: Vec<usize> = n_list.to_vec();
    targets.sort_unstable();
    let nmax = targets.last().copied().unwrap_or(0);
    guard((dist.len() - 1).saturating_mul(nmax) + 1)?;
    let base = dist.to_float();
    let Masses::Float(m) = &base.masses else { unreachable!() };
    let mut cur = vec![1.0];
    let mut off = 0i64;
    let mut at = std::collections::BTreeMap::new();
    if targets.contains(&0) {
        at.insert(0, 1.0);
    }
    for step in 1..=nmax {
        let mut next = vec![0.0; cur.len() + m.len() - 1];
        for (i, x) in cur.iter().enumerate() {
            for (j, y) in m.iter().enumerate() {
                next[i + j] += x * y;
            }
        }
        cur = next;
        off += base.offset;
        if targets.binary_search(&step).is_ok() {
            let idx = -off;
            let p = if idx >= 0 && (idx as usize) < cur.len() { cur[idx as usize] } else { 0.0 };
            at.insert(step, p);
        }
    }
    Ok(n_list
        .iter()
        .map(|&n| {
            let exact = at[&n];
            let scaled = (n as f64).sqrt() * exact;
            LltRow { n, exact, scaled, limit, rel_err: (scaled - limit).abs() / limit }
        })
        .collect())
}

/// gcd of the differences of `χ(w)` over `samples` sampled words of length
/// `n`. Returns 0 for fewer than two samples.
pub fn period_detect(cfg: &WalkConfig, samples: usize, n: usize, seed: u64) -> Result<u64> {
    let chi = cfg.require_int_chi()?;
    if samples < 2 {
        return Ok(0);
    }
    let mut rng = replica_rng(seed, 0);
    let draw = |rng: &mut crate::rng::WalkRng| (0..n).map(|_| chi[cfg.sample_letter(rng)]).sum::<i64>();
    let first = draw(&mut rng);
    let mut g = 0u64;
    for _ in 1..samples {
        let v = draw(&mut rng);
        g = g.gcd(&(v - first).unsigned_abs());
    }
    Ok(g)
}
