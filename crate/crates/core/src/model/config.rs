//! Walk configuration: generators, probabilities, χ-values and the seed.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::group::{GroupElement, Word};
use super::matrix::IntMatrix;
use crate::error::{Error, Result};

pub const REFERENCE_MODEL: &str = "ref-sl2";

const SUM_TOL: f64 = 1e-12;

/// A probability entry in a config file: a float or an exact `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbSpec {
    Float(f64),
    Text(String),
}

impl ProbSpec {
    fn to_rational(&self) -> Result<BigRational> {
        match self {
            ProbSpec::Float(v) => BigRational::from_float(*v)
                .ok_or_else(|| Error::Config(format!("probability {v} is not finite"))),
            ProbSpec::Text(s) => parse_rational(s),
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Config(format!("cannot parse probability {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(p, q))
    } else {
        let v: f64 = s.parse().map_err(|_| bad())?;
        BigRational::from_float(v).ok_or_else(bad)
    }
}

/// On-disk form of a [`WalkConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// A built-in model name; when set, the remaining model keys may be omitted.
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default)]
    pub generators: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default)]
    pub probs: Option<Vec<ProbSpec>>,
    #[serde(default)]
    pub chi: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// User assertion; cannot be decided by the laboratory.
    #[serde(default)]
    pub strongly_irreducible: Option<bool>,
    /// Experiment parameters, interpreted by the runner.
    #[serde(default)]
    pub params: toml::Table,
}

/// Generators with probabilities and χ-values. Immutable after construction.
#[derive(Clone, Debug)]
pub struct WalkConfig {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<GroupElement>,
    pub probs: Vec<f64>,
    pub exact_probs: Vec<BigRational>,
    pub seed: u64,
    pub strongly_irreducible: bool,
    inverses: Vec<IntMatrix>,
    float_mats: Vec<Vec<f64>>,
    float_inv: Vec<Vec<f64>>,
    small_mats: Option<Vec<Vec<i64>>>,
    int_chi: Option<Vec<i64>>,
    sampler: WeightedIndex<f64>,
}

impl WalkConfig {
    pub fn new(
        name: impl Into<String>,
        rows: &[Vec<Vec<i64>>],
        probs: &[BigRational],
        chi: &[f64],
        seed: u64,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Config("no generators".into()));
        }
        if probs.len() != rows.len() || chi.len() != rows.len() {
            return Err(Error::Config(format!(
                "{} generators but {} probs and {} chi values",
                rows.len(),
                probs.len(),
                chi.len()
            )));
        }
        let mut generators = Vec::with_capacity(rows.len());
        for (r, &c) in rows.iter().zip(chi) {
            if !c.is_finite() {
                return Err(Error::Config(format!("chi value {c} is not finite")));
            }
            generators.push(GroupElement::new(IntMatrix::from_rows(r)?, c)?);
        }
        let dim = generators[0].dim();
        if dim < 2 {
            return Err(Error::Config("dimension must be at least 2".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        let fprobs: Vec<f64> = probs.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect();
        if probs.iter().any(|p| p < &BigRational::zero()) || fprobs.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("probabilities must be nonnegative".into()));
        }
        let total: f64 = fprobs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::Config(format!("probabilities sum to {total}, expected 1")));
        }
        let drift: f64 = fprobs.iter().zip(chi).map(|(p, c)| p * c).sum();
        if drift.abs() > SUM_TOL {
            return Err(Error::Config(format!("chi is not centered: mean {drift}")));
        }
        let inverses = generators.iter().map(|g| g.matrix.inverse_unimodular()).collect::<Result<Vec<_>>>()?;
        let float_mats = generators.iter().map(|g| g.matrix.to_f64()).collect();
        let float_inv = inverses.iter().map(|m| m.to_f64()).collect();
        let small_mats = generators.iter().map(|g| g.matrix.to_i64()).collect::<Option<Vec<_>>>();
        let int_chi = chi
            .iter()
            .map(|&c| (c.fract() == 0.0 && c.abs() < 1e15).then_some(c as i64))
            .collect::<Option<Vec<_>>>();
        let sampler = WeightedIndex::new(&fprobs).map_err(|e| Error::Config(format!("bad probabilities: {e}")))?;
        Ok(Self {
            name: name.into(),
            dim,
            generators,
            probs: fprobs,
            exact_probs: probs.to_vec(),
            seed,
            strongly_irreducible: true,
            inverses,
            float_mats,
            float_inv,
            small_mats,
            int_chi,
            sampler,
        })
    }

    /// g₀ = [[1,2],[0,1]], g₁ = [[1,0],[2,1]]; generators {g₀, g₀⁻¹, g₁, g₁⁻¹},
    /// uniform probabilities, χ = (0, 0, 1, −1).
    pub fn reference() -> Self {
        let rows = vec![
            vec![vec![1, 2], vec![0, 1]],
            vec![vec![1, -2], vec![0, 1]],
            vec![vec![1, 0], vec![2, 1]],
            vec![vec![1, 0], vec![-2, 1]],
        ];
        let quarter = BigRational::new(1.into(), 4.into());
        Self::new(REFERENCE_MODEL, &rows, &vec![quarter; 4], &[0.0, 0.0, 1.0, -1.0], 1)
            .expect("reference model is valid")
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            REFERENCE_MODEL => Ok(Self::reference()),
            other => Err(Error::Config(format!("unknown built-in model {other:?}"))),
        }
    }

    pub fn from_file_struct(file: &ConfigFile) -> Result<Self> {
        let mut cfg = match &file.model {
            Some(name) => {
                if file.generators.is_some() || file.probs.is_some() || file.chi.is_some() {
                    return Err(Error::Config("give either `model` or explicit generators, not both".into()));
                }
                Self::builtin(name)?
            }
            None => {
                let missing = |k: &str| Error::Config(format!("missing key `{k}`"));
                let rows = file.generators.as_ref().ok_or_else(|| missing("generators"))?;
                let probs = file.probs.as_ref().ok_or_else(|| missing("probs"))?;
                let chi = file.chi.as_ref().ok_or_else(|| missing("chi"))?;
                let probs = probs.iter().map(ProbSpec::to_rational).collect::<Result<Vec<_>>>()?;
                Self::new("custom", rows, &probs, chi, 0)?
            }
        };
        if let Some(d) = file.dim {
            if d != cfg.dim {
                return Err(Error::Config(format!("dim = {d} but generators are {}×{}", cfg.dim, cfg.dim)));
            }
        }
        if let Some(seed) = file.seed {
            cfg.seed = seed;
        }
        if let Some(si) = file.strongly_irreducible {
            cfg.strongly_irreducible = si;
        }
        Ok(cfg)
    }

    pub fn parse_toml(text: &str) -> Result<(Self, ConfigFile)> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok((Self::from_file_struct(&file)?, file))
    }

    pub fn load(path: &Path) -> Result<(Self, ConfigFile)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_toml(&text)
    }

    /// The walk of transposed generators (same probabilities and χ).
    pub fn transposed(&self) -> Result<Self> {
        let d = self.dim;
        let small = self
            .small_matrices()
            .ok_or_else(|| Error::Precondition("generator entries do not fit in i64".into()))?;
        let rows: Vec<Vec<Vec<i64>>> =
            small.iter().map(|m| (0..d).map(|i| (0..d).map(|j| m[j * d + i]).collect()).collect()).collect();
        let chi: Vec<f64> = self.generators.iter().map(|g| g.chi).collect();
        let mut t = Self::new(format!("{}^T", self.name), &rows, &self.exact_probs, &chi, self.seed)?;
        t.strongly_irreducible = self.strongly_irreducible;
        Ok(t)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn chi(&self, letter: usize) -> f64 {
        self.generators[letter].chi
    }

    /// χ-values as integers, when every χ-value is an integer.
    pub fn int_chi(&self) -> Option<&[i64]> {
        self.int_chi.as_deref()
    }

    pub fn require_int_chi(&self) -> Result<&[i64]> {
        self.int_chi().ok_or_else(|| Error::Precondition("chi must be integer-valued".into()))
    }

    pub fn max_abs_chi(&self) -> f64 {
        self.generators.iter().map(|g| g.chi.abs()).fold(0.0, f64::max)
    }

    pub fn inverse(&self, letter: usize) -> &IntMatrix {
        &self.inverses[letter]
    }

    /// Row-major float copy of generator `letter`.
    pub fn float_matrix(&self, letter: usize) -> &[f64] {
        &self.float_mats[letter]
    }

    pub fn float_inverse(&self, letter: usize) -> &[f64] {
        &self.float_inv[letter]
    }

    /// Row-major `i64` copies of all generators, when the entries fit.
    pub fn small_matrices(&self) -> Option<&[Vec<i64>]> {
        self.small_mats.as_deref()
    }

    #[inline]
    pub fn sample_letter<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }

    pub fn sample_word<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Word {
        Word::new((0..n).map(|_| self.sample_letter(rng)).collect())
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters.iter().find(|&&l| l >= self.num_generators()) {
            Some(&l) => Err(Error::Precondition(format!("letter {l} out of range"))),
            None => Ok(()),
        }
    }

    /// True when the generators pairwise commute. An abelian group is never
    /// strongly irreducible, so such configs are rejected where irreducibility
    /// is needed.
    pub fn generators_commute(&self) -> bool {
        let g = &self.generators;
        for i in 0..g.len() {
            for j in i + 1..g.len() {
                let ab = g[i].matrix.mul(&g[j].matrix).expect("same dim");
                let ba = g[j].matrix.mul(&g[i].matrix).expect("same dim");
                if ab != ba {
                    return false;
                }
            }
        }
        true
    }

    pub fn require_irreducible(&self) -> Result<()> {
        if !self.strongly_irreducible {
            return Err(Error::Precondition("config asserts the group is not strongly irreducible".into()));
        }
        if self.generators_commute() {
            return Err(Error::Precondition("generators commute: not strongly irreducible".into()));
        }
        Ok(())
    }
}

/// Product `b₁ ⋯ b_n` in exact integers, with χ summed.
pub fn word_product(w: &Word, cfg: &WalkConfig) -> Result<GroupElement> {
    cfg.check_word(w)?;
    let Some((&first, rest)) = w.letters.split_first() else {
        return Err(Error::Precondition("word must be nonempty".into()));
    };
    let mut acc = cfg.generators[first].clone();
    for &l in rest {
        acc = acc.compose(&cfg.generators[l])?;
    }
    acc.chi = chi_of_word(w, cfg);
    Ok(acc)
}

/// Sum of the letters' χ-values, accumulated left to right.
pub fn chi_of_word(w: &Word, cfg: &WalkConfig) -> f64 {
    w.letters.iter().map(|&l| cfg.chi(l)).sum()
}
