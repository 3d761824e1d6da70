//! Points of the torus T^d and states of T^d × R.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

/// A rational point of T^d stored with one shared denominator.
///
/// Canonical form: `den > 0`, `0 <= num[i] < den` and
/// `gcd(den, num[0], ..., num[d-1]) = 1`, so `den` is the lcm of the reduced
/// coordinate denominators and equality is structural.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactPoint {
    den: BigInt,
    num: Vec<BigInt>,
}

impl ExactPoint {
    pub fn new(num: Vec<BigInt>, den: BigInt) -> Result<Self> {
        if !den.is_positive() {
            return Err(Error::Precondition("torus denominator must be positive".into()));
        }
        let num = num.into_iter().map(|n| n.mod_floor(&den)).collect();
        Ok(Self::canonical(num, den))
    }

    /// Builds a point from per-coordinate fractions `(p, q)`.
    pub fn from_fractions(coords: &[(i64, i64)]) -> Result<Self> {
        let mut den = BigInt::one();
        for &(_, q) in coords {
            if q <= 0 {
                return Err(Error::Precondition("torus denominator must be positive".into()));
            }
            den = den.lcm(&BigInt::from(q));
        }
        let num = coords.iter().map(|&(p, q)| BigInt::from(p) * (&den / BigInt::from(q))).collect();
        Self::new(num, den)
    }

    pub fn zero(dim: usize) -> Self {
        Self { den: BigInt::one(), num: vec![BigInt::zero(); dim] }
    }

    /// The exact dyadic value of a float point (every finite `f64` is dyadic).
    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        let mut num = Vec::with_capacity(coords.len());
        let mut den = BigInt::one();
        let mut rationals = Vec::with_capacity(coords.len());
        for &c in coords {
            let r = BigRational::from_float(c)
                .ok_or_else(|| Error::Precondition(format!("non-finite coordinate {c}")))?;
            den = den.lcm(r.denom());
            rationals.push(r);
        }
        for r in &rationals {
            num.push(r.numer() * (&den / r.denom()));
        }
        Self::new(num, den)
    }

    fn canonical(num: Vec<BigInt>, den: BigInt) -> Self {
        let mut g = den.clone();
        for n in &num {
            g = g.gcd(n);
        }
        if g.is_one() {
            return Self { den, num };
        }
        Self { num: num.iter().map(|n| n / &g).collect(), den: den / &g }
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn coords(&self) -> Vec<BigRational> {
        self.num.iter().map(|n| BigRational::new(n.clone(), self.den.clone())).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords().iter().map(|r| r.to_f64().unwrap_or(0.0).rem_euclid(1.0)).collect()
    }

    /// `g · x mod 1`. Keeps the shared denominator (an SL_d(Z) element acts
    /// invertibly on (Z/den)^d).
    pub fn apply(&self, g: &IntMatrix) -> Result<Self> {
        let d = self.dim();
        if g.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
        }
        let num = (0..d)
            .map(|i| {
                let mut acc = BigInt::zero();
                for j in 0..d {
                    acc += g.get(i, j) * &self.num[j];
                }
                acc.mod_floor(&self.den)
            })
            .collect();
        Ok(Self::canonical(num, self.den.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|n| n.is_zero())
    }
}

impl fmt::Debug for ExactPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|r| r.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// A torus point in exact or float mode.
#[derive(Clone, Debug, PartialEq)]
pub enum TorusPoint {
    Exact(ExactPoint),
    /// Coordinates in `[0, 1)`.
    Float(Vec<f64>),
}

impl TorusPoint {
    pub fn exact(coords: &[(i64, i64)]) -> Result<Self> {
        Ok(Self::Exact(ExactPoint::from_fractions(coords)?))
    }

    pub fn float(coords: &[f64]) -> Self {
        Self::Float(coords.iter().map(|&c| wrap_unit(c)).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Exact(p) => p.dim(),
            Self::Float(v) => v.len(),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Self::Exact(p) => p.to_f64(),
            Self::Float(v) => v.clone(),
        }
    }

    pub fn apply(&self, g: &IntMatrix) -> Result<Self> {
        match self {
            Self::Exact(p) => Ok(Self::Exact(p.apply(g)?)),
            Self::Float(x) => {
                let d = x.len();
                if g.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
                }
                let a = g.to_f64();
                let mut y = vec![0.0; d];
                float_apply(&a, x, &mut y);
                Ok(Self::Float(y))
            }
        }
    }
}

/// Reduces a real to `[0, 1)`.
#[inline]
pub fn wrap_unit(v: f64) -> f64 {
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// `y = A x mod 1` for a row-major float copy of an integer matrix.
#[inline]
pub fn float_apply(a: &[f64], x: &[f64], y: &mut [f64]) {
    let d = x.len();
    for i in 0..d {
        let mut acc = 0.0;
        for j in 0..d {
            acc += a[i * d + j] * x[j];
        }
        y[i] = wrap_unit(acc);
    }
}

/// Quotient Euclidean distance on T^d between float coordinates.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = (a - b).rem_euclid(1.0);
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// A state `(x, t)` of T^d × R.
#[derive(Clone, Debug, PartialEq)]
pub struct StateXT {
    pub x: TorusPoint,
    pub t: f64,
}

impl StateXT {
    pub fn new(x: TorusPoint, t: f64) -> Self {
        Self { x, t }
    }
}

/// Serialized form of an exact point: one `[numerator, denominator]` pair per
/// coordinate, each reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionPair(pub String, pub String);

impl From<&ExactPoint> for Vec<FractionPair> {
    fn from(p: &ExactPoint) -> Self {
        p.coords().iter().map(|r| FractionPair(r.numer().to_string(), r.denom().to_string())).collect()
    }
}
