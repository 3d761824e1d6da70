//! Square integer matrices with arbitrary-precision entries.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Row-major square matrix over Z.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = BigInt::one();
        }
        Self { dim, entries }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Config("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_entries(dim: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rhs.dim });
        }
        let d = self.dim;
        let mut entries = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &self.entries[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    entries[i * d + j] += a * &rhs.entries[k * d + j];
                }
            }
        }
        Ok(IntMatrix { dim: d, entries })
    }

    pub fn transpose(&self) -> IntMatrix {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                entries.push(self.entries[j * d + i].clone());
            }
        }
        IntMatrix { dim: d, entries }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut m = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if m[k * d + k].is_zero() {
                let Some(p) = (k + 1..d).find(|&r| !m[r * d + k].is_zero()) else {
                    return BigInt::zero();
                };
                for j in 0..d {
                    m.swap(k * d + j, p * d + j);
                }
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &m[i * d + j] * &m[k * d + k] - &m[i * d + k] * &m[k * d + j];
                    m[i * d + j] = v / &prev;
                }
            }
            prev = m[k * d + k].clone();
        }
        sign * m[d * d - 1].clone()
    }

    /// Minor with the given (sorted) row and column index sets.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> BigInt {
        let k = rows.len();
        let mut entries = Vec::with_capacity(k * k);
        for &r in rows {
            for &c in cols {
                entries.push(self.entries[r * self.dim + c].clone());
            }
        }
        IntMatrix { dim: k, entries }.det()
    }

    /// Inverse of a determinant-one matrix via the adjugate.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let det = self.det();
        if !det.is_one() {
            return Err(Error::Config(format!("matrix has determinant {det}, expected 1")));
        }
        let d = self.dim;
        if d == 1 {
            return Ok(self.clone());
        }
        let mut entries = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                let rows: Vec<usize> = (0..d).filter(|&r| r != j).collect();
                let cols: Vec<usize> = (0..d).filter(|&c| c != i).collect();
                let cof = self.minor(&rows, &cols);
                entries[i * d + j] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        Ok(IntMatrix { dim: d, entries })
    }

    /// The k-th exterior power in the lexicographic basis of k-subsets.
    pub fn wedge(&self, k: usize) -> IntMatrix {
        let subsets = k_subsets(self.dim, k);
        let n = subsets.len();
        let mut entries = Vec::with_capacity(n * n);
        for rows in &subsets {
            for cols in &subsets {
                entries.push(self.minor(rows, cols));
            }
        }
        IntMatrix { dim: n, entries }
    }

    /// Entries as `i64` when every entry fits.
    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.entries.iter().map(|e| e.to_i64()).collect()
    }

    /// Entries as `f64`, all scaled by a common power of two so that huge
    /// products stay in range. Returns `(entries, log2_scale)` with
    /// `true = entries * 2^log2_scale`.
    pub fn to_f64_scaled(&self) -> (Vec<f64>, i64) {
        let max_bits = self.entries.iter().map(|e| e.bits()).max().unwrap_or(0) as i64;
        let shift = (max_bits - 900).max(0);
        let vals = self
            .entries
            .iter()
            .map(|e| {
                let v = if shift > 0 { e >> (shift as usize) } else { e.clone() };
                v.to_f64().unwrap_or(f64::NAN)
            })
            .collect();
        (vals, shift)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn max_abs_bits(&self) -> u64 {
        self.entries.iter().map(|e| e.abs().bits()).max().unwrap_or(0)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect();
        write!(f, "{rows:?}")
    }
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}
