//! Vectors stored as (unit direction, log norm), for transport under long
//! products without overflow or underflow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::linalg::{matvec_into, norm};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogVector {
    pub direction: Vec<f64>,
    pub log_norm: f64,
}

impl LogVector {
    pub fn from_vec(v: &[f64]) -> Result<Self> {
        let n = norm(v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Precondition("vector must be nonzero and finite".into()));
        }
        Ok(Self { direction: v.iter().map(|x| x / n).collect(), log_norm: n.ln() })
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Applies a row-major `d×d` matrix.
    pub fn apply(&mut self, m: &[f64]) -> Result<()> {
        let mut out = vec![0.0; self.dim()];
        matvec_into(m, &self.direction, &mut out);
        let n = norm(&out);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Numerical("log-vector transport degenerated".into()));
        }
        for (d, o) in self.direction.iter_mut().zip(&out) {
            *d = o / n;
        }
        self.log_norm += n.ln();
        Ok(())
    }

    /// The raw vector; may under- or overflow.
    pub fn to_vec(&self) -> Vec<f64> {
        let s = self.log_norm.exp();
        self.direction.iter().map(|d| d * s).collect()
    }
}
