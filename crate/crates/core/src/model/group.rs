use serde::{Deserialize, Serialize};

use super::matrix::IntMatrix;
use super::torus::StateXT;
use crate::error::{Error, Result};

/// An element of the acting semigroup together with its χ-value.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub matrix: IntMatrix,
    pub chi: f64,
}

impl GroupElement {
    pub fn new(matrix: IntMatrix, chi: f64) -> Result<Self> {
        let det = matrix.det();
        if det != 1.into() {
            return Err(Error::Config(format!("generator {matrix:?} has determinant {det}, expected 1")));
        }
        Ok(Self { matrix, chi })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: IntMatrix::identity(dim), chi: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `self · rhs`, with χ added.
    pub fn compose(&self, rhs: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement { matrix: self.matrix.mul(&rhs.matrix)?, chi: self.chi + rhs.chi })
    }

    pub fn inverse(&self) -> Result<GroupElement> {
        Ok(GroupElement { matrix: self.matrix.inverse_unimodular()?, chi: -self.chi })
    }
}

/// A word in the generators, as generator indices. `letters[0]` is `b₁`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<usize>,
}

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Self { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn slice(&self, from: usize, to: usize) -> Word {
        Word { letters: self.letters[from..to].to_vec() }
    }
}

impl From<Vec<usize>> for Word {
    fn from(letters: Vec<usize>) -> Self {
        Self { letters }
    }
}

/// `g.(x, t) = (g x, t + χ(g))`.
pub fn apply(g: &GroupElement, s: &StateXT) -> Result<StateXT> {
    Ok(StateXT { x: s.x.apply(&g.matrix)?, t: s.t + g.chi })
}
