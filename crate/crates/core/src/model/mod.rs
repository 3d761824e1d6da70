//! Exact model of the walk: SL_d(Z) generators, the χ cocycle and the state
//! space T^d × R.

mod config;
mod group;
mod matrix;
mod torus;

pub use config::{chi_of_word, word_product, ConfigFile, ProbSpec, WalkConfig, REFERENCE_MODEL};
pub use group::{apply, GroupElement, Word};
pub use matrix::{k_subsets, IntMatrix};
pub use torus::{float_apply, torus_distance, wrap_unit, ExactPoint, FractionPair, StateXT, TorusPoint};
