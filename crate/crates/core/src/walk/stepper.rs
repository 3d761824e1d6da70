//! Exact torus stepping on points with denominator `2^bits` (`bits ≤ 128`),
//! using wrapping `u128` arithmetic.

use crate::error::{precondition, Result};
use crate::model::WalkConfig;

#[derive(Clone, Debug)]
pub struct DyadicTorus {
    dim: usize,
    bits: u32,
    mask: u128,
    mats: Vec<Vec<u128>>,
}

impl DyadicTorus {
    pub fn new(cfg: &WalkConfig, bits: u32) -> Result<Self> {
        if bits == 0 || bits > 128 {
            return precondition("dyadic stepping needs 1 <= bits <= 128");
        }
        let Some(small) = cfg.small_matrices() else {
            return precondition("generator entries do not fit in i64");
        };
        let mask = if bits == 128 { u128::MAX } else { (1u128 << bits) - 1 };
        let mats = small.iter().map(|m| m.iter().map(|&e| e as i128 as u128).collect()).collect();
        Ok(Self { dim: cfg.dim, bits, mask, mats })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `x ← b x mod 1` in numerator coordinates.
    #[inline]
    pub fn step(&self, letter: usize, x: &mut [u128], scratch: &mut [u128]) {
        let m = &self.mats[letter];
        let d = self.dim;
        for i in 0..d {
            let mut acc = 0u128;
            for j in 0..d {
                acc = acc.wrapping_add(m[i * d + j].wrapping_mul(x[j]));
            }
            scratch[i] = acc & self.mask;
        }
        x.copy_from_slice(&scratch[..d]);
    }

    /// Numerators of the nearest dyadic point to `coords`.
    pub fn from_f64(&self, coords: &[f64]) -> Vec<u128> {
        let scale = 2f64.powi(self.bits as i32);
        coords
            .iter()
            .map(|&c| {
                // signed representative in [-1/2, 1/2] keeps tiny negatives exact
                let r = c - c.round();
                ((r * scale).round() as i128 as u128) & self.mask
            })
            .collect()
    }

    /// Coordinates in `[0, 1)` (rounded to `f64`).
    pub fn to_f64(&self, x: &[u128]) -> Vec<f64> {
        let scale = 2f64.powi(-(self.bits as i32));
        x.iter().map(|&n| n as f64 * scale).collect()
    }

    /// Quotient distance to 0.
    pub fn distance_to_zero(&self, x: &[u128]) -> f64 {
        let scale = 2f64.powi(-(self.bits as i32));
        x.iter()
            .map(|&n| {
                let m = n.min(self.mask.wrapping_sub(n).wrapping_add(1) & self.mask);
                let v = m as f64 * scale;
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }
}
