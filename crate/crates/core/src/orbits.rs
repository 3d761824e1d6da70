//! Finite orbits of rational points and the block structure of orbits in
//! `T^d × Z/m`.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::empirical::EmpiricalMeasure;
use crate::error::{precondition, Error, Result};
use crate::model::{ExactPoint, FractionPair, StateXT, TorusPoint, WalkConfig};

/// Orbit points in breadth-first discovery order.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<ExactPoint>,
    index: HashMap<ExactPoint, usize>,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &ExactPoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn contains(&self, p: &ExactPoint) -> bool {
        self.index.contains_key(p)
    }

    pub fn to_fractions(&self) -> Vec<Vec<FractionPair>> {
        self.points.iter().map(Vec::from).collect()
    }
}

/// Closure of `x` under the configured generators (the semigroup they
/// generate; the orbit is finite, so this is also the group orbit).
pub fn rational_orbit(x: &ExactPoint, cfg: &WalkConfig) -> Result<Orbit> {
    if x.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, found: x.dim() });
    }
    let bound = x.denominator().pow(x.dim() as u32);
    let mut points = vec![x.clone()];
    let mut index = HashMap::from([(x.clone(), 0usize)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in &cfg.generators {
            let y = points[i].apply(&g.matrix)?;
            if !index.contains_key(&y) {
                index.insert(y.clone(), points.len());
                queue.push_back(points.len());
                points.push(y);
                if BigInt::from(points.len()) > bound {
                    return Err(Error::Numerical("orbit exceeds q^d points".into()));
                }
            }
        }
    }
    Ok(Orbit { points, index })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockVertex {
    pub point: Vec<FractionPair>,
    pub level: u64,
}

/// Strongly connected components of `(y, k) → (g y, k + χ(g) mod m)` on
/// `orbit(x) × Z/m`. Vertices inside a component are ordered by (orbit
/// index, level); components by their first vertex.
pub fn block_orbit_components(x: &ExactPoint, cfg: &WalkConfig, m: u64) -> Result<Vec<Vec<BlockVertex>>> {
    if m == 0 {
        return precondition("m must be at least 1");
    }
    let chi = cfg.require_int_chi()?;
    let orbit = rational_orbit(x, cfg)?;
    let n = orbit.len();
    let id = |i: usize, k: u64| i * m as usize + k as usize;
    let mut graph = DiGraph::<(usize, u64), ()>::with_capacity(n * m as usize, 0);
    for i in 0..n {
        for k in 0..m {
            graph.add_node((i, k));
        }
    }
    for i in 0..n {
        for (g, &c) in cfg.generators.iter().zip(chi) {
            let j = orbit.index_of(&orbit.points[i].apply(&g.matrix)?).expect("orbit is closed");
            for k in 0..m {
                let k2 = (k as i64 + c).rem_euclid(m as i64) as u64;
                graph.add_edge((id(i, k) as u32).into(), (id(j, k2) as u32).into(), ());
            }
        }
    }
    let mut comps: Vec<Vec<(usize, u64)>> = tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut v: Vec<(usize, u64)> = c.into_iter().map(|ix| graph[ix]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    Ok(comps
        .into_iter()
        .map(|c| {
            c.into_iter().map(|(i, level)| BlockVertex { point: Vec::from(&orbit.points[i]), level }).collect()
        })
        .collect())
}

/// Uniform probability on the orbit, at `t = 0`.
pub fn uniform_orbit_measure(orbit: &Orbit) -> Result<EmpiricalMeasure> {
    if orbit.is_empty() {
        return precondition("orbit must be nonempty");
    }
    Ok(EmpiricalMeasure::uniform(
        orbit.points.iter().map(|p| StateXT::new(TorusPoint::Exact(p.clone()), 0.0)).collect(),
    ))
}

/// Exact weights of one step of the walk applied to the uniform measure on
/// the orbit (torus marginal), indexed like `orbit.points`.
pub fn one_step_pushforward(orbit: &Orbit, cfg: &WalkConfig) -> Result<Vec<BigRational>> {
    let n = orbit.len();
    let w = BigRational::new(BigInt::one(), BigInt::from(n));
    let mut out = vec![BigRational::zero(); n];
    for p in &orbit.points {
        for (g, prob) in cfg.generators.iter().zip(&cfg.exact_probs) {
            let j = orbit
                .index_of(&p.apply(&g.matrix)?)
                .ok_or_else(|| Error::Precondition("point set is not closed under the generators".into()))?;
            out[j] += &w * prob;
        }
    }
    Ok(out)
}

/// `max_y |(μ ⋆ u)(y) − u(y)|` for the uniform measure `u` on the orbit, exactly.
pub fn stationarity_residual(orbit: &Orbit, cfg: &WalkConfig) -> Result<BigRational> {
    let w = BigRational::new(BigInt::one(), BigInt::from(orbit.len()));
    Ok(one_step_pushforward(orbit, cfg)?
        .into_iter()
        .map(|v| (v - &w).abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[(i64, i64)]) -> ExactPoint {
        ExactPoint::from_fractions(c).unwrap()
    }

    #[test]
    fn quarter_orbit_has_two_points() {
        let cfg = WalkConfig::reference();
        let o = rational_orbit(&pt(&[(1, 4), (0, 1)]), &cfg).unwrap();
        assert_eq!(o.points, vec![pt(&[(1, 4), (0, 1)]), pt(&[(1, 4), (1, 2)])]);
    }

    #[test]
    fn fixed_points() {
        let cfg = WalkConfig::reference();
        assert_eq!(rational_orbit(&ExactPoint::zero(2), &cfg).unwrap().len(), 1);
        assert_eq!(rational_orbit(&pt(&[(1, 2), (0, 1)]), &cfg).unwrap().len(), 1);
    }

    #[test]
    fn orbit_is_closed_and_bounded() {
        let cfg = WalkConfig::reference();
        let x = pt(&[(1, 7), (3, 7)]);
        let o = rational_orbit(&x, &cfg).unwrap();
        assert!(o.len() <= 49);
        for p in &o.points {
            for g in &cfg.generators {
                assert!(o.contains(&p.apply(&g.matrix).unwrap()));
            }
        }
    }

    #[test]
    fn parity_blocks() {
        let cfg = WalkConfig::reference();
        let comps = block_orbit_components(&pt(&[(1, 4), (0, 1)]), &cfg, 2).unwrap();
        assert_eq!(comps.len(), 2);
        let first: Vec<(Vec<FractionPair>, u64)> = comps[0].iter().map(|v| (v.point.clone(), v.level)).collect();
        assert_eq!(
            first,
            vec![(Vec::from(&pt(&[(1, 4), (0, 1)])), 0), (Vec::from(&pt(&[(1, 4), (1, 2)])), 1)]
        );
        let one = block_orbit_components(&pt(&[(1, 4), (0, 1)]), &cfg, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 2);
        let zero = block_orbit_components(&ExactPoint::zero(2), &cfg, 2).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].len(), 2);
    }

    #[test]
    fn uniform_measure_is_stationary() {
        let cfg = WalkConfig::reference();
        let o = rational_orbit(&pt(&[(1, 4), (0, 1)]), &cfg).unwrap();
        assert!(stationarity_residual(&o, &cfg).unwrap().is_zero());
        let m = uniform_orbit_measure(&o).unwrap();
        assert_eq!(m.weights(), vec![0.5, 0.5]);
        let s = rational_orbit(&ExactPoint::zero(2), &cfg).unwrap();
        assert_eq!(uniform_orbit_measure(&s).unwrap().weights(), vec![1.0]);
    }
}
