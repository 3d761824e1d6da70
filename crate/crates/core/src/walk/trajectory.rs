use crate::error::{Error, Result};
use crate::model::{float_apply, StateXT, TorusPoint, WalkConfig, Word};
use crate::rng::replica_rng;

/// A sampled path: `states[0] = start` and `states[k] = b_k . states[k−1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub start: StateXT,
    pub states: Vec<StateXT>,
    pub word: Word,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn last(&self) -> &StateXT {
        self.states.last().unwrap_or(&self.start)
    }
}

/// Runs `n` steps from `start` with i.i.d. letters drawn from `seed`.
pub fn simulate(cfg: &WalkConfig, start: &StateXT, n: usize, seed: u64) -> Result<Trajectory> {
    let mut rng = replica_rng(seed, 0);
    let word = cfg.sample_word(&mut rng, n);
    run_word(cfg, start, &word)
}

/// Applies `word` letter by letter from `start`.
pub fn run_word(cfg: &WalkConfig, start: &StateXT, word: &Word) -> Result<Trajectory> {
    cfg.check_word(word)?;
    if start.x.dim() != cfg.dim {
        return Err(Error::DimensionMismatch { expected: cfg.dim, found: start.x.dim() });
    }
    let mut states = Vec::with_capacity(word.len() + 1);
    states.push(start.clone());
    let mut cur = start.clone();
    let mut buf = vec![0.0; cfg.dim];
    for &l in &word.letters {
        let x = match &cur.x {
            TorusPoint::Exact(p) => TorusPoint::Exact(p.apply(&cfg.generators[l].matrix)?),
            TorusPoint::Float(v) => {
                float_apply(cfg.float_matrix(l), v, &mut buf);
                TorusPoint::Float(buf.clone())
            }
        };
        cur = StateXT { x, t: cur.t + cfg.chi(l) };
        states.push(cur.clone());
    }
    Ok(Trajectory { start: start.clone(), states, word: word.clone() })
}
