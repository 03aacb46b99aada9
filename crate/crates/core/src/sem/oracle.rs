use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Resolves the nondeterministic choice of the built-in `select` (and of
/// the scheduler when running parallel programs).
///
/// `candidates` is never empty and sorted ascending. Returning `None`, or a
/// value outside `candidates`, declines the choice; the caller then stops.
pub trait ChoiceOracle {
    fn choose(&mut self, candidates: &[usize]) -> Option<usize>;
}

impl<F: FnMut(&[usize]) -> Option<usize>> ChoiceOracle for F {
    fn choose(&mut self, candidates: &[usize]) -> Option<usize> {
        self(candidates)
    }
}

/// Answers from a fixed script, one entry per choice.
#[derive(Debug, Clone, Default)]
pub struct ScriptedOracle {
    script: VecDeque<usize>,
}

impl ScriptedOracle {
    pub fn new(script: impl IntoIterator<Item = usize>) -> Self {
        ScriptedOracle {
            script: script.into_iter().collect(),
        }
    }

    pub fn remaining(&self) -> usize {
        self.script.len()
    }
}

impl ChoiceOracle for ScriptedOracle {
    fn choose(&mut self, _candidates: &[usize]) -> Option<usize> {
        self.script.pop_front()
    }
}

/// Uniform pseudo-random choice from a seed; runs are reproducible.
#[derive(Debug, Clone)]
pub struct SeededOracle {
    rng: ChaCha8Rng,
}

impl SeededOracle {
    pub fn new(seed: u64) -> Self {
        SeededOracle {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl ChoiceOracle for SeededOracle {
    fn choose(&mut self, candidates: &[usize]) -> Option<usize> {
        let i = self.rng.gen_range(0..candidates.len());
        Some(candidates[i])
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FirstOracle;

impl ChoiceOracle for FirstOracle {
    fn choose(&mut self, candidates: &[usize]) -> Option<usize> {
        candidates.first().copied()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LastOracle;

impl ChoiceOracle for LastOracle {
    fn choose(&mut self, candidates: &[usize]) -> Option<usize> {
        candidates.last().copied()
    }
}

/// Declines every choice.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoChoice;

impl ChoiceOracle for NoChoice {
    fn choose(&mut self, _candidates: &[usize]) -> Option<usize> {
        None
    }
}
