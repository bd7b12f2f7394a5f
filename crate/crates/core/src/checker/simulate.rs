use rand::distributions::{Distribution as _, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::markov::Model;
use num_traits::ToPrimitive;

/// Visit counts per time and state over sampled paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    runs: usize,
    /// `counts[t][s]`; empty when no runs were sampled.
    counts: Vec<Vec<u64>>,
}

impl FrequencyTable {
    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs == 0
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn count(&self, t: usize, s: usize) -> u64 {
        self.counts[t][s]
    }

    pub fn frequency(&self, t: usize, s: usize) -> f64 {
        self.counts[t][s] as f64 / self.runs as f64
    }
}

/// Samples `n` paths of length `horizon + 1`, deterministically for a
/// given seed.
pub fn simulate_runs(model: &Model, horizon: usize, n: usize, seed: u64) -> FrequencyTable {
    if n == 0 {
        return FrequencyTable {
            runs: 0,
            counts: Vec::new(),
        };
    }
    let weights = |row: &[crate::markov::Rational]| -> WeightedIndex<f64> {
        let w: Vec<f64> = row.iter().map(|x| x.to_f64().unwrap_or(0.0)).collect();
        WeightedIndex::new(w).expect("validated models have positive rows")
    };
    let init = weights(model.init().weights());
    let rows: Vec<WeightedIndex<f64>> = (0..model.num_states())
        .map(|s| weights(model.trans().row(s)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![vec![0u64; model.num_states()]; horizon + 1];
    for _ in 0..n {
        let mut s = init.sample(&mut rng);
        counts[0][s] += 1;
        for row in counts.iter_mut().skip(1) {
            s = rows[s].sample(&mut rng);
            row[s] += 1;
        }
    }
    FrequencyTable { runs: n, counts }
}
