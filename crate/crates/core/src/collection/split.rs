use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Query, Split, SplitAssignment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self { dev: 0.1, test: 0.1 }
    }
}

impl SplitRatios {
    /// (train, dev, test) sizes for `n` queries: dev is rounded, test is
    /// floored, train takes the rest.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let dev = ((n as f64 * self.dev).round() as usize).min(n);
        let test = ((n as f64 * self.test).floor() as usize).min(n - dev);
        (n - dev - test, dev, test)
    }
}

/// Analysis queries go to the analysis split; the rest are shuffled with a
/// seeded ChaCha8 generator and cut into dev, test and train.
pub fn split_dataset(queries: &[Query], analysis_qids: &BTreeSet<String>, seed: u64, ratios: SplitRatios) -> SplitAssignment {
    let mut assignment = BTreeMap::new();
    let mut pool: Vec<&str> = Vec::new();
    for q in queries {
        if analysis_qids.contains(&q.qid) {
            assignment.insert(q.qid.clone(), Split::Analysis);
        } else {
            pool.push(&q.qid);
        }
    }
    pool.sort_unstable();
    pool.dedup();
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let (_, dev, test) = ratios.sizes(pool.len());
    for (i, qid) in pool.into_iter().enumerate() {
        let split = if i < dev {
            Split::Dev
        } else if i < dev + test {
            Split::Test
        } else {
            Split::Train
        };
        assignment.insert(qid.to_owned(), split);
    }
    SplitAssignment { assignment }
}
