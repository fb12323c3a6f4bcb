//! nDCG@k, TREC qrels/run interchange and collection statistics.

mod ndcg;
mod stats;
mod trec;

pub use ndcg::{ndcg_at_k, write_eval_tsv, EvalError, EvalResult, GainMode};
pub use stats::{collection_stats, write_stats_tsv, StatRow, StatsInputs};
pub use trec::{read_qrels, read_run, write_qrels, write_run, TrecError};
