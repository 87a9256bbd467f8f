//! Training pairs, token diffs, repair classes and repair profiles.

pub mod catalog;
pub mod diff;
pub mod loader;
pub mod mining;

pub use catalog::{ClassCatalog, RepairClass};
pub use diff::{diff_tokens, Diff, Edit};
pub use loader::{load_corpus, LoadedCorpus, TrainPair};
pub use mining::{line_bigrams, mine_pair, Bigram, ClassKey, MinedPair, RepairKind};

/// Result of mining a whole corpus.
#[derive(Debug, Clone, Default)]
pub struct MinedCorpus {
    pub pairs: Vec<MinedPair>,
    /// Pairs dropped because they were not single-line, failed to lex, or
    /// were no-ops.
    pub dropped: usize,
}

pub fn mine_corpus(pairs: &[TrainPair]) -> MinedCorpus {
    use rayon::prelude::*;
    let mined: Vec<_> = pairs.par_iter().enumerate().map(|(i, p)| mine_pair(i, p)).collect();
    let mut out = MinedCorpus::default();
    for m in mined {
        match m {
            Ok(m) => out.pairs.push(m),
            Err(e) => {
                log::debug!("dropping pair: {e}");
                out.dropped += 1;
            }
        }
    }
    out
}
