//! Seeded tweet samples for reading a term in context.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;
use crate::termstats::{Partition, StatsError, TermIndex};

pub const DEFAULT_SAMPLE_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRequest {
    pub term: String,
    pub partition: Partition,
    pub n: usize,
    pub seed: u64,
}

/// Draws `min(n, matches)` tweets without replacement from the partition's
/// tweets containing the term, returned oldest first.
///
/// `store[i]` must be the record indexed as document `i`.
pub fn sample_tweets(
    req: &SampleRequest,
    index: &TermIndex,
    store: &[TweetRecord],
) -> Result<Vec<TweetRecord>, StatsError> {
    assert_eq!(index.len(), store.len(), "index built over this store");
    if index.partition_size(&req.partition).is_none() {
        return Err(StatsError::UnknownPartition(req.partition.clone()));
    }
    let term = req.term.to_lowercase();
    let pool: Vec<usize> = index.docs_with_term(&req.partition, &term).collect();
    let amount = req.n.min(pool.len());
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut picked: Vec<&TweetRecord> = rand::seq::index::sample(&mut rng, pool.len(), amount)
        .into_iter()
        .map(|i| &store[pool[i]])
        .collect();
    picked.sort_by(|x, y| (x.timestamp, &x.tweet_id).cmp(&(y.timestamp, &y.tweet_id)));
    Ok(picked.into_iter().cloned().collect())
}
