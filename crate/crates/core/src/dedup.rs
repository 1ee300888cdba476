//! Duplicate removal and the one-tweet-per-user-per-month limit.

use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::Datelike;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::TweetRecord;

/// How aggressively near-duplicate keys are normalized.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    /// Strip hashtags and handles, case-fold, collapse whitespace.
    #[default]
    Folded,
    /// Strip hashtags and handles and collapse whitespace, keeping case.
    Strict,
}

/// Tweet text with hashtag and @username tokens removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DedupKey(String);

impl DedupKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub fn normalize_for_dedup(text: &str, mode: DedupMode) -> DedupKey {
    let kept: Vec<&str> = text
        .split_whitespace()
        .filter(|tok| !tok.starts_with('#') && !tok.starts_with('@'))
        .collect();
    let joined = kept.join(" ");
    DedupKey(match mode {
        DedupMode::Folded => joined.to_lowercase(),
        DedupMode::Strict => joined,
    })
}

/// Keeps the earliest tweet per dedup key (ties go to the smaller tweet id).
/// Survivors stay in input order.
pub fn remove_duplicates(records: Vec<TweetRecord>, mode: DedupMode) -> Vec<TweetRecord> {
    let mut winner: HashMap<DedupKey, usize> = HashMap::new();
    for (i, rec) in records.iter().enumerate() {
        let key = normalize_for_dedup(&rec.text, mode);
        winner
            .entry(key)
            .and_modify(|best| {
                let cur = &records[*best];
                if (rec.timestamp, &rec.tweet_id) < (cur.timestamp, &cur.tweet_id) {
                    *best = i;
                }
            })
            .or_insert(i);
    }
    let keep: HashSet<usize> = winner.into_values().collect();
    records
        .into_iter()
        .enumerate()
        .filter_map(|(i, rec)| keep.contains(&i).then_some(rec))
        .collect()
}

/// An author's posts within one UTC calendar month.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonthBucket {
    pub author_id: String,
    pub year: i32,
    pub month: u32,
}

impl MonthBucket {
    pub fn of(rec: &TweetRecord) -> Self {
        MonthBucket {
            author_id: rec.author_id.clone(),
            year: rec.timestamp.year(),
            month: rec.timestamp.month(),
        }
    }

    /// Stream id for the bucket's generator. FNV-1a keeps it stable across
    /// platforms and releases.
    fn stream(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let key = format!("{}\u{0}{:04}-{:02}", self.author_id, self.year, self.month);
        for b in key.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }
}

/// Keeps one uniformly chosen tweet per author per calendar month.
///
/// Each bucket draws from its own generator, keyed by the seed and the
/// bucket, so a survivor does not depend on the rest of the corpus or on
/// input order. Survivors stay in input order.
pub fn limit_user_monthly(records: Vec<TweetRecord>, seed: u64) -> Vec<TweetRecord> {
    let mut buckets: BTreeMap<MonthBucket, Vec<usize>> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        buckets.entry(MonthBucket::of(rec)).or_default().push(i);
    }

    let mut keep = HashSet::with_capacity(buckets.len());
    for (bucket, mut members) in buckets {
        if members.len() == 1 {
            keep.insert(members[0]);
            continue;
        }
        members.sort_by(|&x, &y| {
            (records[x].timestamp, &records[x].tweet_id)
                .cmp(&(records[y].timestamp, &records[y].tweet_id))
        });
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(bucket.stream());
        keep.insert(members[rng.random_range(0..members.len())]);
    }

    records
        .into_iter()
        .enumerate()
        .filter_map(|(i, rec)| keep.contains(&i).then_some(rec))
        .collect()
}
