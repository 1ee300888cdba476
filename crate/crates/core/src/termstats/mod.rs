//! Term over-representation statistics: the automatic stage of WATA.
//!
//! For a target partition (usually one country) every sufficiently frequent
//! term gets a 2×2 table against the comparison tweets, a chi-square
//! statistic and p-value. Benjamini–Hochberg runs over all candidates of the
//! partition, and the significant over-represented terms are ranked by
//! statistic.

mod index;
mod stats;

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::TermIndex;
pub use stats::{benjamini_hochberg, chi_square, chi_square_p, ContingencyTable};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("contingency table is empty")]
    EmptyTable,
    #[error("chi-square statistic must be non-negative, got {0}")]
    NegativeStatistic(f64),
    #[error("p-value {value} at index {index} is outside [0, 1]")]
    InvalidPValue { index: usize, value: f64 },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("unknown partition {0}")]
    UnknownPartition(Partition),
    #[error("term list: {0}")]
    Csv(#[from] csv::Error),
}

/// Label of a sub-corpus: a country code, or a gender split within one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(String);

impl Partition {
    pub fn new(label: impl Into<String>) -> Self {
        Partition(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// What a target partition is compared against.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Every tweet outside the target, labelled or not.
    #[default]
    Rest,
    /// Only tweets in these partitions (the target itself is skipped).
    Partitions(Vec<Partition>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    pub alpha: f64,
    pub top_k: usize,
    pub min_df: u64,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            alpha: 0.05,
            top_k: 100,
            min_df: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub partition: Partition,
    pub table: ContingencyTable,
    pub chi2: f64,
    pub p_value: f64,
    pub significant: bool,
    pub rank: usize,
}

fn comparison_counts(
    term: &str,
    target: &Partition,
    comparison: &Comparison,
    index: &TermIndex,
) -> Result<(u64, u64), StatsError> {
    match comparison {
        Comparison::Rest => {
            let n_target = index.partition_size(target).unwrap_or(0) as u64;
            let n = index.len() as u64 - n_target;
            let c = index.df_total(term) - index.df(term, target);
            Ok((c, n))
        }
        Comparison::Partitions(parts) => {
            let mut c = 0;
            let mut n = 0;
            for p in parts.iter().filter(|p| *p != target) {
                let size = index
                    .partition_size(p)
                    .ok_or_else(|| StatsError::UnknownPartition(p.clone()))?;
                n += size as u64;
                c += index.df(term, p);
            }
            Ok((c, n))
        }
    }
}

/// 2×2 table for `term`; an unseen term gives `a = c = 0`.
pub fn build_contingency(
    term: &str,
    target: &Partition,
    comparison: &Comparison,
    index: &TermIndex,
) -> Result<ContingencyTable, StatsError> {
    let n_target = index
        .partition_size(target)
        .ok_or_else(|| StatsError::UnknownPartition(target.clone()))? as u64;
    let a = index.df(term, target);
    let (c, n_comparison) = comparison_counts(term, target, comparison, index)?;
    Ok(ContingencyTable::new(a, n_target - a, c, n_comparison - c))
}

/// Scores every candidate term of `target` (document frequency ≥ `min_df`),
/// without BH. Candidates come back in lexicographic term order.
pub fn score_candidates(
    target: &Partition,
    comparison: &Comparison,
    index: &TermIndex,
    min_df: u64,
) -> Result<Vec<TermScore>, StatsError> {
    index
        .terms_with_min_df(target, min_df)
        .par_iter()
        .map(|&(term, _)| {
            let table = build_contingency(term, target, comparison, index)?;
            let chi2 = chi_square(&table)?;
            Ok(TermScore {
                term: term.to_string(),
                partition: target.clone(),
                table,
                chi2,
                p_value: chi_square_p(chi2)?,
                significant: false,
                rank: 0,
            })
        })
        .collect()
}

fn rank_order(x: &TermScore, y: &TermScore) -> Ordering {
    y.chi2
        .total_cmp(&x.chi2)
        .then(y.table.a.cmp(&x.table.a))
        .then_with(|| x.term.cmp(&y.term))
}

/// Significant over-represented terms of `target`, strongest first, at most
/// `top_k` of them, ranked from 1.
pub fn rank_terms(
    target: &Partition,
    comparison: &Comparison,
    index: &TermIndex,
    params: &RankParams,
) -> Result<Vec<TermScore>, StatsError> {
    let mut scores = score_candidates(target, comparison, index, params.min_df)?;
    let p_values: Vec<f64> = scores.iter().map(|s| s.p_value).collect();
    let rejected = benjamini_hochberg(&p_values, params.alpha)?;
    for (i, s) in scores.iter_mut().enumerate() {
        s.significant = rejected.contains(&i) && s.table.over_represented();
    }
    scores.retain(|s| s.significant);
    scores.sort_by(rank_order);
    scores.truncate(params.top_k);
    for (i, s) in scores.iter_mut().enumerate() {
        s.rank = i + 1;
    }
    Ok(scores)
}

#[derive(Debug, Serialize, Deserialize)]
struct TermRow {
    rank: usize,
    term: String,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
    chi2: f64,
    p: f64,
    significant: bool,
}

/// Writes a ranked list as `rank,term,a,b,c,d,chi2,p,significant`.
pub fn write_term_list<W: Write>(out: W, scores: &[TermScore]) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(out);
    if scores.is_empty() {
        w.write_record(["rank", "term", "a", "b", "c", "d", "chi2", "p", "significant"])?;
    }
    for s in scores {
        w.serialize(TermRow {
            rank: s.rank,
            term: s.term.clone(),
            a: s.table.a,
            b: s.table.b,
            c: s.table.c,
            d: s.table.d,
            chi2: s.chi2,
            p: s.p_value,
            significant: s.significant,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_term_list<R: Read>(input: R, partition: &Partition) -> Result<Vec<TermScore>, StatsError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<TermRow>()
        .map(|row| {
            let row = row?;
            Ok(TermScore {
                term: row.term,
                partition: partition.clone(),
                table: ContingencyTable::new(row.a, row.b, row.c, row.d),
                chi2: row.chi2,
                p_value: row.p,
                significant: row.significant,
                rank: row.rank,
            })
        })
        .collect()
}
