use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::Partition;
use crate::text;

/// Per-tweet term sets plus per-partition document frequencies.
///
/// Documents keep the order they were added in, so document `i` lines up
/// with whatever record slice the index was built from. A document with no
/// label belongs to no partition but still counts towards the corpus total.
#[derive(Debug, Clone, Default)]
pub struct TermIndex {
    terms: Vec<String>,
    ids: HashMap<String, u32>,
    docs: Vec<Vec<u32>>,
    labels: Vec<Option<Partition>>,
    sizes: BTreeMap<Partition, usize>,
    df: BTreeMap<Partition, HashMap<u32, u32>>,
    df_total: Vec<u32>,
}

impl TermIndex {
    /// Tokenizes `texts` in parallel and indexes them under `labels`.
    pub fn build<S>(texts: &[S], labels: Vec<Option<Partition>>) -> Self
    where
        S: AsRef<str> + Sync,
    {
        let sets: Vec<BTreeSet<String>> = texts.par_iter().map(|t| text::tokenize(t.as_ref())).collect();
        TermIndex::from_term_sets(sets, labels)
    }

    pub fn from_term_sets(sets: Vec<BTreeSet<String>>, labels: Vec<Option<Partition>>) -> Self {
        assert_eq!(sets.len(), labels.len(), "one label per document");
        let mut index = TermIndex::default();
        for set in sets {
            let mut doc: Vec<u32> = set.into_iter().map(|term| index.intern(term)).collect();
            doc.sort_unstable();
            index.docs.push(doc);
        }
        index.df_total = vec![0; index.terms.len()];
        for doc in &index.docs {
            for &id in doc {
                index.df_total[id as usize] += 1;
            }
        }
        index.relabel(labels);
        index
    }

    fn intern(&mut self, term: String) -> u32 {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = u32::try_from(self.terms.len()).expect("fewer than 2^32 distinct terms");
        self.ids.insert(term.clone(), id);
        self.terms.push(term);
        id
    }

    fn relabel(&mut self, labels: Vec<Option<Partition>>) {
        assert_eq!(labels.len(), self.docs.len(), "one label per document");
        self.sizes.clear();
        self.df.clear();
        for (doc, label) in self.docs.iter().zip(&labels) {
            let Some(p) = label else { continue };
            *self.sizes.entry(p.clone()).or_default() += 1;
            let df = self.df.entry(p.clone()).or_default();
            for &id in doc {
                *df.entry(id).or_default() += 1;
            }
        }
        self.labels = labels;
    }

    /// Same documents and term sets under a different partitioning.
    pub fn with_labels(&self, labels: Vec<Option<Partition>>) -> TermIndex {
        let mut index = TermIndex {
            terms: self.terms.clone(),
            ids: self.ids.clone(),
            docs: self.docs.clone(),
            df_total: self.df_total.clone(),
            ..TermIndex::default()
        };
        index.relabel(labels);
        index
    }

    /// Number of documents, labelled or not.
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn partitions(&self) -> impl Iterator<Item = (&Partition, usize)> {
        self.sizes.iter().map(|(p, n)| (p, *n))
    }

    pub fn partition_size(&self, p: &Partition) -> Option<usize> {
        self.sizes.get(p).copied()
    }

    pub fn label(&self, doc: usize) -> Option<&Partition> {
        self.labels.get(doc).and_then(Option::as_ref)
    }

    pub fn doc_terms(&self, doc: usize) -> impl Iterator<Item = &str> {
        self.docs[doc].iter().map(|&id| self.terms[id as usize].as_str())
    }

    pub fn doc_contains(&self, doc: usize, term: &str) -> bool {
        self.ids
            .get(term)
            .is_some_and(|id| self.docs[doc].binary_search(id).is_ok())
    }

    /// Documents in `p` whose term set contains `term`, in index order.
    pub fn docs_with_term<'a>(&'a self, p: &'a Partition, term: &'a str) -> impl Iterator<Item = usize> + 'a {
        let id = self.ids.get(term).copied();
        (0..self.docs.len()).filter(move |&i| {
            id.is_some_and(|id| self.labels[i].as_ref() == Some(p) && self.docs[i].binary_search(&id).is_ok())
        })
    }

    /// Tweets in partition `p` containing `term`.
    pub fn df(&self, term: &str, p: &Partition) -> u64 {
        let Some(id) = self.ids.get(term) else { return 0 };
        self.df
            .get(p)
            .and_then(|m| m.get(id))
            .map_or(0, |&n| u64::from(n))
    }

    /// Tweets anywhere in the corpus containing `term`.
    pub fn df_total(&self, term: &str) -> u64 {
        self.ids
            .get(term)
            .map_or(0, |&id| u64::from(self.df_total[id as usize]))
    }

    /// Terms of partition `p` with document frequency at least `min_df`,
    /// sorted lexicographically, with that frequency.
    pub fn terms_with_min_df(&self, p: &Partition, min_df: u64) -> Vec<(&str, u64)> {
        let mut out: Vec<(&str, u64)> = self
            .df
            .get(p)
            .into_iter()
            .flatten()
            .filter(|(_, &n)| u64::from(n) >= min_df)
            .map(|(&id, &n)| (self.terms[id as usize].as_str(), u64::from(n)))
            .collect();
        out.sort_unstable();
        out
    }
}
