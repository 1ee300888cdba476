//! Tweeter gender inference and gendered term lists.
//!
//! Gender comes from declared they/them pronouns in the bio (nonbinary) or,
//! failing that, from the first token of the display name looked up in a
//! lexicon of names used at least 90% by one gender. Everyone else is
//! unknown. No name data ships with the crate.

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::TweetRecord;
use crate::termstats::{rank_terms, Comparison, Partition, RankParams, StatsError, TermIndex, TermScore};

/// Smallest share of one gender for a name to count as gendered.
pub const MIN_PROPORTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to read lexicon: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("lexicon line {line}: {name:?} has proportion {proportion}, below {MIN_PROPORTION}")]
    BelowThreshold { line: usize, name: String, proportion: f64 },
    #[error("lexicon line {line}: {name:?} listed twice")]
    Duplicate { line: usize, name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Nonbinary,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderBasis {
    Name,
    Pronouns,
    None,
}

#[derive(Debug, Clone, Default)]
pub struct GenderLexicon {
    names: HashMap<String, (Gender, f64)>,
}

impl GenderLexicon {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let file = std::fs::File::open(path)?;
        GenderLexicon::from_reader(std::io::BufReader::new(file))
    }

    /// Reads `name,gender,proportion` lines (`gender` is `male` or `female`).
    /// Entries below [`MIN_PROPORTION`] are rejected, not skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut lex = GenderLexicon::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if lineno == 1 && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("name")) {
                continue;
            }
            let malformed = |reason: String| LexiconError::Malformed { line: lineno, reason };
            let [name, gender, proportion] = fields[..] else {
                return Err(malformed(format!("expected 3 fields, found {}", fields.len())));
            };
            let name = name.to_lowercase();
            if name.is_empty() || name.chars().any(char::is_whitespace) {
                return Err(malformed(format!("bad name {name:?}")));
            }
            let gender = match gender.to_ascii_lowercase().as_str() {
                "male" | "m" => Gender::Male,
                "female" | "f" => Gender::Female,
                other => return Err(malformed(format!("gender must be male or female, got {other:?}"))),
            };
            let proportion: f64 = proportion
                .parse()
                .map_err(|_| malformed(format!("bad proportion {proportion:?}")))?;
            if proportion.is_nan() || proportion > 1.0 {
                return Err(malformed(format!("proportion {proportion} outside [0, 1]")));
            }
            if proportion < MIN_PROPORTION {
                return Err(LexiconError::BelowThreshold { line: lineno, name, proportion });
            }
            if lex.names.contains_key(&name) {
                return Err(LexiconError::Duplicate { line: lineno, name });
            }
            lex.names.insert(name, (gender, proportion));
        }
        Ok(lex)
    }

    pub fn get(&self, name: &str) -> Option<(Gender, f64)> {
        self.names.get(&name.to_lowercase()).copied()
    }

    pub fn remove(&mut self, name: &str) -> Option<(Gender, f64)> {
        self.names.remove(&name.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderAssignment {
    pub author_id: String,
    pub gender: Gender,
    pub basis: GenderBasis,
}

static THEY_THEM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bthey\s*/\s*them\b").expect("pronoun pattern compiles"));

/// Infers gender from the bio and display name. Declared they/them
/// pronouns win over any name match.
pub fn infer_gender(author_id: &str, display_name: &str, bio: &str, lex: &GenderLexicon) -> GenderAssignment {
    let (gender, basis) = if THEY_THEM.is_match(bio) {
        (Gender::Nonbinary, GenderBasis::Pronouns)
    } else {
        display_name
            .split_whitespace()
            .next()
            .map(|tok| tok.trim_matches(|c: char| !c.is_alphabetic()))
            .and_then(|first| lex.get(first))
            .map_or((Gender::Unknown, GenderBasis::None), |(g, _)| (g, GenderBasis::Name))
    };
    GenderAssignment {
        author_id: author_id.to_string(),
        gender,
        basis,
    }
}

/// One assignment per author, from their latest tweet's name and bio.
pub fn assign_genders(records: &[TweetRecord], lex: &GenderLexicon) -> BTreeMap<String, GenderAssignment> {
    let mut latest: BTreeMap<&str, &TweetRecord> = BTreeMap::new();
    for rec in records {
        latest
            .entry(rec.author_id.as_str())
            .and_modify(|cur| {
                if (rec.timestamp, &rec.tweet_id) > (cur.timestamp, &cur.tweet_id) {
                    *cur = rec;
                }
            })
            .or_insert(rec);
    }
    latest
        .into_iter()
        .map(|(author, rec)| {
            (
                author.to_string(),
                infer_gender(author, &rec.author_name, &rec.author_bio, lex),
            )
        })
        .collect()
}

pub fn male_partition() -> Partition {
    Partition::new("male")
}

pub fn female_partition() -> Partition {
    Partition::new("female")
}

/// Labels each document of `index` male or female when it is in `country`
/// and its author has a name-based gender; everything else is unlabelled.
pub fn gender_labels(
    country: &Partition,
    index: &TermIndex,
    authors: &[&str],
    assignments: &BTreeMap<String, GenderAssignment>,
) -> Vec<Option<Partition>> {
    assert_eq!(authors.len(), index.len(), "one author per indexed document");
    (0..index.len())
        .map(|doc| {
            if index.label(doc) != Some(country) {
                return None;
            }
            match assignments.get(authors[doc]).map(|a| a.gender) {
                Some(Gender::Male) => Some(male_partition()),
                Some(Gender::Female) => Some(female_partition()),
                _ => None,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenderedTerms {
    pub male: Vec<TermScore>,
    pub female: Vec<TermScore>,
}

/// Terms over-used by male versus female tweeters (and the reverse) within
/// one country, by the same ranking as the country lists.
pub fn gendered_terms(
    country: &Partition,
    index: &TermIndex,
    authors: &[&str],
    assignments: &BTreeMap<String, GenderAssignment>,
    params: &RankParams,
) -> Result<GenderedTerms, StatsError> {
    let split = index.with_labels(gender_labels(country, index, authors, assignments));
    let (male, female) = (male_partition(), female_partition());
    if split.partition_size(&male).is_none() || split.partition_size(&female).is_none() {
        return Ok(GenderedTerms::default());
    }
    Ok(GenderedTerms {
        male: rank_terms(&male, &Comparison::Partitions(vec![female.clone()]), &split, params)?,
        female: rank_terms(&female, &Comparison::Partitions(vec![male]), &split, params)?,
    })
}

/// Counts of authors per inferred gender.
pub fn gender_summary(assignments: &BTreeMap<String, GenderAssignment>) -> BTreeMap<Gender, usize> {
    let mut out = BTreeMap::new();
    for a in assignments.values() {
        *out.entry(a.gender).or_default() += 1;
    }
    out
}
