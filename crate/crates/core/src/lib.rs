//! Word association thematic analysis (WATA) over archived tweet corpora.
//!
//! The crate covers the automatic half of the method end to end: ingest and
//! filter newline-delimited tweet archives, remove duplicates and prolific
//! posting, assign tweeters to countries, and rank the terms each country
//! over-uses relative to the rest of the corpus. The manual half (reading
//! samples, coding terms into themes) is supported by [`sampler`] and
//! [`codebook`].

pub mod codebook;
pub mod dedup;
pub mod gender;
pub mod geomap;
pub mod ingest;
pub mod pipeline;
pub mod report;
pub mod sampler;
pub mod termstats;
pub mod text;

pub use codebook::{CodingStore, Theme, TermAssignment, TermStatus};
pub use dedup::{limit_user_monthly, normalize_for_dedup, remove_duplicates, DedupKey, DedupMode};
pub use gender::{infer_gender, gendered_terms, Gender, GenderAssignment, GenderLexicon};
pub use geomap::{assign_country, CountryAssignment, CountryCode, Gazetteer};
pub use ingest::{filter_language, match_query, parse_tweet_stream, QuerySet, TweetRecord};
pub use pipeline::{run_pipeline, PipelineConfig, RunManifest};
pub use sampler::{sample_tweets, SampleRequest};
pub use termstats::{
    benjamini_hochberg, build_contingency, chi_square, chi_square_p, rank_terms, Comparison,
    ContingencyTable, Partition, RankParams, TermIndex, TermScore,
};
pub use text::tokenize;
