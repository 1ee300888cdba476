//! Seeded synthetic corpora shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wata_core::gender::{Gender, GenderAssignment, GenderBasis};
use wata_core::{Partition, TermIndex, TweetRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Zipf-weighted background vocabulary.
pub struct Vocab {
    words: Vec<String>,
    dist: WeightedIndex<f64>,
}

impl Vocab {
    pub fn new(size: usize) -> Self {
        let words = (0..size).map(|i| format!("w{i}")).collect();
        let dist = WeightedIndex::new((0..size).map(|r| 1.0 / (r as f64 + 1.0))).unwrap();
        Vocab { words, dist }
    }

    pub fn draw_set(&self, rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<String> {
        (0..n).map(|_| self.words[self.dist.sample(rng)].clone()).collect()
    }

    pub fn sentence(&self, rng: &mut ChaCha8Rng, n: usize) -> String {
        (0..n)
            .map(|_| self.words[self.dist.sample(rng)].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub const COUNTRIES: [&str; 8] = ["US", "GB", "CA", "IN", "AU", "ZA", "IE", "NG"];

pub fn planted_term(label: &str) -> String {
    format!("planted{}", label.to_lowercase())
}

/// `labels.len()` partitions of `per_partition` tweets each. Every tweet
/// draws 10 background words; partition `q`'s planted term appears with
/// probability `own_rate` inside `q` and `other_rate` everywhere else.
pub fn planted_index(labels: &[&str], per_partition: usize, own_rate: f64, other_rate: f64, seed: u64) -> TermIndex {
    let vocab = Vocab::new(1000);
    let mut r = rng(seed);
    let mut sets = Vec::with_capacity(labels.len() * per_partition);
    let mut parts = Vec::with_capacity(sets.capacity());
    for &label in labels {
        for _ in 0..per_partition {
            let mut set = vocab.draw_set(&mut r, 10);
            for &q in labels {
                let rate = if q == label { own_rate } else { other_rate };
                if r.random_bool(rate) {
                    set.insert(planted_term(q));
                }
            }
            sets.push(set);
            parts.push(Some(Partition::new(label)));
        }
    }
    TermIndex::from_term_sets(sets, parts)
}

/// Two partitions `A` and `B` of `n` tweets from one distribution.
pub fn null_index(n: usize, seed: u64) -> TermIndex {
    let vocab = Vocab::new(1000);
    let mut r = rng(seed);
    let mut sets = Vec::with_capacity(2 * n);
    let mut parts = Vec::with_capacity(2 * n);
    for label in ["A", "B"] {
        for _ in 0..n {
            sets.push(vocab.draw_set(&mut r, 10));
            parts.push(Some(Partition::new(label)));
        }
    }
    TermIndex::from_term_sets(sets, parts)
}

/// One country of `2 * per_gender` single-tweet authors. `term` appears at
/// `female_rate` among women and `male_rate` among men.
pub fn gender_corpus(
    per_gender: usize,
    female_rate: f64,
    male_rate: f64,
    seed: u64,
) -> (TermIndex, Vec<String>, BTreeMap<String, GenderAssignment>) {
    let vocab = Vocab::new(1000);
    let mut r = rng(seed);
    let mut sets = Vec::new();
    let mut authors = Vec::new();
    let mut assignments = BTreeMap::new();
    for (gender, rate) in [(Gender::Female, female_rate), (Gender::Male, male_rate)] {
        for i in 0..per_gender {
            let mut set = vocab.draw_set(&mut r, 10);
            if r.random_bool(rate) {
                set.insert("plantedterm".to_string());
            }
            let author = format!("{gender:?}{i}");
            assignments.insert(
                author.clone(),
                GenderAssignment {
                    author_id: author.clone(),
                    gender,
                    basis: GenderBasis::Name,
                },
            );
            sets.push(set);
            authors.push(author);
        }
    }
    let labels = vec![Some(Partition::new("GB")); sets.len()];
    (TermIndex::from_term_sets(sets, labels), authors, assignments)
}

pub fn tweet(id: String, author: String, text: String, ts: DateTime<Utc>) -> TweetRecord {
    TweetRecord {
        tweet_id: id,
        text,
        author_id: author,
        author_location: String::new(),
        author_bio: String::new(),
        author_name: String::new(),
        timestamp: ts,
        language: "en".into(),
    }
}

pub fn window_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 12, 5, 0, 0, 0).unwrap()
}

/// Uniform instant within 5 Dec 2020 – 21 Mar 2021.
pub fn random_instant(r: &mut ChaCha8Rng) -> DateTime<Utc> {
    let span = (Utc.with_ymd_and_hms(2021, 3, 22, 0, 0, 0).unwrap() - window_start()).num_seconds();
    window_start() + Duration::seconds(r.random_range(0..span))
}

/// Filtering fixture: unique tweets plus injected copies.
pub struct FilterFixture {
    pub records: Vec<TweetRecord>,
    /// (original id, copy id) for exact duplicates and hashtag variants.
    pub duplicate_pairs: Vec<(String, String)>,
    pub burst_authors: Vec<String>,
}

/// 10,000 records: 7,000 unique tweets, 1,000 exact copies, 1,000
/// hashtag/handle variants, and 1,000 tweets from 20 burst posters.
pub fn filter_fixture(seed: u64) -> FilterFixture {
    let vocab = Vocab::new(500);
    let mut r = rng(seed);
    let mut records = Vec::with_capacity(10_000);
    for i in 0..7_000 {
        let text = format!("vaccine update {i} {}", vocab.sentence(&mut r, 8));
        let author = format!("a{}", r.random_range(0..4_000));
        records.push(tweet(format!("u{i:05}"), author, text, random_instant(&mut r)));
    }
    let mut duplicate_pairs = Vec::new();
    for k in 0..2_000 {
        let original = records[r.random_range(0..7_000)].clone();
        let text = if k < 1_000 {
            original.text.clone()
        } else {
            format!("#covid {} @who #nhs", original.text.to_uppercase())
        };
        let id = format!("d{k:05}");
        let ts = original.timestamp + Duration::seconds(r.random_range(1..100_000));
        duplicate_pairs.push((original.tweet_id.clone(), id.clone()));
        records.push(tweet(id, format!("copier{}", r.random_range(0..500)), text, ts));
    }
    let burst_authors: Vec<String> = (0..20).map(|b| format!("burst{b}")).collect();
    for k in 0..1_000 {
        let author = burst_authors[k % 20].clone();
        let text = format!("burst post {k} {}", vocab.sentence(&mut r, 6));
        records.push(tweet(format!("b{k:05}"), author, text, random_instant(&mut r)));
    }
    // Interleave so injected records are not all at the end.
    use rand::seq::SliceRandom;
    records.shuffle(&mut r);
    FilterFixture {
        records,
        duplicate_pairs,
        burst_authors,
    }
}

/// Locations that the starter gazetteer maps to each country.
pub fn location_for(country: &str) -> &'static str {
    match country {
        "US" => "Chicago, IL",
        "GB" => "Leeds, England",
        "CA" => "Toronto",
        "IN" => "Mumbai, India",
        "AU" => "Brisbane",
        "ZA" => "Cape Town",
        "IE" => "Galway",
        "NG" => "Lagos",
        _ => "",
    }
}

/// Pipeline fixture as input-format lines: `n` vaccine tweets over the
/// collection window. Authors spread over the eight countries plus
/// unassigned ones; NG tweets carry `#jabnaija` at 20% (elsewhere 0.5%).
/// Display names rotate over Mary, John and Sam.
/// Some lines are off-topic, non-English, duplicated, or bursts.
pub fn pipeline_fixture(n: usize, seed: u64) -> Vec<String> {
    let vocab = Vocab::new(400);
    let mut r = rng(seed);
    let mut lines = Vec::with_capacity(n);
    let n_authors = n / 2;
    let country_of = |a: usize| -> Option<&'static str> {
        match a % 12 {
            0..=7 => Some(COUNTRIES[a % 8]),
            _ => None,
        }
    };
    for i in 0..n {
        let author = r.random_range(0..n_authors);
        let country = country_of(author);
        let mut text = format!("{} {}", vocab.sentence(&mut r, 9), ["vaccine", "vaccinated", "#CovidVaccine"][i % 3]);
        let rate = if country == Some("NG") { 0.2 } else { 0.005 };
        if r.random_bool(rate) {
            text.push_str(" #JabNaija");
        }
        let (lang, text) = match i % 50 {
            0 => ("de", text),
            1 => ("en", vocab.sentence(&mut r, 6)),
            _ => ("en", text),
        };
        let mut rec = tweet(format!("{i}"), format!("user{author}"), text, random_instant(&mut r));
        rec.language = lang.into();
        rec.author_location = country.map(location_for).unwrap_or("Earth").to_string();
        rec.author_name = ["Mary Smith", "John Okafor", "Sam Lee"][author % 3].to_string();
        lines.push(rec.to_line());
    }
    // Injected exact copies.
    for k in 0..n / 20 {
        let src: TweetRecord = serde_json::from_str(&lines[k * 7 % n]).unwrap();
        let mut copy = src.clone();
        copy.tweet_id = format!("copy{k}");
        copy.timestamp = src.timestamp + Duration::minutes(5);
        lines.push(copy.to_line());
    }
    lines.push("{broken".into());
    lines
}
