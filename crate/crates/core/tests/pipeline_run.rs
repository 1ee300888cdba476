//! End-to-end runs over a synthetic input file.

mod common;

use std::fs;
use std::path::{Path, PathBuf};

use wata_core::pipeline::{
    self, read_gender_list, read_term_lists, PipelineError, AUTHORS_FILE, COUNTRIES_FILE, DEDUPED_FILE,
    FILTERED_FILE, LIMITED_FILE, MANIFEST_FILE, PARSED_FILE,
};
use wata_core::{run_pipeline, Partition, PipelineConfig, RunManifest};

const LEXICON: &str = "name,gender,proportion\nmary,female,0.996\njohn,male,0.995\n";

fn setup(dir: &Path) -> PipelineConfig {
    let input = dir.join("tweets.jsonl");
    fs::write(&input, common::pipeline_fixture(5_000, 8).join("\n") + "\n").unwrap();
    let lexicon = dir.join("names.csv");
    fs::write(&lexicon, LEXICON).unwrap();
    PipelineConfig {
        inputs: vec![input],
        seed: Some(2021),
        gender_lexicon: Some(lexicon),
        out: dir.join("run1"),
        ..PipelineConfig::default()
    }
}

fn artifacts(out: &Path) -> Vec<PathBuf> {
    let mut files = vec![
        PathBuf::from(PARSED_FILE),
        PathBuf::from(FILTERED_FILE),
        PathBuf::from(DEDUPED_FILE),
        PathBuf::from(LIMITED_FILE),
        PathBuf::from(AUTHORS_FILE),
        PathBuf::from(COUNTRIES_FILE),
    ];
    let manifest = RunManifest::load(out.join(MANIFEST_FILE)).unwrap();
    files.extend(manifest.outputs.iter().map(|d| PathBuf::from(&d.path)));
    files
}

#[test]
fn full_run_counts_and_planted_term() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let manifest = run_pipeline(&cfg).unwrap();
    assert!(manifest.complete);
    assert_eq!(manifest.failed_stage, None);

    let chain = ["ingest", "language", "query", "window", "dedup", "monthly_limit"];
    let counts: Vec<_> = chain.iter().map(|s| manifest.stage(s).unwrap()).collect();
    assert_eq!(counts[0].input, 5_000 + 250 + 1);
    assert_eq!(counts[0].output, 5_000 + 250);
    for w in counts.windows(2) {
        assert_eq!(w[0].output, w[1].input, "{} feeds {}", w[0].stage, w[1].stage);
        assert!(w[1].output <= w[1].input);
    }
    assert!(counts[1].output < counts[1].input, "non-English lines removed");
    assert!(counts[2].output < counts[2].input, "off-topic lines removed");
    assert!(counts[4].output < counts[4].input, "copies removed");

    assert_eq!(manifest.partitions.len(), 8);
    let lists = read_term_lists(&cfg.out).unwrap();
    let ng = &lists[&Partition::new("NG")];
    let hit = ng.iter().find(|s| s.term == "#jabnaija").expect("planted NG hashtag listed");
    assert!(hit.rank <= 3, "rank {}", hit.rank);
    for (p, list) in &lists {
        if p.as_str() != "NG" {
            assert!(!list.iter().any(|s| s.term == "#jabnaija"), "{p}");
        }
    }

    for p in &manifest.partitions {
        let g = read_gender_list(&cfg.out, p).unwrap();
        assert!(g.male.iter().chain(&g.female).all(|s| s.significant));
    }
    assert!(cfg.out.join("gender").join("summary.json").exists());
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path());
    let first = run_pipeline(&cfg).unwrap();

    let mut replay = RunManifest::load(cfg.out.join(MANIFEST_FILE)).unwrap().config;
    replay.out = dir.path().join("run2");
    let second = run_pipeline(&replay).unwrap();

    assert_eq!(first.outputs, second.outputs);
    assert_eq!(first.inputs, second.inputs);
    for rel in artifacts(&cfg.out) {
        assert_eq!(
            fs::read(cfg.out.join(&rel)).unwrap(),
            fs::read(replay.out.join(&rel)).unwrap(),
            "{}",
            rel.display()
        );
    }

    let mut other_seed = replay.clone();
    other_seed.seed = Some(7);
    other_seed.out = dir.path().join("run3");
    run_pipeline(&other_seed).unwrap();
    assert_ne!(
        fs::read(cfg.out.join(LIMITED_FILE)).unwrap(),
        fs::read(other_seed.out.join(LIMITED_FILE)).unwrap()
    );
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path());
    cfg.seed = None;
    assert!(matches!(run_pipeline(&cfg), Err(PipelineError::Config(_))));
}

#[test]
fn failed_stage_is_recorded_in_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = setup(dir.path());
    let bad = dir.path().join("bad_names.csv");
    fs::write(&bad, "name,gender,proportion\nalex,male,0.6\n").unwrap();
    cfg.gender_lexicon = Some(bad);
    let err = run_pipeline(&cfg).unwrap_err();
    assert!(matches!(err, PipelineError::Stage { stage: "gender", .. }), "{err}");
    let manifest = RunManifest::load(cfg.out.join(MANIFEST_FILE)).unwrap();
    assert!(!manifest.complete);
    assert_eq!(manifest.failed_stage.as_deref(), Some("gender"));
    assert!(pipeline::term_list_path(&cfg.out, &Partition::new("NG")).exists());
}
