use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const PLACES: [(&str, &str); 8] = [
    ("us", "Chicago, IL"),
    ("gb", "Leeds, England"),
    ("ca", "Toronto"),
    ("in", "Mumbai, India"),
    ("au", "Brisbane"),
    ("za", "Cape Town"),
    ("ie", "Galway"),
    ("ng", "Lagos"),
];

const WORDS: [&str; 10] = ["dose", "clinic", "queue", "today", "arm", "nurse", "second", "booked", "waiting", "news"];

/// 2,400 tweets over eight countries, each country's tweets carrying
/// `<code>jab` a third of the time, plus a few lines the filters remove.
fn write_input(dir: &Path) -> PathBuf {
    let mut lines = Vec::new();
    for i in 0..2_400usize {
        let (code, place) = PLACES[i % 8];
        let mut text = format!("#Vaccine {} {}", WORDS[(i / 8) % 10], WORDS[(i / 80) % 10]);
        if (i / 8) % 3 == 0 {
            text.push_str(&format!(" {code}jab"));
        }
        let day = 10 + (i / 200);
        let name = if (i / 8) % 2 == 0 { "Mary Jones" } else { "John Smith" };
        lines.push(format!(
            r#"{{"id":"{i}","text":"{text}","author_id":"u{i}","author_location":"{place}","author_name":"{name}","created_at":"2021-01-{day:02}T12:00:00Z","lang":"en"}}"#
        ));
    }
    lines.push(r#"{"id":"x1","text":"vaccine news","author_id":"z","created_at":"2021-01-10T12:00:00Z","lang":"fr"}"#.into());
    lines.push(r#"{"id":"x2","text":"weather today","author_id":"z","created_at":"2021-01-10T12:00:00Z","lang":"en"}"#.into());
    lines.push("not json".into());
    let path = dir.join("tweets.jsonl");
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    path
}

fn write_lexicon(dir: &Path) -> PathBuf {
    let path = dir.join("names.csv");
    fs::write(&path, "name,gender,proportion\nmary,female,0.99\njohn,male,0.97\n").unwrap();
    path
}

fn wata(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wata"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = wata(args);
    assert!(
        out.status.success(),
        "wata {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn stage_by_stage_matches_all() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let lexicon = write_lexicon(tmp.path());
    let staged = tmp.path().join("staged");
    let whole = tmp.path().join("whole");

    let out = ok(&["ingest", "--out", s(&staged), "--input", s(&input)]);
    assert!(out.contains("parsed 2402 of 2403 lines"), "{out}");
    let out = ok(&["filter", "--out", s(&staged), "--seed", "5"]);
    assert!(out.contains("language"), "{out}");
    ok(&["geo", "--out", s(&staged)]);
    let out = ok(&["stats", "--out", s(&staged)]);
    assert_eq!(out.lines().count(), 8, "{out}");
    ok(&["gender", "--out", s(&staged), "--gender-lexicon", s(&lexicon)]);

    ok(&["all", "--out", s(&whole), "--seed", "5", "--input", s(&input), "--gender-lexicon", s(&lexicon)]);
    assert!(whole.join("manifest.json").exists());
    for f in ["limited.jsonl", "authors.jsonl", "countries.csv", "partitions.json", "terms/NG.csv", "gender/NG.csv"] {
        assert_eq!(fs::read(staged.join(f)).unwrap(), fs::read(whole.join(f)).unwrap(), "{f}");
    }
    let ng = fs::read_to_string(whole.join("terms/NG.csv")).unwrap();
    assert!(ng.lines().nth(1).unwrap().starts_with("1,ngjab,"), "{ng}");
}

#[test]
fn config_file_and_sampling() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let run = tmp.path().join("run");
    let config = tmp.path().join("wata.toml");
    fs::write(
        &config,
        format!(
            "inputs = [{:?}]\nseed = 11\ntop_k = 3\nqueries = [\"vaccine\"]\nout = {:?}\n",
            s(&input),
            s(&run)
        ),
    )
    .unwrap();
    ok(&["--config", s(&config), "all"]);
    let gb = fs::read_to_string(run.join("terms/GB.csv")).unwrap();
    assert!(gb.lines().count() <= 4, "{gb}");

    let first = ok(&["--config", s(&config), "sample", "--country", "gb", "--term", "gbjab", "--n", "4"]);
    let second = ok(&["--config", s(&config), "sample", "--country", "GB", "--term", "GBJAB", "--n", "4"]);
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 4);
    assert!(first.lines().all(|l| l.contains("gbjab")));
    let other = ok(&["--config", s(&config), "--seed", "12", "sample", "--country", "GB", "--term", "gbjab", "--n", "4"]);
    assert_ne!(first, other);

    let out = ok(&["--config", s(&config), "export"]);
    assert!(out.contains("report_GB.csv"), "{out}");
    let report = fs::read_to_string(run.join("report/report_GB.csv")).unwrap();
    assert!(report.starts_with("rank,term,chi2,p,theme,note\n1,gbjab,"), "{report}");
    assert!(report.contains("UNTHEMED"));
}

#[test]
fn errors_exit_non_zero_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write_input(tmp.path());
    let run = tmp.path().join("run");
    ok(&["ingest", "--out", s(&run), "--input", s(&input)]);

    let out = wata(&["filter", "--out", s(&run)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));

    let out = wata(&["sample", "--out", s(&run), "--country", "GB", "--term", "x"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));

    let out = wata(&["serve", "--out", s(&run), "--port", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("partitions.json") && err.contains("limited.jsonl"), "{err}");

    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, "name,gender,proportion\nalex,male,0.7\n").unwrap();
    ok(&["filter", "--out", s(&run), "--seed", "1"]);
    ok(&["geo", "--out", s(&run)]);
    let out = wata(&["gender", "--out", s(&run), "--gender-lexicon", s(&bad)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alex"));
}
