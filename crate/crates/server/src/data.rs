use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use wata_core::gender::GenderedTerms;
use wata_core::pipeline::{
    gender_list_path, read_gender_list, read_term_lists, term_list_path, AnalysisCorpus, AUTHORS_FILE, LIMITED_FILE,
    PARTITIONS_FILE,
};
use wata_core::termstats::TermScore;
use wata_core::{CodingStore, Partition};

use crate::{ApiConfig, ServeError};

/// Coding log kept next to the run outputs.
pub const CODING_LOG_FILE: &str = "coding.jsonl";

/// Read-only products of one pipeline run.
#[derive(Debug)]
pub struct RunData {
    pub dir: PathBuf,
    pub term_lists: BTreeMap<Partition, Vec<TermScore>>,
    pub corpus: AnalysisCorpus,
    pub gender: BTreeMap<Partition, GenderedTerms>,
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub run: Arc<RunData>,
    store: Arc<Mutex<CodingStore>>,
    pub read_only: bool,
    pub token: Option<String>,
}

impl AppState {
    pub fn new(run: RunData, store: CodingStore, read_only: bool, token: Option<String>) -> Self {
        AppState {
            run: Arc::new(run),
            store: Arc::new(Mutex::new(store)),
            read_only,
            token,
        }
    }

    /// The coding store. A panic in another handler does not invalidate
    /// it, since every mutation is committed to the log before the state
    /// changes.
    pub fn store(&self) -> MutexGuard<'_, CodingStore> {
        self.store.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }
}

/// Files the service needs in `dir` that are absent.
pub fn required_artifacts(dir: &Path) -> Vec<String> {
    let mut missing: Vec<String> = [PARTITIONS_FILE, LIMITED_FILE, AUTHORS_FILE]
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .map(str::to_string)
        .collect();
    if let Ok(bytes) = fs::read(dir.join(PARTITIONS_FILE)) {
        let parts: Vec<Partition> = serde_json::from_slice(&bytes).unwrap_or_default();
        for p in parts {
            let path = term_list_path(dir, &p);
            if !path.is_file() {
                missing.push(path.strip_prefix(dir).unwrap_or(&path).display().to_string());
            }
        }
    }
    missing
}

/// Loads the run directory named by `config` and opens its coding log.
pub fn load_state(config: &ApiConfig) -> Result<AppState, ServeError> {
    let dir = &config.data_dir;
    let missing = required_artifacts(dir);
    if !missing.is_empty() {
        return Err(ServeError::MissingArtifacts {
            dir: dir.clone(),
            missing,
        });
    }
    let term_lists = read_term_lists(dir)?;
    let corpus = AnalysisCorpus::load(dir)?;
    let mut gender = BTreeMap::new();
    for p in term_lists.keys() {
        if gender_list_path(dir, p).is_file() {
            gender.insert(p.clone(), read_gender_list(dir, p)?);
        }
    }
    let ranked = term_lists
        .iter()
        .map(|(p, scores)| (p.clone(), scores.iter().map(|s| s.term.clone()).collect()))
        .collect();
    let log_path = dir.join(CODING_LOG_FILE);
    let store = if config.read_only && !log_path.exists() {
        CodingStore::in_memory(ranked)
    } else {
        CodingStore::open(log_path, ranked)?
    };
    log::info!(
        "loaded {} partitions and {} tweets from {}",
        term_lists.len(),
        corpus.records.len(),
        dir.display()
    );
    let run = RunData {
        dir: dir.clone(),
        term_lists,
        corpus,
        gender,
    };
    Ok(AppState::new(run, store, config.read_only, config.token.clone()))
}
