//! Thematic coding state: a shared codebook of themes, one current
//! assignment per (partition, term), and a two-round workflow.
//!
//! Every change is an event appended to a newline-delimited JSON log. The
//! in-memory state is a fold over that log, so reopening a store (or calling
//! [`CodingStore::replay`]) reproduces it exactly.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::termstats::Partition;

/// Themes every new codebook starts with. They can be deleted.
pub const SEED_THEMES: [(&str, &str); 10] = [
    ("Geographic names", "Country, region and city names"),
    ("Local language or slang", "Words or spellings specific to a local variety of English or another language"),
    ("Politics", "Politicians, parties and government bodies"),
    ("News sources", "News organisations and journalists"),
    ("Health services", "Health systems, providers and their staff"),
    ("Vaccine names or manufacturers", "Vaccine brands and the companies making them"),
    ("Lockdown", "Lockdowns and other movement restrictions"),
    ("Vaccine rollout arrangements", "How, where and when vaccines are delivered"),
    ("Qualifying for a vaccine", "Eligibility groups and priority rules"),
    ("Medical experts", "Doctors, scientists and other experts commenting publicly"),
];

/// Report labels that cannot be used as theme names.
pub const IGNORED_LABEL: &str = "IGNORED";
pub const UNTHEMED_LABEL: &str = "UNTHEMED";

pub const FINAL_ROUND: u8 = 2;

#[derive(Debug, Error)]
pub enum CodingError {
    #[error("unknown theme {0}")]
    UnknownTheme(String),
    #[error("unknown partition {0}")]
    UnknownPartition(Partition),
    #[error("term {term:?} is not in the ranked list for {partition}")]
    UnknownTerm { term: String, partition: Partition },
    #[error("{partition} is in round {current}, not round {requested}")]
    WrongRound {
        partition: Partition,
        current: u8,
        requested: u8,
    },
    #[error("theme name must not be empty")]
    EmptyThemeName,
    #[error("theme name {0:?} is reserved")]
    ReservedThemeName(String),
    #[error("a theme named {0:?} already exists")]
    DuplicateThemeName(String),
    #[error("theme id {0:?} already exists")]
    DuplicateThemeId(String),
    #[error("theme {theme_id} is still assigned to {} term(s)", terms.len())]
    ThemeInUse { theme_id: String, terms: Vec<String> },
    #[error("round 1 of {partition} still has unthemed terms: {}", unthemed.join(", "))]
    IncompleteRound {
        partition: Partition,
        unthemed: Vec<String>,
    },
    #[error("{0} is already in the final round")]
    AlreadyFinalRound(Partition),
    #[error("coding log: {0}")]
    Io(#[from] std::io::Error),
    #[error("coding log line {line}: {source}")]
    BadLogLine { line: usize, source: serde_json::Error },
    #[error("codebook file: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theme {
    pub theme_id: String,
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub seeded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermStatus {
    Unthemed,
    Themed(String),
    IgnoredMultiContext,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermAssignment {
    pub term: String,
    pub partition: Partition,
    pub status: TermStatus,
    pub round: u8,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub reviewed_samples: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum CodingEvent {
    ThemeCreated { theme: Theme },
    ThemeDeleted { theme_id: String },
    Assigned { assignment: TermAssignment },
    RoundAdvanced { partition: Partition, round: u8 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    #[serde(flatten)]
    pub event: CodingEvent,
}

/// Folded view of the log.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CodingState {
    pub themes: Vec<Theme>,
    pub assignments: BTreeMap<(Partition, String), TermAssignment>,
    pub rounds: BTreeMap<Partition, u8>,
}

impl CodingState {
    fn apply(&mut self, event: &CodingEvent) {
        match event {
            CodingEvent::ThemeCreated { theme } => self.themes.push(theme.clone()),
            CodingEvent::ThemeDeleted { theme_id } => self.themes.retain(|t| &t.theme_id != theme_id),
            CodingEvent::Assigned { assignment } => {
                self.assignments.insert(
                    (assignment.partition.clone(), assignment.term.clone()),
                    assignment.clone(),
                );
            }
            CodingEvent::RoundAdvanced { partition, round } => {
                self.rounds.insert(partition.clone(), *round);
            }
        }
    }

    pub fn theme(&self, theme_id: &str) -> Option<&Theme> {
        self.themes.iter().find(|t| t.theme_id == theme_id)
    }

    pub fn round(&self, partition: &Partition) -> u8 {
        self.rounds.get(partition).copied().unwrap_or(1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub total: usize,
    pub unthemed: usize,
    pub themed: usize,
    pub ignored: usize,
    /// Terms whose current assignment was made in round 2.
    pub reviewed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingSession {
    pub session_id: String,
    pub partition: Partition,
    pub current_round: u8,
    pub progress: Progress,
    /// In round 2: terms still carrying their round-1 assignment, by rank.
    pub review_queue: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignRequest {
    pub term: String,
    pub partition: Partition,
    pub status: TermStatus,
    pub round: u8,
    #[serde(default)]
    pub note: String,
    #[serde(default)]
    pub reviewed_samples: Vec<String>,
}

fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        out.push_str("theme");
    }
    out
}

/// Single-writer coding store. Callers that share one across threads wrap
/// it in a lock.
#[derive(Debug)]
pub struct CodingStore {
    path: Option<PathBuf>,
    ranked: BTreeMap<Partition, Vec<String>>,
    state: CodingState,
    log: Vec<AuditEntry>,
}

impl CodingStore {
    /// In-memory store seeded with [`SEED_THEMES`]. `ranked` holds each
    /// partition's term list in rank order.
    pub fn in_memory(ranked: BTreeMap<Partition, Vec<String>>) -> Self {
        let mut store = CodingStore {
            path: None,
            ranked,
            state: CodingState::default(),
            log: Vec::new(),
        };
        store.seed_themes().expect("in-memory store cannot fail to write");
        store
    }

    /// Opens the log at `path`, replaying it if present and creating a
    /// seeded log otherwise.
    pub fn open(path: impl AsRef<Path>, ranked: BTreeMap<Partition, Vec<String>>) -> Result<Self, CodingError> {
        let path = path.as_ref().to_path_buf();
        let mut store = CodingStore {
            path: Some(path.clone()),
            ranked,
            state: CodingState::default(),
            log: Vec::new(),
        };
        if path.exists() {
            store.log = read_log(File::open(&path)?)?;
            store.state = CodingStore::replay(&store.log);
        } else {
            File::create(&path)?;
            store.seed_themes()?;
        }
        Ok(store)
    }

    fn seed_themes(&mut self) -> Result<(), CodingError> {
        for (name, description) in SEED_THEMES {
            let theme = Theme {
                theme_id: slug(name),
                name: name.to_string(),
                description: description.to_string(),
                seeded: true,
            };
            self.commit(CodingEvent::ThemeCreated { theme })?;
        }
        Ok(())
    }

    /// Rebuilds the state from a log.
    pub fn replay(log: &[AuditEntry]) -> CodingState {
        let mut state = CodingState::default();
        for entry in log {
            state.apply(&entry.event);
        }
        state
    }

    fn commit(&mut self, event: CodingEvent) -> Result<(), CodingError> {
        let entry = AuditEntry {
            seq: self.log.len() as u64 + 1,
            at: Utc::now(),
            event,
        };
        if let Some(path) = &self.path {
            let mut file = OpenOptions::new().append(true).open(path)?;
            let mut line = serde_json::to_vec(&entry).map_err(|e| CodingError::BadLogLine {
                line: self.log.len() + 1,
                source: e,
            })?;
            line.push(b'\n');
            file.write_all(&line)?;
            file.flush()?;
        }
        self.state.apply(&entry.event);
        self.log.push(entry);
        Ok(())
    }

    pub fn state(&self) -> &CodingState {
        &self.state
    }

    pub fn audit_log(&self) -> &[AuditEntry] {
        &self.log
    }

    pub fn themes(&self) -> &[Theme] {
        &self.state.themes
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.ranked.keys()
    }

    pub fn ranked_terms(&self, partition: &Partition) -> Option<&[String]> {
        self.ranked.get(partition).map(Vec::as_slice)
    }

    pub fn assignment(&self, partition: &Partition, term: &str) -> Option<&TermAssignment> {
        self.state.assignments.get(&(partition.clone(), term.to_string()))
    }

    fn check_theme_name(&self, name: &str) -> Result<String, CodingError> {
        let name = name.trim();
        if name.is_empty() {
            return Err(CodingError::EmptyThemeName);
        }
        if name.eq_ignore_ascii_case(IGNORED_LABEL) || name.eq_ignore_ascii_case(UNTHEMED_LABEL) {
            return Err(CodingError::ReservedThemeName(name.to_string()));
        }
        if self.state.themes.iter().any(|t| t.name.to_lowercase() == name.to_lowercase()) {
            return Err(CodingError::DuplicateThemeName(name.to_string()));
        }
        Ok(name.to_string())
    }

    pub fn create_theme(&mut self, name: &str, description: &str) -> Result<Theme, CodingError> {
        let name = self.check_theme_name(name)?;
        let base = slug(&name);
        let mut theme_id = base.clone();
        let mut n = 2;
        while self.state.theme(&theme_id).is_some() {
            theme_id = format!("{base}-{n}");
            n += 1;
        }
        let theme = Theme {
            theme_id,
            name,
            description: description.trim().to_string(),
            seeded: false,
        };
        self.commit(CodingEvent::ThemeCreated { theme: theme.clone() })?;
        Ok(theme)
    }

    /// Adds a theme under its existing id, as read from a codebook file.
    pub fn import_theme(&mut self, theme: Theme) -> Result<(), CodingError> {
        if self.state.theme(&theme.theme_id).is_some() {
            return Err(CodingError::DuplicateThemeId(theme.theme_id));
        }
        let name = self.check_theme_name(&theme.name)?;
        self.commit(CodingEvent::ThemeCreated {
            theme: Theme { name, ..theme },
        })
    }

    pub fn delete_theme(&mut self, theme_id: &str) -> Result<(), CodingError> {
        if self.state.theme(theme_id).is_none() {
            return Err(CodingError::UnknownTheme(theme_id.to_string()));
        }
        let terms: Vec<String> = self
            .state
            .assignments
            .values()
            .filter(|a| matches!(&a.status, TermStatus::Themed(id) if id == theme_id))
            .map(|a| format!("{}:{}", a.partition, a.term))
            .collect();
        if !terms.is_empty() {
            return Err(CodingError::ThemeInUse {
                theme_id: theme_id.to_string(),
                terms,
            });
        }
        self.commit(CodingEvent::ThemeDeleted {
            theme_id: theme_id.to_string(),
        })
    }

    /// Replaces the current assignment of a ranked term. The previous one
    /// stays in the audit log.
    pub fn assign_term(&mut self, req: AssignRequest) -> Result<TermAssignment, CodingError> {
        let ranked = self
            .ranked
            .get(&req.partition)
            .ok_or_else(|| CodingError::UnknownPartition(req.partition.clone()))?;
        let term = req.term.trim().to_lowercase();
        if !ranked.contains(&term) {
            return Err(CodingError::UnknownTerm {
                term,
                partition: req.partition,
            });
        }
        if let TermStatus::Themed(id) = &req.status {
            if self.state.theme(id).is_none() {
                return Err(CodingError::UnknownTheme(id.clone()));
            }
        }
        let current = self.state.round(&req.partition);
        if req.round != current {
            return Err(CodingError::WrongRound {
                partition: req.partition,
                current,
                requested: req.round,
            });
        }
        let assignment = TermAssignment {
            term,
            partition: req.partition,
            status: req.status,
            round: req.round,
            note: req.note,
            reviewed_samples: req.reviewed_samples,
        };
        self.commit(CodingEvent::Assigned {
            assignment: assignment.clone(),
        })?;
        Ok(assignment)
    }

    fn unthemed_terms(&self, partition: &Partition) -> Vec<String> {
        self.ranked
            .get(partition)
            .into_iter()
            .flatten()
            .filter(|term| {
                self.assignment(partition, term)
                    .is_none_or(|a| a.status == TermStatus::Unthemed)
            })
            .cloned()
            .collect()
    }

    pub fn progress(&self, partition: &Partition) -> Result<Progress, CodingError> {
        let ranked = self
            .ranked
            .get(partition)
            .ok_or_else(|| CodingError::UnknownPartition(partition.clone()))?;
        let mut p = Progress {
            total: ranked.len(),
            ..Progress::default()
        };
        for term in ranked {
            match self.assignment(partition, term) {
                Some(a) => {
                    match a.status {
                        TermStatus::Unthemed => p.unthemed += 1,
                        TermStatus::Themed(_) => p.themed += 1,
                        TermStatus::IgnoredMultiContext => p.ignored += 1,
                    }
                    if a.round == FINAL_ROUND {
                        p.reviewed += 1;
                    }
                }
                None => p.unthemed += 1,
            }
        }
        Ok(p)
    }

    pub fn session(&self, partition: &Partition) -> Result<CodingSession, CodingError> {
        let progress = self.progress(partition)?;
        let current_round = self.state.round(partition);
        let review_queue = if current_round == FINAL_ROUND {
            self.ranked[partition]
                .iter()
                .filter(|term| self.assignment(partition, term).is_some_and(|a| a.round == 1))
                .cloned()
                .collect()
        } else {
            Vec::new()
        };
        Ok(CodingSession {
            session_id: partition.to_string(),
            partition: partition.clone(),
            current_round,
            progress,
            review_queue,
        })
    }

    /// Moves a partition to round 2 once every ranked term is themed or
    /// ignored.
    pub fn advance_round(&mut self, partition: &Partition) -> Result<CodingSession, CodingError> {
        if !self.ranked.contains_key(partition) {
            return Err(CodingError::UnknownPartition(partition.clone()));
        }
        let current = self.state.round(partition);
        if current >= FINAL_ROUND {
            return Err(CodingError::AlreadyFinalRound(partition.clone()));
        }
        let unthemed = self.unthemed_terms(partition);
        if !unthemed.is_empty() {
            return Err(CodingError::IncompleteRound {
                partition: partition.clone(),
                unthemed,
            });
        }
        self.commit(CodingEvent::RoundAdvanced {
            partition: partition.clone(),
            round: current + 1,
        })?;
        self.session(partition)
    }
}

pub fn read_log<R: Read>(input: R) -> Result<Vec<AuditEntry>, CodingError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|source| CodingError::BadLogLine { line: i + 1, source })?;
        out.push(entry);
    }
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
struct CodebookRow {
    theme_id: String,
    name: String,
    description: String,
}

/// Writes themes as `theme_id,name,description`.
pub fn write_codebook<W: Write>(out: W, themes: &[Theme]) -> Result<(), CodingError> {
    let mut w = csv::Writer::from_writer(out);
    if themes.is_empty() {
        w.write_record(["theme_id", "name", "description"])?;
    }
    for t in themes {
        w.serialize(CodebookRow {
            theme_id: t.theme_id.clone(),
            name: t.name.clone(),
            description: t.description.clone(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_codebook<R: Read>(input: R) -> Result<Vec<Theme>, CodingError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize::<CodebookRow>()
        .map(|row| {
            let row = row?;
            Ok(Theme {
                theme_id: row.theme_id,
                name: row.name,
                description: row.description,
                seeded: false,
            })
        })
        .collect()
}
