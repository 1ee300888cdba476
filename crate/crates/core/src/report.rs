//! Coded term reports: one file per partition plus a theme-by-partition
//! matrix.
//!
//! Layout of an export directory:
//!
//! ```text
//! codebook.csv              theme_id,name,description
//! report_<partition>.csv    rank,term,chi2,p,theme,note
//! theme_matrix.csv          theme,<partition>...
//! report_summary.json       partition list and the partial flag
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codebook::{
    read_codebook, write_codebook, CodingError, CodingStore, TermStatus, Theme, IGNORED_LABEL, UNTHEMED_LABEL,
};
use crate::termstats::{Partition, TermScore};

pub const CODEBOOK_FILE: &str = "codebook.csv";
pub const MATRIX_FILE: &str = "theme_matrix.csv";
pub const SUMMARY_FILE: &str = "report_summary.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("report file: {0}")]
    Csv(#[from] csv::Error),
    #[error("report summary: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Coding(#[from] CodingError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub rank: usize,
    pub term: String,
    pub chi2: f64,
    pub p: f64,
    /// Theme name, or `IGNORED` / `UNTHEMED`.
    pub theme: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub themes: Vec<Theme>,
    pub partitions: BTreeMap<Partition, Vec<ReportRow>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Summary {
    partial: bool,
    partitions: Vec<Partition>,
}

pub fn report_file_name(partition: &Partition) -> String {
    format!("report_{partition}.csv")
}

impl ReportBundle {
    /// Joins the ranked lists with the current coding state.
    pub fn from_store(store: &CodingStore, term_lists: &BTreeMap<Partition, Vec<TermScore>>) -> Self {
        let state = store.state();
        let partitions = term_lists
            .iter()
            .map(|(partition, scores)| {
                let rows = scores
                    .iter()
                    .map(|s| {
                        let assignment = store.assignment(partition, &s.term);
                        let theme = match assignment.map(|a| &a.status) {
                            Some(TermStatus::Themed(id)) => state
                                .theme(id)
                                .map_or_else(|| id.clone(), |t| t.name.clone()),
                            Some(TermStatus::IgnoredMultiContext) => IGNORED_LABEL.to_string(),
                            Some(TermStatus::Unthemed) | None => UNTHEMED_LABEL.to_string(),
                        };
                        ReportRow {
                            rank: s.rank,
                            term: s.term.clone(),
                            chi2: s.chi2,
                            p: s.p_value,
                            theme,
                            note: assignment.map(|a| a.note.clone()).unwrap_or_default(),
                        }
                    })
                    .collect();
                (partition.clone(), rows)
            })
            .collect();
        ReportBundle {
            themes: store.themes().to_vec(),
            partitions,
        }
    }

    /// True while any listed term is still unthemed.
    pub fn is_partial(&self) -> bool {
        self.partitions
            .values()
            .flatten()
            .any(|row| row.theme == UNTHEMED_LABEL)
    }

    /// Number of terms per theme (codebook order) and partition.
    pub fn theme_matrix(&self) -> Vec<(String, Vec<usize>)> {
        self.themes
            .iter()
            .map(|t| {
                let counts = self
                    .partitions
                    .values()
                    .map(|rows| rows.iter().filter(|r| r.theme == t.name).count())
                    .collect();
                (t.name.clone(), counts)
            })
            .collect()
    }

    /// Writes the bundle into `dir`, returning the files written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();

        let path = dir.join(CODEBOOK_FILE);
        write_codebook(BufWriter::new(File::create(&path)?), &self.themes)?;
        written.push(path);

        for (partition, rows) in &self.partitions {
            let path = dir.join(report_file_name(partition));
            let mut w = csv::Writer::from_path(&path)?;
            if rows.is_empty() {
                w.write_record(["rank", "term", "chi2", "p", "theme", "note"])?;
            }
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
            written.push(path);
        }

        let path = dir.join(MATRIX_FILE);
        let mut w = csv::Writer::from_path(&path)?;
        let mut header = vec!["theme".to_string()];
        header.extend(self.partitions.keys().map(Partition::to_string));
        w.write_record(&header)?;
        for (theme, counts) in self.theme_matrix() {
            let mut record = vec![theme];
            record.extend(counts.iter().map(usize::to_string));
            w.write_record(&record)?;
        }
        w.flush()?;
        written.push(path);

        let path = dir.join(SUMMARY_FILE);
        let summary = Summary {
            partial: self.is_partial(),
            partitions: self.partitions.keys().cloned().collect(),
        };
        let mut text = serde_json::to_string_pretty(&summary)?;
        text.push('\n');
        fs::write(&path, text)?;
        written.push(path);

        Ok(written)
    }

    /// Reads back a directory produced by [`ReportBundle::write`].
    pub fn read(dir: &Path) -> Result<Self, ReportError> {
        let themes = read_codebook(File::open(dir.join(CODEBOOK_FILE))?)?;
        let summary: Summary = serde_json::from_slice(&fs::read(dir.join(SUMMARY_FILE))?)?;
        let mut partitions = BTreeMap::new();
        for partition in summary.partitions {
            let mut r = csv::Reader::from_path(dir.join(report_file_name(&partition)))?;
            let rows = r.deserialize().collect::<Result<Vec<ReportRow>, _>>()?;
            partitions.insert(partition, rows);
        }
        Ok(ReportBundle { themes, partitions })
    }
}
