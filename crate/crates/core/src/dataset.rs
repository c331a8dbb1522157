//! The dataset of injected order-dependent tests: one JSON object per line,
//! sorted so that equal campaigns produce equal bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClassId, ConfigSnapshot, FailureKind, FlakyLabel, MutantId, TestId, TestOrder};
use crate::pipeline::CampaignReport;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: schema violation: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("line {line}: {reason}")]
    InvalidEntry { line: usize, reason: String },
    #[error("entry for {test} under {mutant}: {reason}")]
    Inconsistent { mutant: MutantId, test: TestId, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdLabel {
    Victim,
    Brittle,
}

impl OdLabel {
    pub fn from_label(label: &FlakyLabel) -> Option<Self> {
        match label {
            FlakyLabel::Victim => Some(OdLabel::Victim),
            FlakyLabel::Brittle => Some(OdLabel::Brittle),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub suite: String,
    pub class_id: ClassId,
    pub mutant_id: MutantId,
    pub diff: String,
    pub test: TestId,
    pub label: OdLabel,
    pub witness_passing_order: TestOrder,
    pub witness_failing_order: TestOrder,
    /// How the test failed in the failing witness.
    pub failure_kind: FailureKind,
    pub seed: u64,
    pub config: ConfigSnapshot,
}

impl DatasetEntry {
    pub fn validate(&self) -> Result<(), String> {
        if self.test.class_id() != &self.class_id {
            return Err(format!("test {} is not in class {}", self.test, self.class_id));
        }
        for (name, order) in [
            ("witness_passing_order", &self.witness_passing_order),
            ("witness_failing_order", &self.witness_failing_order),
        ] {
            if order.class_id() != &self.class_id {
                return Err(format!("{name} belongs to another class"));
            }
            if !order.contains(&self.test) {
                return Err(format!("{name} does not contain {}", self.test));
            }
            if order.sequence().iter().any(|t| t.class_id() != &self.class_id) {
                return Err(format!("{name} mixes classes"));
            }
        }
        if self.witness_passing_order == self.witness_failing_order {
            return Err("witness orders are identical".into());
        }
        Ok(())
    }

    fn sort_key(&self) -> (String, &str, &str) {
        (self.class_id.to_string(), self.mutant_id.as_str(), self.test.test_name())
    }
}

/// One entry per (mutant, test) pair labelled victim or brittle.
pub fn entries_from_report(report: &CampaignReport) -> Result<Vec<DatasetEntry>, DatasetError> {
    let mut entries = Vec::new();
    let config = report.config.snapshot();
    for evaluation in &report.evaluations {
        for (name, label) in evaluation.order_dependent_tests() {
            let dossier = &evaluation.dossiers[name];
            let inconsistent = |reason: &str| DatasetError::Inconsistent {
                mutant: evaluation.mutant.id.clone(),
                test: dossier.test.clone(),
                reason: reason.into(),
            };
            let passing = dossier.witness_passing().ok_or_else(|| inconsistent("no passing order"))?;
            let failing = dossier.witness_failing().ok_or_else(|| inconsistent("no failing order"))?;
            let failure_kind = evaluation
                .failing_kinds
                .get(name)
                .and_then(|kinds| kinds.get(&failing.names()))
                .copied()
                .ok_or_else(|| inconsistent("failing witness has no recorded failure kind"))?;
            entries.push(DatasetEntry {
                suite: report.suite.clone(),
                class_id: dossier.test.class_id().clone(),
                mutant_id: evaluation.mutant.id.clone(),
                diff: evaluation.mutant.diff.clone(),
                test: dossier.test.clone(),
                label: OdLabel::from_label(label).expect("order-dependent label"),
                witness_passing_order: passing.clone(),
                witness_failing_order: failing.clone(),
                failure_kind,
                seed: report.config.seed,
                config: config.clone(),
            });
        }
    }
    sort_entries(&mut entries);
    Ok(entries)
}

pub fn sort_entries(entries: &mut [DatasetEntry]) {
    entries.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Writes `entries` in canonical order. Invalid entries are rejected before
/// anything is written.
pub fn write_dataset<W: Write>(entries: &[DatasetEntry], mut out: W) -> Result<(), DatasetError> {
    for (index, entry) in entries.iter().enumerate() {
        entry
            .validate()
            .map_err(|reason| DatasetError::InvalidEntry { line: index + 1, reason })?;
    }
    let mut sorted = entries.to_vec();
    sort_entries(&mut sorted);
    for entry in &sorted {
        serde_json::to_writer(&mut out, entry).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Vec<DatasetEntry>, DatasetError> {
    let mut entries = Vec::new();
    for (index, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: DatasetEntry = serde_json::from_str(&line).map_err(|err| DatasetError::SchemaViolation {
            line: index + 1,
            message: err.to_string(),
        })?;
        entry
            .validate()
            .map_err(|reason| DatasetError::InvalidEntry { line: index + 1, reason })?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn read_dataset_file(path: &Path) -> Result<Vec<DatasetEntry>, DatasetError> {
    read_dataset(BufReader::new(File::open(path)?))
}
