//! Campaign metrics and the rank statistics used to relate class features
//! to injection counts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::model::{FlakyLabel, TestId};
use crate::pipeline::CampaignReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("a sample has zero rank variance")]
    DegenerateInput,
    #[error("sample is empty")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFinite,
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StatsError::NonFinite)
    }
}

/// 1-based ranks; tied values share the mean of their rank block.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut index: Vec<usize> = (0..values.len()).collect();
    index.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < index.len() {
        let mut end = start + 1;
        while end < index.len() && values[index[end]] == values[index[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end averaged.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &index[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Sizes of the tie blocks in `values`.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut groups = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        groups.push(end - start);
        start = end;
    }
    groups
}

/// Pearson correlation of the average-rank vectors.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: x.len() });
    }
    check_finite(x)?;
    check_finite(y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mean_x = rx.iter().sum::<f64>() / n;
    let mean_y = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// U of the first sample: pairs where it is larger, ties counting half.
    pub u: f64,
    /// Two-sided p from the tie-corrected normal approximation with
    /// continuity correction.
    pub p: f64,
}

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let n1 = a.len() as f64;
    let n2 = b.len() as f64;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let rank_sum: f64 = ranks[..a.len()].iter().sum();
    let u = rank_sum - n1 * (n1 + 1.0) / 2.0;

    let n = n1 + n2;
    let tie_term: f64 = tie_groups(&pooled)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    let p = if variance <= 0.0 {
        1.0
    } else {
        let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / variance.sqrt();
        let normal = Normal::standard();
        (2.0 * normal.sf(z)).min(1.0)
    };
    Ok(MannWhitney { u, p })
}

/// `(#{a > b} - #{a < b}) / (|a| |b|)` over all cross pairs.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    check_finite(a)?;
    check_finite(b)?;
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut dominance: i64 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x);
        let not_above = sorted.partition_point(|&y| y <= x);
        let above = sorted.len() - not_above;
        dominance += below as i64 - above as i64;
    }
    Ok(dominance as f64 / (a.len() * b.len()) as f64)
}

/// Wall-clock summary, kept out of the byte-stable metrics file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunTimeSummary {
    pub per_class_avg_ms: f64,
    pub per_project_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsTable {
    pub total_classes: usize,
    pub total_tests: usize,
    pub stable_tests: usize,
    pub mutants_total: usize,
    pub mutants_valid: usize,
    pub od_mutants: usize,
    pub od_tests: usize,
    pub od_tests_pct: f64,
    pub od_classes: usize,
    pub od_classes_pct: f64,
    pub victims: usize,
    pub brittles: usize,
    pub non_order_dependent: usize,
    pub unclassifiable: usize,
    pub brittles_pct: f64,
    pub victims_pct: f64,
    pub assertion_failures: usize,
    pub exception_failures: usize,
    pub assertion_pct: f64,
    pub exceptions_pct: f64,
    /// Ratios whose denominator was zero; they are reported as 0.
    pub undefined: Vec<String>,
}

fn ratio(numerator: usize, denominator: usize, name: &str, undefined: &mut Vec<String>) -> f64 {
    if denominator == 0 {
        undefined.push(name.to_string());
        0.0
    } else {
        numerator as f64 / denominator as f64
    }
}

/// Pure fold over the campaign report.
///
/// Order-dependent populations are counted per (mutant, test) pair, except
/// `od_tests`, which counts distinct tests so that it stays a share of the
/// suite.
pub fn compute_metrics(report: &CampaignReport) -> MetricsTable {
    let mut table = MetricsTable {
        total_classes: report.classes.len(),
        total_tests: report.classes.iter().map(|c| c.features.test_count).sum(),
        stable_tests: report
            .classes
            .iter()
            .filter(|c| c.is_retained())
            .map(|c| c.stable_tests().count())
            .sum(),
        mutants_total: report.mutants.len(),
        mutants_valid: report.mutants.iter().filter(|m| m.is_valid()).count(),
        ..MetricsTable::default()
    };

    let mut od_tests: BTreeSet<&TestId> = BTreeSet::new();
    let mut od_classes = BTreeSet::new();
    for evaluation in &report.evaluations {
        if evaluation.is_order_dependent() {
            table.od_mutants += 1;
            od_classes.insert(evaluation.mutant.target_test.class_id());
        }
        for (name, label) in &evaluation.labels {
            match label {
                FlakyLabel::Victim => table.victims += 1,
                FlakyLabel::Brittle => table.brittles += 1,
                FlakyLabel::NonOrderDependent => table.non_order_dependent += 1,
                FlakyLabel::Unclassifiable { .. } => table.unclassifiable += 1,
                FlakyLabel::Stable => {}
            }
            if label.is_order_dependent() {
                od_tests.insert(&evaluation.dossiers[name].test);
                if let Some(kinds) = evaluation.failure_kind_summary.get(name) {
                    table.assertion_failures += kinds.assertion;
                    table.exception_failures += kinds.other_exception;
                }
            }
        }
    }
    table.od_tests = od_tests.len();
    table.od_classes = od_classes.len();

    let mut undefined = Vec::new();
    table.od_tests_pct = ratio(table.od_tests, table.total_tests, "od_tests_pct", &mut undefined);
    table.od_classes_pct = ratio(table.od_classes, table.total_classes, "od_classes_pct", &mut undefined);
    let od_pairs = table.victims + table.brittles;
    table.brittles_pct = ratio(table.brittles, od_pairs, "brittles_pct", &mut undefined);
    table.victims_pct = ratio(table.victims, od_pairs, "victims_pct", &mut undefined);
    let failures = table.assertion_failures + table.exception_failures;
    table.assertion_pct = ratio(table.assertion_failures, failures, "assertion_pct", &mut undefined);
    table.exceptions_pct = ratio(table.exception_failures, failures, "exceptions_pct", &mut undefined);
    table.undefined = undefined;
    table
}

/// Run time averaged over classes, and for the whole project.
pub fn run_time_summary(report: &CampaignReport) -> RunTimeSummary {
    let per_class = &report.timing.per_class_ms;
    RunTimeSummary {
        per_class_avg_ms: if per_class.is_empty() {
            0.0
        } else {
            per_class.values().sum::<u64>() as f64 / per_class.len() as f64
        },
        per_project_ms: report.timing.total_ms,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFeatureRow {
    pub class_id: String,
    pub class_size: usize,
    pub shared_field_count: usize,
    pub has_fixture: bool,
    pub injected_od_count: usize,
}

/// One row per class that reached mutation.
pub fn class_feature_rows(report: &CampaignReport) -> Vec<ClassFeatureRow> {
    report
        .classes
        .iter()
        .filter(|c| c.is_retained())
        .map(|c| ClassFeatureRow {
            class_id: c.class_id.to_string(),
            class_size: c.features.test_count,
            shared_field_count: c.features.shared_field_count,
            has_fixture: c.features.has_fixture,
            injected_od_count: report
                .evaluations
                .iter()
                .filter(|e| e.mutant.target_test.class_id() == &c.class_id && e.is_order_dependent())
                .count(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StatOutcome<T> {
    Value { value: T },
    InsufficientData { reason: String },
}

impl<T> StatOutcome<T> {
    fn from_result(result: Result<T, StatsError>) -> Self {
        match result {
            Ok(value) => StatOutcome::Value { value },
            Err(err) => StatOutcome::InsufficientData {
                reason: err.to_string(),
            },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            StatOutcome::Value { value } => Some(value),
            StatOutcome::InsufficientData { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureComparison {
    pub mwu_u: f64,
    pub mwu_p: f64,
    pub cliffs_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStatistics {
    /// Spearman between class size and injected order-dependent mutants.
    pub class_size_rho: StatOutcome<f64>,
    /// Spearman between shared fields and injected order-dependent mutants.
    pub shared_fields_rho: StatOutcome<f64>,
    /// Classes with a fixture (first sample) against those without.
    pub fixture_split: StatOutcome<FixtureComparison>,
}

pub fn feature_statistics(rows: &[ClassFeatureRow]) -> FeatureStatistics {
    let od: Vec<f64> = rows.iter().map(|r| r.injected_od_count as f64).collect();
    let sizes: Vec<f64> = rows.iter().map(|r| r.class_size as f64).collect();
    let fields: Vec<f64> = rows.iter().map(|r| r.shared_field_count as f64).collect();
    let with: Vec<f64> = rows.iter().filter(|r| r.has_fixture).map(|r| r.injected_od_count as f64).collect();
    let without: Vec<f64> = rows.iter().filter(|r| !r.has_fixture).map(|r| r.injected_od_count as f64).collect();

    let fixture_split = if with.is_empty() || without.is_empty() {
        StatOutcome::InsufficientData {
            reason: format!(
                "{} classes with fixtures, {} without; both groups must be non-empty",
                with.len(),
                without.len()
            ),
        }
    } else {
        StatOutcome::from_result(mann_whitney_u(&with, &without).and_then(|mw| {
            Ok(FixtureComparison {
                mwu_u: mw.u,
                mwu_p: mw.p,
                cliffs_delta: cliffs_delta(&with, &without)?,
            })
        }))
    };
    FeatureStatistics {
        class_size_rho: StatOutcome::from_result(spearman_rho(&sizes, &od)),
        shared_fields_rho: StatOutcome::from_result(spearman_rho(&fields, &od)),
        fixture_split,
    }
}
