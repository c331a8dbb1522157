//! Human-readable report and the machine-readable campaign artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytics::{compute_metrics, run_time_summary, class_feature_rows, feature_statistics, MetricsTable, FeatureStatistics, ClassFeatureRow, StatOutcome};
use crate::dataset::{entries_from_report, write_dataset, DatasetEntry, DatasetError};
use crate::pipeline::{status_name, CampaignReport, SeedLedger};

pub const REPORT_FILE: &str = "report.md";
pub const METRICS_FILE: &str = "metrics.json";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const EXCLUDED_FILE: &str = "excluded.json";
pub const CAMPAIGN_FILE: &str = "campaign.json";

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Contents of the metrics file. Wall-clock data is left out so the file
/// depends only on suite, seed and configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsFile {
    pub suite: String,
    pub seeds: SeedLedger,
    pub shared_field_proxy: String,
    pub table: MetricsTable,
    pub class_features: Vec<ClassFeatureRow>,
    pub statistics: FeatureStatistics,
}

impl MetricsFile {
    pub fn from_report(report: &CampaignReport) -> Self {
        let class_features = class_feature_rows(report);
        Self {
            suite: report.suite.clone(),
            seeds: report.seeds.clone(),
            shared_field_proxy: report.shared_field_proxy.clone(),
            table: compute_metrics(report),
            statistics: feature_statistics(&class_features),
            class_features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcludedTest {
    pub test: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcludedClass {
    pub class_id: String,
    pub reason: String,
    pub tests: Vec<ExcludedTest>,
}

pub fn excluded_ledger(report: &CampaignReport) -> Vec<ExcludedClass> {
    report
        .excluded_classes()
        .map(|class| ExcludedClass {
            class_id: class.class_id.to_string(),
            reason: class.excluded.clone().unwrap_or_default(),
            tests: class
                .verdicts
                .iter()
                .map(|v| ExcludedTest {
                    test: v.test.test_name().to_string(),
                    status: status_name(v.status).to_string(),
                })
                .collect(),
        })
        .collect()
}

fn pct(ratio: f64) -> String {
    format!("{:.1}%", ratio * 100.0)
}

fn stat<T>(outcome: &StatOutcome<T>, show: impl Fn(&T) -> String) -> String {
    match outcome {
        StatOutcome::Value { value } => show(value),
        StatOutcome::InsufficientData { reason } => format!("insufficient data ({reason})"),
    }
}

pub fn render_report(report: &CampaignReport) -> String {
    let metrics = MetricsFile::from_report(report);
    let table = &metrics.table;
    let run_time = run_time_summary(report);
    let mut out = String::new();
    let w = &mut out;

    let _ = writeln!(w, "# Flakiness injection report: {}\n", report.suite);
    if report.classes.is_empty() {
        let _ = writeln!(w, "> **No classes analyzed.** The adapter reported no test classes.\n");
    }

    let _ = writeln!(w, "## Seeds\n");
    let _ = writeln!(w, "| Use | Seed |\n|---|---|");
    let _ = writeln!(w, "| campaign | {} |", report.seeds.campaign);
    let _ = writeln!(w, "| step 1 order plans (stability) | {} |", report.seeds.stability);
    let _ = writeln!(w, "| step 3 order plans (evaluation) | {} |\n", report.seeds.evaluation);

    let cfg = &report.config;
    let _ = writeln!(w, "## Configuration\n");
    let _ = writeln!(w, "- isolation runs: {}", cfg.isolation_runs);
    let _ = writeln!(w, "- orders per class: {}", cfg.orders_per_class);
    let _ = writeln!(w, "- per-test timeout: {} ms", cfg.per_test_timeout);
    let _ = writeln!(w, "- workers: {}\n", cfg.parallelism);

    let _ = writeln!(w, "## Metrics\n");
    let _ = writeln!(w, "| Metric | Value |\n|---|---|");
    let rows: Vec<(&str, String)> = vec![
        ("Test classes", table.total_classes.to_string()),
        ("Tests", table.total_tests.to_string()),
        ("Stable tests", table.stable_tests.to_string()),
        ("Mutants (total)", table.mutants_total.to_string()),
        ("Mutants (valid)", table.mutants_valid.to_string()),
        ("Order-dependent mutants", table.od_mutants.to_string()),
        ("Order-dependent tests", format!("{} ({})", table.od_tests, pct(table.od_tests_pct))),
        ("Classes with order-dependent mutants", format!("{} ({})", table.od_classes, pct(table.od_classes_pct))),
        ("Brittles", format!("{} ({})", table.brittles, pct(table.brittles_pct))),
        ("Victims", format!("{} ({})", table.victims, pct(table.victims_pct))),
        ("Not order-dependent", table.non_order_dependent.to_string()),
        ("Unclassifiable", table.unclassifiable.to_string()),
        ("Assertion failures", format!("{} ({})", table.assertion_failures, pct(table.assertion_pct))),
        ("Exception failures", format!("{} ({})", table.exception_failures, pct(table.exceptions_pct))),
        ("Run time per class (mean)", format!("{:.1} ms", run_time.per_class_avg_ms)),
        ("Run time per project", format!("{} ms", run_time.per_project_ms)),
    ];
    for (name, value) in rows {
        let _ = writeln!(w, "| {name} | {value} |");
    }
    if !table.undefined.is_empty() {
        let _ = writeln!(w, "\nUndefined (empty denominator, shown as 0): {}", table.undefined.join(", "));
    }
    let _ = writeln!(w);

    let _ = writeln!(w, "## Class features\n");
    let _ = writeln!(w, "Shared-field measure: {}\n", report.shared_field_proxy);
    if metrics.class_features.is_empty() {
        let _ = writeln!(w, "No class reached mutation.\n");
    } else {
        let _ = writeln!(w, "| Class | Tests | Shared fields | Fixture | Order-dependent mutants |");
        let _ = writeln!(w, "|---|---|---|---|---|");
        for row in &metrics.class_features {
            let _ = writeln!(
                w,
                "| {} | {} | {} | {} | {} |",
                row.class_id,
                row.class_size,
                row.shared_field_count,
                if row.has_fixture { "yes" } else { "no" },
                row.injected_od_count
            );
        }
        let _ = writeln!(w);
    }

    let stats = &metrics.statistics;
    let _ = writeln!(w, "## Statistics\n");
    let _ = writeln!(w, "| Statistic | Value |\n|---|---|");
    let _ = writeln!(w, "| Spearman rho, class size vs. order-dependent mutants | {} |", stat(&stats.class_size_rho, |v| format!("{v:.4}")));
    let _ = writeln!(w, "| Spearman rho, shared fields vs. order-dependent mutants | {} |", stat(&stats.shared_fields_rho, |v| format!("{v:.4}")));
    let _ = writeln!(
        w,
        "| Fixture vs. no fixture (Mann-Whitney U, p, Cliff's delta) | {} |\n",
        stat(&stats.fixture_split, |f| format!("U = {}, p = {:.4}, delta = {:.4}", f.mwu_u, f.mwu_p, f.cliffs_delta))
    );

    let excluded = excluded_ledger(report);
    let _ = writeln!(w, "## Excluded at step 1\n");
    let _ = writeln!(w, "{} class(es) excluded.\n", excluded.len());
    if !excluded.is_empty() {
        let _ = writeln!(w, "| Class | Reason |\n|---|---|");
        for class in &excluded {
            let _ = writeln!(w, "| {} | {} |", class.class_id, class.reason);
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "## Order-dependent tests\n");
    let mut any = false;
    for evaluation in &report.evaluations {
        for (name, label) in evaluation.order_dependent_tests() {
            if !any {
                let _ = writeln!(w, "| Mutant | Test | Label |\n|---|---|---|");
                any = true;
            }
            let _ = writeln!(w, "| {} | {} | {} |", evaluation.mutant.id, name, label.name());
        }
    }
    if !any {
        let _ = writeln!(w, "None.");
    }
    let _ = writeln!(w);

    if !report.failures.is_empty() {
        let _ = writeln!(w, "## Failures\n");
        for failure in &report.failures {
            let _ = writeln!(w, "- {} `{}`: {}", failure.stage, failure.subject, failure.error);
        }
        let _ = writeln!(w);
    }
    out
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ArtifactError> {
    fs::write(path, bytes).map_err(|source| ArtifactError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes");
    bytes.push(b'\n');
    bytes
}

/// Writes report, metrics, dataset, excluded ledger and the full campaign
/// record into `dir`. Returns the dataset entries.
pub fn write_artifacts(report: &CampaignReport, dir: &Path) -> Result<Vec<DatasetEntry>, ArtifactError> {
    let io = |source| ArtifactError::Io {
        path: dir.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let entries = entries_from_report(report)?;
    let dataset_path = dir.join(DATASET_FILE);
    let file = fs::File::create(&dataset_path).map_err(|source| ArtifactError::Io {
        path: dataset_path.display().to_string(),
        source,
    })?;
    write_dataset(&entries, BufWriter::new(file))?;
    write_file(&dir.join(METRICS_FILE), &pretty(&MetricsFile::from_report(report)))?;
    write_file(&dir.join(EXCLUDED_FILE), &pretty(&excluded_ledger(report)))?;
    write_file(&dir.join(CAMPAIGN_FILE), &pretty(report))?;
    write_file(&dir.join(REPORT_FILE), render_report(report).as_bytes())?;
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CampaignConfig;
    use crate::pipeline::run_campaign;
    use crate::sim::{listings_suite, SimFactory, SimSuite};

    fn config() -> CampaignConfig {
        CampaignConfig {
            isolation_runs: 5,
            parallelism: 2,
            ..CampaignConfig::with_seed(7)
        }
    }

    #[test]
    fn listing_report_names_one_excluded_class_and_both_seeds() {
        let report = run_campaign("listings", "keys", &SimFactory::new(listings_suite()), &config()).unwrap();
        let text = render_report(&report);
        assert!(text.contains("1 class(es) excluded."), "{text}");
        assert!(text.contains("listings.HttpRequestFactory"));
        assert!(text.contains(&report.seeds.stability.to_string()));
        assert!(text.contains(&report.seeds.evaluation.to_string()));
        assert!(!text.contains("No classes analyzed"));
        let excluded = excluded_ledger(&report);
        assert_eq!(excluded.len(), 1);
        assert!(excluded[0].reason.contains("already order-dependent"));
    }

    #[test]
    fn empty_campaign_has_banner_and_zero_table() {
        let suite = SimSuite {
            name: "empty".into(),
            module_path: "empty".into(),
            classes: vec![],
            generator: None,
        };
        let report = run_campaign("empty", "keys", &SimFactory::new(suite), &config()).unwrap();
        let text = render_report(&report);
        assert!(text.contains("No classes analyzed"));
        let table = compute_metrics(&report);
        assert_eq!(table.total_classes, 0);
        assert_eq!(table.mutants_total, 0);
        assert_eq!(table.od_tests_pct, 0.0);
        assert!(table.undefined.contains(&"od_tests_pct".to_string()));
    }

    #[test]
    fn metrics_file_round_trips() {
        let report = run_campaign("listings", "keys", &SimFactory::new(listings_suite()), &config()).unwrap();
        let metrics = MetricsFile::from_report(&report);
        let json = serde_json::to_string(&metrics).unwrap();
        assert_eq!(serde_json::from_str::<MetricsFile>(&json).unwrap(), metrics);
        assert_eq!(compute_metrics(&report), compute_metrics(&report));
    }
}
