//! Install-time health check: the pipeline against the brute-force oracle on
//! a generated corpus, the bundled scenarios, and the rank statistics
//! against naive re-implementations.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{cliffs_delta, mann_whitney_u, spearman_rho};
use crate::model::{CampaignConfig, FlakyLabel};
use crate::pipeline::{enumerate_mutants, evaluate_mutant, parallel_map, run_campaign, PipelineError, StabilityStatus};
use crate::protocol::{Session, SessionFactory};
use crate::sim::{
    exhaustive_oracle, listings_suite, mutant_class, GeneratorParams, SimClass, SimClassGenerator, SimFactory,
    SimSuite,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct SelftestOptions {
    pub generator: GeneratorParams,
    pub statistics_samples: usize,
    pub parallelism: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            generator: GeneratorParams::default(),
            statistics_samples: 1000,
            parallelism: CampaignConfig::default().parallelism,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgreementSummary {
    pub classes: usize,
    pub mutants: usize,
    pub pairs: usize,
    pub non_exhaustive_plans: usize,
    pub disagreements: Vec<String>,
    pub elapsed: Duration,
}

impl AgreementSummary {
    pub fn agrees(&self) -> bool {
        self.disagreements.is_empty() && self.non_exhaustive_plans == 0 && self.pairs > 0
    }
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn same_label(a: &FlakyLabel, b: &FlakyLabel) -> bool {
    a.name() == b.name()
}

/// Evaluates every mutant of every class with an exhaustive order plan and
/// compares each test's label with [`exhaustive_oracle`] on the mutated
/// class.
pub fn oracle_agreement(suite: &SimSuite, seed: u64, parallelism: usize) -> AgreementSummary {
    let started = Instant::now();
    let largest = suite.classes.iter().map(|c| c.tests.len()).max().unwrap_or(1);
    let cfg = CampaignConfig {
        seed,
        orders_per_class: factorial(largest),
        isolation_runs: 3,
        parallelism,
        ..CampaignConfig::default()
    };
    let factory = SimFactory::new(suite.clone());
    let classes: Vec<&SimClass> = suite.classes.iter().collect();
    let results = parallel_map(&factory, parallelism, &classes, |session, class| {
        Ok(class_agreement(session, suite, class, &cfg))
    });

    let mut total = AgreementSummary {
        classes: classes.len(),
        ..AgreementSummary::default()
    };
    for (class, result) in classes.iter().zip(results) {
        match result.map_err(|e| e.to_string()).and_then(|r| r) {
            Ok(s) => {
                total.mutants += s.mutants;
                total.pairs += s.pairs;
                total.non_exhaustive_plans += s.non_exhaustive_plans;
                total.disagreements.extend(s.disagreements);
            }
            Err(err) => total.disagreements.push(format!("{}: {err}", class.name)),
        }
    }
    total.elapsed = started.elapsed();
    total
}

fn class_agreement(
    session: &mut Session,
    suite: &SimSuite,
    class: &SimClass,
    cfg: &CampaignConfig,
) -> Result<AgreementSummary, String> {
    let class_id = suite.class_id(class).map_err(|e| e.to_string())?;
    let mut summary = AgreementSummary::default();
    for test in &class.tests {
        let test_id = class_id.test(test.name.as_str()).map_err(|e| e.to_string())?;
        let points = session.mutation_points(&test_id).map_err(|e| e.to_string())?;
        for index in 0..points.len() {
            let mutant = session.materialize(&test_id, index).map_err(|e| e.to_string())?;
            let mutated = mutant_class(class, &test.name, index).map_err(|e| e.to_string())?;
            summary.mutants += 1;
            let labels = match evaluate_mutant(session, &mutant, cfg) {
                Ok(evaluation) => {
                    summary.non_exhaustive_plans += usize::from(!evaluation.plan.exhaustive);
                    Some(evaluation.labels)
                }
                Err(PipelineError::AllOrdersErrored(_)) => None,
                Err(err) => return Err(err.to_string()),
            };
            for t in &mutated.tests {
                summary.pairs += 1;
                let expected = exhaustive_oracle(&mutated, &t.name).map_err(|e| e.to_string())?;
                let got = labels.as_ref().map(|l| l[&t.name].clone());
                let agrees = match &got {
                    Some(label) => same_label(label, &expected),
                    None => matches!(expected, FlakyLabel::Unclassifiable { .. }),
                };
                if !agrees {
                    summary.disagreements.push(format!(
                        "{}: test {} labelled {}, oracle says {}",
                        mutant.id,
                        t.name,
                        got.as_ref().map_or("nothing", FlakyLabel::name),
                        expected.name()
                    ));
                }
            }
        }
    }
    Ok(summary)
}

/// Each test must yield one mutant per non-assertion statement.
pub fn mutant_cardinality(suite: &SimSuite) -> Result<usize, String> {
    let factory = SimFactory::new(suite.clone());
    let mut session = factory.open().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for class in &suite.classes {
        let class_id = suite.class_id(class).map_err(|e| e.to_string())?;
        for test in &class.tests {
            let id = class_id.test(test.name.as_str()).map_err(|e| e.to_string())?;
            let mutants = enumerate_mutants(&mut session, &id).map_err(|e| e.to_string())?;
            if mutants.len() != test.non_assertion_count() {
                return Err(format!(
                    "{id}: {} mutants for {} non-assertion statements",
                    mutants.len(),
                    test.non_assertion_count()
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// The three bundled scenarios end to end.
pub fn listing_fidelity(seed: u64) -> Result<(), String> {
    let cfg = CampaignConfig {
        isolation_runs: 10,
        ..CampaignConfig::with_seed(seed)
    };
    let report = run_campaign("listings", "keys", &SimFactory::new(listings_suite()), &cfg).map_err(|e| e.to_string())?;
    let class = |name: &str| {
        report
            .classes
            .iter()
            .find(|c| c.class_id.class_name() == name)
            .ok_or_else(|| format!("class {name} missing"))
    };
    let polluter = class("HttpRequestFactory")?;
    if polluter.is_retained()
        || !polluter
            .verdicts
            .iter()
            .any(|v| v.status == StabilityStatus::PreexistingOrderDependent)
    {
        return Err("HttpRequestFactory was not excluded as already order-dependent".into());
    }
    // The helper of each modelled test is its first statement.
    let expect_single = |class_name: &str, test: &str, label: FlakyLabel| -> Result<(), String> {
        let id = format!("listings.{class_name}::{test}#0");
        let evaluation = report
            .evaluations
            .iter()
            .find(|e| e.mutant.id.as_str() == id)
            .ok_or_else(|| format!("mutant {id} was not evaluated"))?;
        let hits: Vec<(&String, &FlakyLabel)> = evaluation.order_dependent_tests().collect();
        match hits.as_slice() {
            [(name, l)] if name.as_str() == test && **l == label => Ok(()),
            other => Err(format!("{id}: expected one {} on {test}, got {other:?}", label.name())),
        }
    };
    expect_single("EndpointSession", "testCloseReason", FlakyLabel::Brittle)?;
    expect_single("PathGlob", "testAbsoluteGlob", FlakyLabel::Victim)?;
    Ok(())
}

fn naive_ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| {
            let below = values.iter().filter(|w| *w < v).count() as f64;
            let equal = values.iter().filter(|w| *w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

/// Compares the statistics with naive definitions on `samples` random
/// vector pairs. Returns the number of comparisons made.
pub fn statistics_oracles(samples: usize, seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for _ in 0..samples {
        let n = rng.random_range(2..=12);
        let m = rng.random_range(1..=12);
        let x: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..8))).collect();
        let y: Vec<f64> = (0..n).map(|_| f64::from(rng.random_range(0..8))).collect();
        let b: Vec<f64> = (0..m).map(|_| f64::from(rng.random_range(0..8))).collect();

        let naive = naive_pearson(&naive_ranks(&x), &naive_ranks(&y));
        match spearman_rho(&x, &y) {
            Ok(rho) if (rho - naive).abs() <= 1e-9 => {}
            Err(_) if !naive.is_finite() => {}
            other => return Err(format!("spearman {x:?} {y:?}: {other:?} vs {naive}")),
        }

        let (mut greater, mut less, mut ties) = (0usize, 0usize, 0usize);
        for a in &x {
            for c in &b {
                if a > c {
                    greater += 1;
                } else if a < c {
                    less += 1;
                } else {
                    ties += 1;
                }
            }
        }
        let u = greater as f64 + ties as f64 / 2.0;
        let mw = mann_whitney_u(&x, &b).map_err(|e| e.to_string())?;
        if mw.u != u {
            return Err(format!("mann-whitney {x:?} {b:?}: U {} vs {u}", mw.u));
        }
        let delta = cliffs_delta(&x, &b).map_err(|e| e.to_string())?;
        let nm = (x.len() * b.len()) as f64;
        if (delta - (greater as f64 - less as f64) / nm).abs() > 1e-9 || 2 * greater + ties != (delta * nm + nm).round() as usize {
            return Err(format!("cliff's delta {x:?} {b:?}: {delta}"));
        }
        compared += 1;
    }
    Ok(compared)
}

pub fn run_selftest(options: &SelftestOptions) -> SelftestReport {
    let mut checks = Vec::new();
    let suite = SimClassGenerator::new(options.generator.clone()).suite("selftest", "selftest");

    let agreement = oracle_agreement(&suite, options.generator.seed, options.parallelism);
    checks.push(SelftestCheck {
        name: "oracle agreement",
        passed: agreement.agrees(),
        detail: format!(
            "{} classes, {} mutants, {} labels, {} disagreements, {:.1?}",
            agreement.classes,
            agreement.mutants,
            agreement.pairs,
            agreement.disagreements.len(),
            agreement.elapsed
        ) + &agreement
            .disagreements
            .first()
            .map(|d| format!("; first: {d}"))
            .unwrap_or_default(),
    });

    let cardinality = mutant_cardinality(&suite);
    checks.push(SelftestCheck {
        name: "mutant cardinality",
        passed: cardinality.is_ok(),
        detail: match cardinality {
            Ok(n) => format!("{n} tests checked"),
            Err(e) => e,
        },
    });

    let listings = listing_fidelity(options.generator.seed);
    checks.push(SelftestCheck {
        name: "listing fidelity",
        passed: listings.is_ok(),
        detail: listings.err().unwrap_or_else(|| "excluded polluter, one brittle, one victim".into()),
    });

    let stats = statistics_oracles(options.statistics_samples, options.generator.seed);
    checks.push(SelftestCheck {
        name: "statistics oracles",
        passed: stats.is_ok(),
        detail: match stats {
            Ok(n) => format!("{n} random samples"),
            Err(e) => e,
        },
    });
    SelftestReport { checks }
}
