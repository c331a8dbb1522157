//! Acceptance criteria. Each criterion prints one PASS or FAIL line; the
//! process exits non-zero if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use flaker::analytics::{cliffs_delta, compute_metrics, mann_whitney_u, spearman_rho};
use flaker::dataset::read_dataset_file;
use flaker::model::{CampaignConfig, FlakyLabel, Outcome};
use flaker::pipeline::{enumerate_mutants, evaluate_mutant, run_campaign, CampaignReport, StabilityStatus};
use flaker::protocol::{Session, SessionFactory};
use flaker::sim::{
    execute_isolated, execute_sequence, exhaustive_oracle, listings_suite, mutant_class, GeneratorParams, SimClass,
    SimClassGenerator, SimFactory, SimStatement, SimSuite, SimTest,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

type Verdict = Result<String, String>;

fn corpus(classes: usize) -> SimSuite {
    let params = GeneratorParams {
        classes,
        max_tests: 5,
        max_statements: 6,
        ..GeneratorParams::default()
    };
    SimClassGenerator::new(params).suite("generated", "gen")
}

/// Every permutation of `0..n`, by recursive insertion.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for shorter in permutations(n - 1) {
        for slot in 0..=shorter.len() {
            let mut p = shorter.clone();
            p.insert(slot, n - 1);
            out.push(p);
        }
    }
    out
}

/// Label of `test` straight from the definitions: order-dependent when one
/// order passes it and another fails it; then victim if it passes alone,
/// brittle if it fails alone.
fn definitional_label(class: &SimClass, test: &str) -> &'static str {
    let target = class.tests.iter().position(|t| t.name == test).unwrap();
    let (mut passes, mut fails, mut errors) = (false, false, false);
    for perm in permutations(class.tests.len()) {
        let tests: Vec<&SimTest> = perm.iter().map(|&i| &class.tests[i]).collect();
        let outcomes = execute_sequence(class, &tests, 0);
        match &outcomes[perm.iter().position(|&i| i == target).unwrap()] {
            Outcome::Pass => passes = true,
            Outcome::Fail { .. } => fails = true,
            _ => errors = true,
        }
    }
    if passes && fails {
        match execute_isolated(class, test, 0).unwrap() {
            Outcome::Pass => "victim",
            Outcome::Fail { .. } => "brittle",
            _ => "unclassifiable",
        }
    } else if errors && !passes && !fails {
        "unclassifiable"
    } else {
        "stable"
    }
}

fn oracle_agreement() -> Verdict {
    let started = Instant::now();
    let suite = corpus(200);
    if suite.classes.iter().any(|c| c.tests.len() > 5 || c.tests.iter().any(|t| t.body.len() > 6)) {
        return Err("generated corpus exceeds 5 tests or 6 statements".into());
    }
    let factory = SimFactory::new(suite.clone());
    let mut session = factory.open().map_err(|e| e.to_string())?;
    let cfg = CampaignConfig {
        orders_per_class: 120,
        isolation_runs: 3,
        ..CampaignConfig::with_seed(11)
    };
    let (mut mutants, mut pairs) = (0, 0);
    let mut disagreements = Vec::new();
    for class in &suite.classes {
        let class_id = suite.class_id(class).unwrap();
        for test in &class.tests {
            let test_id = class_id.test(test.name.as_str()).unwrap();
            for mutant in enumerate_mutants(&mut session, &test_id).map_err(|e| e.to_string())? {
                if !mutant.is_valid() {
                    continue;
                }
                mutants += 1;
                session
                    .materialize(&test_id, mutant.statement_index)
                    .map_err(|e| e.to_string())?;
                let mutated = mutant_class(class, &test.name, mutant.statement_index).unwrap();
                let evaluation = evaluate_mutant(&mut session, &mutant, &cfg);
                for t in &mutated.tests {
                    pairs += 1;
                    let expected = definitional_label(&mutated, &t.name);
                    let got = match &evaluation {
                        Ok(e) if !e.plan.exhaustive => "non-exhaustive plan",
                        Ok(e) => e.labels[&t.name].name(),
                        Err(_) => "unclassifiable",
                    };
                    let library_oracle = exhaustive_oracle(&mutated, &t.name).unwrap();
                    if got != expected || library_oracle.name() != expected {
                        disagreements.push(format!(
                            "{} / {}: pipeline {got}, oracle {}, definition {expected}",
                            mutant.id,
                            t.name,
                            library_oracle.name()
                        ));
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if !disagreements.is_empty() {
        return Err(format!(
            "{} of {pairs} labels disagree, first: {}",
            disagreements.len(),
            disagreements[0]
        ));
    }
    if elapsed > Duration::from_secs(120) {
        return Err(format!("took {elapsed:.1?}, limit 2 minutes"));
    }
    Ok(format!(
        "{} classes, {mutants} mutants, {pairs} (mutant, test) labels agree, {elapsed:.1?}",
        suite.classes.len()
    ))
}

fn listing_fidelity() -> Verdict {
    for seed in [0, 7, 1234] {
        let cfg = CampaignConfig {
            isolation_runs: 20,
            ..CampaignConfig::with_seed(seed)
        };
        let report = run_campaign("listings", "keys", &SimFactory::new(listings_suite()), &cfg).map_err(|e| e.to_string())?;
        let polluter = report
            .classes
            .iter()
            .find(|c| c.class_id.class_name() == "HttpRequestFactory")
            .ok_or("HttpRequestFactory missing")?;
        let preexisting: Vec<&str> = polluter
            .verdicts
            .iter()
            .filter(|v| v.status == StabilityStatus::PreexistingOrderDependent)
            .map(|v| v.test.test_name())
            .collect();
        if polluter.is_retained() || preexisting != ["postWithNumericQueryParams"] {
            return Err(format!("seed {seed}: polluter class not excluded as order-dependent: {:?}", polluter.verdicts));
        }
        if !polluter.plan.is_some_and(|p| p.exhaustive) {
            return Err(format!("seed {seed}: step 1 plan for the 3-test class is not exhaustive"));
        }
        for (mutant, test, label) in [
            ("listings.EndpointSession::testCloseReason#0", "testCloseReason", FlakyLabel::Brittle),
            ("listings.PathGlob::testAbsoluteGlob#0", "testAbsoluteGlob", FlakyLabel::Victim),
        ] {
            let evaluation = report
                .evaluations
                .iter()
                .find(|e| e.mutant.id.as_str() == mutant)
                .ok_or_else(|| format!("seed {seed}: {mutant} not evaluated"))?;
            let od: Vec<(&String, &FlakyLabel)> = evaluation.order_dependent_tests().collect();
            if od.len() != 1 || od[0].0 != test || *od[0].1 != label {
                return Err(format!("seed {seed}: {mutant} gave {od:?}, expected one {} on {test}", label.name()));
            }
        }
    }
    Ok("polluter class excluded at step 1; helper deletions yield one brittle and one victim, seeds 0, 7, 1234".into())
}

fn mutant_cardinality() -> Verdict {
    let suite = corpus(200);
    let mut session = SimFactory::new(suite.clone()).open().map_err(|e| e.to_string())?;
    let mut tests = 0;
    let mut mutants = 0;
    for class in &suite.classes {
        let class_id = suite.class_id(class).unwrap();
        for test in &class.tests {
            let expected = test
                .body
                .iter()
                .filter(|s| {
                    !matches!(
                        s,
                        SimStatement::AssertEq { .. } | SimStatement::AssertUnset { .. } | SimStatement::FlipOnOddRun
                    )
                })
                .count();
            let id = class_id.test(test.name.as_str()).unwrap();
            let got = enumerate_mutants(&mut session, &id).map_err(|e| e.to_string())?;
            if got.len() != expected {
                return Err(format!("{id}: {} mutants, {expected} non-assertion statements", got.len()));
            }
            let ids: BTreeSet<_> = got.iter().map(|m| m.id.clone()).collect();
            if ids.len() != got.len() {
                return Err(format!("{id}: duplicate mutant ids"));
            }
            tests += 1;
            mutants += got.len();
        }
    }
    Ok(format!("{tests} tests, {mutants} mutants, one per non-assertion statement"))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let output = Command::new(env!("CARGO_BIN_EXE_flaker"))
        .args(args)
        .env_remove("FLAKER_OUT")
        .output()
        .map_err(|e| e.to_string())?;
    if output.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&output.stderr)))
    }
}

fn reproducibility(scratch: &Path) -> Verdict {
    let corpus_file = scratch.join("corpus.json");
    std::fs::write(&corpus_file, serde_json::to_vec(&corpus(60)).unwrap()).map_err(|e| e.to_string())?;
    let corpus_arg = corpus_file.to_str().unwrap();
    let mut compared = 0;
    for (corpus, seed) in [("listings", "7"), (corpus_arg, "3")] {
        let a = scratch.join(format!("a{compared}"));
        let b = scratch.join(format!("b{compared}"));
        for (out, jobs) in [(&a, "1"), (&b, "3")] {
            run_cli(&[
                "run", "--adapter", "sim", "--corpus", corpus, "--seed", seed, "--isolation-runs", "10", "--jobs", jobs,
                "--out", out.to_str().unwrap(),
            ])?;
        }
        for file in ["dataset.jsonl", "metrics.json"] {
            let first = std::fs::read(a.join(file)).map_err(|e| e.to_string())?;
            let second = std::fs::read(b.join(file)).map_err(|e| e.to_string())?;
            if first != second {
                return Err(format!("{file} differs between two campaigns on {corpus}"));
            }
        }
        if read_dataset_file(&a.join("dataset.jsonl")).map_err(|e| e.to_string())?.is_empty() {
            return Err(format!("{corpus}: empty dataset proves nothing"));
        }
        compared += 1;
    }
    Ok(format!("dataset.jsonl and metrics.json byte-identical across {compared} campaign pairs with 1 vs 3 workers"))
}

fn campaigns() -> Result<Vec<CampaignReport>, String> {
    let mut reports = Vec::new();
    for seed in 0..3 {
        let cfg = CampaignConfig {
            isolation_runs: 10,
            ..CampaignConfig::with_seed(seed)
        };
        reports.push(run_campaign("listings", "keys", &SimFactory::new(listings_suite()), &cfg).map_err(|e| e.to_string())?);
        reports.push(run_campaign("generated", "keys", &SimFactory::new(corpus(120)), &cfg).map_err(|e| e.to_string())?);
    }
    Ok(reports)
}

fn label_semantics(reports: &[CampaignReport]) -> Verdict {
    let mut checked = 0;
    for report in reports {
        let factory = SimFactory::new(if report.suite == "listings" { listings_suite() } else { corpus(120) });
        let mut session: Session = factory.open().map_err(|e| e.to_string())?;
        for evaluation in &report.evaluations {
            let mut materialized = false;
            for (name, label) in evaluation.order_dependent_tests() {
                let profile = evaluation
                    .isolation
                    .get(name)
                    .ok_or_else(|| format!("{}/{name}: no isolation profile", evaluation.mutant.id))?;
                let consistent = match label {
                    FlakyLabel::Victim => profile.outcomes.iter().all(|o| *o == Outcome::Pass),
                    FlakyLabel::Brittle => profile.outcomes.iter().all(|o| matches!(o, Outcome::Fail { .. })),
                    _ => unreachable!(),
                };
                if !consistent || profile.outcomes.len() != report.config.isolation_runs {
                    return Err(format!("{}/{name}: {} with isolation {:?}", evaluation.mutant.id, label.name(), profile.outcomes));
                }
                let dossier = &evaluation.dossiers[name];
                let (Some(pass), Some(fail)) = (dossier.witness_passing(), dossier.witness_failing()) else {
                    return Err(format!("{}/{name}: missing witness order", evaluation.mutant.id));
                };
                if !materialized {
                    let test = &evaluation.mutant.target_test;
                    session
                        .materialize(test, evaluation.mutant.statement_index)
                        .map_err(|e| e.to_string())?;
                    materialized = true;
                }
                let timeout = Duration::from_secs(5);
                let replay = |s: &mut Session, order| s.run_order(order, Some(&evaluation.mutant.id), timeout);
                let passed = replay(&mut session, pass).map_err(|e| e.to_string())?;
                let failed = replay(&mut session, fail).map_err(|e| e.to_string())?;
                if !passed.outcomes[name.as_str()].is_pass() || !failed.outcomes[name.as_str()].is_fail() {
                    return Err(format!("{}/{name}: witnesses do not replay", evaluation.mutant.id));
                }
                checked += 1;
            }
        }
    }
    if checked == 0 {
        return Err("no order-dependent labels emitted".into());
    }
    Ok(format!("{checked} labels over {} campaigns: isolation consistent, witnesses replay", reports.len()))
}

fn ranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|v| {
            let below = values.iter().filter(|w| *w < v).count() as f64;
            let tied = values.iter().filter(|w| *w == v).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Two-sided tie-corrected normal approximation with continuity correction.
fn mwu_p(u: f64, a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let n = n1 + n2;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut distinct = pooled.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let ties: f64 = distinct
        .iter()
        .map(|v| {
            let t = pooled.iter().filter(|w| *w == v).count() as f64;
            t * t * t - t
        })
        .sum();
    let sigma = (n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)))).sqrt();
    if sigma == 0.0 {
        return 1.0;
    }
    let z = ((u - n1 * n2 / 2.0).abs() - 0.5).max(0.0) / sigma;
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

fn statistics_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for round in 0..1000 {
        let n = rng.random_range(2..=15);
        let m = rng.random_range(1..=15);
        let spread = rng.random_range(2..=20);
        let sample = |rng: &mut ChaCha8Rng, len: usize| -> Vec<f64> {
            (0..len).map(|_| f64::from(rng.random_range(0..spread)) * 0.5).collect()
        };
        let x = sample(&mut rng, n);
        let y = sample(&mut rng, n);
        let b = sample(&mut rng, m);

        let expected = pearson(&ranks(&x), &ranks(&y));
        match spearman_rho(&x, &y) {
            Ok(rho) => {
                worst = worst.max((rho - expected).abs());
                if (rho - expected).abs() > 1e-9 {
                    return Err(format!("round {round}: spearman {rho} vs {expected}"));
                }
            }
            Err(_) if expected.is_nan() => {}
            Err(e) => return Err(format!("round {round}: spearman failed: {e}")),
        }

        let (mut gt, mut lt, mut eq) = (0i64, 0i64, 0i64);
        for p in &x {
            for q in &b {
                match p.partial_cmp(q).unwrap() {
                    std::cmp::Ordering::Greater => gt += 1,
                    std::cmp::Ordering::Less => lt += 1,
                    std::cmp::Ordering::Equal => eq += 1,
                }
            }
        }
        let nm = (n * m) as i64;
        let mw = mann_whitney_u(&x, &b).map_err(|e| e.to_string())?;
        if mw.u * 2.0 != (2 * gt + eq) as f64 {
            return Err(format!("round {round}: U {} vs pair count {}", mw.u, gt as f64 + eq as f64 / 2.0));
        }
        let p = mwu_p(mw.u, &x, &b);
        worst = worst.max((mw.p - p).abs());
        if (mw.p - p).abs() > 1e-9 {
            return Err(format!("round {round}: p {} vs {p}", mw.p));
        }
        let delta = cliffs_delta(&x, &b).map_err(|e| e.to_string())?;
        let pair_delta = (gt - lt) as f64 / nm as f64;
        worst = worst.max((delta - pair_delta).abs());
        if (delta - pair_delta).abs() > 1e-9 {
            return Err(format!("round {round}: delta {delta} vs {pair_delta}"));
        }
        // delta = 2U/(nm) - 1, compared on integer pair counts.
        let two_u = (2.0 * mw.u).round() as i64;
        if (delta * nm as f64).round() as i64 != two_u - nm || gt - lt != two_u - nm {
            return Err(format!("round {round}: delta-U identity broken"));
        }
    }
    Ok(format!("1000 random samples, max deviation {worst:.1e}, delta = 2U/nm - 1 exact"))
}

fn metric_partitions(reports: &[CampaignReport]) -> Verdict {
    let mut with_od = 0;
    for report in reports {
        let t = compute_metrics(report);
        if t.mutants_valid > t.mutants_total || t.od_mutants > t.mutants_valid {
            return Err(format!("{}: counts out of order: {t:?}", report.suite));
        }
        if t.victims + t.brittles > 0 {
            with_od += 1;
            if (t.brittles_pct + t.victims_pct - 1.0).abs() > 1e-12 {
                return Err(format!("{}: brittles + victims = {}", report.suite, t.brittles_pct + t.victims_pct));
            }
            if (t.assertion_pct + t.exceptions_pct - 1.0).abs() > 1e-12 {
                return Err(format!("{}: assertion + exceptions = {}", report.suite, t.assertion_pct + t.exceptions_pct));
            }
        }
    }
    if with_od == 0 {
        return Err("no campaign had order-dependent tests".into());
    }
    Ok(format!("{with_od} of {} campaigns with order-dependent tests partition exactly", reports.len()))
}

fn main() {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let mut failed = 0;
    let mut report = |name: &str, verdict: Verdict| {
        match &verdict {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}")
            }
        }
    };
    report("oracle agreement", oracle_agreement());
    report("listing fidelity", listing_fidelity());
    report("mutant cardinality", mutant_cardinality());
    report("reproducibility", reproducibility(scratch.path()));
    match campaigns() {
        Ok(reports) => {
            report("label semantics", label_semantics(&reports));
            report("metric partitions", metric_partitions(&reports));
        }
        Err(err) => {
            report("label semantics", Err(err.clone()));
            report("metric partitions", Err(err));
        }
    }
    report("statistics oracles", statistics_oracles());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
