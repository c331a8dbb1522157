//! The injection pipeline.
//!
//! 1. Stability filter: isolated reruns catch tests that are flaky on their
//!    own, then a plan of class orders catches tests that are already order
//!    dependent. A class with any unstable test is excluded as a whole.
//! 2. Mutation: one mutant per deletable statement of every stable test.
//! 3. Evaluation: each valid mutant class runs its own order plan; tests
//!    observed both passing and failing are rerun alone and labelled.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    merge_dossier, CampaignConfig, ClassFeatures, ClassId, ConfigError, Dossier, DossierError, FailureKind,
    FlakyLabel, IsolationProfile, Mutant, MutantId, OrderRunRecord, Outcome, TestId,
};
use crate::order::{
    generate_orders, isolation_schedule, phase_seed, OrderPlan, PlanError, EVALUATION_TAG, STABILITY_TAG,
};
use crate::protocol::{Session, SessionError, SessionFactory};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PipelineError {
    #[error("adapter failure: {0}")]
    Adapter(#[from] SessionError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Dossier(#[from] DossierError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("every order of mutant `{0}` errored")]
    AllOrdersErrored(MutantId),
    #[error("mutant `{0}` is invalid and cannot be evaluated")]
    InvalidMutant(MutantId),
    #[error("materialized mutant `{0}` differs from the enumerated one")]
    MutantDrift(MutantId),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("test `{0}` has passing and failing orders but no isolation profile")]
    MissingIsolationProfile(TestId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityStatus {
    Stable,
    FlakyInIsolation,
    PreexistingOrderDependent,
    Erroring,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityVerdict {
    pub test: TestId,
    pub status: StabilityStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSummary {
    pub seed: u64,
    pub orders: usize,
    pub exhaustive: bool,
}

impl From<&OrderPlan> for PlanSummary {
    fn from(plan: &OrderPlan) -> Self {
        Self {
            seed: plan.seed,
            orders: plan.orders.len(),
            exhaustive: plan.exhaustive,
        }
    }
}

/// Reruns every test alone `isolation_runs` times. Tests mixing passes and
/// failures are flaky in isolation; any error or timeout marks the test
/// erroring; the rest remain candidates.
pub fn detect_nonod_flaky(
    session: &mut Session,
    class: &ClassId,
    cfg: &CampaignConfig,
) -> Result<BTreeMap<String, StabilityVerdict>, PipelineError> {
    let tests = session.list_tests(class)?;
    let mut verdicts = BTreeMap::new();
    for test in tests {
        let profile = run_isolation(session, &test, None, cfg)?;
        let status = if profile.has_erroring() {
            StabilityStatus::Erroring
        } else if profile.is_mixed() {
            StabilityStatus::FlakyInIsolation
        } else {
            StabilityStatus::Stable
        };
        verdicts.insert(test.test_name().to_string(), StabilityVerdict { test, status });
    }
    Ok(verdicts)
}

/// Runs a stability plan over the original class and flags candidates that
/// both pass and fail across its orders.
///
/// Verdicts of tests already excluded by the isolation filter are kept.
pub fn detect_preexisting_od(
    session: &mut Session,
    class: &ClassId,
    cfg: &CampaignConfig,
    mut verdicts: BTreeMap<String, StabilityVerdict>,
) -> Result<(BTreeMap<String, StabilityVerdict>, PlanSummary), PipelineError> {
    let tests = session.list_tests(class)?;
    let plan = generate_orders(&tests, cfg.orders_per_class, phase_seed(cfg.seed, STABILITY_TAG))?;
    let mut dossiers: BTreeMap<String, Dossier> = tests
        .iter()
        .map(|t| (t.test_name().to_string(), Dossier::new(t.clone())))
        .collect();
    for order in &plan.orders {
        let record = session.run_order(order, None, cfg.per_test_timeout())?;
        fold(&mut dossiers, &record)?;
    }
    for (name, dossier) in &dossiers {
        let verdict = verdicts.entry(name.clone()).or_insert_with(|| StabilityVerdict {
            test: dossier.test.clone(),
            status: StabilityStatus::Stable,
        });
        if verdict.status != StabilityStatus::Stable {
            continue;
        }
        if dossier.is_flagged() {
            verdict.status = StabilityStatus::PreexistingOrderDependent;
        } else if !dossier.erroring_orders.is_empty() {
            verdict.status = StabilityStatus::Erroring;
        }
    }
    Ok((verdicts, PlanSummary::from(&plan)))
}

fn fold(dossiers: &mut BTreeMap<String, Dossier>, record: &OrderRunRecord) -> Result<(), DossierError> {
    for dossier in dossiers.values_mut() {
        let current = std::mem::replace(dossier, Dossier::new(dossier.test.clone()));
        *dossier = merge_dossier(current, record)?;
    }
    Ok(())
}

fn run_isolation(
    session: &mut Session,
    test: &TestId,
    mutant: Option<&MutantId>,
    cfg: &CampaignConfig,
) -> Result<IsolationProfile, PipelineError> {
    let outcomes = isolation_schedule(test, cfg.isolation_runs)
        .iter()
        .map(|d| session.run_isolated(&d.test, mutant, cfg.per_test_timeout()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IsolationProfile {
        test: test.clone(),
        outcomes,
    })
}

/// One mutant per mutation point, each materialized by the adapter with its
/// validity verdict.
pub fn enumerate_mutants(session: &mut Session, test: &TestId) -> Result<Vec<Mutant>, PipelineError> {
    let points = session.mutation_points(test)?;
    points
        .iter()
        .map(|p| Ok(session.materialize(test, p.index)?))
        .collect()
}

/// Labels one test from its order dossier and, when flagged, its isolation
/// profile.
pub fn classify(dossier: &Dossier, isolation: Option<&IsolationProfile>) -> Result<FlakyLabel, ClassifyError> {
    if !dossier.is_flagged() {
        if dossier.passing_orders.is_empty() && dossier.failing_orders.is_empty() && !dossier.erroring_orders.is_empty()
        {
            return Ok(FlakyLabel::Unclassifiable {
                reason: "errored in every order".into(),
            });
        }
        return Ok(FlakyLabel::Stable);
    }
    let profile = isolation.ok_or_else(|| ClassifyError::MissingIsolationProfile(dossier.test.clone()))?;
    Ok(if profile.has_erroring() || profile.outcomes.is_empty() {
        FlakyLabel::Unclassifiable {
            reason: "isolated reruns errored or timed out".into(),
        }
    } else if profile.all_pass() {
        FlakyLabel::Victim
    } else if profile.all_fail() {
        FlakyLabel::Brittle
    } else {
        FlakyLabel::NonOrderDependent
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureKindCounts {
    pub assertion: usize,
    pub other_exception: usize,
}

impl FailureKindCounts {
    pub fn add(&mut self, kind: FailureKind) {
        match kind {
            FailureKind::Assertion => self.assertion += 1,
            FailureKind::OtherException => self.other_exception += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.assertion + self.other_exception
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutantEvaluation {
    pub mutant: Mutant,
    pub plan: PlanSummary,
    /// Keyed by test name.
    pub dossiers: BTreeMap<String, Dossier>,
    /// Only for tests with both passing and failing orders.
    pub isolation: BTreeMap<String, IsolationProfile>,
    pub labels: BTreeMap<String, FlakyLabel>,
    /// Failure kinds observed across each test's failing orders.
    pub failure_kind_summary: BTreeMap<String, FailureKindCounts>,
    /// Failure kind per failing order, keyed by test name then order names.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub failing_kinds: BTreeMap<String, BTreeMap<String, FailureKind>>,
}

impl MutantEvaluation {
    pub fn order_dependent_tests(&self) -> impl Iterator<Item = (&String, &FlakyLabel)> {
        self.labels.iter().filter(|(_, l)| l.is_order_dependent())
    }

    pub fn is_order_dependent(&self) -> bool {
        self.labels.values().any(FlakyLabel::is_order_dependent)
    }
}

/// Runs a mutant class through its order plan and labels every test.
///
/// The mutant must already be materialized in `session`.
pub fn evaluate_mutant(
    session: &mut Session,
    mutant: &Mutant,
    cfg: &CampaignConfig,
) -> Result<MutantEvaluation, PipelineError> {
    if !mutant.is_valid() {
        return Err(PipelineError::InvalidMutant(mutant.id.clone()));
    }
    let class = mutant.target_test.class_id();
    let tests = session.list_tests(class)?;
    let plan = generate_orders(&tests, cfg.orders_per_class, phase_seed(cfg.seed, EVALUATION_TAG))?;

    let mut dossiers: BTreeMap<String, Dossier> = tests
        .iter()
        .map(|t| (t.test_name().to_string(), Dossier::new(t.clone())))
        .collect();
    let mut failing_kinds: BTreeMap<String, BTreeMap<String, FailureKind>> = BTreeMap::new();
    let mut any_decisive = false;
    for order in &plan.orders {
        let record = session.run_order(order, Some(&mutant.id), cfg.per_test_timeout())?;
        any_decisive |= record.outcomes.values().any(|o| !o.is_erroring());
        for (name, outcome) in &record.outcomes {
            if let Outcome::Fail { kind } = outcome {
                failing_kinds.entry(name.clone()).or_default().insert(order.names(), *kind);
            }
        }
        fold(&mut dossiers, &record)?;
    }
    if !any_decisive {
        return Err(PipelineError::AllOrdersErrored(mutant.id.clone()));
    }

    let mut isolation = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (name, dossier) in &dossiers {
        if dossier.is_flagged() {
            let profile = run_isolation(session, &dossier.test, Some(&mutant.id), cfg)?;
            isolation.insert(name.clone(), profile);
        }
        labels.insert(name.clone(), classify(dossier, isolation.get(name))?);
    }

    // Keep only kinds of orders still in a failing set.
    for (name, kinds) in failing_kinds.iter_mut() {
        let failing: Vec<String> = dossiers[name].failing_orders.iter().map(|o| o.names()).collect();
        kinds.retain(|order, _| failing.contains(order));
    }
    failing_kinds.retain(|_, kinds| !kinds.is_empty());
    let failure_kind_summary = failing_kinds
        .iter()
        .map(|(name, kinds)| {
            let mut counts = FailureKindCounts::default();
            kinds.values().for_each(|k| counts.add(*k));
            (name.clone(), counts)
        })
        .collect();

    Ok(MutantEvaluation {
        mutant: mutant.clone(),
        plan: PlanSummary::from(&plan),
        dossiers,
        isolation,
        labels,
        failure_kind_summary,
        failing_kinds,
    })
}

/// Runs `work` over `jobs` on up to `parallelism` sessions, returning
/// results in job order. A worker whose session fails reopens a fresh one
/// for its next job.
pub fn parallel_map<J, R, F>(
    factory: &dyn SessionFactory,
    parallelism: usize,
    jobs: &[J],
    work: F,
) -> Vec<Result<R, PipelineError>>
where
    J: Sync,
    R: Send,
    F: Fn(&mut Session, &J) -> Result<R, PipelineError> + Sync,
{
    let slots: Mutex<Vec<Option<Result<R, PipelineError>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = parallelism.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut session: Option<Session> = None;
                loop {
                    let index = next.fetch_add(1, Ordering::SeqCst);
                    if index >= jobs.len() {
                        break;
                    }
                    let result = match session.as_mut() {
                        Some(s) => Ok(s),
                        None => factory.open().map(|s| session.insert(s)),
                    }
                    .map_err(PipelineError::from)
                    .and_then(|s| work(s, &jobs[index]));
                    if matches!(
                        result,
                        Err(PipelineError::Adapter(
                            SessionError::AdapterCrashed(_)
                                | SessionError::DeadlineExceeded(_)
                                | SessionError::ProtocolViolation(_)
                                | SessionError::Poisoned
                        ))
                    ) {
                        session = None;
                    }
                    slots.lock().expect("result slots")[index] = Some(result);
                }
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassStability {
    pub class_id: ClassId,
    pub features: ClassFeatures,
    pub verdicts: Vec<StabilityVerdict>,
    pub plan: Option<PlanSummary>,
    /// Why the class takes no further part in the campaign.
    pub excluded: Option<String>,
    pub elapsed_ms: u64,
}

impl ClassStability {
    pub fn is_retained(&self) -> bool {
        self.excluded.is_none()
    }

    pub fn stable_tests(&self) -> impl Iterator<Item = &TestId> {
        self.verdicts
            .iter()
            .filter(|v| v.status == StabilityStatus::Stable)
            .map(|v| &v.test)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFailure {
    pub stage: String,
    pub subject: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizationReport {
    pub config: CampaignConfig,
    pub classes: Vec<ClassStability>,
    pub failures: Vec<StageFailure>,
}

/// Step 1 over every class the adapter reports.
pub fn stabilize(factory: &dyn SessionFactory, cfg: &CampaignConfig) -> Result<StabilizationReport, PipelineError> {
    cfg.validate()?;
    let entries = {
        let mut session = factory.open()?;
        session.list_classes()?
    };
    let results = parallel_map(factory, cfg.parallelism, &entries, |session, entry| {
        let started = Instant::now();
        let verdicts = detect_nonod_flaky(session, &entry.class_id, cfg)?;
        let (verdicts, plan) = detect_preexisting_od(session, &entry.class_id, cfg, verdicts)?;
        let tests = session.list_tests(&entry.class_id)?;
        let verdicts: Vec<StabilityVerdict> = tests
            .iter()
            .map(|t| verdicts[t.test_name()].clone())
            .collect();
        Ok((verdicts, plan, started.elapsed().as_millis() as u64))
    });

    let mut classes = Vec::with_capacity(entries.len());
    let mut failures = Vec::new();
    for (entry, result) in entries.into_iter().zip(results) {
        let class = match result {
            Ok((verdicts, plan, elapsed_ms)) => {
                let unstable: Vec<String> = verdicts
                    .iter()
                    .filter(|v| v.status != StabilityStatus::Stable)
                    .map(|v| format!("{} is {}", v.test.test_name(), status_name(v.status)))
                    .collect();
                ClassStability {
                    class_id: entry.class_id,
                    features: entry.features,
                    excluded: (!unstable.is_empty()).then(|| unstable.join("; ")),
                    verdicts,
                    plan: Some(plan),
                    elapsed_ms,
                }
            }
            Err(err) => {
                failures.push(StageFailure {
                    stage: "stabilize".into(),
                    subject: entry.class_id.to_string(),
                    error: err.to_string(),
                });
                ClassStability {
                    class_id: entry.class_id,
                    features: entry.features,
                    verdicts: Vec::new(),
                    plan: None,
                    excluded: Some(format!("stability check failed: {err}")),
                    elapsed_ms: 0,
                }
            }
        };
        classes.push(class);
    }
    Ok(StabilizationReport {
        config: cfg.clone(),
        classes,
        failures,
    })
}

pub fn status_name(status: StabilityStatus) -> &'static str {
    match status {
        StabilityStatus::Stable => "stable",
        StabilityStatus::FlakyInIsolation => "flaky in isolation",
        StabilityStatus::PreexistingOrderDependent => "already order-dependent",
        StabilityStatus::Erroring => "erroring",
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutantCounts {
    pub total: usize,
    pub valid: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MutationReport {
    /// All mutants, invalid ones included, in class then declaration order.
    pub mutants: Vec<Mutant>,
    /// Per class (display form), per test name.
    pub counts: BTreeMap<String, BTreeMap<String, MutantCounts>>,
    pub failures: Vec<StageFailure>,
    pub elapsed_ms: BTreeMap<String, u64>,
}

/// Step 2: mutants for every stable test of every retained class.
pub fn mutate(
    factory: &dyn SessionFactory,
    cfg: &CampaignConfig,
    stability: &StabilizationReport,
) -> MutationReport {
    let retained: Vec<&ClassStability> = stability.classes.iter().filter(|c| c.is_retained()).collect();
    let results = parallel_map(factory, cfg.parallelism, &retained, |session, class| {
        let started = Instant::now();
        let mut per_test = Vec::new();
        for test in class.stable_tests() {
            per_test.push((test.clone(), enumerate_mutants(session, test)?));
        }
        Ok((per_test, started.elapsed().as_millis() as u64))
    });

    let mut report = MutationReport {
        mutants: Vec::new(),
        counts: BTreeMap::new(),
        failures: Vec::new(),
        elapsed_ms: BTreeMap::new(),
    };
    for (class, result) in retained.into_iter().zip(results) {
        let key = class.class_id.to_string();
        match result {
            Ok((per_test, elapsed)) => {
                let counts = report.counts.entry(key.clone()).or_default();
                for (test, mutants) in per_test {
                    counts.insert(
                        test.test_name().to_string(),
                        MutantCounts {
                            total: mutants.len(),
                            valid: mutants.iter().filter(|m| m.is_valid()).count(),
                        },
                    );
                    report.mutants.extend(mutants);
                }
                report.elapsed_ms.insert(key, elapsed);
            }
            Err(err) => report.failures.push(StageFailure {
                stage: "mutate".into(),
                subject: key,
                error: err.to_string(),
            }),
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationReport {
    pub evaluations: Vec<MutantEvaluation>,
    pub failures: Vec<StageFailure>,
    /// Per mutant id.
    pub elapsed_ms: BTreeMap<String, u64>,
}

/// Step 3: every valid mutant, each on whichever session picks it up.
pub fn evaluate(factory: &dyn SessionFactory, cfg: &CampaignConfig, mutation: &MutationReport) -> EvaluationReport {
    let valid: Vec<&Mutant> = mutation.mutants.iter().filter(|m| m.is_valid()).collect();
    let results = parallel_map(factory, cfg.parallelism, &valid, |session, mutant| {
        let started = Instant::now();
        let materialized = session.materialize(&mutant.target_test, mutant.statement_index)?;
        if materialized != **mutant {
            return Err(PipelineError::MutantDrift(mutant.id.clone()));
        }
        let evaluation = evaluate_mutant(session, mutant, cfg)?;
        Ok((evaluation, started.elapsed().as_millis() as u64))
    });
    let mut report = EvaluationReport {
        evaluations: Vec::new(),
        failures: Vec::new(),
        elapsed_ms: BTreeMap::new(),
    };
    for (mutant, result) in valid.into_iter().zip(results) {
        match result {
            Ok((evaluation, elapsed)) => {
                report.elapsed_ms.insert(mutant.id.to_string(), elapsed);
                report.evaluations.push(evaluation);
            }
            Err(err) => report.failures.push(StageFailure {
                stage: "evaluate".into(),
                subject: mutant.id.to_string(),
                error: err.to_string(),
            }),
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedLedger {
    pub campaign: u64,
    pub stability: u64,
    pub evaluation: u64,
}

impl SeedLedger {
    pub fn for_seed(seed: u64) -> Self {
        Self {
            campaign: seed,
            stability: phase_seed(seed, STABILITY_TAG),
            evaluation: phase_seed(seed, EVALUATION_TAG),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingLedger {
    /// Wall time spent per class across all steps, in milliseconds.
    pub per_class_ms: BTreeMap<String, u64>,
    pub total_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignReport {
    pub suite: String,
    pub config: CampaignConfig,
    pub seeds: SeedLedger,
    /// What the adapter reports as its shared-field measure.
    pub shared_field_proxy: String,
    pub classes: Vec<ClassStability>,
    pub mutant_counts: BTreeMap<String, BTreeMap<String, MutantCounts>>,
    pub mutants: Vec<Mutant>,
    pub evaluations: Vec<MutantEvaluation>,
    pub failures: Vec<StageFailure>,
    pub timing: TimingLedger,
}

impl CampaignReport {
    pub fn assemble(
        suite: &str,
        shared_field_proxy: &str,
        stability: StabilizationReport,
        mutation: MutationReport,
        evaluation: EvaluationReport,
        total_ms: u64,
    ) -> Self {
        let mut per_class_ms: BTreeMap<String, u64> = stability
            .classes
            .iter()
            .map(|c| (c.class_id.to_string(), c.elapsed_ms))
            .collect();
        for (class, ms) in &mutation.elapsed_ms {
            *per_class_ms.entry(class.clone()).or_default() += ms;
        }
        for evaluation_ in &evaluation.evaluations {
            let class = evaluation_.mutant.target_test.class_id().to_string();
            let ms = evaluation.elapsed_ms.get(evaluation_.mutant.id.as_str()).copied().unwrap_or(0);
            *per_class_ms.entry(class).or_default() += ms;
        }
        let mut failures = stability.failures;
        failures.extend(mutation.failures);
        failures.extend(evaluation.failures);
        Self {
            suite: suite.to_string(),
            seeds: SeedLedger::for_seed(stability.config.seed),
            config: stability.config,
            shared_field_proxy: shared_field_proxy.to_string(),
            classes: stability.classes,
            mutant_counts: mutation.counts,
            mutants: mutation.mutants,
            evaluations: evaluation.evaluations,
            failures,
            timing: TimingLedger { per_class_ms, total_ms },
        }
    }

    pub fn excluded_classes(&self) -> impl Iterator<Item = &ClassStability> {
        self.classes.iter().filter(|c| !c.is_retained())
    }
}

/// All three steps end to end.
pub fn run_campaign(
    suite: &str,
    shared_field_proxy: &str,
    factory: &dyn SessionFactory,
    cfg: &CampaignConfig,
) -> Result<CampaignReport, PipelineError> {
    let started = Instant::now();
    let stability = stabilize(factory, cfg)?;
    let mutation = mutate(factory, cfg, &stability);
    let evaluation = evaluate(factory, cfg, &mutation);
    Ok(CampaignReport::assemble(
        suite,
        shared_field_proxy,
        stability,
        mutation,
        evaluation,
        started.elapsed().as_millis() as u64,
    ))
}
