//! Shared domain vocabulary: test identities, outcomes, orders, dossiers,
//! labels and mutants.
//!
//! Every type here is an immutable value with a canonical JSON form. Maps
//! keyed by a test are keyed by the test's name, since all tests involved in
//! one record belong to the same class.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Characters that may never appear inside a path segment or class name.
const SEPARATORS: &[char] = &['.', '/', ':', '#'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IdError {
    #[error("class name must not be empty")]
    EmptyClassName,
    #[error("test name must not be empty")]
    EmptyTestName,
    #[error("invalid identifier segment `{0}`")]
    InvalidSegment(String),
}

fn valid_segment(segment: &str) -> bool {
    !segment.is_empty()
        && !segment
            .chars()
            .any(|c| SEPARATORS.contains(&c) || c.is_whitespace() || c.is_control())
}

/// A test class: the unit within which orders are generated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawClassId")]
pub struct ClassId {
    module_path: String,
    class_name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassId {
    module_path: String,
    class_name: String,
}

impl TryFrom<RawClassId> for ClassId {
    type Error = IdError;

    fn try_from(raw: RawClassId) -> Result<Self, Self::Error> {
        ClassId::new(raw.module_path, raw.class_name)
    }
}

impl ClassId {
    /// `module_path` is a `.`-separated path and may be empty for top-level
    /// classes.
    pub fn new(module_path: impl Into<String>, class_name: impl Into<String>) -> Result<Self, IdError> {
        let module_path = module_path.into();
        let class_name = class_name.into();
        if class_name.is_empty() {
            return Err(IdError::EmptyClassName);
        }
        if !valid_segment(&class_name) {
            return Err(IdError::InvalidSegment(class_name));
        }
        if !module_path.is_empty() {
            if let Some(bad) = module_path.split('.').find(|s| !valid_segment(s)) {
                return Err(IdError::InvalidSegment(bad.to_string()));
            }
        }
        Ok(Self {
            module_path,
            class_name,
        })
    }

    pub fn module_path(&self) -> &str {
        &self.module_path
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn test(&self, name: impl Into<String>) -> Result<TestId, IdError> {
        TestId::new(self.clone(), name)
    }
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.module_path.is_empty() {
            f.write_str(&self.class_name)
        } else {
            write!(f, "{}.{}", self.module_path, self.class_name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTestId")]
pub struct TestId {
    class_id: ClassId,
    test_name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTestId {
    class_id: ClassId,
    test_name: String,
}

impl TryFrom<RawTestId> for TestId {
    type Error = IdError;

    fn try_from(raw: RawTestId) -> Result<Self, Self::Error> {
        TestId::new(raw.class_id, raw.test_name)
    }
}

impl TestId {
    pub fn new(class_id: ClassId, test_name: impl Into<String>) -> Result<Self, IdError> {
        let test_name = test_name.into();
        if test_name.is_empty() {
            return Err(IdError::EmptyTestName);
        }
        if test_name.contains('#') || test_name.chars().any(|c| c.is_control() || c.is_whitespace()) {
            return Err(IdError::InvalidSegment(test_name));
        }
        Ok(Self {
            class_id,
            test_name,
        })
    }

    pub fn class_id(&self) -> &ClassId {
        &self.class_id
    }

    pub fn test_name(&self) -> &str {
        &self.test_name
    }
}

impl fmt::Display for TestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}::{}", self.class_id, self.test_name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Assertion,
    OtherException,
}

/// Result of one test execution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case", deny_unknown_fields)]
pub enum Outcome {
    Pass,
    Fail { kind: FailureKind },
    Error { message: String },
    Timeout,
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Outcome::Fail { .. })
    }

    /// Error and Timeout: outcomes that say nothing about pass/fail.
    pub fn is_erroring(&self) -> bool {
        matches!(self, Outcome::Error { .. } | Outcome::Timeout)
    }

    pub fn failure_kind(&self) -> Option<FailureKind> {
        match self {
            Outcome::Fail { kind } => Some(*kind),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("universe of tests is empty")]
    EmptyUniverse,
    #[error("test `{0}` appears more than once")]
    DuplicateTest(TestId),
    #[error("test `{0}` is missing from the order")]
    MissingTest(TestId),
    #[error("test `{0}` does not belong to the class or universe")]
    ForeignTest(TestId),
}

/// A permutation of one class's tests.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestOrder {
    class_id: ClassId,
    sequence: Vec<TestId>,
}

impl TestOrder {
    pub fn class_id(&self) -> &ClassId {
        &self.class_id
    }

    pub fn sequence(&self) -> &[TestId] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn contains(&self, test: &TestId) -> bool {
        self.sequence.contains(test)
    }

    pub fn position(&self, test: &TestId) -> Option<usize> {
        self.sequence.iter().position(|t| t == test)
    }

    /// Compact `a,b,c` rendering of the test names.
    pub fn names(&self) -> String {
        self.sequence
            .iter()
            .map(TestId::test_name)
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Validated constructor: `sequence` must be a permutation of `universe`,
/// every member belonging to `class_id`.
pub fn make_order(
    class_id: &ClassId,
    sequence: Vec<TestId>,
    universe: &BTreeSet<TestId>,
) -> Result<TestOrder, OrderError> {
    if universe.is_empty() {
        return Err(OrderError::EmptyUniverse);
    }
    let mut seen = HashSet::with_capacity(sequence.len());
    for test in &sequence {
        if test.class_id() != class_id || !universe.contains(test) {
            return Err(OrderError::ForeignTest(test.clone()));
        }
        if !seen.insert(test) {
            return Err(OrderError::DuplicateTest(test.clone()));
        }
    }
    if let Some(missing) = universe.iter().find(|t| !seen.contains(t)) {
        return Err(OrderError::MissingTest(missing.clone()));
    }
    Ok(TestOrder {
        class_id: class_id.clone(),
        sequence,
    })
}

/// Outcomes of executing one order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderRunRecord {
    pub order: TestOrder,
    /// Keyed by test name.
    pub outcomes: BTreeMap<String, Outcome>,
    /// Milliseconds.
    pub wall_time: u64,
}

impl OrderRunRecord {
    pub fn outcome(&self, test: &TestId) -> Option<&Outcome> {
        self.outcomes.get(test.test_name())
    }

    /// True when the outcome keys are exactly the order's members.
    pub fn is_consistent(&self) -> bool {
        self.outcomes.len() == self.order.len()
            && self
                .order
                .sequence()
                .iter()
                .all(|t| self.outcomes.contains_key(t.test_name()))
    }

    /// Equality ignoring wall time.
    pub fn same_outcomes(&self, other: &OrderRunRecord) -> bool {
        self.order == other.order && self.outcomes == other.outcomes
    }
}

/// Per-test accumulation of the orders in which it passed, failed or errored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dossier {
    pub test: TestId,
    pub passing_orders: BTreeSet<TestOrder>,
    pub failing_orders: BTreeSet<TestOrder>,
    pub erroring_orders: BTreeSet<TestOrder>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DossierError {
    #[error("test `{0}` is not part of the recorded order")]
    TestNotInOrder(TestId),
}

impl Dossier {
    pub fn new(test: TestId) -> Self {
        Self {
            test,
            passing_orders: BTreeSet::new(),
            failing_orders: BTreeSet::new(),
            erroring_orders: BTreeSet::new(),
        }
    }

    /// Both a passing and a failing order were observed.
    pub fn is_flagged(&self) -> bool {
        !self.passing_orders.is_empty() && !self.failing_orders.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.passing_orders.is_disjoint(&self.failing_orders)
            && self.passing_orders.is_disjoint(&self.erroring_orders)
            && self.failing_orders.is_disjoint(&self.erroring_orders)
    }

    /// Smallest passing order, a deterministic witness.
    pub fn witness_passing(&self) -> Option<&TestOrder> {
        self.passing_orders.iter().next()
    }

    pub fn witness_failing(&self) -> Option<&TestOrder> {
        self.failing_orders.iter().next()
    }
}

/// Folds one order run into a dossier.
///
/// An order already present in another set (a test whose outcome differed
/// between two executions of the very same order) is moved to the erroring
/// set so the three sets stay disjoint.
pub fn merge_dossier(mut dossier: Dossier, record: &OrderRunRecord) -> Result<Dossier, DossierError> {
    let outcome = match (record.order.contains(&dossier.test), record.outcome(&dossier.test)) {
        (true, Some(outcome)) => outcome,
        _ => return Err(DossierError::TestNotInOrder(dossier.test)),
    };
    let order = &record.order;
    let conflicting = match outcome {
        Outcome::Pass => dossier.failing_orders.contains(order),
        Outcome::Fail { .. } => dossier.passing_orders.contains(order),
        Outcome::Error { .. } | Outcome::Timeout => false,
    } || (!outcome.is_erroring() && dossier.erroring_orders.contains(order));
    if conflicting || outcome.is_erroring() {
        dossier.passing_orders.remove(order);
        dossier.failing_orders.remove(order);
        dossier.erroring_orders.insert(order.clone());
    } else if outcome.is_pass() {
        dossier.passing_orders.insert(order.clone());
    } else {
        dossier.failing_orders.insert(order.clone());
    }
    Ok(dossier)
}

/// Outcomes of running one test alone, repeatedly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsolationProfile {
    pub test: TestId,
    pub outcomes: Vec<Outcome>,
}

impl IsolationProfile {
    pub fn all_pass(&self) -> bool {
        !self.outcomes.is_empty() && self.outcomes.iter().all(Outcome::is_pass)
    }

    pub fn all_fail(&self) -> bool {
        !self.outcomes.is_empty() && self.outcomes.iter().all(Outcome::is_fail)
    }

    pub fn has_erroring(&self) -> bool {
        self.outcomes.iter().any(Outcome::is_erroring)
    }

    /// Contains both a pass and a failure.
    pub fn is_mixed(&self) -> bool {
        self.outcomes.iter().any(Outcome::is_pass) && self.outcomes.iter().any(Outcome::is_fail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlakyLabel {
    Stable,
    NonOrderDependent,
    Victim,
    Brittle,
    Unclassifiable { reason: String },
}

impl FlakyLabel {
    pub fn is_order_dependent(&self) -> bool {
        matches!(self, FlakyLabel::Victim | FlakyLabel::Brittle)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FlakyLabel::Stable => "stable",
            FlakyLabel::NonOrderDependent => "non_order_dependent",
            FlakyLabel::Victim => "victim",
            FlakyLabel::Brittle => "brittle",
            FlakyLabel::Unclassifiable { .. } => "unclassifiable",
        }
    }
}

/// `{test}#{index}`, unique per deletion point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MutantId(pub String);

impl MutantId {
    pub fn for_point(test: &TestId, statement_index: usize) -> Self {
        Self(format!("{test}#{statement_index}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MutantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case", deny_unknown_fields)]
pub enum Validity {
    Valid,
    Invalid { reason: String },
}

/// One statement-deletion variant of one test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mutant {
    pub id: MutantId,
    pub target_test: TestId,
    /// Ordinal among the non-assertion statements of the test body.
    pub statement_index: usize,
    pub diff: String,
    pub validity: Validity,
}

impl Mutant {
    pub fn is_valid(&self) -> bool {
        self.validity == Validity::Valid
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassFeatures {
    pub test_count: usize,
    pub shared_field_count: usize,
    pub has_fixture: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("`{0}` must be positive")]
    NotPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    #[serde(default = "CampaignConfig::default_isolation_runs")]
    pub isolation_runs: usize,
    #[serde(default = "CampaignConfig::default_orders_per_class")]
    pub orders_per_class: usize,
    /// Milliseconds.
    #[serde(default = "CampaignConfig::default_per_test_timeout")]
    pub per_test_timeout: u64,
    #[serde(default = "CampaignConfig::default_parallelism")]
    pub parallelism: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            isolation_runs: Self::DEFAULT_ISOLATION_RUNS,
            orders_per_class: Self::DEFAULT_ORDERS_PER_CLASS,
            per_test_timeout: Self::DEFAULT_PER_TEST_TIMEOUT_MS,
            parallelism: Self::default_parallelism(),
        }
    }
}

impl CampaignConfig {
    pub const DEFAULT_ISOLATION_RUNS: usize = 100;
    pub const DEFAULT_ORDERS_PER_CLASS: usize = 20;
    pub const DEFAULT_PER_TEST_TIMEOUT_MS: u64 = 60_000;

    fn default_isolation_runs() -> usize {
        Self::DEFAULT_ISOLATION_RUNS
    }

    fn default_orders_per_class() -> usize {
        Self::DEFAULT_ORDERS_PER_CLASS
    }

    fn default_per_test_timeout() -> u64 {
        Self::DEFAULT_PER_TEST_TIMEOUT_MS
    }

    fn default_parallelism() -> usize {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.isolation_runs == 0 {
            return Err(ConfigError::NotPositive("isolation_runs"));
        }
        if self.orders_per_class == 0 {
            return Err(ConfigError::NotPositive("orders_per_class"));
        }
        if self.per_test_timeout == 0 {
            return Err(ConfigError::NotPositive("per_test_timeout"));
        }
        if self.parallelism == 0 {
            return Err(ConfigError::NotPositive("parallelism"));
        }
        Ok(())
    }

    pub fn per_test_timeout(&self) -> std::time::Duration {
        std::time::Duration::from_millis(self.per_test_timeout)
    }

    /// The parts of the configuration that determine outcomes; worker count
    /// is excluded so results do not depend on the machine.
    pub fn snapshot(&self) -> ConfigSnapshot {
        ConfigSnapshot {
            seed: self.seed,
            isolation_runs: self.isolation_runs,
            orders_per_class: self.orders_per_class,
            per_test_timeout: self.per_test_timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSnapshot {
    pub seed: u64,
    pub isolation_runs: usize,
    pub orders_per_class: usize,
    pub per_test_timeout: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class() -> ClassId {
        ClassId::new("pkg.mod", "Widget").unwrap()
    }

    fn tests3() -> (TestId, TestId, TestId) {
        let c = class();
        (c.test("t1").unwrap(), c.test("t2").unwrap(), c.test("t3").unwrap())
    }

    fn universe(tests: &[&TestId]) -> BTreeSet<TestId> {
        tests.iter().map(|t| (*t).clone()).collect()
    }

    fn record(order: &TestOrder, outcomes: &[(&TestId, Outcome)]) -> OrderRunRecord {
        OrderRunRecord {
            order: order.clone(),
            outcomes: outcomes
                .iter()
                .map(|(t, o)| (t.test_name().to_string(), o.clone()))
                .collect(),
            wall_time: 0,
        }
    }

    #[test]
    fn class_id_validation() {
        assert_eq!(ClassId::new("a.b", ""), Err(IdError::EmptyClassName));
        assert!(ClassId::new("a..b", "C").is_err());
        assert!(ClassId::new("a/b", "C").is_err());
        assert!(ClassId::new("", "C").is_ok());
        assert_eq!(class().to_string(), "pkg.mod.Widget");
        assert!(class().test("").is_err());
        assert!(class().test("has space").is_err());
    }

    #[test]
    fn make_order_identity_permutation() {
        let (t1, t2, t3) = tests3();
        let u = universe(&[&t1, &t2, &t3]);
        let order = make_order(&class(), vec![t1.clone(), t2.clone(), t3.clone()], &u).unwrap();
        assert_eq!(order.sequence(), &[t1, t2, t3]);
    }

    #[test]
    fn make_order_rejects_duplicates() {
        let (t1, t2, t3) = tests3();
        let u = universe(&[&t1, &t2, &t3]);
        let err = make_order(&class(), vec![t1.clone(), t1.clone(), t2], &u).unwrap_err();
        assert_eq!(err, OrderError::DuplicateTest(t1));
    }

    #[test]
    fn make_order_rejects_missing() {
        let (t1, t2, t3) = tests3();
        let u = universe(&[&t1, &t2, &t3]);
        let err = make_order(&class(), vec![t1, t2], &u).unwrap_err();
        assert_eq!(err, OrderError::MissingTest(t3));
    }

    #[test]
    fn make_order_rejects_foreign() {
        let (t1, t2, _) = tests3();
        let u = universe(&[&t1, &t2]);
        let other = ClassId::new("pkg.mod", "Other").unwrap().test("t1").unwrap();
        let err = make_order(&class(), vec![t1, other.clone()], &u).unwrap_err();
        assert_eq!(err, OrderError::ForeignTest(other));
        assert_eq!(
            make_order(&class(), vec![], &BTreeSet::new()),
            Err(OrderError::EmptyUniverse)
        );
    }

    #[test]
    fn merge_routes_outcomes() {
        let (t1, t2, _) = tests3();
        let u = universe(&[&t1, &t2]);
        let o1 = make_order(&class(), vec![t1.clone(), t2.clone()], &u).unwrap();
        let o2 = make_order(&class(), vec![t2.clone(), t1.clone()], &u).unwrap();

        let d = merge_dossier(Dossier::new(t1.clone()), &record(&o1, &[(&t1, Outcome::Pass), (&t2, Outcome::Pass)])).unwrap();
        assert_eq!(d.passing_orders.len(), 1);
        assert!(d.failing_orders.is_empty() && d.erroring_orders.is_empty());

        let fail = Outcome::Fail {
            kind: FailureKind::Assertion,
        };
        let d = merge_dossier(d, &record(&o2, &[(&t1, fail), (&t2, Outcome::Pass)])).unwrap();
        assert_eq!(d.passing_orders.iter().collect::<Vec<_>>(), vec![&o1]);
        assert_eq!(d.failing_orders.iter().collect::<Vec<_>>(), vec![&o2]);
        assert!(d.is_flagged());

        let d2 = merge_dossier(Dossier::new(t2.clone()), &record(&o1, &[(&t1, Outcome::Pass), (&t2, Outcome::Timeout)])).unwrap();
        assert_eq!(d2.erroring_orders.len(), 1);
        assert!(d2.passing_orders.is_empty() && d2.failing_orders.is_empty());
    }

    #[test]
    fn merge_rejects_absent_test() {
        let (t1, t2, t3) = tests3();
        let u = universe(&[&t1, &t2]);
        let o1 = make_order(&class(), vec![t1.clone(), t2.clone()], &u).unwrap();
        let err = merge_dossier(Dossier::new(t3.clone()), &record(&o1, &[(&t1, Outcome::Pass), (&t2, Outcome::Pass)])).unwrap_err();
        assert_eq!(err, DossierError::TestNotInOrder(t3));
    }

    #[test]
    fn conflicting_observations_of_one_order_stay_disjoint() {
        let (t1, _, _) = tests3();
        let u = universe(&[&t1]);
        let o = make_order(&class(), vec![t1.clone()], &u).unwrap();
        let d = merge_dossier(Dossier::new(t1.clone()), &record(&o, &[(&t1, Outcome::Pass)])).unwrap();
        let d = merge_dossier(d, &record(&o, &[(&t1, Outcome::Pass)])).unwrap();
        assert_eq!(d.passing_orders.len(), 1);
        let d = merge_dossier(
            d,
            &record(&o, &[(&t1, Outcome::Fail { kind: FailureKind::OtherException })]),
        )
        .unwrap();
        assert!(d.is_disjoint());
        assert_eq!(d.erroring_orders.len(), 1);
        assert!(d.passing_orders.is_empty());
    }

    #[test]
    fn outcome_json_tags() {
        let json = serde_json::to_string(&Outcome::Fail {
            kind: FailureKind::OtherException,
        })
        .unwrap();
        assert_eq!(json, r#"{"outcome":"fail","kind":"other_exception"}"#);
        assert!(serde_json::from_str::<Outcome>(r#"{"outcome":"fail"}"#).is_err());
        assert!(serde_json::from_str::<ClassId>(r#"{"module_path":"a","class_name":""}"#).is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = CampaignConfig::default();
        assert_eq!(cfg.isolation_runs, 100);
        assert_eq!(cfg.orders_per_class, 20);
        assert!(cfg.validate().is_ok());
        let bad = CampaignConfig {
            orders_per_class: 0,
            ..cfg
        };
        assert_eq!(bad.validate(), Err(ConfigError::NotPositive("orders_per_class")));
        let parsed: CampaignConfig = serde_json::from_str(r#"{"seed":5}"#).unwrap();
        assert_eq!(parsed.seed, 5);
        assert_eq!(parsed.isolation_runs, 100);
    }
}
