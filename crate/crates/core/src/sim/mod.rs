//! A deterministic model of test classes communicating through a shared
//! key/value store.
//!
//! Setting and unsetting keys plays the role of helper statements, key
//! assertions play the role of test assertions. Each order execution and each
//! isolated run starts from an empty store, runs the class fixture once, then
//! runs the tests in sequence.

mod adapter;
mod generator;
mod listings;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ClassFeatures, ClassId, FailureKind, FlakyLabel, IdError, Outcome, TestId, TestOrder};

pub use adapter::{SimAdapter, SimFactory};
pub use generator::{GeneratorParams, SimClassGenerator};
pub use listings::{listing_models, listings_suite, LISTINGS_CORPUS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("statement index {index} out of range ({available} deletable statements)")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("exhaustive oracle limited to {limit} tests, class has {count}")]
    TooManyTests { count: usize, limit: usize },
    #[error("test `{0}` not found")]
    UnknownTest(String),
    #[error("class `{0}` not found")]
    UnknownClass(String),
    #[error("duplicate test name `{0}`")]
    DuplicateTest(String),
    #[error("fixture of `{0}` contains an assertion")]
    AssertionInFixture(String),
    #[error(transparent)]
    Id(#[from] IdError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimStatement {
    SetKey { key: String, value: String },
    UnsetKey { key: String },
    AssertEq { key: String, expected: String },
    AssertUnset { key: String },
    Noop,
    Crash { message: String },
    /// Assertion that fails on odd-numbered isolated runs of its test: a
    /// test that is flaky regardless of order.
    FlipOnOddRun,
    /// Never finishes; the run reports a timeout for this and every later
    /// test of the order.
    Hang,
}

impl SimStatement {
    pub fn is_assertion(&self) -> bool {
        matches!(
            self,
            SimStatement::AssertEq { .. } | SimStatement::AssertUnset { .. } | SimStatement::FlipOnOddRun
        )
    }

    fn key(&self) -> Option<&str> {
        match self {
            SimStatement::SetKey { key, .. }
            | SimStatement::UnsetKey { key }
            | SimStatement::AssertEq { key, .. }
            | SimStatement::AssertUnset { key } => Some(key),
            _ => None,
        }
    }

    /// Source-like rendering used for spans and diffs.
    pub fn render(&self) -> String {
        match self {
            SimStatement::SetKey { key, value } => format!("set {key} = {value:?}"),
            SimStatement::UnsetKey { key } => format!("unset {key}"),
            SimStatement::AssertEq { key, expected } => format!("assert {key} == {expected:?}"),
            SimStatement::AssertUnset { key } => format!("assert {key} is unset"),
            SimStatement::Noop => "pass".to_string(),
            SimStatement::Crash { message } => format!("raise {message:?}"),
            SimStatement::FlipOnOddRun => "assert run_index is even".to_string(),
            SimStatement::Hang => "loop forever".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimTest {
    pub name: String,
    pub body: Vec<SimStatement>,
}

impl SimTest {
    pub fn new(name: impl Into<String>, body: Vec<SimStatement>) -> Self {
        Self {
            name: name.into(),
            body,
        }
    }

    /// Body positions of the deletable statements, in order.
    pub fn mutation_positions(&self) -> Vec<usize> {
        self.body
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_assertion())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn non_assertion_count(&self) -> usize {
        self.body.iter().filter(|s| !s.is_assertion()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimClass {
    pub name: String,
    #[serde(default)]
    pub before_all: Vec<SimStatement>,
    pub tests: Vec<SimTest>,
}

impl SimClass {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.before_all.iter().any(SimStatement::is_assertion) {
            return Err(SimError::AssertionInFixture(self.name.clone()));
        }
        let mut names = BTreeSet::new();
        for test in &self.tests {
            if !names.insert(test.name.as_str()) {
                return Err(SimError::DuplicateTest(test.name.clone()));
            }
        }
        Ok(())
    }

    pub fn test(&self, name: &str) -> Option<&SimTest> {
        self.tests.iter().find(|t| t.name == name)
    }

    fn test_mut(&mut self, name: &str) -> Option<&mut SimTest> {
        self.tests.iter_mut().find(|t| t.name == name)
    }

    /// Shared fields are keys referenced by two or more tests.
    pub fn features(&self) -> ClassFeatures {
        let mut users: BTreeMap<&str, usize> = BTreeMap::new();
        for test in &self.tests {
            let keys: BTreeSet<&str> = test.body.iter().filter_map(SimStatement::key).collect();
            for key in keys {
                *users.entry(key).or_default() += 1;
            }
        }
        ClassFeatures {
            test_count: self.tests.len(),
            shared_field_count: users.values().filter(|&&n| n >= 2).count(),
            has_fixture: !self.before_all.is_empty(),
        }
    }

    /// Source rendering, one statement per line. Returns the text and, per
    /// test, the 1-based line of each body statement.
    pub fn render(&self) -> (String, BTreeMap<String, Vec<u32>>) {
        let mut lines = vec![format!("class {} {{", self.name)];
        if !self.before_all.is_empty() {
            lines.push("  before_all {".to_string());
            lines.extend(self.before_all.iter().map(|s| format!("    {}", s.render())));
            lines.push("  }".to_string());
        }
        let mut positions = BTreeMap::new();
        for test in &self.tests {
            lines.push(format!("  test {} {{", test.name));
            let mut at = Vec::with_capacity(test.body.len());
            for statement in &test.body {
                lines.push(format!("    {}", statement.render()));
                at.push(lines.len() as u32);
            }
            lines.push("  }".to_string());
            positions.insert(test.name.clone(), at);
        }
        lines.push("}".to_string());
        (lines.join("\n") + "\n", positions)
    }
}

/// A named collection of classes sharing one module path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSuite {
    pub name: String,
    pub module_path: String,
    pub classes: Vec<SimClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorParams>,
}

impl SimSuite {
    pub fn validate(&self) -> Result<(), SimError> {
        let mut names = BTreeSet::new();
        for class in &self.classes {
            self.class_id(class)?;
            class.validate()?;
            if !names.insert(class.name.as_str()) {
                return Err(SimError::DuplicateTest(class.name.clone()));
            }
            for test in &class.tests {
                self.class_id(class)?.test(test.name.clone())?;
            }
        }
        Ok(())
    }

    pub fn class_id(&self, class: &SimClass) -> Result<ClassId, SimError> {
        Ok(ClassId::new(self.module_path.clone(), class.name.clone())?)
    }

    pub fn find(&self, class_id: &ClassId) -> Option<&SimClass> {
        if class_id.module_path() != self.module_path {
            return None;
        }
        self.classes.iter().find(|c| c.name == class_id.class_name())
    }

    pub fn test_ids(&self, class: &SimClass) -> Result<Vec<TestId>, SimError> {
        let class_id = self.class_id(class)?;
        class
            .tests
            .iter()
            .map(|t| Ok(class_id.test(t.name.clone())?))
            .collect()
    }

    /// The suite with its generator parameters expanded into classes.
    pub fn expanded(&self) -> SimSuite {
        let mut suite = self.clone();
        if let Some(params) = &self.generator {
            let generated = SimClassGenerator::new(params.clone()).suite("generated", &self.module_path);
            suite.classes.extend(generated.classes);
        }
        suite.generator = None;
        suite
    }
}

enum StepResult {
    Continue,
    Stop(Outcome),
    /// The whole execution stops; this and all later tests time out.
    Hung,
}

struct SimState {
    store: BTreeMap<String, String>,
}

impl SimState {
    fn fresh() -> Self {
        Self {
            store: BTreeMap::new(),
        }
    }

    fn step(&mut self, statement: &SimStatement, run_index: u64) -> StepResult {
        let assertion_failure = StepResult::Stop(Outcome::Fail {
            kind: FailureKind::Assertion,
        });
        match statement {
            SimStatement::SetKey { key, value } => {
                self.store.insert(key.clone(), value.clone());
            }
            SimStatement::UnsetKey { key } => {
                self.store.remove(key);
            }
            SimStatement::AssertEq { key, expected } => {
                if self.store.get(key) != Some(expected) {
                    return assertion_failure;
                }
            }
            SimStatement::AssertUnset { key } => {
                if self.store.contains_key(key) {
                    return assertion_failure;
                }
            }
            SimStatement::Noop => {}
            SimStatement::Crash { .. } => {
                return StepResult::Stop(Outcome::Fail {
                    kind: FailureKind::OtherException,
                })
            }
            SimStatement::FlipOnOddRun => {
                if run_index % 2 == 1 {
                    return assertion_failure;
                }
            }
            SimStatement::Hang => return StepResult::Hung,
        }
        StepResult::Continue
    }
}

/// Runs `tests` in sequence from a fresh state after the class fixture.
/// `run_index` only affects [`SimStatement::FlipOnOddRun`].
pub fn execute_sequence(class: &SimClass, tests: &[&SimTest], run_index: u64) -> Vec<Outcome> {
    let mut state = SimState::fresh();
    for statement in &class.before_all {
        match state.step(statement, run_index) {
            StepResult::Continue => {}
            StepResult::Hung => return vec![Outcome::Timeout; tests.len()],
            StepResult::Stop(_) => {
                let message = format!("class fixture of `{}` failed: {}", class.name, statement.render());
                return vec![Outcome::Error { message }; tests.len()];
            }
        }
    }
    let mut outcomes = Vec::with_capacity(tests.len());
    for test in tests {
        let mut outcome = Outcome::Pass;
        for statement in &test.body {
            match state.step(statement, run_index) {
                StepResult::Continue => {}
                StepResult::Stop(o) => {
                    outcome = o;
                    break;
                }
                StepResult::Hung => {
                    outcomes.resize(tests.len(), Outcome::Timeout);
                    return outcomes;
                }
            }
        }
        outcomes.push(outcome);
    }
    outcomes
}

/// Executes a class order. Pure in `(class, order)`.
pub fn execute_order(class: &SimClass, order: &TestOrder) -> Result<BTreeMap<String, Outcome>, SimError> {
    let tests = order
        .sequence()
        .iter()
        .map(|t| {
            class
                .test(t.test_name())
                .ok_or_else(|| SimError::UnknownTest(t.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let outcomes = execute_sequence(class, &tests, 0);
    Ok(tests.iter().map(|t| t.name.clone()).zip(outcomes).collect())
}

/// One isolated run of a test: fresh state, fixture, the test alone.
pub fn execute_isolated(class: &SimClass, test: &str, run_index: u64) -> Result<Outcome, SimError> {
    let test = class.test(test).ok_or_else(|| SimError::UnknownTest(test.to_string()))?;
    Ok(execute_sequence(class, &[test], run_index).remove(0))
}

/// Removes the `index`-th non-assertion statement of the body.
pub fn delete_statement(test: &SimTest, index: usize) -> Result<SimTest, SimError> {
    let positions = test.mutation_positions();
    let &position = positions.get(index).ok_or(SimError::IndexOutOfRange {
        index,
        available: positions.len(),
    })?;
    let mut body = test.body.clone();
    body.remove(position);
    Ok(SimTest {
        name: test.name.clone(),
        body,
    })
}

/// The class with one test's statement deleted.
pub fn mutant_class(class: &SimClass, test: &str, index: usize) -> Result<SimClass, SimError> {
    let mut mutated = class.clone();
    let target = mutated
        .test_mut(test)
        .ok_or_else(|| SimError::UnknownTest(test.to_string()))?;
    *target = delete_statement(target, index)?;
    Ok(mutated)
}

pub const ORACLE_TEST_LIMIT: usize = 7;

/// Ground-truth label by brute force over every permutation of the class.
///
/// A test is order-dependent when some order makes it pass and another makes
/// it fail; it is then a victim if it passes alone and a brittle if it fails
/// alone.
pub fn exhaustive_oracle(class: &SimClass, test: &str) -> Result<FlakyLabel, SimError> {
    if class.tests.len() > ORACLE_TEST_LIMIT {
        return Err(SimError::TooManyTests {
            count: class.tests.len(),
            limit: ORACLE_TEST_LIMIT,
        });
    }
    let position = class
        .tests
        .iter()
        .position(|t| t.name == test)
        .ok_or_else(|| SimError::UnknownTest(test.to_string()))?;

    let (mut passed, mut failed, mut errored) = (false, false, false);
    for_each_permutation(class.tests.len(), |perm| {
        let tests: Vec<&SimTest> = perm.iter().map(|&i| &class.tests[i]).collect();
        let outcomes = execute_sequence(class, &tests, 0);
        let at = perm.iter().position(|&i| i == position).expect("permutation covers every test");
        match &outcomes[at] {
            Outcome::Pass => passed = true,
            Outcome::Fail { .. } => failed = true,
            Outcome::Error { .. } | Outcome::Timeout => errored = true,
        }
    });

    if passed && failed {
        Ok(match execute_isolated(class, test, 0)? {
            Outcome::Pass => FlakyLabel::Victim,
            Outcome::Fail { .. } => FlakyLabel::Brittle,
            Outcome::Error { .. } | Outcome::Timeout => FlakyLabel::Unclassifiable {
                reason: "isolated run errored".into(),
            },
        })
    } else if errored && !passed && !failed {
        Ok(FlakyLabel::Unclassifiable {
            reason: "errored in every order".into(),
        })
    } else {
        Ok(FlakyLabel::Stable)
    }
}

/// Heap's algorithm over `0..n`.
fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
