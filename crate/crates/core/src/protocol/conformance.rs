//! Adapter conformance checks, runnable against any [`SessionFactory`].
//!
//! Every request tag is exercised on a live session; the transcript is then
//! checked for the request/response id bijection.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::messages::RequestBody;
use super::session::{SessionError, SessionFactory, QUERY_DEADLINE};
use crate::model::{make_order, ClassId, TestId};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConformanceReport {
    pub checks: Vec<CheckResult>,
}

impl ConformanceReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn record(&mut self, name: &'static str, result: Result<String, String>) -> bool {
        let passed = result.is_ok();
        let detail = result.unwrap_or_else(|e| e);
        self.checks.push(CheckResult { name, passed, detail });
        passed
    }
}

fn describe(err: SessionError) -> String {
    err.to_string()
}

pub fn run_conformance(factory: &dyn SessionFactory, per_test_timeout: Duration) -> ConformanceReport {
    let mut report = ConformanceReport::default();

    let mut session = match factory.open() {
        Ok(s) => s,
        Err(e) => {
            report.record("handshake", Err(describe(e)));
            return report;
        }
    };
    report.record(
        "handshake",
        Ok(format!("protocol version {}", session.capabilities().protocol_version)),
    );

    let classes = match session.list_classes() {
        Ok(c) if !c.is_empty() => c,
        Ok(_) => {
            report.record("list_classes", Err("adapter reported no classes".into()));
            return report;
        }
        Err(e) => {
            report.record("list_classes", Err(describe(e)));
            return report;
        }
    };
    report.record("list_classes", Ok(format!("{} classes", classes.len())));
    let entry = classes[0].clone();
    let class = entry.class_id.clone();

    report.record(
        "describe_class",
        match session.describe_class(&class) {
            Ok(d) if d == entry => Ok(format!("{class} described consistently")),
            Ok(d) => Err(format!("describe_class disagrees with list_classes: {d:?}")),
            Err(e) => Err(describe(e)),
        },
    );

    let tests = match session.list_tests(&class) {
        Ok(t) => t,
        Err(e) => {
            report.record("list_tests", Err(describe(e)));
            return report;
        }
    };
    let unique: BTreeSet<&TestId> = tests.iter().collect();
    report.record(
        "list_tests",
        if tests.is_empty() {
            Err("class has no tests".into())
        } else if unique.len() != tests.len() {
            Err("duplicate test names".into())
        } else if entry.features.test_count != tests.len() {
            Err(format!(
                "features.test_count {} but {} tests listed",
                entry.features.test_count,
                tests.len()
            ))
        } else {
            Ok(format!("{} tests", tests.len()))
        },
    );
    if tests.is_empty() {
        return report;
    }

    let mut first_mutant = None;
    let mut points_ok = Ok(0usize);
    let mut materialize_ok = Ok(0usize);
    for test in &tests {
        match session.mutation_points(test) {
            Ok(points) => {
                if let Ok(n) = points_ok.as_mut() {
                    *n += points.len();
                }
                for point in &points {
                    match session.materialize(test, point.index) {
                        Ok(m) => {
                            if let Ok(n) = materialize_ok.as_mut() {
                                *n += 1;
                            }
                            if first_mutant.is_none() && m.is_valid() {
                                first_mutant = Some(m);
                            }
                        }
                        Err(e) => materialize_ok = Err(describe(e)),
                    }
                }
            }
            Err(e) => points_ok = Err(describe(e)),
        }
    }
    report.record("enumerate_mutation_points", points_ok.map(|n| format!("{n} points")));
    report.record("materialize_mutant", materialize_ok.map(|n| format!("{n} mutants")));

    let universe: BTreeSet<TestId> = tests.iter().cloned().collect();
    let forward = make_order(&class, tests.clone(), &universe).expect("listed tests form an order");
    let first = session.run_order(&forward, None, per_test_timeout);
    let replay = session.run_order(&forward, None, per_test_timeout);
    report.record(
        "run_order",
        match &first {
            Ok(r) => Ok(format!("{} outcomes", r.outcomes.len())),
            Err(e) => Err(describe(e.clone())),
        },
    );
    report.record(
        "fresh_state_replay",
        match (&first, &replay) {
            (Ok(a), Ok(b)) if a.same_outcomes(b) => Ok("identical outcomes on replay".into()),
            (Ok(_), Ok(_)) => Err("replaying the same order changed outcomes".into()),
            _ => Err("order could not be replayed".into()),
        },
    );

    if let Some(mutant) = &first_mutant {
        let mutant_class = mutant.target_test.class_id().clone();
        let result = session
            .list_tests(&mutant_class)
            .and_then(|tests| {
                let universe = tests.iter().cloned().collect();
                let order = make_order(&mutant_class, tests, &universe).expect("listed tests form an order");
                session.run_order(&order, Some(&mutant.id), per_test_timeout)
            })
            .map(|_| format!("mutant {} ran", mutant.id))
            .map_err(describe);
        report.record("run_order_mutant", result);
    }

    report.record(
        "run_isolated",
        session
            .run_isolated(&tests[0], None, per_test_timeout)
            .map(|o| format!("{o:?}"))
            .map_err(describe),
    );

    let bogus = ClassId::new("conformance.probe", "NoSuchClass").expect("valid id");
    report.record(
        "unknown_class_error",
        match session.call(RequestBody::ListTests { class: bogus }, QUERY_DEADLINE) {
            Err(SessionError::Remote { code, .. }) => Ok(format!("err `{code}`")),
            Ok(body) => Err(format!("expected err response, got `{}`", body.tag())),
            Err(e) => Err(describe(e)),
        },
    );

    let (requests, responses) = session.transcript();
    let increasing = requests.windows(2).all(|w| w[0] < w[1]);
    report.record(
        "id_bijection",
        if requests == responses && increasing && requests.first() == Some(&1) {
            Ok(format!("{} exchanges", requests.len()))
        } else {
            Err(format!("requests {requests:?} vs responses {responses:?}"))
        },
    );

    let started = Instant::now();
    session.close();
    let elapsed = started.elapsed();
    report.record(
        "shutdown",
        if elapsed <= super::session::SHUTDOWN_GRACE {
            Ok(format!("closed in {elapsed:?}"))
        } else {
            Err(format!("adapter needed {elapsed:?} to exit"))
        },
    );

    report
}
