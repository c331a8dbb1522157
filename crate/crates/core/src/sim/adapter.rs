use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use crate::model::{make_order, ClassId, Mutant, MutantId, OrderRunRecord, TestId, Validity};
use crate::protocol::{
    AdapterRequest, AdapterResponse, AdapterService, ClassEntry, InProcessTransport, RequestBody, ResponseBody,
    SessionError, SessionFactory, SourceSpan, Transport, PROTOCOL_VERSION,
};

use super::{execute_isolated, execute_order, mutant_class, SimClass, SimSuite};

/// Protocol front end of a [`SimSuite`]. One instance per session; mutants
/// materialized in a session are only visible to that session.
pub struct SimAdapter {
    suite: Arc<SimSuite>,
    mutants: HashMap<MutantId, (ClassId, SimClass)>,
    isolated_runs: HashMap<(TestId, Option<MutantId>), u64>,
}

#[allow(clippy::result_large_err)]
impl SimAdapter {
    pub fn new(suite: Arc<SimSuite>) -> Self {
        Self {
            suite,
            mutants: HashMap::new(),
            isolated_runs: HashMap::new(),
        }
    }

    fn class(&self, class_id: &ClassId) -> Result<&SimClass, ResponseBody> {
        self.suite
            .find(class_id)
            .ok_or_else(|| ResponseBody::err("unknown_class", format!("no class `{class_id}`")))
    }

    fn entry(&self, class: &SimClass) -> Result<ClassEntry, ResponseBody> {
        Ok(ClassEntry {
            class_id: self.suite.class_id(class).map_err(internal)?,
            features: class.features(),
        })
    }

    /// The class an execution should run against: the original, or the
    /// materialized mutant class.
    fn resolve(&self, class_id: &ClassId, mutant: Option<&MutantId>) -> Result<&SimClass, ResponseBody> {
        match mutant {
            None => self.class(class_id),
            Some(id) => match self.mutants.get(id) {
                Some((owner, class)) if owner == class_id => Ok(class),
                Some(_) => Err(ResponseBody::err(
                    "mutant_class_mismatch",
                    format!("mutant `{id}` does not belong to `{class_id}`"),
                )),
                None => Err(ResponseBody::err("unknown_mutant", format!("mutant `{id}` was not materialized"))),
            },
        }
    }

    fn test<'a>(&'a self, test: &TestId) -> Result<&'a SimClass, ResponseBody> {
        let class = self.class(test.class_id())?;
        class
            .test(test.test_name())
            .map(|_| class)
            .ok_or_else(|| ResponseBody::err("unknown_test", format!("no test `{test}`")))
    }

    fn dispatch(&mut self, body: RequestBody) -> Result<ResponseBody, ResponseBody> {
        Ok(match body {
            RequestBody::Handshake => ResponseBody::Capabilities {
                protocol_version: PROTOCOL_VERSION,
                can_mutate: true,
                failure_kinds: true,
            },
            RequestBody::ListClasses => ResponseBody::Classes {
                classes: self
                    .suite
                    .classes
                    .iter()
                    .map(|c| self.entry(c))
                    .collect::<Result<_, _>>()?,
            },
            RequestBody::DescribeClass { class } => ResponseBody::Classes {
                classes: vec![self.entry(self.class(&class)?)?],
            },
            RequestBody::ListTests { class } => ResponseBody::Tests {
                tests: self.suite.test_ids(self.class(&class)?).map_err(internal)?,
            },
            RequestBody::EnumerateMutationPoints { test } => {
                let class = self.test(&test)?;
                let (_, lines) = class.render();
                let body = class.test(test.test_name()).expect("resolved above");
                let spans: Vec<SourceSpan> = body
                    .mutation_positions()
                    .into_iter()
                    .map(|pos| {
                        let line = lines[&body.name][pos];
                        SourceSpan {
                            start_line: line,
                            start_column: 5,
                            end_line: line,
                            end_column: 5 + body.body[pos].render().chars().count() as u32,
                        }
                    })
                    .collect();
                ResponseBody::MutationPoints {
                    count: spans.len(),
                    spans,
                }
            }
            RequestBody::MaterializeMutant { test, point_index } => {
                let class = self.test(&test)?;
                let mutated = mutant_class(class, test.test_name(), point_index)
                    .map_err(|e| ResponseBody::err("point_out_of_range", e.to_string()))?;
                let diff = unified_diff(test.class_id(), class, &mutated);
                let id = MutantId::for_point(&test, point_index);
                let mutant = Mutant {
                    id: id.clone(),
                    target_test: test.clone(),
                    statement_index: point_index,
                    diff,
                    // Deleting a statement never breaks the sim language.
                    validity: Validity::Valid,
                };
                self.mutants.insert(id, (test.class_id().clone(), mutated));
                ResponseBody::MutantMaterialized { mutant }
            }
            RequestBody::RunOrder {
                class, mutant, order, ..
            } => {
                let started = Instant::now();
                let sim_class = self.resolve(&class, mutant.as_ref())?;
                let universe = self.suite.test_ids(sim_class).map_err(internal)?.into_iter().collect();
                let order = make_order(&class, order.sequence().to_vec(), &universe)
                    .map_err(|e| ResponseBody::err("invalid_order", e.to_string()))?;
                let outcomes = execute_order(sim_class, &order).map_err(internal)?;
                ResponseBody::OrderResult {
                    record: OrderRunRecord {
                        order,
                        outcomes,
                        wall_time: started.elapsed().as_millis() as u64,
                    },
                }
            }
            RequestBody::RunIsolated { test, mutant, .. } => {
                let sim_class = self.resolve(test.class_id(), mutant.as_ref())?;
                if sim_class.test(test.test_name()).is_none() {
                    return Err(ResponseBody::err("unknown_test", format!("no test `{test}`")));
                }
                let counter = self.isolated_runs.entry((test.clone(), mutant.clone())).or_default();
                let run_index = *counter;
                *counter += 1;
                let sim_class = self.resolve(test.class_id(), mutant.as_ref())?;
                ResponseBody::IsolatedResult {
                    outcome: execute_isolated(sim_class, test.test_name(), run_index).map_err(internal)?,
                }
            }
            RequestBody::Shutdown => ResponseBody::Goodbye,
        })
    }
}

fn internal(err: impl std::fmt::Display) -> ResponseBody {
    ResponseBody::err("internal", err.to_string())
}

/// Zero-context unified diff of a single deleted line.
fn unified_diff(class_id: &ClassId, original: &SimClass, mutated: &SimClass) -> String {
    let (before, _) = original.render();
    let (after, _) = mutated.render();
    let before: Vec<&str> = before.lines().collect();
    let after: Vec<&str> = after.lines().collect();
    let at = before
        .iter()
        .zip(after.iter())
        .position(|(a, b)| a != b)
        .unwrap_or(after.len());
    let path = format!("{}/{}", class_id.module_path().replace('.', "/"), class_id.class_name());
    format!(
        "--- a/{path}\n+++ b/{path}\n@@ -{},1 +{},0 @@\n-{}\n",
        at + 1,
        at,
        before[at]
    )
}

impl AdapterService for SimAdapter {
    fn handle(&mut self, request: AdapterRequest) -> AdapterResponse {
        let body = self.dispatch(request.body).unwrap_or_else(|err| err);
        AdapterResponse { id: request.id, body }
    }
}

/// Opens in-process sim sessions over a shared suite.
#[derive(Clone)]
pub struct SimFactory {
    suite: Arc<SimSuite>,
}

impl SimFactory {
    pub fn new(suite: SimSuite) -> Self {
        Self { suite: Arc::new(suite) }
    }

    pub fn suite(&self) -> &SimSuite {
        &self.suite
    }
}

impl SessionFactory for SimFactory {
    fn connect(&self) -> Result<Box<dyn Transport>, SessionError> {
        Ok(Box::new(InProcessTransport::new(SimAdapter::new(Arc::clone(&self.suite)))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FailureKind, Outcome, TestOrder};
    use crate::protocol::conformance::run_conformance;
    use crate::protocol::Session;
    use crate::sim::listings_suite;
    use std::collections::BTreeSet;
    use std::time::Duration;

    fn listing1_order(session: &mut Session, names: &[&str]) -> TestOrder {
        let class = ClassId::new("listings", "HttpRequestFactory").unwrap();
        let tests = session.list_tests(&class).unwrap();
        let universe: BTreeSet<TestId> = tests.iter().cloned().collect();
        let seq = names.iter().map(|n| class.test(*n).unwrap()).collect();
        make_order(&class, seq, &universe).unwrap()
    }

    #[test]
    fn lists_listing_tests_in_declaration_order() {
        let mut s = SimFactory::new(listings_suite()).open().unwrap();
        let class = ClassId::new("listings", "HttpRequestFactory").unwrap();
        let names: Vec<String> = s
            .list_tests(&class)
            .unwrap()
            .iter()
            .map(|t| t.test_name().to_string())
            .collect();
        assert_eq!(
            names,
            ["customConnectionFactory", "nullConnectionFactory", "postWithNumericQueryParams"]
        );
    }

    #[test]
    fn polluter_then_victim_over_the_wire() {
        let mut s = SimFactory::new(listings_suite()).open().unwrap();
        let timeout = Duration::from_secs(1);
        let polluted = listing1_order(&mut s, &["customConnectionFactory", "postWithNumericQueryParams", "nullConnectionFactory"]);
        let record = s.run_order(&polluted, None, timeout).unwrap();
        assert_eq!(
            record.outcomes["postWithNumericQueryParams"],
            Outcome::Fail { kind: FailureKind::Assertion }
        );
        let cleaned = listing1_order(&mut s, &["customConnectionFactory", "nullConnectionFactory", "postWithNumericQueryParams"]);
        let record = s.run_order(&cleaned, None, timeout).unwrap();
        assert_eq!(record.outcomes["postWithNumericQueryParams"], Outcome::Pass);
        let again = s.run_order(&cleaned, None, timeout).unwrap();
        assert!(record.same_outcomes(&again));
    }

    #[test]
    fn mutants_must_be_materialized_in_the_session() {
        let factory = SimFactory::new(listings_suite());
        let mut a = factory.open().unwrap();
        let mut b = factory.open().unwrap();
        let class = ClassId::new("listings", "EndpointSession").unwrap();
        let test = class.test("testCloseReason").unwrap();
        let points = a.mutation_points(&test).unwrap();
        assert_eq!(points.len(), 1);
        let mutant = a.materialize(&test, 0).unwrap();
        assert!(mutant.diff.contains("-    set endpoint = \"ready\""));
        assert_eq!(
            a.run_isolated(&test, Some(&mutant.id), Duration::from_secs(1)).unwrap(),
            Outcome::Fail { kind: FailureKind::Assertion }
        );
        assert!(matches!(
            b.run_isolated(&test, Some(&mutant.id), Duration::from_secs(1)),
            Err(SessionError::Remote { code, .. }) if code == "unknown_mutant"
        ));
        assert!(matches!(a.materialize(&test, 1), Err(SessionError::Remote { .. })));
    }

    #[test]
    fn sim_adapter_is_conformant() {
        let report = run_conformance(&SimFactory::new(listings_suite()), Duration::from_secs(1));
        assert!(report.passed(), "{:#?}", report.failures());
        let names: Vec<&str> = report.checks.iter().map(|c| c.name).collect();
        for expected in ["handshake", "run_order", "run_isolated", "materialize_mutant", "id_bijection", "shutdown"] {
            assert!(names.contains(&expected));
        }
    }
}
