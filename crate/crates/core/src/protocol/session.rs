//! Serial request/response sessions over a line transport.

use std::collections::VecDeque;
use std::time::Duration;

use thiserror::Error;

use super::messages::{
    decode_message, encode_message, AdapterRequest, AdapterResponse, ClassEntry, MutationPoint, RequestBody,
    ResponseBody, PROTOCOL_VERSION,
};
use crate::model::{ClassId, Mutant, MutantId, OrderRunRecord, Outcome, TestId, TestOrder};

pub const HANDSHAKE_DEADLINE: Duration = Duration::from_secs(30);
pub const SHUTDOWN_GRACE: Duration = Duration::from_secs(5);
/// Deadline for requests that do not execute tests.
pub const QUERY_DEADLINE: Duration = Duration::from_secs(120);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SessionError {
    #[error("adapter speaks protocol version {got}, expected {expected}")]
    VersionMismatch { expected: u32, got: u32 },
    #[error("adapter crashed: {0}")]
    AdapterCrashed(String),
    #[error("adapter did not answer the handshake in time")]
    HandshakeTimeout,
    #[error("adapter did not answer within {0:?}")]
    DeadlineExceeded(Duration),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("adapter error `{code}`: {message}")]
    Remote { code: String, message: String },
    #[error("adapter unavailable: {0}")]
    Unavailable(String),
    #[error("session unusable after an earlier failure")]
    Poisoned,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("stream closed: {0}")]
    Closed(String),
    #[error("timed out")]
    Timeout,
}

/// A bidirectional line channel to one adapter.
pub trait Transport: Send {
    fn send_line(&mut self, line: &[u8]) -> Result<(), TransportError>;
    fn recv_line(&mut self, deadline: Duration) -> Result<Vec<u8>, TransportError>;
    /// Waits up to `grace` for the adapter to go away, then forces it.
    fn close(&mut self, grace: Duration);
}

/// Something that answers protocol requests, e.g. an in-process model.
pub trait AdapterService: Send {
    fn handle(&mut self, request: AdapterRequest) -> AdapterResponse;
}

/// Runs a service behind the wire encoding, so in-process adapters exercise
/// exactly the serialization path of external ones.
pub struct InProcessTransport<S> {
    service: S,
    pending: VecDeque<Vec<u8>>,
    closed: bool,
}

impl<S: AdapterService> InProcessTransport<S> {
    pub fn new(service: S) -> Self {
        Self {
            service,
            pending: VecDeque::new(),
            closed: false,
        }
    }
}

impl<S: AdapterService> Transport for InProcessTransport<S> {
    fn send_line(&mut self, line: &[u8]) -> Result<(), TransportError> {
        if self.closed {
            return Err(TransportError::Closed("adapter has shut down".into()));
        }
        let response = match decode_message::<AdapterRequest>(line) {
            Ok(request) => {
                let shutting_down = matches!(request.body, RequestBody::Shutdown);
                let response = self.service.handle(request);
                self.closed |= shutting_down;
                response
            }
            Err(err) => AdapterResponse {
                id: 0,
                body: ResponseBody::err("malformed_request", err.to_string()),
            },
        };
        self.pending.push_back(encode_message(&response));
        Ok(())
    }

    fn recv_line(&mut self, _deadline: Duration) -> Result<Vec<u8>, TransportError> {
        self.pending
            .pop_front()
            .ok_or_else(|| TransportError::Closed("no response pending".into()))
    }

    fn close(&mut self, _grace: Duration) {
        self.closed = true;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub protocol_version: u32,
    pub can_mutate: bool,
    pub failure_kinds: bool,
}

/// A negotiated adapter session. One request in flight at a time.
pub struct Session {
    transport: Box<dyn Transport>,
    next_id: u64,
    capabilities: Capabilities,
    request_ids: Vec<u64>,
    response_ids: Vec<u64>,
    poisoned: bool,
    closed: bool,
}

impl Session {
    /// Sends the handshake as request 1 and checks the protocol version.
    pub fn negotiate(transport: Box<dyn Transport>, deadline: Duration) -> Result<Self, SessionError> {
        let mut session = Self {
            transport,
            next_id: 1,
            capabilities: Capabilities {
                protocol_version: 0,
                can_mutate: false,
                failure_kinds: false,
            },
            request_ids: Vec::new(),
            response_ids: Vec::new(),
            poisoned: false,
            closed: false,
        };
        let body = match session.call(RequestBody::Handshake, deadline) {
            Err(SessionError::DeadlineExceeded(_)) => return Err(SessionError::HandshakeTimeout),
            other => other?,
        };
        match body {
            ResponseBody::Capabilities {
                protocol_version,
                can_mutate,
                failure_kinds,
            } => {
                if protocol_version != PROTOCOL_VERSION {
                    session.close();
                    return Err(SessionError::VersionMismatch {
                        expected: PROTOCOL_VERSION,
                        got: protocol_version,
                    });
                }
                session.capabilities = Capabilities {
                    protocol_version,
                    can_mutate,
                    failure_kinds,
                };
                Ok(session)
            }
            other => Err(unexpected("capabilities", &other)),
        }
    }

    pub fn capabilities(&self) -> Capabilities {
        self.capabilities
    }

    /// Ids of every request sent and every response received, in order.
    pub fn transcript(&self) -> (&[u64], &[u64]) {
        (&self.request_ids, &self.response_ids)
    }

    /// Sends one request and waits for its response. Adapter-side `err`
    /// responses are surfaced as [`SessionError::Remote`].
    pub fn call(&mut self, body: RequestBody, deadline: Duration) -> Result<ResponseBody, SessionError> {
        if self.poisoned || self.closed {
            return Err(SessionError::Poisoned);
        }
        let id = self.next_id;
        self.next_id += 1;
        let line = encode_message(&AdapterRequest { id, body });
        self.request_ids.push(id);
        if let Err(err) = self.transport.send_line(&line) {
            self.poisoned = true;
            return Err(SessionError::AdapterCrashed(err.to_string()));
        }
        let raw = match self.transport.recv_line(deadline) {
            Ok(raw) => raw,
            Err(TransportError::Timeout) => {
                self.poisoned = true;
                return Err(SessionError::DeadlineExceeded(deadline));
            }
            Err(TransportError::Closed(why)) => {
                self.poisoned = true;
                return Err(SessionError::AdapterCrashed(why));
            }
        };
        let response: AdapterResponse = match decode_message(&raw) {
            Ok(r) => r,
            Err(err) => {
                self.poisoned = true;
                return Err(SessionError::ProtocolViolation(format!(
                    "{err} in line `{}`",
                    String::from_utf8_lossy(&raw).trim_end()
                )));
            }
        };
        self.response_ids.push(response.id);
        if response.id != id {
            self.poisoned = true;
            return Err(SessionError::ProtocolViolation(format!(
                "response id {} does not match request id {id}",
                response.id
            )));
        }
        match response.body {
            ResponseBody::Err { code, message } => Err(SessionError::Remote { code, message }),
            body => Ok(body),
        }
    }

    pub fn list_classes(&mut self) -> Result<Vec<ClassEntry>, SessionError> {
        match self.call(RequestBody::ListClasses, QUERY_DEADLINE)? {
            ResponseBody::Classes { classes } => Ok(classes),
            other => Err(unexpected("classes", &other)),
        }
    }

    pub fn describe_class(&mut self, class: &ClassId) -> Result<ClassEntry, SessionError> {
        match self.call(RequestBody::DescribeClass { class: class.clone() }, QUERY_DEADLINE)? {
            ResponseBody::Classes { mut classes } if classes.len() == 1 && classes[0].class_id == *class => {
                Ok(classes.remove(0))
            }
            ResponseBody::Classes { .. } => Err(SessionError::ProtocolViolation(format!(
                "describe_class for `{class}` must return exactly that class"
            ))),
            other => Err(unexpected("classes", &other)),
        }
    }

    pub fn list_tests(&mut self, class: &ClassId) -> Result<Vec<TestId>, SessionError> {
        match self.call(RequestBody::ListTests { class: class.clone() }, QUERY_DEADLINE)? {
            ResponseBody::Tests { tests } => {
                if let Some(foreign) = tests.iter().find(|t| t.class_id() != class) {
                    return Err(SessionError::ProtocolViolation(format!(
                        "test `{foreign}` listed under class `{class}`"
                    )));
                }
                Ok(tests)
            }
            other => Err(unexpected("tests", &other)),
        }
    }

    pub fn mutation_points(&mut self, test: &TestId) -> Result<Vec<MutationPoint>, SessionError> {
        match self.call(RequestBody::EnumerateMutationPoints { test: test.clone() }, QUERY_DEADLINE)? {
            ResponseBody::MutationPoints { count, spans } => {
                if count != spans.len() {
                    return Err(SessionError::ProtocolViolation(format!(
                        "mutation point count {count} disagrees with {} spans",
                        spans.len()
                    )));
                }
                Ok(spans
                    .into_iter()
                    .enumerate()
                    .map(|(index, span)| MutationPoint {
                        test: test.clone(),
                        index,
                        span,
                    })
                    .collect())
            }
            other => Err(unexpected("mutation_points", &other)),
        }
    }

    pub fn materialize(&mut self, test: &TestId, point_index: usize) -> Result<Mutant, SessionError> {
        let body = RequestBody::MaterializeMutant {
            test: test.clone(),
            point_index,
        };
        match self.call(body, QUERY_DEADLINE)? {
            ResponseBody::MutantMaterialized { mutant } => {
                if mutant.target_test != *test || mutant.statement_index != point_index {
                    return Err(SessionError::ProtocolViolation(format!(
                        "materialized mutant `{}` does not match point {point_index} of `{test}`",
                        mutant.id
                    )));
                }
                Ok(mutant)
            }
            other => Err(unexpected("mutant_materialized", &other)),
        }
    }

    pub fn run_order(
        &mut self,
        order: &TestOrder,
        mutant: Option<&MutantId>,
        per_test_timeout: Duration,
    ) -> Result<OrderRunRecord, SessionError> {
        let body = RequestBody::RunOrder {
            class: order.class_id().clone(),
            mutant: mutant.cloned(),
            order: order.clone(),
            timeout: per_test_timeout.as_millis() as u64,
        };
        let deadline = per_test_timeout * (order.len() as u32 + 1) + QUERY_DEADLINE;
        match self.call(body, deadline)? {
            ResponseBody::OrderResult { record } => {
                if record.order != *order || !record.is_consistent() {
                    return Err(SessionError::ProtocolViolation(
                        "order result does not cover exactly the requested order".into(),
                    ));
                }
                Ok(record)
            }
            other => Err(unexpected("order_result", &other)),
        }
    }

    pub fn run_isolated(
        &mut self,
        test: &TestId,
        mutant: Option<&MutantId>,
        per_test_timeout: Duration,
    ) -> Result<Outcome, SessionError> {
        let body = RequestBody::RunIsolated {
            test: test.clone(),
            mutant: mutant.cloned(),
            timeout: per_test_timeout.as_millis() as u64,
        };
        match self.call(body, per_test_timeout * 2 + QUERY_DEADLINE)? {
            ResponseBody::IsolatedResult { outcome } => Ok(outcome),
            other => Err(unexpected("isolated_result", &other)),
        }
    }

    /// Sends `shutdown` and gives the adapter [`SHUTDOWN_GRACE`] to exit.
    pub fn close(&mut self) {
        if self.closed {
            return;
        }
        if !self.poisoned {
            // A missing goodbye is tolerated; the transport kills stragglers.
            let _ = self.call(RequestBody::Shutdown, SHUTDOWN_GRACE);
        }
        self.closed = true;
        self.transport.close(SHUTDOWN_GRACE);
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.close();
    }
}

fn unexpected(expected: &str, got: &ResponseBody) -> SessionError {
    SessionError::ProtocolViolation(format!("expected `{expected}` response, got `{}`", got.tag()))
}

/// Opens independent sessions; one per worker.
pub trait SessionFactory: Sync {
    /// A fresh, not yet negotiated channel to a new adapter instance.
    fn connect(&self) -> Result<Box<dyn Transport>, SessionError>;

    fn open(&self) -> Result<Session, SessionError> {
        Session::negotiate(self.connect()?, HANDSHAKE_DEADLINE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Replies with canned responses regardless of input.
    struct Scripted(VecDeque<Result<Vec<u8>, TransportError>>);

    impl Transport for Scripted {
        fn send_line(&mut self, _line: &[u8]) -> Result<(), TransportError> {
            Ok(())
        }
        fn recv_line(&mut self, _deadline: Duration) -> Result<Vec<u8>, TransportError> {
            self.0
                .pop_front()
                .unwrap_or_else(|| Err(TransportError::Closed("eof".into())))
        }
        fn close(&mut self, _grace: Duration) {}
    }

    fn scripted(lines: Vec<Result<&str, TransportError>>) -> Box<dyn Transport> {
        Box::new(Scripted(
            lines
                .into_iter()
                .map(|l| l.map(|s| format!("{s}\n").into_bytes()))
                .collect(),
        ))
    }

    const CAPS_V1: &str = r#"{"id":1,"type":"capabilities","protocol_version":1,"can_mutate":true,"failure_kinds":true}"#;

    #[test]
    fn negotiates_version_one() {
        let session = Session::negotiate(scripted(vec![Ok(CAPS_V1)]), HANDSHAKE_DEADLINE).unwrap();
        assert_eq!(session.capabilities().protocol_version, 1);
        assert_eq!(session.transcript(), (&[1u64][..], &[1u64][..]));
    }

    #[test]
    fn version_two_is_rejected() {
        let caps = r#"{"id":1,"type":"capabilities","protocol_version":2,"can_mutate":true,"failure_kinds":true}"#;
        let err = Session::negotiate(scripted(vec![Ok(caps)]), HANDSHAKE_DEADLINE).err().unwrap();
        assert_eq!(err, SessionError::VersionMismatch { expected: 1, got: 2 });
    }

    #[test]
    fn early_exit_is_a_crash() {
        let err = Session::negotiate(scripted(vec![]), HANDSHAKE_DEADLINE).err().unwrap();
        assert!(matches!(err, SessionError::AdapterCrashed(_)));
    }

    #[test]
    fn silent_adapter_times_out_handshake() {
        let err = Session::negotiate(scripted(vec![Err(TransportError::Timeout)]), HANDSHAKE_DEADLINE)
            .err()
            .unwrap();
        assert_eq!(err, SessionError::HandshakeTimeout);
    }

    #[test]
    fn mismatched_id_and_garbage_are_violations() {
        let mut s = Session::negotiate(
            scripted(vec![Ok(CAPS_V1), Ok(r#"{"id":7,"type":"classes","classes":[]}"#)]),
            HANDSHAKE_DEADLINE,
        )
        .unwrap();
        assert!(matches!(s.list_classes(), Err(SessionError::ProtocolViolation(_))));
        assert_eq!(s.list_classes(), Err(SessionError::Poisoned));

        let mut s = Session::negotiate(scripted(vec![Ok(CAPS_V1), Ok("}{")]), HANDSHAKE_DEADLINE).unwrap();
        assert!(matches!(s.list_classes(), Err(SessionError::ProtocolViolation(_))));
    }

    #[test]
    fn deadline_and_remote_errors_map() {
        let mut s = Session::negotiate(
            scripted(vec![Ok(CAPS_V1), Err(TransportError::Timeout)]),
            HANDSHAKE_DEADLINE,
        )
        .unwrap();
        assert!(matches!(s.list_classes(), Err(SessionError::DeadlineExceeded(_))));

        let mut s = Session::negotiate(
            scripted(vec![Ok(CAPS_V1), Ok(r#"{"id":2,"type":"err","code":"boom","message":"no"}"#)]),
            HANDSHAKE_DEADLINE,
        )
        .unwrap();
        assert_eq!(
            s.list_classes(),
            Err(SessionError::Remote {
                code: "boom".into(),
                message: "no".into()
            })
        );
        // Remote errors leave the session usable.
        assert!(!matches!(s.list_classes(), Err(SessionError::Poisoned)));
    }

    #[test]
    fn wrong_body_type_is_a_violation() {
        let mut s = Session::negotiate(
            scripted(vec![Ok(CAPS_V1), Ok(r#"{"id":2,"type":"tests","tests":[]}"#)]),
            HANDSHAKE_DEADLINE,
        )
        .unwrap();
        assert!(matches!(s.list_classes(), Err(SessionError::ProtocolViolation(_))));
    }
}
