//! Language-neutral adapter protocol: newline-delimited JSON requests and
//! responses exchanged with a test-ecosystem adapter.

pub mod conformance;
mod messages;
mod session;
mod subprocess;

use std::io::{BufRead, Write};

pub use messages::{
    decode_message, encode_message, AdapterRequest, AdapterResponse, ClassEntry, DecodeError, MutationPoint,
    RequestBody, ResponseBody, SourceSpan, PROTOCOL_VERSION,
};
pub use session::{
    AdapterService, Capabilities, InProcessTransport, Session, SessionError, SessionFactory, Transport,
    TransportError, HANDSHAKE_DEADLINE, QUERY_DEADLINE, SHUTDOWN_GRACE,
};
pub use subprocess::{AdapterCommand, SubprocessTransport};

/// Serves `service` over a pair of streams until `shutdown` or end of input.
///
/// Unparsable lines are answered with an `err` response carrying id 0.
pub fn serve<S, R, W>(service: &mut S, input: R, mut output: W) -> std::io::Result<()>
where
    S: AdapterService,
    R: BufRead,
    W: Write,
{
    for line in input.split(b'\n') {
        let line = line?;
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let (response, done) = match decode_message::<AdapterRequest>(&line) {
            Ok(request) => {
                let done = matches!(request.body, RequestBody::Shutdown);
                (service.handle(request), done)
            }
            Err(err) => (
                AdapterResponse {
                    id: 0,
                    body: ResponseBody::err("malformed_request", err.to_string()),
                },
                false,
            ),
        };
        output.write_all(&encode_message(&response))?;
        output.flush()?;
        if done {
            break;
        }
    }
    Ok(())
}
