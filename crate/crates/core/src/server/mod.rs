//! Live session back end for the operator front panel.

pub mod live;
pub mod protocol;
pub mod session;

pub use live::{LiveOptions, LiveServer, LocalClient, DEFAULT_DECIMATION};
pub use protocol::{parse_client_message, ClientMessage, Command, RunSummary, ServerMessage, PROTOCOL_VERSION};
pub use session::{Phase, Session};
