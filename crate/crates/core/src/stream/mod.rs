//! TCP delivery of generated videos to training workers.
//!
//! Framing is `"SVST"`, a `u8` message type, a `u32` little-endian body
//! length and the body. See `docs/protocol.md` for byte-level examples.

pub mod client;
pub mod protocol;
pub mod server;
pub mod shard;

pub use client::Client;
pub use protocol::{ErrorCode, Message, PROTOCOL_VERSION};
pub use server::{RunningServer, Server, ShutdownHandle};
pub use shard::{shard_indices, ShardSpec};
