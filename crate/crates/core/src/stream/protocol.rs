//! Wire messages and their byte encoding.

use std::io::{self, Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: [u8; 4] = *b"SVST";
pub const PROTOCOL_VERSION: u16 = 1;
pub const FRAME_HEADER_LEN: usize = 9;
/// Largest body a reader accepts.
pub const MAX_BODY_LEN: u32 = 1 << 30;

pub const HELLO: u8 = 1;
pub const HELLO_ACK: u8 = 2;
pub const GET: u8 = 3;
pub const VIDEO: u8 = 4;
pub const ERR: u8 = 5;
pub const BYE: u8 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum ErrorCode {
    UnknownType = 1,
    ConfigMismatch = 2,
    Malformed = 3,
    BatchTooLarge = 4,
    VersionMismatch = 5,
    GenerationFailed = 6,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Hello { config_hash: [u8; 32], version: u16 },
    /// The server's resolved config as JSON.
    HelloAck { config_json: String },
    Get { start: u64, count: u32 },
    /// `bytes` is a complete `.svid` file image.
    Video { index: u64, bytes: Vec<u8> },
    Err { code: u16, text: String },
    Bye,
}

/// Why a received frame could not be turned into a [`Message`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError {
    pub code: ErrorCode,
    pub reason: String,
}

impl WireError {
    fn malformed(reason: impl Into<String>) -> Self {
        Self { code: ErrorCode::Malformed, reason: reason.into() }
    }
}

impl From<WireError> for Error {
    fn from(e: WireError) -> Self {
        Error::Protocol(e.reason)
    }
}

impl Message {
    pub fn kind(&self) -> u8 {
        match self {
            Message::Hello { .. } => HELLO,
            Message::HelloAck { .. } => HELLO_ACK,
            Message::Get { .. } => GET,
            Message::Video { .. } => VIDEO,
            Message::Err { .. } => ERR,
            Message::Bye => BYE,
        }
    }

    pub fn error(code: ErrorCode, text: impl Into<String>) -> Self {
        Message::Err { code: code as u16, text: text.into() }
    }

    pub fn body(&self) -> Vec<u8> {
        match self {
            Message::Hello { config_hash, version } => [&config_hash[..], &version.to_le_bytes()].concat(),
            Message::HelloAck { config_json } => config_json.as_bytes().to_vec(),
            Message::Get { start, count } => [&start.to_le_bytes()[..], &count.to_le_bytes()].concat(),
            Message::Video { index, bytes } => [&index.to_le_bytes()[..], bytes].concat(),
            Message::Err { code, text } => [&code.to_le_bytes()[..], text.as_bytes()].concat(),
            Message::Bye => Vec::new(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let body = self.body();
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + body.len());
        out.extend_from_slice(&MAGIC);
        out.push(self.kind());
        out.extend_from_slice(&(body.len() as u32).to_le_bytes());
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(kind: u8, body: &[u8]) -> std::result::Result<Message, WireError> {
        let exact = |n: usize| {
            if body.len() == n {
                Ok(())
            } else {
                Err(WireError::malformed(format!("type {kind} body is {} bytes, expected {n}", body.len())))
            }
        };
        let text = |b: &[u8]| String::from_utf8(b.to_vec()).map_err(|_| WireError::malformed("body is not UTF-8"));
        match kind {
            HELLO => {
                exact(34)?;
                Ok(Message::Hello {
                    config_hash: body[..32].try_into().expect("32 bytes"),
                    version: u16::from_le_bytes([body[32], body[33]]),
                })
            }
            HELLO_ACK => Ok(Message::HelloAck { config_json: text(body)? }),
            GET => {
                exact(12)?;
                Ok(Message::Get {
                    start: u64::from_le_bytes(body[..8].try_into().expect("8 bytes")),
                    count: u32::from_le_bytes(body[8..].try_into().expect("4 bytes")),
                })
            }
            VIDEO => {
                if body.len() < 8 {
                    return Err(WireError::malformed("VIDEO body shorter than its index"));
                }
                Ok(Message::Video {
                    index: u64::from_le_bytes(body[..8].try_into().expect("8 bytes")),
                    bytes: body[8..].to_vec(),
                })
            }
            ERR => {
                if body.len() < 2 {
                    return Err(WireError::malformed("ERR body shorter than its code"));
                }
                Ok(Message::Err { code: u16::from_le_bytes([body[0], body[1]]), text: text(&body[2..])? })
            }
            BYE => {
                exact(0)?;
                Ok(Message::Bye)
            }
            other => Err(WireError { code: ErrorCode::UnknownType, reason: format!("unknown message type {other}") }),
        }
    }
}

pub fn write_message(w: &mut impl Write, msg: &Message) -> Result<()> {
    w.write_all(&msg.encode())?;
    w.flush()?;
    Ok(())
}

/// Outcome of reading one frame off a stream.
#[derive(Debug)]
pub enum Received {
    Message(Message),
    /// The framing was readable but the frame was not a valid message.
    Invalid(WireError),
    /// The peer closed the stream between frames.
    Closed,
}

/// Reads one frame whose body is at most `max_body` bytes.
pub fn read_message(r: &mut impl Read, max_body: u32) -> Result<Received> {
    let mut header = [0u8; FRAME_HEADER_LEN];
    let mut filled = 0;
    while filled < FRAME_HEADER_LEN {
        match r.read(&mut header[filled..]) {
            Ok(0) if filled == 0 => return Ok(Received::Closed),
            Ok(0) => return Err(Error::Protocol("stream ended inside a frame header".into())),
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    if header[..4] != MAGIC {
        return Ok(Received::Invalid(WireError::malformed(format!("bad frame magic {:02x?}", &header[..4]))));
    }
    let kind = header[4];
    let len = u32::from_le_bytes(header[5..9].try_into().expect("4 bytes"));
    if len > max_body {
        return Ok(Received::Invalid(WireError::malformed(format!("body length {len} exceeds {max_body}"))));
    }
    let mut body = vec![0u8; len as usize];
    r.read_exact(&mut body).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => Error::Protocol("stream ended inside a frame body".into()),
        _ => e.into(),
    })?;
    Ok(match Message::decode(kind, &body) {
        Ok(m) => Received::Message(m),
        Err(e) => Received::Invalid(e),
    })
}
