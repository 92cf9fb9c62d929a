//! Blocking client for the streaming server.

use std::io::{BufReader, BufWriter};
use std::net::{TcpStream, ToSocketAddrs};

use crate::error::{Error, Result};
use crate::io::container::decode_video;
use crate::stream::protocol::{read_message, write_message, ErrorCode, Message, Received, MAX_BODY_LEN, PROTOCOL_VERSION};
use crate::stream::shard::{shard_indices, ShardSpec};
use crate::video::VideoTensor;

pub struct Client {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    config_json: String,
}

impl Client {
    /// Connects and performs the HELLO handshake.
    pub fn connect(addr: impl ToSocketAddrs, config_hash: [u8; 32]) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut writer = BufWriter::new(stream);
        write_message(&mut writer, &Message::Hello { config_hash, version: PROTOCOL_VERSION })?;
        match receive(&mut reader)? {
            Message::HelloAck { config_json } => Ok(Self { reader, writer, config_json }),
            Message::Err { code, text } if code == ErrorCode::ConfigMismatch as u16 => {
                Err(Error::ConfigMismatch { expected: text, found: hex::encode(config_hash) })
            }
            Message::Err { code, text } => Err(Error::Remote { code, message: text }),
            other => Err(Error::Protocol(format!("expected HELLO_ACK, got type {}", other.kind()))),
        }
    }

    /// The server's resolved config.
    pub fn config_json(&self) -> &str {
        &self.config_json
    }

    /// Raw `.svid` bytes of videos `start..start + count`.
    pub fn get_raw(&mut self, start: u64, count: u32) -> Result<Vec<(u64, Vec<u8>)>> {
        write_message(&mut self.writer, &Message::Get { start, count })?;
        let mut out = Vec::with_capacity(count as usize);
        for expected in start..start + count as u64 {
            match receive(&mut self.reader)? {
                Message::Video { index, bytes } if index == expected => out.push((index, bytes)),
                Message::Video { index, .. } => {
                    return Err(Error::Protocol(format!("expected video {expected}, got {index}")));
                }
                Message::Err { code, text } => return Err(Error::Remote { code, message: text }),
                other => return Err(Error::Protocol(format!("expected VIDEO, got type {}", other.kind()))),
            }
        }
        Ok(out)
    }

    pub fn get(&mut self, start: u64, count: u32) -> Result<Vec<(u64, VideoTensor)>> {
        self.get_raw(start, count)?.into_iter().map(|(i, b)| Ok((i, decode_video(&b)?))).collect()
    }

    /// Videos of `shard`, in shard order, starting from its `k`-th index.
    pub fn shard(&mut self, shard: ShardSpec, k: u64) -> ShardStream<'_> {
        ShardStream { client: self, shard, k }
    }

    pub fn bye(mut self) -> Result<()> {
        write_message(&mut self.writer, &Message::Bye)
    }
}

fn receive(reader: &mut BufReader<TcpStream>) -> Result<Message> {
    match read_message(reader, MAX_BODY_LEN)? {
        Received::Message(m) => Ok(m),
        Received::Invalid(e) => Err(e.into()),
        Received::Closed => Err(Error::Protocol("server closed the connection".into())),
    }
}

pub struct ShardStream<'a> {
    client: &'a mut Client,
    shard: ShardSpec,
    k: u64,
}

impl Iterator for ShardStream<'_> {
    type Item = Result<(u64, VideoTensor)>;

    fn next(&mut self) -> Option<Self::Item> {
        let index = shard_indices(self.shard, self.k);
        self.k += 1;
        Some(self.client.get(index, 1).map(|mut v| v.remove(0)))
    }
}
