//! Thread-per-connection TCP server over a shared [`Generator`].

use std::io::{BufReader, BufWriter};
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crate::error::Result;
use crate::generate::Generator;
use crate::io::container::encode_video;
use crate::par;
use crate::stream::protocol::{read_message, write_message, ErrorCode, Message, Received, PROTOCOL_VERSION};

/// Client messages are tiny; anything longer is malformed.
const MAX_CLIENT_BODY: u32 = 4096;

pub struct Server {
    listener: TcpListener,
    generator: Arc<Generator>,
    max_batch: u32,
    shutdown: Arc<AtomicBool>,
}

#[derive(Debug, Clone)]
pub struct ShutdownHandle {
    flag: Arc<AtomicBool>,
    addr: SocketAddr,
}

impl ShutdownHandle {
    /// Stops accepting connections. Open connections run until their client leaves.
    pub fn shutdown(&self) {
        self.flag.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
    }
}

/// A server running on a background thread.
pub struct RunningServer {
    addr: SocketAddr,
    handle: ShutdownHandle,
    thread: JoinHandle<Result<()>>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stop(self) -> Result<()> {
        self.handle.shutdown();
        self.thread.join().expect("server thread panicked")
    }
}

impl Server {
    pub fn bind(generator: Generator, addr: impl ToSocketAddrs, max_batch: u32) -> Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
            generator: Arc::new(generator),
            max_batch,
            shutdown: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    pub fn shutdown_handle(&self) -> Result<ShutdownHandle> {
        let mut addr = self.local_addr()?;
        if addr.ip().is_unspecified() {
            addr.set_ip(match addr.ip() {
                IpAddr::V4(_) => IpAddr::V4(Ipv4Addr::LOCALHOST),
                IpAddr::V6(_) => IpAddr::V6(Ipv6Addr::LOCALHOST),
            });
        }
        Ok(ShutdownHandle { flag: self.shutdown.clone(), addr })
    }

    /// Accepts connections until shut down.
    pub fn run(self) -> Result<()> {
        for stream in self.listener.incoming() {
            if self.shutdown.load(Ordering::SeqCst) {
                break;
            }
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let generator = self.generator.clone();
            let max_batch = self.max_batch;
            thread::spawn(move || {
                let peer = stream.peer_addr().ok();
                if let Err(e) = serve_connection(stream, &generator, max_batch) {
                    log::debug!("connection {peer:?} ended: {e}");
                }
            });
        }
        Ok(())
    }

    pub fn spawn(self) -> Result<RunningServer> {
        let addr = self.local_addr()?;
        let handle = self.shutdown_handle()?;
        let thread = thread::spawn(move || self.run());
        Ok(RunningServer { addr, handle, thread })
    }
}

fn serve_connection(stream: TcpStream, generator: &Generator, max_batch: u32) -> Result<()> {
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    let fail = |w: &mut BufWriter<TcpStream>, code: ErrorCode, text: String| write_message(w, &Message::error(code, text));

    match read_message(&mut reader, MAX_CLIENT_BODY)? {
        Received::Closed => return Ok(()),
        Received::Invalid(e) => return fail(&mut writer, e.code, e.reason),
        Received::Message(Message::Hello { config_hash, version }) => {
            if version != PROTOCOL_VERSION {
                let text = format!("protocol version {version} unsupported, server speaks {PROTOCOL_VERSION}");
                return fail(&mut writer, ErrorCode::VersionMismatch, text);
            }
            let cfg = generator.config();
            if config_hash != cfg.hash() {
                let text = format!("config hash mismatch: server has {}", cfg.hash_hex());
                return fail(&mut writer, ErrorCode::ConfigMismatch, text);
            }
            write_message(&mut writer, &Message::HelloAck { config_json: cfg.to_json_pretty() })?;
        }
        Received::Message(other) => {
            return fail(&mut writer, ErrorCode::Malformed, format!("expected HELLO, got type {}", other.kind()));
        }
    }

    loop {
        match read_message(&mut reader, MAX_CLIENT_BODY)? {
            Received::Closed | Received::Message(Message::Bye) => return Ok(()),
            Received::Invalid(e) => return fail(&mut writer, e.code, e.reason),
            Received::Message(Message::Get { start, count }) => {
                if count > max_batch {
                    fail(&mut writer, ErrorCode::BatchTooLarge, format!("count {count} exceeds max batch {max_batch}"))?;
                    continue;
                }
                let Some(end) = start.checked_add(count as u64) else {
                    return fail(&mut writer, ErrorCode::Malformed, "index range overflows".into());
                };
                let videos = par::map_range(generator.execution(), start..end, |i| generator.video(i).map(|v| encode_video(&v)));
                for (index, video) in (start..end).zip(videos) {
                    match video {
                        Ok(bytes) => write_message(&mut writer, &Message::Video { index, bytes })?,
                        Err(e) => return fail(&mut writer, ErrorCode::GenerationFailed, format!("video {index}: {e}")),
                    }
                }
            }
            Received::Message(other) => {
                return fail(&mut writer, ErrorCode::Malformed, format!("unexpected message type {}", other.kind()));
            }
        }
    }
}
