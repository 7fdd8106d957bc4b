use std::fs;
use std::io::{self, Write};
use std::net::{IpAddr, Ipv4Addr, Ipv6Addr, SocketAddr, TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use super::session::{SessionState, TransferSession};
use super::wire::{self, Offer, Reply, ResultStatus};
use super::{TransferError, DEFAULT_CONTROL_PORT, DIR_ENV};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Reject,
}

/// Answers accept/reject for each incoming offer. Calls are serialized.
pub trait DecisionSource: Send + 'static {
    fn decide(&mut self, offer: &Offer, peer: SocketAddr) -> Decision;
}

impl<F> DecisionSource for F
where
    F: FnMut(&Offer, SocketAddr) -> Decision + Send + 'static,
{
    fn decide(&mut self, offer: &Offer, peer: SocketAddr) -> Decision {
        self(offer, peer)
    }
}

pub struct AutoAccept;

impl DecisionSource for AutoAccept {
    fn decide(&mut self, _: &Offer, _: SocketAddr) -> Decision {
        Decision::Accept
    }
}

pub struct AutoReject;

impl DecisionSource for AutoReject {
    fn decide(&mut self, _: &Offer, _: SocketAddr) -> Decision {
        Decision::Reject
    }
}

#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    pub bind: SocketAddr,
    pub download_dir: PathBuf,
    /// How long an accepted offer waits for the sender's data connection.
    pub data_accept_timeout: Duration,
    pub io_timeout: Duration,
}

impl ReceiverConfig {
    pub fn new(bind: SocketAddr, download_dir: impl Into<PathBuf>) -> Self {
        ReceiverConfig {
            bind,
            download_dir: download_dir.into(),
            data_accept_timeout: Duration::from_secs(30),
            io_timeout: Duration::from_secs(30),
        }
    }

    /// All interfaces on `port`, downloads into `STEGOSONIC_DIR` or the
    /// current directory.
    pub fn from_env(port: Option<u16>) -> Self {
        let port = port.unwrap_or_else(super::control_port_from_env);
        let dir = std::env::var_os(DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        Self::new(SocketAddr::new(IpAddr::V4(Ipv4Addr::UNSPECIFIED), port), dir)
    }
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self::new(
            SocketAddr::new(IpAddr::V4(Ipv4Addr::UNSPECIFIED), DEFAULT_CONTROL_PORT),
            ".",
        )
    }
}

struct Shared {
    config: ReceiverConfig,
    local_addr: SocketAddr,
    stop: AtomicBool,
    decision: Mutex<Box<dyn DecisionSource>>,
    sessions: Mutex<Vec<TransferSession>>,
    subscribers: Mutex<Vec<mpsc::Sender<TransferSession>>>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

impl Shared {
    fn record(&self, session: TransferSession) {
        log::info!(
            "session {} for {:?}: {}",
            hex_id(&session.offer.offer_id),
            session.offer.file_name,
            session.state()
        );
        self.subscribers
            .lock()
            .unwrap()
            .retain(|tx| tx.send(session.clone()).is_ok());
        self.sessions.lock().unwrap().push(session);
    }
}

fn hex_id(id: &[u8]) -> String {
    id.iter().map(|b| format!("{b:02x}")).collect()
}

/// A running receive daemon. Dropping the handle leaves it running; call
/// [`ReceiverHandle::shutdown`] to stop it.
pub struct ReceiverHandle {
    shared: Arc<Shared>,
    acceptor: Option<JoinHandle<()>>,
}

impl ReceiverHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.shared.local_addr
    }

    /// Sessions that have reached a terminal state, in completion order.
    pub fn sessions(&self) -> Vec<TransferSession> {
        self.shared.sessions.lock().unwrap().clone()
    }

    /// Streams every session as it reaches a terminal state.
    pub fn subscribe(&self) -> mpsc::Receiver<TransferSession> {
        let (tx, rx) = mpsc::channel();
        self.shared.subscribers.lock().unwrap().push(tx);
        rx
    }

    /// Blocks until the daemon stops.
    pub fn wait(mut self) {
        if let Some(acceptor) = self.acceptor.take() {
            let _ = acceptor.join();
        }
    }

    /// Stops accepting offers and waits for in-flight sessions to finish.
    pub fn shutdown(mut self) {
        self.shared.stop.store(true, Ordering::SeqCst);
        let wake = match self.shared.local_addr.ip() {
            IpAddr::V4(ip) if ip.is_unspecified() => {
                SocketAddr::new(Ipv4Addr::LOCALHOST.into(), self.shared.local_addr.port())
            }
            IpAddr::V6(ip) if ip.is_unspecified() => {
                SocketAddr::new(Ipv6Addr::LOCALHOST.into(), self.shared.local_addr.port())
            }
            _ => self.shared.local_addr,
        };
        let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
        if let Some(acceptor) = self.acceptor.take() {
            let _ = acceptor.join();
        }
        let workers = std::mem::take(&mut *self.shared.workers.lock().unwrap());
        for w in workers {
            let _ = w.join();
        }
    }
}

/// Binds the control port and serves offers on a background thread.
pub fn receive_daemon<D: DecisionSource>(
    config: ReceiverConfig,
    decision: D,
) -> Result<ReceiverHandle, TransferError> {
    fs::create_dir_all(&config.download_dir)?;
    let listener = TcpListener::bind(config.bind).map_err(|e| match e.kind() {
        io::ErrorKind::AddrInUse => TransferError::PortInUse(config.bind),
        _ => TransferError::Io(e),
    })?;
    let shared = Arc::new(Shared {
        local_addr: listener.local_addr()?,
        config,
        stop: AtomicBool::new(false),
        decision: Mutex::new(Box::new(decision)),
        sessions: Mutex::new(Vec::new()),
        subscribers: Mutex::new(Vec::new()),
        workers: Mutex::new(Vec::new()),
    });

    let acceptor = {
        let shared = Arc::clone(&shared);
        thread::Builder::new()
            .name("stegosonic-recv".into())
            .spawn(move || accept_loop(listener, shared))?
    };
    Ok(ReceiverHandle {
        shared,
        acceptor: Some(acceptor),
    })
}

fn accept_loop(listener: TcpListener, shared: Arc<Shared>) {
    for conn in listener.incoming() {
        if shared.stop.load(Ordering::SeqCst) {
            break;
        }
        let stream = match conn {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let worker_shared = Arc::clone(&shared);
        let spawned = thread::Builder::new()
            .name("stegosonic-session".into())
            .spawn(move || {
                if let Err(e) = serve(&worker_shared, stream) {
                    log::warn!("session ended with error: {e}");
                }
            });
        match spawned {
            Ok(handle) => {
                let mut workers = shared.workers.lock().unwrap();
                workers.retain(|w| !w.is_finished());
                workers.push(handle);
            }
            Err(e) => log::error!("could not spawn session thread: {e}"),
        }
    }
}

fn serve(shared: &Shared, mut control: TcpStream) -> Result<(), TransferError> {
    let peer = control.peer_addr()?;
    let config = &shared.config;
    control.set_read_timeout(Some(config.io_timeout))?;
    control.set_write_timeout(Some(config.io_timeout))?;

    let offer = Offer::decode(&wire::read_record(&mut control)?)?;
    let offer_id = offer.offer_id;
    let mut session = TransferSession::new(offer);

    let decision = if wire::valid_file_name(&session.offer.file_name) {
        shared.decision.lock().unwrap().decide(&session.offer, peer)
    } else {
        log::warn!("rejecting offer with unsafe name {:?}", session.offer.file_name);
        Decision::Reject
    };
    if decision == Decision::Reject {
        wire::write_record(&mut control, &Reply::Reject { offer_id }.encode())?;
        session.advance(SessionState::Rejected)?;
        shared.record(session);
        return Ok(());
    }

    let data_listener = TcpListener::bind(SocketAddr::new(control.local_addr()?.ip(), 0))?;
    let data_port = data_listener.local_addr()?.port();
    session.advance(SessionState::Accepted)?;
    session.data_port = Some(data_port);
    wire::write_record(&mut control, &Reply::Accept { offer_id, data_port }.encode())?;

    let data = match accept_data(&data_listener, peer.ip(), config.data_accept_timeout) {
        Ok(d) => d,
        Err(e) => {
            session.fail(format!("no data connection: {e}"));
            shared.record(session);
            return Err(e);
        }
    };
    drop(data_listener);
    session.advance(SessionState::Streaming)?;

    let status = match receive_stream(config, data, &mut session) {
        Ok(status) => status,
        Err(e) => {
            session.fail(e.to_string());
            ResultStatus::Failed
        }
    };
    shared.record(session);
    wire::write_record(&mut control, &Reply::Result { offer_id, status }.encode())?;
    Ok(())
}

fn accept_data(
    listener: &TcpListener,
    peer_ip: IpAddr,
    timeout: Duration,
) -> Result<TcpStream, TransferError> {
    listener.set_nonblocking(true)?;
    let deadline = Instant::now() + timeout;
    loop {
        match listener.accept() {
            Ok((stream, from)) if from.ip() == peer_ip => {
                stream.set_nonblocking(false)?;
                return Ok(stream);
            }
            Ok((_, from)) => log::warn!("ignoring data connection from unexpected peer {from}"),
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => {}
            Err(e) => return Err(e.into()),
        }
        if Instant::now() >= deadline {
            return Err(TransferError::Timeout("the data connection"));
        }
        thread::sleep(Duration::from_millis(2));
    }
}

/// Streams into a temporary file beside the destination and renames it into
/// place only after the digest matches.
fn receive_stream(
    config: &ReceiverConfig,
    mut data: TcpStream,
    session: &mut TransferSession,
) -> Result<ResultStatus, TransferError> {
    data.set_read_timeout(Some(config.io_timeout))?;
    let mut tmp = NamedTempFile::new_in(&config.download_dir)?;
    let mut hasher = Sha256::new();
    let mut chunk = Vec::new();
    loop {
        wire::read_chunk(&mut data, &mut chunk)?;
        if chunk.is_empty() {
            break;
        }
        session.bytes_moved += chunk.len() as u64;
        if session.bytes_moved > session.offer.file_size {
            return Err(TransferError::Protocol("sender exceeded the offered size".into()));
        }
        hasher.update(&chunk);
        tmp.write_all(&chunk).map_err(storage_error)?;
    }
    tmp.flush().map_err(storage_error)?;

    let digest: [u8; 32] = hasher.finalize().into();
    if session.bytes_moved != session.offer.file_size || digest != session.offer.digest {
        session.fail("checksum mismatch");
        return Ok(ResultStatus::ChecksumMismatch);
    }
    persist(tmp, &config.download_dir, &session.offer.file_name)?;
    session.advance(SessionState::Complete)?;
    Ok(ResultStatus::Complete)
}

fn storage_error(e: io::Error) -> TransferError {
    if e.kind() == io::ErrorKind::StorageFull {
        TransferError::DiskFull
    } else {
        TransferError::Io(e)
    }
}

/// Moves the finished file to `dir/name`, or `dir/name.N` if taken.
fn persist(mut tmp: NamedTempFile, dir: &Path, name: &str) -> Result<PathBuf, TransferError> {
    for n in 0..10_000u32 {
        let target = if n == 0 {
            dir.join(name)
        } else {
            dir.join(format!("{name}.{n}"))
        };
        match tmp.persist_noclobber(&target) {
            Ok(_) => return Ok(target),
            Err(e) if e.error.kind() == io::ErrorKind::AlreadyExists => tmp = e.file,
            Err(e) => return Err(e.error.into()),
        }
    }
    Err(TransferError::Protocol(format!("no free file name for {name:?}")))
}
