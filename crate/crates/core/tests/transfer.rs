use std::fs;
use std::io::Read;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::path::Path;
use std::thread;
use std::time::Duration;

use rand::RngCore;
use sha2::{Digest, Sha256};
use stegosonic_core::transfer::wire::{self, Offer, Reply, ResultStatus};
use stegosonic_core::transfer::{
    receive_daemon, send_file, AutoAccept, AutoReject, Decision, ReceiverConfig, SenderConfig,
    SessionState, TransferError,
};
use tempfile::TempDir;

fn loopback() -> SocketAddr {
    "127.0.0.1:0".parse().unwrap()
}

fn random_file(dir: &Path, name: &str, len: usize) -> Vec<u8> {
    let mut bytes = vec![0u8; len];
    rand::rng().fill_bytes(&mut bytes);
    fs::write(dir.join(name), &bytes).unwrap();
    bytes
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn one_mebibyte_loopback() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    let bytes = random_file(src.path(), "song.wav", 1 << 20);
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();

    let report = send_file(rx.local_addr(), &src.path().join("song.wav"), &SenderConfig::default()).unwrap();
    assert_eq!(report.session.state(), SessionState::Complete);
    assert_eq!(report.session.bytes_moved, 1 << 20);
    assert_eq!(fs::read(dst.path().join("song.wav")).unwrap(), bytes);

    let sessions = rx.sessions();
    assert_eq!(sessions.len(), 1);
    assert_eq!(sessions[0].state(), SessionState::Complete);
    assert_eq!(sessions[0].data_port, report.session.data_port);
    rx.shutdown();
}

#[test]
fn rejected_offer_sends_nothing() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    random_file(src.path(), "secret.wav", 4096);
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoReject).unwrap();
    let err = send_file(rx.local_addr(), &src.path().join("secret.wav"), &SenderConfig::default()).unwrap_err();
    assert!(matches!(err, TransferError::OfferRejected), "{err}");
    let sessions = rx.sessions();
    assert_eq!(sessions.len(), 1);
    assert_eq!(sessions[0].state(), SessionState::Rejected);
    assert_eq!(sessions[0].bytes_moved, 0);
    assert!(files_in(dst.path()).is_empty());
    rx.shutdown();
}

/// A hand-rolled receiver that rejects and counts every byte the sender emits.
#[test]
fn reject_byte_accounting() {
    let src = TempDir::new().unwrap();
    random_file(src.path(), "a.wav", 100_000);
    let listener = TcpListener::bind(loopback()).unwrap();
    let addr = listener.local_addr().unwrap();
    let harness = thread::spawn(move || {
        let (mut conn, _) = listener.accept().unwrap();
        let body = wire::read_record(&mut conn).unwrap();
        let offer = Offer::decode(&body).unwrap();
        wire::write_record(&mut conn, &Reply::Reject { offer_id: offer.offer_id }.encode()).unwrap();
        let mut rest = Vec::new();
        conn.read_to_end(&mut rest).unwrap();
        (4 + body.len(), rest.len(), offer)
    });
    let err = send_file(addr, &src.path().join("a.wav"), &SenderConfig::default()).unwrap_err();
    assert!(matches!(err, TransferError::OfferRejected));
    let (offer_bytes, extra, offer) = harness.join().unwrap();
    assert_eq!(offer_bytes, 4 + 1 + 8 + 2 + "a.wav".len() + 8 + 32);
    assert_eq!(extra, 0);
    assert_eq!(offer.file_size, 100_000);
}

#[test]
fn concurrent_sends_use_distinct_ports() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    let a = random_file(src.path(), "a.wav", 300_000);
    let b = random_file(src.path(), "b.wav", 500_000);
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let addr = rx.local_addr();
    let handles: Vec<_> = ["a.wav", "b.wav"]
        .into_iter()
        .map(|name| {
            let path = src.path().join(name);
            thread::spawn(move || send_file(addr, &path, &SenderConfig::default()).unwrap())
        })
        .collect();
    let reports: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert_ne!(reports[0].session.data_port, reports[1].session.data_port);
    assert_eq!(fs::read(dst.path().join("a.wav")).unwrap(), a);
    assert_eq!(fs::read(dst.path().join("b.wav")).unwrap(), b);
    rx.shutdown();
}

/// Offers the digest of `good` but streams `sent`.
fn tampering_sender(addr: SocketAddr, name: &str, good: &[u8], sent: &[u8]) -> ResultStatus {
    let offer = Offer {
        offer_id: [7; 8],
        file_name: name.into(),
        file_size: good.len() as u64,
        digest: Sha256::digest(good).into(),
    };
    let mut control = TcpStream::connect(addr).unwrap();
    wire::write_record(&mut control, &offer.encode()).unwrap();
    let port = match Reply::decode(&wire::read_record(&mut control).unwrap()).unwrap() {
        Reply::Accept { data_port, .. } => data_port,
        other => panic!("{other:?}"),
    };
    let mut data = TcpStream::connect((addr.ip(), port)).unwrap();
    for chunk in sent.chunks(10_000) {
        wire::write_chunk(&mut data, chunk).unwrap();
    }
    wire::write_end(&mut data).unwrap();
    match Reply::decode(&wire::read_record(&mut control).unwrap()).unwrap() {
        Reply::Result { status, .. } => status,
        other => panic!("{other:?}"),
    }
}

#[test]
fn flipped_byte_is_detected_and_discarded() {
    let dst = TempDir::new().unwrap();
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let good: Vec<u8> = (0..50_000u32).map(|i| (i % 251) as u8).collect();
    let mut bad = good.clone();
    bad[25_000] ^= 0x04;
    assert_eq!(tampering_sender(rx.local_addr(), "x.wav", &good, &bad), ResultStatus::ChecksumMismatch);
    assert!(files_in(dst.path()).is_empty());
    let sessions = rx.sessions();
    assert_eq!(sessions[0].state(), SessionState::Failed);

    // a clean session right after is unaffected
    assert_eq!(tampering_sender(rx.local_addr(), "x.wav", &good, &good), ResultStatus::Complete);
    assert_eq!(fs::read(dst.path().join("x.wav")).unwrap(), good);
    rx.shutdown();
}

#[test]
fn failing_session_does_not_disturb_concurrent_one() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    let big = random_file(src.path(), "big.wav", 2 << 20);
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let addr = rx.local_addr();
    let path = src.path().join("big.wav");
    let good = thread::spawn(move || send_file(addr, &path, &SenderConfig::default()).unwrap());
    let bad = thread::spawn(move || tampering_sender(addr, "evil.wav", b"expected", b"tampered"));
    assert_eq!(bad.join().unwrap(), ResultStatus::ChecksumMismatch);
    assert_eq!(good.join().unwrap().session.state(), SessionState::Complete);
    assert_eq!(files_in(dst.path()), ["big.wav"]);
    assert_eq!(fs::read(dst.path().join("big.wav")).unwrap(), big);
    rx.shutdown();
}

#[test]
fn empty_file() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    fs::write(src.path().join("empty.wav"), b"").unwrap();
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let report = send_file(rx.local_addr(), &src.path().join("empty.wav"), &SenderConfig::default()).unwrap();
    assert_eq!(report.session.state(), SessionState::Complete);
    assert_eq!(fs::read(dst.path().join("empty.wav")).unwrap(), b"");
    rx.shutdown();
}

#[test]
fn existing_name_gets_suffix() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    fs::write(dst.path().join("s.wav"), b"old").unwrap();
    let bytes = random_file(src.path(), "s.wav", 1000);
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    send_file(rx.local_addr(), &src.path().join("s.wav"), &SenderConfig::default()).unwrap();
    assert_eq!(fs::read(dst.path().join("s.wav")).unwrap(), b"old");
    assert_eq!(fs::read(dst.path().join("s.wav.1")).unwrap(), bytes);
    rx.shutdown();
}

#[test]
fn decision_callback_sees_offer() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    random_file(src.path(), "only-small.wav", 10);
    random_file(src.path(), "too-big.wav", 10_000);
    let policy = |offer: &Offer, _: SocketAddr| {
        if offer.file_size < 100 {
            Decision::Accept
        } else {
            Decision::Reject
        }
    };
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), policy).unwrap();
    let events = rx.subscribe();
    assert!(send_file(rx.local_addr(), &src.path().join("only-small.wav"), &SenderConfig::default()).is_ok());
    assert!(matches!(
        send_file(rx.local_addr(), &src.path().join("too-big.wav"), &SenderConfig::default()),
        Err(TransferError::OfferRejected)
    ));
    let first = events.recv_timeout(Duration::from_secs(5)).unwrap();
    let second = events.recv_timeout(Duration::from_secs(5)).unwrap();
    assert_eq!(first.state(), SessionState::Complete);
    assert_eq!(second.state(), SessionState::Rejected);
    rx.shutdown();
}

#[test]
fn slow_decision_times_out() {
    let src = TempDir::new().unwrap();
    let dst = TempDir::new().unwrap();
    random_file(src.path(), "a.wav", 10);
    let slow = |_: &Offer, _: SocketAddr| {
        thread::sleep(Duration::from_millis(600));
        Decision::Reject
    };
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), slow).unwrap();
    let config = SenderConfig {
        decision_timeout: Duration::from_millis(150),
        ..SenderConfig::default()
    };
    let err = send_file(rx.local_addr(), &src.path().join("a.wav"), &config).unwrap_err();
    assert!(matches!(err, TransferError::Timeout(_)), "{err}");
    rx.shutdown();
}

#[test]
fn refused_and_port_in_use() {
    let src = TempDir::new().unwrap();
    random_file(src.path(), "a.wav", 10);
    let free = TcpListener::bind(loopback()).unwrap().local_addr().unwrap();
    let err = send_file(free, &src.path().join("a.wav"), &SenderConfig::default()).unwrap_err();
    assert!(matches!(err, TransferError::ConnectionRefused(_)), "{err}");

    let dst = TempDir::new().unwrap();
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let clash = receive_daemon(ReceiverConfig::new(rx.local_addr(), dst.path()), AutoAccept);
    assert!(matches!(clash, Err(TransferError::PortInUse(_))));
    rx.shutdown();
}

#[test]
fn unsafe_names_are_rejected() {
    let dst = TempDir::new().unwrap();
    let rx = receive_daemon(ReceiverConfig::new(loopback(), dst.path()), AutoAccept).unwrap();
    let offer = Offer {
        offer_id: [1; 8],
        file_name: "../escape.wav".into(),
        file_size: 1,
        digest: [0; 32],
    };
    let mut control = TcpStream::connect(rx.local_addr()).unwrap();
    wire::write_record(&mut control, &offer.encode()).unwrap();
    let reply = Reply::decode(&wire::read_record(&mut control).unwrap()).unwrap();
    assert_eq!(reply, Reply::Reject { offer_id: [1; 8] });
    rx.shutdown();
}
