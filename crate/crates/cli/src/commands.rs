use std::fs;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::Path;

use serde::Serialize;
use stegosonic_core::payload::{text_to_utf16le, utf16le_to_text};
use stegosonic_core::transfer::{
    receive_daemon, send_file, AutoAccept, Decision, Offer, ReceiverConfig, SenderConfig,
    TransferSession,
};
use stegosonic_core::{
    capacity_report, compare_files, distortion, embed_injection, embed_lsb, embed_mp3,
    extract_injection, extract_lsb, extract_mp3, open, parse_mp3, parse_wav, remove_injection,
    remove_message, seal, write_mp3, write_wav, CapacityReport, CompressionLevel, Error, Method,
    Mp3EmbedConfig, PayloadKind, SealedPayload,
};
use tempfile::NamedTempFile;

use crate::args::{
    CapacityArgs, Command, CompareArgs, DecodeArgs, DistortionArgs, EncodeArgs, MethodArg,
    PasswordArg, RecvArgs, RemovableMethod, RemoveArgs, SendArgs, PASSWORD_ENV,
};
use crate::CliError;

type CliResult<T = ()> = Result<T, CliError>;

pub fn run(command: Command) -> CliResult {
    match command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Remove(a) => remove(a),
        Command::Capacity(a) => capacity(a),
        Command::Compare(a) => compare(a),
        Command::Distortion(a) => distortion_cmd(a),
        Command::Send(a) => send(a),
        Command::Recv(a) => recv(a),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Io(path.to_owned(), e))
}

/// Writes via a temp file in the destination directory, so a failed run
/// never leaves a partial output behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult {
    let io_err = |e: io::Error| CliError::Io(path.to_owned(), e);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn size(n: u64) -> String {
    format!("{n} bytes ({:.3} MB)", n as f64 / 1e6)
}

fn password(arg: PasswordArg, confirm: bool) -> CliResult<String> {
    if let Some(pw) = arg.password {
        return Ok(pw);
    }
    let no_tty = |_| {
        CliError::Usage(format!(
            "no password given; set {PASSWORD_ENV} or run from a terminal"
        ))
    };
    let pw = rpassword::prompt_password("Password: ").map_err(no_tty)?;
    if confirm {
        let again = rpassword::prompt_password("Confirm password: ").map_err(no_tty)?;
        if again != pw {
            return Err(CliError::Usage("passwords do not match".into()));
        }
    }
    Ok(pw)
}

fn ask(prompt: &str) -> bool {
    eprint!("{prompt} [y/N] ");
    let _ = io::stderr().flush();
    let mut line = String::new();
    if io::stdin().lock().read_line(&mut line).is_err() {
        return false;
    }
    matches!(line.trim().to_ascii_lowercase().as_str(), "y" | "yes")
}

fn describe_carrier(method: MethodArg, bytes: &[u8]) -> CliResult {
    match method {
        MethodArg::Lsb | MethodArg::Inject => {
            let wav = parse_wav(bytes.to_vec())?;
            let f = wav.format();
            eprintln!(
                "carrier: WAV, {} ch, {} Hz, {}-bit, {} of sample data",
                f.num_channels,
                f.sample_rate,
                f.bits_per_sample,
                size(wav.data().len() as u64)
            );
            for note in f.diagnostics() {
                eprintln!("note: {note}");
            }
        }
        MethodArg::Mp3 => {
            let stream = parse_mp3(bytes.to_vec())?;
            let first = &stream.frames()[0].header;
            eprintln!(
                "carrier: MP3, {} frames, {} kbps, {} Hz",
                stream.frames().len(),
                first.bitrate_kbps,
                first.sample_rate
            );
            for w in stream.warnings() {
                eprintln!("warning: {w:?}");
            }
        }
    }
    Ok(())
}

fn print_capacity(report: &CapacityReport) {
    if report.unbounded {
        eprintln!(
            "capacity ({}): no carrier limit, output grows by the sealed size plus 5 bytes",
            report.method
        );
    } else {
        eprintln!(
            "capacity ({}): {} sealed, about {} of plaintext after {} bytes of envelope",
            report.method,
            size(report.max_sealed_bytes),
            size(report.estimated_max_plaintext_bytes),
            report.envelope_overhead_bytes
        );
    }
}

fn load_payload(a: &EncodeArgs) -> CliResult<(Vec<u8>, PayloadKind, String)> {
    if let Some(text) = &a.text {
        return Ok((text_to_utf16le(text), PayloadKind::Text, format!("{}-char text message", text.chars().count())));
    }
    let path = a.payload.as_deref().expect("clap enforces --payload or --text");
    let bytes = read(path)?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let label = path.display().to_string();
    let (bytes, kind) = match ext.as_str() {
        "txt" => match String::from_utf8(bytes) {
            Ok(text) => (text_to_utf16le(&text), PayloadKind::Text),
            Err(e) => {
                eprintln!("note: {label} is not UTF-8, hiding it as raw bytes");
                (e.into_bytes(), PayloadKind::Raw)
            }
        },
        "pdf" => (bytes, PayloadKind::Pdf),
        "doc" | "docx" => (bytes, PayloadKind::Doc),
        _ => (bytes, PayloadKind::Raw),
    };
    Ok((bytes, kind, label))
}

fn encode(a: EncodeArgs) -> CliResult {
    let carrier = read(&a.input)?;
    let level = CompressionLevel::from(a.compress);
    let mp3 = Mp3EmbedConfig { skip: a.skip.skip };
    describe_carrier(a.method, &carrier)?;
    let report = capacity_report(&carrier, a.method.capacity_method(a.compress), &mp3)?;
    print_capacity(&report);

    let (plaintext, kind, label) = load_payload(&a)?;
    if a.method == MethodArg::Mp3 && kind != PayloadKind::Text {
        return Err(Error::NotTextPayload.into());
    }
    eprintln!("payload: {label}, {} as {kind}", size(plaintext.len() as u64));
    let pw = password(a.password, true)?;
    let sealed = seal(&plaintext, &pw, level, kind)?;
    eprintln!("sealed: {} ({level} compression)", size(sealed.len() as u64));

    let out = match a.method {
        MethodArg::Lsb => write_wav(&embed_lsb(&parse_wav(carrier.clone())?, &sealed, level.is_compressed())?),
        MethodArg::Inject => embed_injection(&parse_wav(carrier.clone())?, &sealed)?,
        MethodArg::Mp3 => write_mp3(&embed_mp3(&parse_mp3(carrier.clone())?, &sealed, &mp3)?),
    };
    write_atomic(&a.out, &out)?;
    println!(
        "encoded {label} into {}: {} (carrier was {})",
        a.out.display(),
        size(out.len() as u64),
        size(carrier.len() as u64)
    );
    Ok(())
}

fn extract(method: MethodArg, carrier: Vec<u8>, skip: usize) -> CliResult<SealedPayload> {
    Ok(match method {
        MethodArg::Lsb => extract_lsb(&parse_wav(carrier)?)?,
        MethodArg::Inject => extract_injection(&carrier)?,
        MethodArg::Mp3 => extract_mp3(&parse_mp3(carrier)?, &Mp3EmbedConfig { skip })?,
    })
}

fn decode(a: DecodeArgs) -> CliResult {
    let carrier = read(&a.input)?;
    describe_carrier(a.method, &carrier)?;
    let sealed = extract(a.method, carrier, a.skip.skip)?;
    eprintln!(
        "found sealed payload: {} ({}, {} compression)",
        size(sealed.len() as u64),
        sealed.kind(),
        sealed.level()
    );
    let pw = password(a.password, false)?;
    let plaintext = open(&sealed, &pw)?;
    let bytes = match sealed.kind() {
        PayloadKind::Text => utf16le_to_text(&plaintext)?.into_bytes(),
        _ => plaintext,
    };
    write_atomic(&a.out, &bytes)?;
    println!("recovered {} of {} to {}", size(bytes.len() as u64), sealed.kind(), a.out.display());
    Ok(())
}

fn remove(a: RemoveArgs) -> CliResult {
    let carrier = read(&a.input)?;
    let method = match a.method {
        RemovableMethod::Lsb => MethodArg::Lsb,
        RemovableMethod::Inject => MethodArg::Inject,
    };
    describe_carrier(method, &carrier)?;
    let found = extract(method, carrier.clone(), 0)?.len();
    eprintln!("found hidden payload: {}", size(found as u64));
    if !a.yes && !ask(&format!("Remove it and write {}?", a.out.display())) {
        return Err(CliError::Declined);
    }
    let out = match a.method {
        RemovableMethod::Lsb => write_wav(&remove_message(&parse_wav(carrier)?)?),
        RemovableMethod::Inject => remove_injection(&carrier)?,
    };
    write_atomic(&a.out, &out)?;
    println!("removed {}; wrote {} ({})", size(found as u64), a.out.display(), size(out.len() as u64));
    Ok(())
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn capacity(a: CapacityArgs) -> CliResult {
    let carrier = read(&a.input)?;
    let method = a.method.capacity_method(a.compress);
    let report = capacity_report(&carrier, method, &Mp3EmbedConfig { skip: a.skip.skip })?;
    if a.json {
        print_json(&report);
        return Ok(());
    }
    describe_carrier(a.method, &carrier)?;
    println!("method            {}", report.method);
    println!("carrier           {}", size(report.carrier_bytes));
    if report.unbounded {
        println!("max sealed        unbounded (32-bit length field)");
    } else {
        println!("max sealed        {}", size(report.max_sealed_bytes));
        println!("max plaintext     ~{}", size(report.estimated_max_plaintext_bytes));
        let share = report.max_sealed_bytes as f64 / report.carrier_bytes.max(1) as f64;
        println!("share of carrier  {:.2}%", share * 100.0);
    }
    println!("envelope overhead {} bytes", report.envelope_overhead_bytes);
    if method == Method::LsbSparse {
        println!("layout            sparse (uncompressed payloads)");
    }
    Ok(())
}

fn compare(a: CompareArgs) -> CliResult {
    let (x, y) = (read(&a.a)?, read(&a.b)?);
    eprintln!("comparing {} with {}", size(x.len() as u64), size(y.len() as u64));
    let r = compare_files(&x, &y);
    if a.json {
        print_json(&r);
    } else if r.identical {
        println!("identical ({})", size(r.len_a));
    } else {
        println!(
            "differ: first at offset {}, {} bytes and {} bits differ (lengths {} and {})",
            r.first_diff_offset.unwrap_or_default(),
            r.differing_byte_count,
            r.differing_bit_count,
            r.len_a,
            r.len_b
        );
    }
    Ok(())
}

fn distortion_cmd(a: DistortionArgs) -> CliResult {
    let original = parse_wav(read(&a.original)?)?;
    let encoded = parse_wav(read(&a.encoded)?)?;
    let r = distortion(&original, &encoded)?;
    if a.json {
        print_json(&r);
    } else {
        println!("samples            {}", r.samples);
        println!("max sample delta   {}", r.max_sample_delta);
        println!("rms delta          {:.6}", r.rms_delta);
        println!("modified samples   {:.4}%", r.modified_sample_fraction * 100.0);
    }
    Ok(())
}

fn send(a: SendArgs) -> CliResult {
    let len = fs::metadata(&a.file).map_err(|e| CliError::Io(a.file.clone(), e))?.len();
    eprintln!(
        "offering {} ({}) to {}:{}; waiting for the receiver to accept",
        a.file.display(),
        size(len),
        a.host,
        a.port
    );
    let report = send_file((a.host.as_str(), a.port), &a.file, &SenderConfig::default())?;
    println!(
        "sent {} to {}: {}, checksum confirmed",
        size(report.session.bytes_moved),
        report.peer,
        report.session.state()
    );
    Ok(())
}

fn prompt_decision(offer: &Offer, peer: SocketAddr) -> Decision {
    let q = format!("Accept {} ({}) from {peer}?", offer.file_name, size(offer.file_size));
    if ask(&q) {
        Decision::Accept
    } else {
        Decision::Reject
    }
}

fn report_session(s: &TransferSession) {
    let mut line = format!("{}: {} ({} received)", s.offer.file_name, s.state(), size(s.bytes_moved));
    if let Some(why) = &s.failure {
        line.push_str(&format!(", {why}"));
    }
    println!("{line}");
}

fn recv(a: RecvArgs) -> CliResult {
    fs::create_dir_all(&a.dir).map_err(|e| CliError::Io(a.dir.clone(), e))?;
    let config = ReceiverConfig::new(SocketAddr::new(a.bind, a.port), &a.dir);
    let handle = if a.auto_accept {
        receive_daemon(config, AutoAccept)?
    } else {
        receive_daemon(config, prompt_decision)?
    };
    let events = handle.subscribe();
    eprintln!(
        "listening on {}, saving to {}{}; Ctrl-C to stop",
        handle.local_addr(),
        a.dir.display(),
        if a.auto_accept { ", accepting every offer" } else { "" }
    );
    for session in events {
        report_session(&session);
    }
    Ok(())
}
