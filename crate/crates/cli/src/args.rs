use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stegosonic_core::transfer::{DEFAULT_CONTROL_PORT, DIR_ENV, PORT_ENV};
use stegosonic_core::{CompressionLevel, Method};

pub const PASSWORD_ENV: &str = "STEGOSONIC_PASSWORD";

/// Hide, recover and remove encrypted payloads in WAV and MP3 files.
#[derive(Debug, Parser)]
#[command(name = "stegosonic", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seal a payload and hide it in a carrier.
    Encode(EncodeArgs),
    /// Recover and decrypt a hidden payload.
    Decode(DecodeArgs),
    /// Strip a hidden payload from a carrier.
    Remove(RemoveArgs),
    /// Report how much a carrier can hold.
    Capacity(CapacityArgs),
    /// Byte- and bit-level comparison of two files.
    Compare(CompareArgs),
    /// Sample-level distortion between an original and an encoded WAV.
    Distortion(DistortionArgs),
    /// Offer a file to a receiver on the LAN.
    Send(SendArgs),
    /// Accept files from senders on the LAN.
    Recv(RecvArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// LSB substitution in WAV sample bytes.
    Lsb,
    /// Payload inserted after the WAV header.
    Inject,
    /// LSBs of MP3 frame data fields (text only).
    Mp3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RemovableMethod {
    Lsb,
    Inject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CompressArg {
    Off,
    Low,
    #[default]
    Medium,
    High,
}

impl From<CompressArg> for CompressionLevel {
    fn from(c: CompressArg) -> Self {
        match c {
            CompressArg::Off => CompressionLevel::Off,
            CompressArg::Low => CompressionLevel::Low,
            CompressArg::Medium => CompressionLevel::Medium,
            CompressArg::High => CompressionLevel::High,
        }
    }
}

impl MethodArg {
    /// Compressed payloads use the dense LSB layout, uncompressed the sparse one.
    pub fn capacity_method(self, compress: CompressArg) -> Method {
        match self {
            MethodArg::Lsb if compress == CompressArg::Off => Method::LsbSparse,
            MethodArg::Lsb => Method::LsbDense,
            MethodArg::Inject => Method::Injection,
            MethodArg::Mp3 => Method::Mp3,
        }
    }
}

#[derive(Debug, Args)]
pub struct PasswordArg {
    /// Password. Prefer the environment variable or the interactive prompt;
    /// a value given here ends up in shell history.
    #[arg(long, env = PASSWORD_ENV, hide_env_values = true)]
    pub password: Option<String>,
}

#[derive(Debug, Args)]
pub struct SkipArg {
    /// MP3 frames skipped between payload frames.
    #[arg(long, default_value_t = stegosonic_core::mp3_codec::DEFAULT_SKIP)]
    pub skip: usize,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["payload", "text"])))]
pub struct EncodeArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Carrier file.
    #[arg(long = "in", value_name = "CARRIER")]
    pub input: PathBuf,
    /// Document to hide (.txt, .doc, .docx, .pdf or any other file).
    #[arg(long, value_name = "FILE")]
    pub payload: Option<PathBuf>,
    /// Text message to hide.
    #[arg(long, value_name = "MSG")]
    pub text: Option<String>,
    #[arg(long, value_name = "OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub password: PasswordArg,
    #[arg(long, value_enum, default_value_t)]
    pub compress: CompressArg,
    #[command(flatten)]
    pub skip: SkipArg,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long = "in", value_name = "CARRIER")]
    pub input: PathBuf,
    #[arg(long, value_name = "OUT")]
    pub out: PathBuf,
    #[command(flatten)]
    pub password: PasswordArg,
    #[command(flatten)]
    pub skip: SkipArg,
}

#[derive(Debug, Args)]
pub struct RemoveArgs {
    #[arg(long, value_enum)]
    pub method: RemovableMethod,
    #[arg(long = "in", value_name = "CARRIER")]
    pub input: PathBuf,
    #[arg(long, value_name = "OUT")]
    pub out: PathBuf,
    /// Do not ask for confirmation.
    #[arg(long)]
    pub yes: bool,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_enum)]
    pub method: MethodArg,
    #[arg(long = "in", value_name = "CARRIER")]
    pub input: PathBuf,
    /// Compression intended for the payload; selects dense or sparse LSB layout.
    #[arg(long, value_enum, default_value_t)]
    pub compress: CompressArg,
    #[command(flatten)]
    pub skip: SkipArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DistortionArgs {
    pub original: PathBuf,
    pub encoded: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SendArgs {
    pub host: String,
    pub file: PathBuf,
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_CONTROL_PORT)]
    pub port: u16,
}

#[derive(Debug, Args)]
pub struct RecvArgs {
    /// Accept every offer without asking.
    #[arg(long)]
    pub auto_accept: bool,
    /// Download directory.
    #[arg(long, env = DIR_ENV, default_value = ".")]
    pub dir: PathBuf,
    #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_CONTROL_PORT)]
    pub port: u16,
    /// Address to listen on.
    #[arg(long, default_value = "0.0.0.0")]
    pub bind: std::net::IpAddr,
}
