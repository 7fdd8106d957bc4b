//! Hide, retrieve and remove encrypted documents inside WAV and MP3 audio.
//!
//! Three embedding methods share one sealed-payload envelope
//! ([`payload::seal`] / [`payload::open`]):
//!
//! * [`lsb_codec`] writes payload bits into sample LSBs of PCM WAV data and
//!   keeps the file size.
//! * [`injection_codec`] inserts a 5-byte record after the WAV header and
//!   appends the payload; fast and unbounded, but the file grows.
//! * [`mp3_codec`] writes payload bits into MP3 frame data fields with a
//!   fixed inter-frame skip, capped at 1/16 of the file.
//!
//! [`transfer`] moves files between peers with an explicit accept step, and
//! [`analysis`] verifies exactness and measures distortion.

pub mod analysis;
pub mod capacity;
pub mod error;
pub mod fixtures;
pub mod injection_codec;
pub mod lsb_codec;
pub mod mp3_codec;
pub mod mpeg_frame;
pub mod payload;
pub mod preamble;
pub mod riff_wav;
pub mod transfer;

pub use analysis::{compare_files, distortion, DiffReport, DistortionReport};
pub use capacity::{report as capacity_report, CapacityReport, Method};
pub use error::{Error, Result};
pub use injection_codec::{embed_injection, extract_injection, remove_injection};
pub use lsb_codec::{capacity_lsb, embed_lsb, extract_lsb, remove_message, LsbLayout};
pub use mp3_codec::{capacity_mp3, embed_mp3, extract_mp3, Mp3EmbedConfig};
pub use mpeg_frame::{parse_mp3, write_mp3, Mp3Frame, Mp3Stream};
pub use payload::{open, seal, CompressionLevel, KdfConfig, PayloadKind, SealedPayload};
pub use preamble::StegPreamble;
pub use riff_wav::{parse_wav, write_wav, WavFile, WavFormat};
