//! Inputs shared by the benchmarks.

use rand::rngs::StdRng;
use rand::{RngCore, SeedableRng};
use stegosonic_core::payload::seal_with;
use stegosonic_core::{CompressionLevel, KdfConfig, PayloadKind, SealedPayload};

/// Message sizes in bytes, small to large.
pub const LADDER: [usize; 5] = [2_200, 46_000, 207_500, 1_047_800, 2_095_800];

/// Cheap key derivation, so codec benchmarks measure the codec.
pub const BENCH_KDF: KdfConfig = KdfConfig { iterations: 1 };

pub const PASSWORD: &str = "benchmark";

pub fn message(len: usize, seed: u64) -> Vec<u8> {
    let mut v = vec![0u8; len];
    StdRng::seed_from_u64(seed).fill_bytes(&mut v);
    v
}

/// An uncompressed envelope of exactly `len + 45` bytes.
pub fn sealed(len: usize, kind: PayloadKind) -> SealedPayload {
    let mut rng = StdRng::seed_from_u64(len as u64);
    seal_with(&mut rng, &BENCH_KDF, &message(len, 1), PASSWORD, CompressionLevel::Off, kind)
        .expect("non-empty password")
}
