//! Certificateless aggregate signatures over bilinear groups, and a
//! pseudonymous crowd-sensing protocol that verifies a whole time slot of
//! submissions with two pairings.
//!
//! The code is generic over a [`group::PairingBackend`]. Two backends ship:
//! BLS12-381 (asymmetric, 128-bit) and a 512-bit supersingular curve with a
//! symmetric pairing (80-bit).

pub mod clas;
pub mod envelope;
pub mod error;
pub mod group;
pub mod metrics;
pub mod mhcs;
pub mod scenario;

pub use error::{Error, Result};
pub use group::{BilinearSuite, Bls12, PairingBackend, TypeA};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub const SUPPORTED_LEVELS: &str = "128 (bls12-381), 80 (type-a-512)";

pub type Bls12Suite = BilinearSuite<Bls12>;
pub type TypeASuite = BilinearSuite<TypeA>;

/// Reproducible RNG stream: ChaCha20 keyed by `SHA-256(seed_le || label)`.
pub fn derive_rng(seed: u64, label: &[u8]) -> ChaCha20Rng {
    let key: [u8; 32] = Sha256::new()
        .chain_update(seed.to_le_bytes())
        .chain_update(label)
        .finalize()
        .into();
    ChaCha20Rng::from_seed(key)
}
