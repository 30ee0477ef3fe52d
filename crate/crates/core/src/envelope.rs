//! Public-key envelope addressed to a curve key pair.
//!
//! Hybrid construction: an ephemeral Diffie-Hellman exchange over G1 feeds
//! HKDF-SHA256, whose output keys ChaCha20-Poly1305. The ephemeral point is
//! bound as associated data. Wire layout is `ephemeral_pub || tag || ciphertext`.
//!
//! Group operations here go straight to the backend and are recorded under
//! [`OpClass::Envelope`], never as H/S/P.

use chacha20poly1305::aead::{AeadInPlace, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce, Tag};
use hkdf::Hkdf;
use rand::{CryptoRng, RngCore};
use sha2::Sha256;

use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};
use crate::metrics::counter::{record, OpClass};

pub const TAG_BYTES: usize = 16;
const KDF_INFO: &[u8] = b"MHCS-ENV";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedBox<B: PairingBackend> {
    pub ephemeral_pub: B::G1,
    pub auth_tag: [u8; TAG_BYTES],
    pub ciphertext: Vec<u8>,
}

impl<B: PairingBackend> SealedBox<B> {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = B::g1_to_bytes(&self.ephemeral_pub);
        out.extend_from_slice(&self.auth_tag);
        out.extend_from_slice(&self.ciphertext);
        out
    }

    /// Parses the wire layout. Any structural problem is reported as
    /// [`Error::AuthFailure`] so callers cannot tell parse errors from tampering.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < B::G1_BYTES + TAG_BYTES {
            return Err(Error::AuthFailure);
        }
        let ephemeral_pub =
            B::g1_from_bytes(&bytes[..B::G1_BYTES]).map_err(|_| Error::AuthFailure)?;
        let mut auth_tag = [0u8; TAG_BYTES];
        auth_tag.copy_from_slice(&bytes[B::G1_BYTES..B::G1_BYTES + TAG_BYTES]);
        Ok(SealedBox {
            ephemeral_pub,
            auth_tag,
            ciphertext: bytes[B::G1_BYTES + TAG_BYTES..].to_vec(),
        })
    }
}

fn derive_cipher<B: PairingBackend>(shared: &B::G1, ephemeral: &[u8]) -> (ChaCha20Poly1305, Nonce) {
    let mut ikm = B::g1_to_bytes(shared);
    ikm.extend_from_slice(ephemeral);
    let hk = Hkdf::<Sha256>::new(None, &ikm);
    let mut okm = [0u8; 44];
    hk.expand(KDF_INFO, &mut okm)
        .expect("44 bytes is within HKDF limits");
    let cipher = ChaCha20Poly1305::new(Key::from_slice(&okm[..32]));
    (cipher, *Nonce::from_slice(&okm[32..]))
}

/// Seals under a caller-chosen ephemeral scalar. Deterministic in `(r, inputs)`.
pub fn seal_with_ephemeral<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    recipient_pub: &B::G1,
    r: &B::Scalar,
    plaintext: &[u8],
) -> SealedBox<B> {
    record(OpClass::Envelope);
    let ephemeral_pub = B::g1_mul(suite.gen_g1(), r);
    record(OpClass::Envelope);
    let shared = B::g1_mul(recipient_pub, r);
    let eph_bytes = B::g1_to_bytes(&ephemeral_pub);
    let (cipher, nonce) = derive_cipher::<B>(&shared, &eph_bytes);
    record(OpClass::Envelope);
    let mut ciphertext = plaintext.to_vec();
    let tag = cipher
        .encrypt_in_place_detached(&nonce, &eph_bytes, &mut ciphertext)
        .expect("plaintext length within AEAD limits");
    SealedBox {
        ephemeral_pub,
        auth_tag: tag.into(),
        ciphertext,
    }
}

pub fn seal<B: PairingBackend, R: RngCore + CryptoRng>(
    suite: &BilinearSuite<B>,
    recipient_pub: &B::G1,
    plaintext: &[u8],
    rng: &mut R,
) -> SealedBox<B> {
    let r = suite.random_nonzero_scalar(rng);
    seal_with_ephemeral(suite, recipient_pub, &r, plaintext)
}

/// Wrong key and modified box are indistinguishable: both give `AuthFailure`.
pub fn open<B: PairingBackend>(recipient_sk: &B::Scalar, sealed: &SealedBox<B>) -> Result<Vec<u8>> {
    record(OpClass::Envelope);
    let shared = B::g1_mul(&sealed.ephemeral_pub, recipient_sk);
    let eph_bytes = B::g1_to_bytes(&sealed.ephemeral_pub);
    let (cipher, nonce) = derive_cipher::<B>(&shared, &eph_bytes);
    record(OpClass::Envelope);
    let mut buf = sealed.ciphertext.clone();
    cipher
        .decrypt_in_place_detached(
            &nonce,
            &eph_bytes,
            &mut buf,
            Tag::from_slice(&sealed.auth_tag),
        )
        .map_err(|_| Error::AuthFailure)?;
    Ok(buf)
}

pub fn open_bytes<B: PairingBackend>(recipient_sk: &B::Scalar, bytes: &[u8]) -> Result<Vec<u8>> {
    open(recipient_sk, &SealedBox::<B>::from_bytes(bytes)?)
}

/// Fixed-width serial-number plaintext: `ser(index_v) || ser(h) || t` (u64 big-endian).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SerialPlaintext<B: PairingBackend> {
    pub index_v: B::G1,
    pub h: B::Scalar,
    pub t: u64,
}

impl<B: PairingBackend> SerialPlaintext<B> {
    pub const LEN: usize = B::G1_BYTES + B::SCALAR_BYTES + 8;

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = B::g1_to_bytes(&self.index_v);
        out.extend_from_slice(&B::scalar_to_bytes(&self.h));
        out.extend_from_slice(&self.t.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() != Self::LEN {
            return Err(Error::Malformed("serial plaintext length".into()));
        }
        let (p, rest) = bytes.split_at(B::G1_BYTES);
        let (s, t) = rest.split_at(B::SCALAR_BYTES);
        Ok(SerialPlaintext {
            index_v: B::g1_from_bytes(p)?,
            h: B::scalar_from_bytes(s)?,
            t: u64::from_be_bytes(t.try_into().expect("8 bytes")),
        })
    }
}
