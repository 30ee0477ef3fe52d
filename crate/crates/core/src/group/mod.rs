//! Bilinear group setting.
//!
//! [`PairingBackend`] is the uninstrumented arithmetic of one concrete curve.
//! [`BilinearSuite`] wraps a backend, exposes the generators and order, and
//! reports every hash, scalar multiplication and pairing to the active
//! operation counter. Everything above this module works through the suite.
//!
//! Two backends are provided:
//!
//! * [`Bls12`]: BLS12-381, an asymmetric (Type-3) pairing. Hashed points,
//!   signatures and user keys live in G1; authority keys are published in
//!   both G1 and G2.
//! * [`TypeA`]: the supersingular curve `y^2 = x^3 + x` over a 512-bit prime
//!   field with a 160-bit subgroup and embedding degree 2. This is a
//!   symmetric pairing, so G2 is G1 and `gen_g2 == gen_g1`.

mod bls12;
mod type_a;

use std::fmt::Debug;
use std::marker::PhantomData;

use num_bigint::BigUint;
use num_traits::Zero;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::metrics::counter::{record, OpClass};

pub use bls12::Bls12;
pub use type_a::TypeA;

/// Domain-separation tag for hashing `(id, Q1)` onto G1.
pub const H1_TAG: &[u8] = b"CLAS-H1";
/// Domain-separation tag for hashing `(m, V)` onto a nonzero scalar.
pub const H2_TAG: &[u8] = b"CLAS-H2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    Symmetric,
    Asymmetric,
}

/// Raw arithmetic of one pairing-friendly curve.
///
/// Implementations never touch the operation counter. Deserialization must
/// reject anything that is not a canonical encoding of an element of the
/// prime-order subgroup.
pub trait PairingBackend: Copy + Debug + Default + Send + Sync + 'static {
    type Scalar: Clone + PartialEq + Eq + Debug + Send + Sync;
    type G1: Clone + PartialEq + Eq + Debug + Send + Sync;
    type G2: Clone + PartialEq + Eq + Debug + Send + Sync;
    type Gt: Clone + PartialEq + Eq + Debug + Send + Sync;

    const NAME: &'static str;
    const MODE: PairingMode;
    const SECURITY_BITS: u32;
    const SCALAR_BYTES: usize;
    const G1_BYTES: usize;
    const G2_BYTES: usize;

    /// Prime order q of G1, G2 and GT.
    fn order() -> &'static BigUint;

    fn g1_generator() -> Self::G1;
    fn g2_generator() -> Self::G2;
    fn g1_identity() -> Self::G1;
    fn g2_identity() -> Self::G2;
    fn gt_identity() -> Self::Gt;

    fn g1_add(a: &Self::G1, b: &Self::G1) -> Self::G1;
    fn g1_neg(a: &Self::G1) -> Self::G1;
    fn g1_mul(p: &Self::G1, k: &Self::Scalar) -> Self::G1;
    fn g2_add(a: &Self::G2, b: &Self::G2) -> Self::G2;
    fn g2_mul(p: &Self::G2, k: &Self::Scalar) -> Self::G2;
    fn gt_mul(a: &Self::Gt, b: &Self::Gt) -> Self::Gt;
    fn gt_pow(a: &Self::Gt, k: &Self::Scalar) -> Self::Gt;

    fn pairing(a: &Self::G1, b: &Self::G2) -> Self::Gt;

    /// Deterministic hash onto the prime-order subgroup of G1.
    fn hash_to_g1(dst: &[u8], msg: &[u8]) -> Self::G1;

    /// Reduces `v` modulo the group order.
    fn scalar_from_biguint(v: &BigUint) -> Self::Scalar;
    fn scalar_to_biguint(s: &Self::Scalar) -> BigUint;
    fn scalar_add(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_mul(a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;

    fn g1_to_bytes(p: &Self::G1) -> Vec<u8>;
    fn g1_from_bytes(bytes: &[u8]) -> Result<Self::G1>;
    fn g2_to_bytes(p: &Self::G2) -> Vec<u8>;
    fn g2_from_bytes(bytes: &[u8]) -> Result<Self::G2>;
    fn gt_to_bytes(g: &Self::Gt) -> Vec<u8>;
    fn gt_from_bytes(bytes: &[u8]) -> Result<Self::Gt>;

    fn scalar_zero() -> Self::Scalar {
        Self::scalar_from_biguint(&BigUint::zero())
    }

    fn scalar_is_zero(s: &Self::Scalar) -> bool {
        *s == Self::scalar_zero()
    }

    /// Uniform scalar in `[0, q)`, sampled with 128 bits of slack before reduction.
    fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Self::Scalar {
        let mut wide = vec![0u8; Self::SCALAR_BYTES + 16];
        rng.fill_bytes(&mut wide);
        Self::scalar_from_biguint(&BigUint::from_bytes_be(&wide))
    }

    /// Big-endian, fixed width.
    fn scalar_to_bytes(s: &Self::Scalar) -> Vec<u8> {
        let raw = Self::scalar_to_biguint(s).to_bytes_be();
        let mut out = vec![0u8; Self::SCALAR_BYTES - raw.len()];
        out.extend_from_slice(&raw);
        out
    }

    fn scalar_from_bytes(bytes: &[u8]) -> Result<Self::Scalar> {
        if bytes.len() != Self::SCALAR_BYTES {
            return Err(Error::invalid(
                "scalar",
                format!("expected {} bytes, got {}", Self::SCALAR_BYTES, bytes.len()),
            ));
        }
        let v = BigUint::from_bytes_be(bytes);
        if &v >= Self::order() {
            return Err(Error::invalid("scalar", "value not reduced modulo q"));
        }
        Ok(Self::scalar_from_biguint(&v))
    }
}

/// `expand_message_xmd` with SHA-256 (RFC 9380, section 5.3.1).
pub fn expand_message_xmd(msg: &[u8], dst: &[u8], len_in_bytes: usize) -> Vec<u8> {
    const B_IN_BYTES: usize = 32;
    const R_IN_BYTES: usize = 64;
    let ell = len_in_bytes.div_ceil(B_IN_BYTES);
    assert!(ell <= 255 && len_in_bytes <= 0xffff && dst.len() <= 255);

    let mut dst_prime = dst.to_vec();
    dst_prime.push(dst.len() as u8);

    let b0 = Sha256::new()
        .chain_update([0u8; R_IN_BYTES])
        .chain_update(msg)
        .chain_update((len_in_bytes as u16).to_be_bytes())
        .chain_update([0u8])
        .chain_update(&dst_prime)
        .finalize();

    let mut out = Vec::with_capacity(ell * B_IN_BYTES);
    let mut prev = Sha256::new()
        .chain_update(b0)
        .chain_update([1u8])
        .chain_update(&dst_prime)
        .finalize();
    out.extend_from_slice(&prev);
    for i in 2..=ell {
        let mixed: Vec<u8> = b0.iter().zip(prev.iter()).map(|(a, b)| a ^ b).collect();
        prev = Sha256::new()
            .chain_update(&mixed)
            .chain_update([i as u8])
            .chain_update(&dst_prime)
            .finalize();
        out.extend_from_slice(&prev);
    }
    out.truncate(len_in_bytes);
    out
}

/// Hash to `[1, q)`: expand to `|q| + 16` bytes and reduce; a zero result is
/// re-derived with a one-byte counter appended to the message.
pub(crate) fn hash_to_nonzero_scalar<B: PairingBackend>(tag: &[u8], msg: &[u8]) -> B::Scalar {
    let order = B::order();
    let len = B::SCALAR_BYTES + 16;
    let mut input = msg.to_vec();
    let mut counter = 0u8;
    loop {
        let v = BigUint::from_bytes_be(&expand_message_xmd(&input, tag, len)) % order;
        if !v.is_zero() {
            return B::scalar_from_biguint(&v);
        }
        if counter > 0 {
            input.pop();
        }
        counter = counter.wrapping_add(1);
        input.push(counter);
    }
}

/// The public group context plus counted access to its operations.
#[derive(Debug, Clone)]
pub struct BilinearSuite<B: PairingBackend> {
    gen_g1: B::G1,
    gen_g2: B::G2,
    _backend: PhantomData<B>,
}

impl<B: PairingBackend> Default for BilinearSuite<B> {
    fn default() -> Self {
        Self::new()
    }
}

impl<B: PairingBackend> BilinearSuite<B> {
    pub fn new() -> Self {
        BilinearSuite {
            gen_g1: B::g1_generator(),
            gen_g2: B::g2_generator(),
            _backend: PhantomData,
        }
    }

    /// Suite for a requested security level; the level must match the backend.
    pub fn for_level(security_level: u32) -> Result<Self> {
        if security_level != B::SECURITY_BITS {
            return Err(Error::UnsupportedParameter(
                security_level,
                crate::SUPPORTED_LEVELS,
            ));
        }
        Ok(Self::new())
    }

    pub fn name(&self) -> &'static str {
        B::NAME
    }

    pub fn mode(&self) -> PairingMode {
        B::MODE
    }

    pub fn security_level(&self) -> u32 {
        B::SECURITY_BITS
    }

    pub fn order_q(&self) -> &'static BigUint {
        B::order()
    }

    pub fn gen_g1(&self) -> &B::G1 {
        &self.gen_g1
    }

    pub fn gen_g2(&self) -> &B::G2 {
        &self.gen_g2
    }

    pub fn g1_identity(&self) -> B::G1 {
        B::g1_identity()
    }

    pub fn gt_identity(&self) -> B::Gt {
        B::gt_identity()
    }

    pub fn is_g1_identity(&self, p: &B::G1) -> bool {
        *p == B::g1_identity()
    }

    // -- counted operations --

    pub fn pairing(&self, a: &B::G1, b: &B::G2) -> B::Gt {
        record(OpClass::Pairing);
        B::pairing(a, b)
    }

    pub fn g1_mul(&self, p: &B::G1, k: &B::Scalar) -> B::G1 {
        record(OpClass::ScalarMul);
        B::g1_mul(p, k)
    }

    pub fn g2_mul(&self, p: &B::G2, k: &B::Scalar) -> B::G2 {
        record(OpClass::ScalarMul);
        B::g2_mul(p, k)
    }

    pub fn g1_add(&self, a: &B::G1, b: &B::G1) -> B::G1 {
        record(OpClass::PointAdd);
        B::g1_add(a, b)
    }

    pub fn g2_add(&self, a: &B::G2, b: &B::G2) -> B::G2 {
        record(OpClass::PointAdd);
        B::g2_add(a, b)
    }

    pub fn g1_neg(&self, a: &B::G1) -> B::G1 {
        B::g1_neg(a)
    }

    pub fn g1_sum<'a>(&self, points: impl IntoIterator<Item = &'a B::G1>) -> B::G1 {
        points
            .into_iter()
            .fold(B::g1_identity(), |acc, p| self.g1_add(&acc, p))
    }

    pub fn hash_to_g1(&self, tag: &[u8], msg: &[u8]) -> B::G1 {
        record(OpClass::Hash);
        B::hash_to_g1(tag, msg)
    }

    pub fn hash_to_scalar(&self, tag: &[u8], msg: &[u8]) -> B::Scalar {
        record(OpClass::Hash);
        hash_to_nonzero_scalar::<B>(tag, msg)
    }

    // -- uncounted helpers --

    pub fn gt_mul(&self, a: &B::Gt, b: &B::Gt) -> B::Gt {
        B::gt_mul(a, b)
    }

    pub fn gt_pow(&self, a: &B::Gt, k: &B::Scalar) -> B::Gt {
        B::gt_pow(a, k)
    }

    pub fn scalar_mul(&self, a: &B::Scalar, b: &B::Scalar) -> B::Scalar {
        B::scalar_mul(a, b)
    }

    pub fn scalar_add(&self, a: &B::Scalar, b: &B::Scalar) -> B::Scalar {
        B::scalar_add(a, b)
    }

    pub fn scalar_from_u64(&self, v: u64) -> B::Scalar {
        B::scalar_from_biguint(&BigUint::from(v))
    }

    pub fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> B::Scalar {
        B::random_scalar(rng)
    }

    /// Uniform scalar in `[1, q)`.
    pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> B::Scalar {
        loop {
            let k = B::random_scalar(rng);
            if !B::scalar_is_zero(&k) {
                return k;
            }
        }
    }

    /// Uniform element of G1 other than the identity (uncounted).
    pub fn random_g1<R: RngCore + CryptoRng>(&self, rng: &mut R) -> B::G1 {
        let k = self.random_nonzero_scalar(rng);
        B::g1_mul(&self.gen_g1, &k)
    }

    // -- canonical encodings --

    pub fn g1_to_bytes(&self, p: &B::G1) -> Vec<u8> {
        B::g1_to_bytes(p)
    }

    pub fn g1_from_bytes(&self, bytes: &[u8]) -> Result<B::G1> {
        B::g1_from_bytes(bytes)
    }

    pub fn g2_to_bytes(&self, p: &B::G2) -> Vec<u8> {
        B::g2_to_bytes(p)
    }

    pub fn g2_from_bytes(&self, bytes: &[u8]) -> Result<B::G2> {
        B::g2_from_bytes(bytes)
    }

    pub fn gt_to_bytes(&self, g: &B::Gt) -> Vec<u8> {
        B::gt_to_bytes(g)
    }

    pub fn gt_from_bytes(&self, bytes: &[u8]) -> Result<B::Gt> {
        B::gt_from_bytes(bytes)
    }

    pub fn scalar_to_bytes(&self, s: &B::Scalar) -> Vec<u8> {
        B::scalar_to_bytes(s)
    }

    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<B::Scalar> {
        B::scalar_from_bytes(bytes)
    }

    pub fn g1_to_hex(&self, p: &B::G1) -> String {
        hex::encode(B::g1_to_bytes(p))
    }

    pub fn g1_from_hex(&self, s: &str) -> Result<B::G1> {
        let bytes = hex::decode(s).map_err(|e| Error::invalid("G1", e.to_string()))?;
        B::g1_from_bytes(&bytes)
    }

    pub fn g2_to_hex(&self, p: &B::G2) -> String {
        hex::encode(B::g2_to_bytes(p))
    }

    pub fn g2_from_hex(&self, s: &str) -> Result<B::G2> {
        let bytes = hex::decode(s).map_err(|e| Error::invalid("G2", e.to_string()))?;
        B::g2_from_bytes(&bytes)
    }

    pub fn scalar_to_hex(&self, s: &B::Scalar) -> String {
        hex::encode(B::scalar_to_bytes(s))
    }

    pub fn scalar_from_hex(&self, s: &str) -> Result<B::Scalar> {
        let bytes = hex::decode(s).map_err(|e| Error::invalid("scalar", e.to_string()))?;
        B::scalar_from_bytes(&bytes)
    }

    /// Public description of the suite, as written by the CLI.
    pub fn params(&self) -> SuiteParams {
        SuiteParams {
            backend: B::NAME.to_string(),
            security_level: B::SECURITY_BITS,
            mode: B::MODE,
            order_q: B::order().to_str_radix(16),
            gen_g1: self.g1_to_hex(&self.gen_g1),
            gen_g2: self.g2_to_hex(&self.gen_g2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteParams {
    pub backend: String,
    pub security_level: u32,
    pub mode: PairingMode,
    pub order_q: String,
    pub gen_g1: String,
    pub gen_g2: String,
}

impl SuiteParams {
    /// Checks that these parameters describe backend `B` exactly.
    pub fn matches<B: PairingBackend>(&self) -> bool {
        let suite = BilinearSuite::<B>::new();
        *self == suite.params()
    }
}
