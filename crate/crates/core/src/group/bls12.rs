use std::sync::LazyLock;

use ark_bls12_381::{g1, Bls12_381, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{CurveGroup, PrimeGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, Field, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use num_bigint::BigUint;
use sha2::Sha256;

use super::{PairingBackend, PairingMode};
use crate::error::{Error, Result};

type G1Hasher =
    MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;

static ORDER: LazyLock<BigUint> = LazyLock::new(|| Fr::MODULUS.into());

/// BLS12-381 through arkworks. Asymmetric; hashing uses the simplified SWU
/// map with the 11-isogeny (RFC 9380 suite `BLS12381G1_XMD:SHA-256_SSWU_RO_`)
/// under the caller's domain-separation tag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12;

fn decode<T: CanonicalDeserialize>(kind: &'static str, len: usize, bytes: &[u8]) -> Result<T> {
    if bytes.len() != len {
        return Err(Error::invalid(
            kind,
            format!("expected {len} bytes, got {}", bytes.len()),
        ));
    }
    T::deserialize_compressed(bytes).map_err(|e| Error::invalid(kind, e.to_string()))
}

fn encode<T: CanonicalSerialize>(v: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(v.compressed_size());
    v.serialize_compressed(&mut out)
        .expect("serialization into a Vec cannot fail");
    out
}

impl PairingBackend for Bls12 {
    type Scalar = Fr;
    type G1 = G1Projective;
    type G2 = G2Projective;
    type Gt = PairingOutput<Bls12_381>;

    const NAME: &'static str = "bls12-381";
    const MODE: PairingMode = PairingMode::Asymmetric;
    const SECURITY_BITS: u32 = 128;
    const SCALAR_BYTES: usize = 32;
    const G1_BYTES: usize = 48;
    const G2_BYTES: usize = 96;

    fn order() -> &'static BigUint {
        &ORDER
    }

    fn g1_generator() -> G1Projective {
        G1Projective::generator()
    }

    fn g2_generator() -> G2Projective {
        G2Projective::generator()
    }

    fn g1_identity() -> G1Projective {
        G1Projective::zero()
    }

    fn g2_identity() -> G2Projective {
        G2Projective::zero()
    }

    fn gt_identity() -> Self::Gt {
        PairingOutput::zero()
    }

    fn g1_add(a: &G1Projective, b: &G1Projective) -> G1Projective {
        *a + b
    }

    fn g1_neg(a: &G1Projective) -> G1Projective {
        -*a
    }

    fn g1_mul(p: &G1Projective, k: &Fr) -> G1Projective {
        *p * k
    }

    fn g2_add(a: &G2Projective, b: &G2Projective) -> G2Projective {
        *a + b
    }

    fn g2_mul(p: &G2Projective, k: &Fr) -> G2Projective {
        *p * k
    }

    // GT is written additively by arkworks.
    fn gt_mul(a: &Self::Gt, b: &Self::Gt) -> Self::Gt {
        *a + b
    }

    fn gt_pow(a: &Self::Gt, k: &Fr) -> Self::Gt {
        *a * k
    }

    fn pairing(a: &G1Projective, b: &G2Projective) -> Self::Gt {
        Bls12_381::pairing(a.into_affine(), b.into_affine())
    }

    fn hash_to_g1(dst: &[u8], msg: &[u8]) -> G1Projective {
        let hasher = G1Hasher::new(dst).expect("valid hash-to-curve parameters");
        let p: G1Affine = hasher.hash(msg).expect("SSWU map is total");
        p.into()
    }

    fn scalar_from_biguint(v: &BigUint) -> Fr {
        Fr::from_le_bytes_mod_order(&v.to_bytes_le())
    }

    fn scalar_to_biguint(s: &Fr) -> BigUint {
        BigUint::from_bytes_le(&s.into_bigint().to_bytes_le())
    }

    fn scalar_add(a: &Fr, b: &Fr) -> Fr {
        *a + b
    }

    fn scalar_mul(a: &Fr, b: &Fr) -> Fr {
        *a * b
    }

    fn scalar_zero() -> Fr {
        Fr::zero()
    }

    fn scalar_is_zero(s: &Fr) -> bool {
        s.is_zero()
    }

    fn g1_to_bytes(p: &G1Projective) -> Vec<u8> {
        encode(&p.into_affine())
    }

    fn g1_from_bytes(bytes: &[u8]) -> Result<G1Projective> {
        decode::<G1Affine>("G1", Self::G1_BYTES, bytes).map(Into::into)
    }

    fn g2_to_bytes(p: &G2Projective) -> Vec<u8> {
        encode(&p.into_affine())
    }

    fn g2_from_bytes(bytes: &[u8]) -> Result<G2Projective> {
        decode::<G2Affine>("G2", Self::G2_BYTES, bytes).map(Into::into)
    }

    fn gt_to_bytes(g: &Self::Gt) -> Vec<u8> {
        encode(g)
    }

    fn gt_from_bytes(bytes: &[u8]) -> Result<Self::Gt> {
        let len = PairingOutput::<Bls12_381>::zero().compressed_size();
        let g: Self::Gt = decode("GT", len, bytes)?;
        // subgroup check: x^q = 1
        if g.0.pow(Fr::MODULUS) != <Bls12_381 as Pairing>::TargetField::ONE {
            return Err(Error::invalid("GT", "not in the order-q subgroup"));
        }
        Ok(g)
    }
}
