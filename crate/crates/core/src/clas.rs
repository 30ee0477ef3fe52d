//! Certificateless aggregate signatures.
//!
//! A signer's private key has two halves: a self-chosen scalar `s1` (with
//! public `Q1 = s1 * P`) and an authority-issued point `S2 = s * Q2`, where
//! `Q2 = H1(id, Q1)`. A signature on `m` is
//!
//! ```text
//! V = k * Q1,  h = H2(m, V),  U = S2 + (k * h * s1) * Q_auth
//! ```
//!
//! and verifies when `e(U, P) = e(Q2 + h * V, Q_auth)`. Aggregation sums
//! `U_i`, `h_i * V_i` and `Q2_i`; the aggregate verifies with the same
//! two-pairing equation regardless of how many signatures it covers.
//!
//! With an asymmetric backend, user material lives in G1 and the authority
//! publishes its key in both groups: `pk_g1` feeds signing, `pk_g2` sits in
//! the right pairing slot during verification.

use std::collections::HashSet;

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend, H1_TAG, H2_TAG};

/// Authority (KGC, or MS in the protocol) key pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorityKeyPair<B: PairingBackend> {
    sk: B::Scalar,
    public: AuthorityPublicKey<B>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthorityPublicKey<B: PairingBackend> {
    pub pk_g1: B::G1,
    pub pk_g2: B::G2,
}

impl<B: PairingBackend> AuthorityKeyPair<B> {
    pub fn generate<R: RngCore + CryptoRng>(suite: &BilinearSuite<B>, rng: &mut R) -> Self {
        let sk = suite.random_nonzero_scalar(rng);
        Self::from_secret(suite, sk).expect("nonzero by construction")
    }

    pub fn from_secret(suite: &BilinearSuite<B>, sk: B::Scalar) -> Result<Self> {
        if B::scalar_is_zero(&sk) {
            return Err(Error::invalid("scalar", "authority secret must be nonzero"));
        }
        let public = AuthorityPublicKey {
            pk_g1: suite.g1_mul(suite.gen_g1(), &sk),
            pk_g2: suite.g2_mul(suite.gen_g2(), &sk),
        };
        Ok(AuthorityKeyPair { sk, public })
    }

    pub fn secret(&self) -> &B::Scalar {
        &self.sk
    }

    pub fn public(&self) -> &AuthorityPublicKey<B> {
        &self.public
    }
}

impl<B: PairingBackend> AuthorityPublicKey<B> {
    /// Both halves carry the same exponent: `e(pk_g1, P2) = e(P1, pk_g2)`.
    pub fn is_consistent(&self, suite: &BilinearSuite<B>) -> bool {
        suite.pairing(&self.pk_g1, suite.gen_g2()) == suite.pairing(suite.gen_g1(), &self.pk_g2)
    }
}

/// System setup: the group context for `security_level` plus a fresh KGC key pair.
pub fn setup<B: PairingBackend, R: RngCore + CryptoRng>(
    security_level: u32,
    rng: &mut R,
) -> Result<(BilinearSuite<B>, AuthorityKeyPair<B>)> {
    let suite = BilinearSuite::<B>::for_level(security_level)?;
    let keys = AuthorityKeyPair::generate(&suite, rng);
    Ok((suite, keys))
}

/// `Q2 = H1(id, Q1)`, hashing `id || ser(Q1)`.
pub fn derive_q2<B: PairingBackend>(suite: &BilinearSuite<B>, id: &[u8], q1: &B::G1) -> B::G1 {
    let mut msg = id.to_vec();
    msg.extend_from_slice(&suite.g1_to_bytes(q1));
    suite.hash_to_g1(H1_TAG, &msg)
}

/// `h = H2(m, V)`, hashing `m || ser(V)`.
pub fn message_hash<B: PairingBackend>(suite: &BilinearSuite<B>, m: &[u8], v: &B::G1) -> B::Scalar {
    let mut msg = m.to_vec();
    msg.extend_from_slice(&suite.g1_to_bytes(v));
    suite.hash_to_scalar(H2_TAG, &msg)
}

/// Authority-issued half key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialKey<B: PairingBackend> {
    pub q2: B::G1,
    pub s2: B::G1,
}

/// Key generation center: issues partial keys, each identity at most once.
#[derive(Debug, Clone)]
pub struct KeyGenerationCenter<B: PairingBackend> {
    keys: AuthorityKeyPair<B>,
    issued: HashSet<Vec<u8>>,
}

impl<B: PairingBackend> KeyGenerationCenter<B> {
    pub fn new(keys: AuthorityKeyPair<B>) -> Self {
        KeyGenerationCenter {
            keys,
            issued: HashSet::new(),
        }
    }

    pub fn keys(&self) -> &AuthorityKeyPair<B> {
        &self.keys
    }

    pub fn public(&self) -> &AuthorityPublicKey<B> {
        self.keys.public()
    }

    pub fn is_issued(&self, id: &[u8]) -> bool {
        self.issued.contains(id)
    }

    /// Marks an identity as issued without computing anything (ledger replay).
    pub fn mark_issued(&mut self, id: &[u8]) -> Result<()> {
        if !self.issued.insert(id.to_vec()) {
            return Err(Error::DuplicateIdentity);
        }
        Ok(())
    }

    pub fn set_partial_key(
        &mut self,
        suite: &BilinearSuite<B>,
        id: &[u8],
        q1: &B::G1,
    ) -> Result<PartialKey<B>> {
        if self.issued.contains(id) {
            return Err(Error::DuplicateIdentity);
        }
        let q2 = derive_q2(suite, id, q1);
        let s2 = suite.g1_mul(&q2, &self.keys.sk);
        self.issued.insert(id.to_vec());
        Ok(PartialKey { q2, s2 })
    }
}

/// A signer's key material. Complete once the partial key is installed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticipantKeys<B: PairingBackend> {
    id: Vec<u8>,
    s1: B::Scalar,
    q1: B::G1,
    partial: Option<PartialKey<B>>,
}

impl<B: PairingBackend> ParticipantKeys<B> {
    /// Self-chosen half: `s1` random, `Q1 = s1 * P`.
    pub fn generate<R: RngCore + CryptoRng>(
        suite: &BilinearSuite<B>,
        id: impl Into<Vec<u8>>,
        rng: &mut R,
    ) -> Self {
        let s1 = suite.random_nonzero_scalar(rng);
        let q1 = suite.g1_mul(suite.gen_g1(), &s1);
        ParticipantKeys {
            id: id.into(),
            s1,
            q1,
            partial: None,
        }
    }

    /// Reassembles stored keys, checking `Q1 = s1 * P` and any stored partial key.
    pub fn from_parts(
        suite: &BilinearSuite<B>,
        id: impl Into<Vec<u8>>,
        s1: B::Scalar,
        partial: Option<(PartialKey<B>, &AuthorityPublicKey<B>)>,
    ) -> Result<Self> {
        if B::scalar_is_zero(&s1) {
            return Err(Error::invalid("scalar", "s1 must be nonzero"));
        }
        let q1 = suite.g1_mul(suite.gen_g1(), &s1);
        let mut keys = ParticipantKeys {
            id: id.into(),
            s1,
            q1,
            partial: None,
        };
        if let Some((p, authority)) = partial {
            keys.install_partial_key(suite, authority, p)?;
        }
        Ok(keys)
    }

    /// Installs `S2` after checking `e(S2, P2) = e(Q2, pk_g2)` and that `Q2`
    /// matches this participant's `(id, Q1)`.
    pub fn install_partial_key(
        &mut self,
        suite: &BilinearSuite<B>,
        authority: &AuthorityPublicKey<B>,
        partial: PartialKey<B>,
    ) -> Result<()> {
        if partial.q2 != derive_q2(suite, &self.id, &self.q1) {
            return Err(Error::IssuanceCheckFailed);
        }
        if suite.pairing(&partial.s2, suite.gen_g2())
            != suite.pairing(&partial.q2, &authority.pk_g2)
        {
            return Err(Error::IssuanceCheckFailed);
        }
        self.partial = Some(partial);
        Ok(())
    }

    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn q1(&self) -> &B::G1 {
        &self.q1
    }

    pub fn s1(&self) -> &B::Scalar {
        &self.s1
    }

    pub fn partial(&self) -> Option<&PartialKey<B>> {
        self.partial.as_ref()
    }

    pub fn is_complete(&self) -> bool {
        self.partial.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClasSignature<B: PairingBackend> {
    pub v: B::G1,
    pub u: B::G1,
}

impl<B: PairingBackend> ClasSignature<B> {
    /// Encoding `ser(V) || ser(U)`.
    pub fn to_bytes(&self, suite: &BilinearSuite<B>) -> Vec<u8> {
        let mut out = suite.g1_to_bytes(&self.v);
        out.extend_from_slice(&suite.g1_to_bytes(&self.u));
        out
    }

    /// Parses and rejects identity components.
    pub fn from_bytes(suite: &BilinearSuite<B>, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != 2 * B::G1_BYTES {
            return Err(Error::Malformed("signature length".into()));
        }
        let v = suite.g1_from_bytes(&bytes[..B::G1_BYTES])?;
        let u = suite.g1_from_bytes(&bytes[B::G1_BYTES..])?;
        let sig = ClasSignature { v, u };
        if sig.is_degenerate(suite) {
            return Err(Error::invalid("signature", "identity component"));
        }
        Ok(sig)
    }

    pub fn is_degenerate(&self, suite: &BilinearSuite<B>) -> bool {
        suite.is_g1_identity(&self.u) || suite.is_g1_identity(&self.v)
    }
}

/// Signs `m`. Costs one hash and two scalar multiplications: `k * h * s1` is
/// folded in the scalar field before the single multiplication of `Q_auth`.
pub fn sign<B: PairingBackend, R: RngCore + CryptoRng>(
    suite: &BilinearSuite<B>,
    keys: &ParticipantKeys<B>,
    authority_pk_g1: &B::G1,
    m: &[u8],
    rng: &mut R,
) -> Result<ClasSignature<B>> {
    let partial = keys
        .partial
        .as_ref()
        .ok_or(Error::IncompleteKeys("partial key S2 not installed"))?;
    let k = suite.random_nonzero_scalar(rng);
    let v = suite.g1_mul(&keys.q1, &k);
    let h = message_hash(suite, m, &v);
    let khs = suite.scalar_mul(&suite.scalar_mul(&k, &h), &keys.s1);
    let u = suite.g1_add(&partial.s2, &suite.g1_mul(authority_pk_g1, &khs));
    Ok(ClasSignature { v, u })
}

/// `e(U, P2) = e(Q2 + h * V, pk_g2)` with `Q2`, `h` recomputed.
pub fn verify<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    id: &[u8],
    q1: &B::G1,
    authority_pk_g2: &B::G2,
    m: &[u8],
    sig: &ClasSignature<B>,
) -> bool {
    if sig.is_degenerate(suite) {
        return false;
    }
    let q2 = derive_q2(suite, id, q1);
    let h = message_hash(suite, m, &sig.v);
    let rhs_point = suite.g1_add(&q2, &suite.g1_mul(&sig.v, &h));
    suite.pairing(&sig.u, suite.gen_g2()) == suite.pairing(&rhs_point, authority_pk_g2)
}

/// One signed message for aggregation.
#[derive(Debug, Clone, Copy)]
pub struct AggregateItem<'a, B: PairingBackend> {
    pub id: &'a [u8],
    pub q1: &'a B::G1,
    pub m: &'a [u8],
    pub sig: &'a ClasSignature<B>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateSignature<B: PairingBackend> {
    pub u: B::G1,
    pub v: B::G1,
    pub q2_sum: B::G1,
}

/// `U = sum U_i`, `V = sum h_i V_i`, `Q2_sum = sum H1(id_i, Q1_i)`.
pub fn aggregate<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    items: &[AggregateItem<'_, B>],
) -> Result<AggregateSignature<B>> {
    if items.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut u = suite.g1_identity();
    let mut v = suite.g1_identity();
    let mut q2_sum = suite.g1_identity();
    for item in items {
        let h = message_hash(suite, item.m, &item.sig.v);
        u = suite.g1_add(&u, &item.sig.u);
        v = suite.g1_add(&v, &suite.g1_mul(&item.sig.v, &h));
        q2_sum = suite.g1_add(&q2_sum, &derive_q2(suite, item.id, item.q1));
    }
    Ok(AggregateSignature { u, v, q2_sum })
}

/// Recomputes `sum Q2_i` from the signers' `(id, Q1)` list.
pub fn recompute_q2_sum<'a, B: PairingBackend>(
    suite: &BilinearSuite<B>,
    signers: impl IntoIterator<Item = (&'a [u8], &'a B::G1)>,
) -> B::G1 {
    signers
        .into_iter()
        .fold(suite.g1_identity(), |acc, (id, q1)| {
            suite.g1_add(&acc, &derive_q2(suite, id, q1))
        })
}

/// `e(U, P2) = e(Q2_sum + V, pk_g2)`: two pairings for any batch size.
pub fn aggregate_verify<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    authority_pk_g2: &B::G2,
    agg: &AggregateSignature<B>,
) -> bool {
    let rhs_point = suite.g1_add(&agg.q2_sum, &agg.v);
    suite.pairing(&agg.u, suite.gen_g2()) == suite.pairing(&rhs_point, authority_pk_g2)
}
