//! Anonymous batch-verified submission protocol built on [`crate::clas`].
//!
//! Roles: the management server (MS) registers participants under blinded
//! pseudonym indices and is the only party able to trace them; participants
//! sign health data with a timestamp and a sealed serial number; the data
//! center (DC) opens submissions, folds them into a time slot and verifies
//! the whole slot with two pairings.

mod dc;
mod ms;
mod participant;
mod submission;

pub use dc::{
    batch_verdict, close_slot_and_batch_verify, open_submission, verify_single, AggregateWire,
    BatchReport, DataCenter, OpenedSubmission, OpenedWire, RejectedEntry, Rejection, SlotWire,
    TimeSlot,
};
pub use ms::{ManagementServer, RegistrationGrant, RegistrationRecord};
pub use participant::{hash_with_time, Participant};
pub use submission::{Submission, SubmissionWire};

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::clas::{AuthorityKeyPair, AuthorityPublicKey};
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};

/// System initialization: the suite, the MS key pair and the DC long-term key pair.
pub fn ms_init<B: PairingBackend, R: RngCore + CryptoRng>(
    security_level: u32,
    rng: &mut R,
) -> Result<(BilinearSuite<B>, AuthorityKeyPair<B>, AuthorityKeyPair<B>)> {
    let suite = BilinearSuite::<B>::for_level(security_level)?;
    let ms = AuthorityKeyPair::generate(&suite, rng);
    let dc = AuthorityKeyPair::generate(&suite, rng);
    Ok((suite, ms, dc))
}

pub(crate) fn g1_hex<B: PairingBackend>(p: &B::G1) -> String {
    hex::encode(B::g1_to_bytes(p))
}

pub(crate) fn g1_unhex<B: PairingBackend>(s: &str) -> Result<B::G1> {
    B::g1_from_bytes(&hex::decode(s).map_err(|e| Error::invalid("G1", e.to_string()))?)
}

pub(crate) fn scalar_hex<B: PairingBackend>(s: &B::Scalar) -> String {
    hex::encode(B::scalar_to_bytes(s))
}

pub(crate) fn scalar_unhex<B: PairingBackend>(s: &str) -> Result<B::Scalar> {
    B::scalar_from_bytes(&hex::decode(s).map_err(|e| Error::invalid("scalar", e.to_string()))?)
}

/// JSON form of an authority's public key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeyWire {
    pub backend: String,
    pub pk_g1: String,
    pub pk_g2: String,
}

/// JSON form of an authority key pair, secret included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKeyWire {
    pub backend: String,
    pub sk: String,
    pub pk_g1: String,
    pub pk_g2: String,
}

impl PublicKeyWire {
    pub fn from_key<B: PairingBackend>(pk: &AuthorityPublicKey<B>) -> Self {
        PublicKeyWire {
            backend: B::NAME.to_string(),
            pk_g1: g1_hex::<B>(&pk.pk_g1),
            pk_g2: hex::encode(B::g2_to_bytes(&pk.pk_g2)),
        }
    }

    /// Parses and checks that both halves share one exponent.
    pub fn to_key<B: PairingBackend>(
        &self,
        suite: &BilinearSuite<B>,
    ) -> Result<AuthorityPublicKey<B>> {
        if self.backend != B::NAME {
            return Err(Error::Malformed(format!(
                "key for backend {}",
                self.backend
            )));
        }
        let pk = AuthorityPublicKey {
            pk_g1: g1_unhex::<B>(&self.pk_g1)?,
            pk_g2: suite.g2_from_hex(&self.pk_g2)?,
        };
        if !pk.is_consistent(suite) {
            return Err(Error::Malformed("public key halves disagree".into()));
        }
        Ok(pk)
    }
}

impl SecretKeyWire {
    pub fn from_keys<B: PairingBackend>(keys: &AuthorityKeyPair<B>) -> Self {
        let public = PublicKeyWire::from_key(keys.public());
        SecretKeyWire {
            backend: public.backend,
            sk: scalar_hex::<B>(keys.secret()),
            pk_g1: public.pk_g1,
            pk_g2: public.pk_g2,
        }
    }

    /// Rebuilds the pair from `sk` and checks the stored public halves against it.
    pub fn to_keys<B: PairingBackend>(
        &self,
        suite: &BilinearSuite<B>,
    ) -> Result<AuthorityKeyPair<B>> {
        if self.backend != B::NAME {
            return Err(Error::Malformed(format!(
                "key for backend {}",
                self.backend
            )));
        }
        let keys = AuthorityKeyPair::from_secret(suite, scalar_unhex::<B>(&self.sk)?)?;
        if g1_hex::<B>(&keys.public().pk_g1) != self.pk_g1
            || hex::encode(B::g2_to_bytes(&keys.public().pk_g2)) != self.pk_g2
        {
            return Err(Error::Malformed(
                "stored public key does not match secret".into(),
            ));
        }
        Ok(keys)
    }
}
