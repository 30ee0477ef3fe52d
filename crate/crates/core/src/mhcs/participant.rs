use rand::{CryptoRng, RngCore};

use super::{g1_hex, g1_unhex, scalar_hex, scalar_unhex, RegistrationGrant, Submission};
use crate::clas::{message_hash, AuthorityPublicKey, PartialKey, ParticipantKeys};
use crate::envelope::{seal, SerialPlaintext};
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};

/// `h = H2(m || t, V)` with `t` as 8 big-endian bytes.
pub fn hash_with_time<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    m: &[u8],
    t: u64,
    v: &B::G1,
) -> B::Scalar {
    let mut mt = m.to_vec();
    mt.extend_from_slice(&t.to_be_bytes());
    message_hash(suite, &mt, v)
}

/// A crowd-sensing participant: CL-AS keys plus its pseudonym pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participant<B: PairingBackend> {
    keys: ParticipantKeys<B>,
    index_s: Option<B::G1>,
    sn: Option<B::G1>,
}

impl<B: PairingBackend> Participant<B> {
    pub fn new<R: RngCore + CryptoRng>(
        suite: &BilinearSuite<B>,
        id: impl Into<Vec<u8>>,
        rng: &mut R,
    ) -> Self {
        Participant {
            keys: ParticipantKeys::generate(suite, id, rng),
            index_s: None,
            sn: None,
        }
    }

    pub fn from_parts(keys: ParticipantKeys<B>, index_s: Option<B::G1>, sn: Option<B::G1>) -> Self {
        Participant { keys, index_s, sn }
    }

    pub fn keys(&self) -> &ParticipantKeys<B> {
        &self.keys
    }

    pub fn index_s(&self) -> Option<&B::G1> {
        self.index_s.as_ref()
    }

    pub fn sn(&self) -> Option<&B::G1> {
        self.sn.as_ref()
    }

    pub fn is_registered(&self) -> bool {
        self.index_s.is_some() && self.sn.is_some()
    }

    /// Checks the partial key and `e(index_s, P2) = e(index_v, Q_MS)` before storing.
    pub fn complete_registration(
        &mut self,
        suite: &BilinearSuite<B>,
        ms_public: &AuthorityPublicKey<B>,
        grant: RegistrationGrant<B>,
    ) -> Result<()> {
        self.keys.install_partial_key(
            suite,
            ms_public,
            PartialKey {
                q2: grant.q2,
                s2: grant.s2,
            },
        )?;
        if suite.pairing(&grant.index_s, suite.gen_g2())
            != suite.pairing(&grant.sn, &ms_public.pk_g2)
        {
            return Err(Error::IssuanceCheckFailed);
        }
        self.index_s = Some(grant.index_s);
        self.sn = Some(grant.sn);
        Ok(())
    }

    /// `V = k Q1`, `h = H2(m || t, V)`, `U = index_s + (k h s1) Q_MS`,
    /// `SN' = seal(Q_DC, index_v || h || t)`.
    pub fn sign<R: RngCore + CryptoRng>(
        &self,
        suite: &BilinearSuite<B>,
        ms_pk_g1: &B::G1,
        dc_pub: &B::G1,
        m: &[u8],
        t: u64,
        rng: &mut R,
    ) -> Result<Submission<B>> {
        let (Some(index_s), Some(sn)) = (&self.index_s, &self.sn) else {
            return Err(Error::IncompleteRegistration);
        };
        let k = suite.random_nonzero_scalar(rng);
        let v = suite.g1_mul(self.keys.q1(), &k);
        let h = hash_with_time(suite, m, t, &v);
        let khs = suite.scalar_mul(&suite.scalar_mul(&k, &h), self.keys.s1());
        let u = suite.g1_add(index_s, &suite.g1_mul(ms_pk_g1, &khs));
        let plaintext = SerialPlaintext::<B> {
            index_v: sn.clone(),
            h,
            t,
        };
        let sealed = seal(suite, dc_pub, &plaintext.to_bytes(), rng);
        Ok(Submission {
            u,
            v,
            m: m.to_vec(),
            sn_enc: sealed.to_bytes(),
        })
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct ParticipantWire {
    backend: String,
    id: String,
    s1: String,
    q1: String,
    q2: Option<String>,
    s2: Option<String>,
    index_s: Option<String>,
    sn: Option<String>,
}

impl<B: PairingBackend> Participant<B> {
    /// Secret participant state; `id` is hex.
    pub fn to_json(&self) -> String {
        let partial = self.keys.partial();
        serde_json::to_string_pretty(&ParticipantWire {
            backend: B::NAME.to_string(),
            id: hex::encode(self.keys.id()),
            s1: scalar_hex::<B>(self.keys.s1()),
            q1: g1_hex::<B>(self.keys.q1()),
            q2: partial.map(|p| g1_hex::<B>(&p.q2)),
            s2: partial.map(|p| g1_hex::<B>(&p.s2)),
            index_s: self.index_s.as_ref().map(g1_hex::<B>),
            sn: self.sn.as_ref().map(g1_hex::<B>),
        })
        .expect("participant serializes")
    }

    /// Restores and re-runs the issuance checks against `ms_public`.
    pub fn from_json(
        suite: &BilinearSuite<B>,
        ms_public: &AuthorityPublicKey<B>,
        s: &str,
    ) -> Result<Self> {
        let w: ParticipantWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(format!("participant: {e}")))?;
        if w.backend != B::NAME {
            return Err(Error::Malformed(format!(
                "participant for backend {}",
                w.backend
            )));
        }
        let id =
            hex::decode(&w.id).map_err(|e| Error::Malformed(format!("participant id: {e}")))?;
        let s1 = scalar_unhex::<B>(&w.s1)?;
        let partial = match (&w.q2, &w.s2) {
            (Some(q2), Some(s2)) => Some(PartialKey {
                q2: g1_unhex::<B>(q2)?,
                s2: g1_unhex::<B>(s2)?,
            }),
            _ => None,
        };
        let keys = ParticipantKeys::from_parts(suite, id, s1, partial.map(|p| (p, ms_public)))?;
        if g1_hex::<B>(keys.q1()) != w.q1 {
            return Err(Error::Malformed("stored Q1 does not match s1".into()));
        }
        let mut p = Participant::from_parts(keys, None, None);
        if let (Some(is), Some(sn)) = (&w.index_s, &w.sn) {
            let (index_s, sn) = (g1_unhex::<B>(is)?, g1_unhex::<B>(sn)?);
            if suite.pairing(&index_s, suite.gen_g2()) != suite.pairing(&sn, &ms_public.pk_g2) {
                return Err(Error::IssuanceCheckFailed);
            }
            p.index_s = Some(index_s);
            p.sn = Some(sn);
        }
        Ok(p)
    }
}
