use std::collections::HashMap;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::{g1_hex, g1_unhex, scalar_hex, scalar_unhex};
use crate::clas::{derive_q2, AuthorityKeyPair, AuthorityPublicKey, KeyGenerationCenter};
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};

const MAX_INDEX_ATTEMPTS: usize = 16;

/// MS-side serial number: links a pseudonym index to the real identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationRecord<B: PairingBackend> {
    pub id: Vec<u8>,
    pub q1: B::G1,
    pub q2: B::G1,
    pub index_s: B::G1,
    pub index_v: B::G1,
    /// Blinding factor. Secret.
    pub a: B::Scalar,
}

#[derive(Serialize, Deserialize)]
struct RecordWire {
    id: String,
    q1: String,
    q2: String,
    index_s: String,
    index_v: String,
    a: String,
}

impl<B: PairingBackend> RegistrationRecord<B> {
    /// One JSON line; `id` is hex, `a` is a hex scalar.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&RecordWire {
            id: hex::encode(&self.id),
            q1: g1_hex::<B>(&self.q1),
            q2: g1_hex::<B>(&self.q2),
            index_s: g1_hex::<B>(&self.index_s),
            index_v: g1_hex::<B>(&self.index_v),
            a: scalar_hex::<B>(&self.a),
        })
        .expect("record serializes")
    }

    pub fn from_json(line: &str) -> Result<Self> {
        let w: RecordWire = serde_json::from_str(line)
            .map_err(|e| Error::Malformed(format!("ledger line: {e}")))?;
        Ok(RegistrationRecord {
            id: hex::decode(&w.id).map_err(|e| Error::Malformed(format!("ledger id: {e}")))?,
            q1: g1_unhex::<B>(&w.q1)?,
            q2: g1_unhex::<B>(&w.q2)?,
            index_s: g1_unhex::<B>(&w.index_s)?,
            index_v: g1_unhex::<B>(&w.index_v)?,
            a: scalar_unhex::<B>(&w.a)?,
        })
    }
}

/// What the participant receives over the secure registration channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegistrationGrant<B: PairingBackend> {
    pub q2: B::G1,
    pub s2: B::G1,
    pub index_s: B::G1,
    /// Serial number handed to the participant; equal to `index_v`.
    pub sn: B::G1,
}

#[derive(Serialize, Deserialize)]
struct GrantWire {
    q2: String,
    s2: String,
    index_s: String,
    sn: String,
}

impl<B: PairingBackend> RegistrationGrant<B> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&GrantWire {
            q2: g1_hex::<B>(&self.q2),
            s2: g1_hex::<B>(&self.s2),
            index_s: g1_hex::<B>(&self.index_s),
            sn: g1_hex::<B>(&self.sn),
        })
        .expect("grant serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: GrantWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(format!("grant: {e}")))?;
        Ok(RegistrationGrant {
            q2: g1_unhex::<B>(&w.q2)?,
            s2: g1_unhex::<B>(&w.s2)?,
            index_s: g1_unhex::<B>(&w.index_s)?,
            sn: g1_unhex::<B>(&w.sn)?,
        })
    }
}

/// Registrar and tracer. Holds the KGC role and the pseudonym ledger.
#[derive(Debug, Clone)]
pub struct ManagementServer<B: PairingBackend> {
    kgc: KeyGenerationCenter<B>,
    records: Vec<RegistrationRecord<B>>,
    by_index: HashMap<Vec<u8>, usize>,
}

impl<B: PairingBackend> ManagementServer<B> {
    pub fn new(keys: AuthorityKeyPair<B>) -> Self {
        ManagementServer {
            kgc: KeyGenerationCenter::new(keys),
            records: Vec::new(),
            by_index: HashMap::new(),
        }
    }

    /// Rebuilds the server from its persisted ledger.
    pub fn from_records(
        keys: AuthorityKeyPair<B>,
        records: Vec<RegistrationRecord<B>>,
    ) -> Result<Self> {
        let mut ms = Self::new(keys);
        for rec in records {
            ms.kgc.mark_issued(&rec.id)?;
            let key = B::g1_to_bytes(&rec.index_v);
            if ms.by_index.insert(key, ms.records.len()).is_some() {
                return Err(Error::IndexCollision);
            }
            ms.records.push(rec);
        }
        Ok(ms)
    }

    pub fn keys(&self) -> &AuthorityKeyPair<B> {
        self.kgc.keys()
    }

    pub fn public(&self) -> &AuthorityPublicKey<B> {
        self.kgc.public()
    }

    pub fn records(&self) -> &[RegistrationRecord<B>] {
        &self.records
    }

    /// Issues `S2 = s_MS * Q2` and a fresh pseudonym pair
    /// `index_s = a * S2`, `index_v = a * Q2`, with `index_v` unique in the ledger.
    pub fn register<R: RngCore + CryptoRng>(
        &mut self,
        suite: &BilinearSuite<B>,
        id: &[u8],
        q1: &B::G1,
        rng: &mut R,
    ) -> Result<RegistrationGrant<B>> {
        if self.kgc.is_issued(id) {
            return Err(Error::DuplicateIdentity);
        }
        // Q2 first so the index search can run before the identity is consumed.
        let q2 = derive_q2(suite, id, q1);
        let mut found = None;
        for _ in 0..MAX_INDEX_ATTEMPTS {
            let a = suite.random_nonzero_scalar(rng);
            let index_v = suite.g1_mul(&q2, &a);
            let key = B::g1_to_bytes(&index_v);
            if !self.by_index.contains_key(&key) {
                found = Some((a, index_v, key));
                break;
            }
        }
        let (a, index_v, key) = found.ok_or(Error::IndexCollision)?;
        let partial = self.kgc.set_partial_key(suite, id, q1)?;
        let index_s = suite.g1_mul(&partial.s2, &a);
        self.by_index.insert(key, self.records.len());
        self.records.push(RegistrationRecord {
            id: id.to_vec(),
            q1: q1.clone(),
            q2: partial.q2.clone(),
            index_s: index_s.clone(),
            index_v: index_v.clone(),
            a,
        });
        Ok(RegistrationGrant {
            q2: partial.q2,
            s2: partial.s2,
            index_s,
            sn: index_v,
        })
    }

    /// Non-repudiation lookup: the registered identity behind a pseudonym index.
    pub fn trace(&self, index_v: &B::G1) -> Result<&[u8]> {
        self.record_for(index_v).map(|r| r.id.as_slice())
    }

    pub fn record_for(&self, index_v: &B::G1) -> Result<&RegistrationRecord<B>> {
        self.by_index
            .get(&B::g1_to_bytes(index_v))
            .map(|&i| &self.records[i])
            .ok_or(Error::UnknownIndex)
    }

    pub fn ledger_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_json() + "\n").collect()
    }

    pub fn parse_ledger(text: &str) -> Result<Vec<RegistrationRecord<B>>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(RegistrationRecord::from_json)
            .collect()
    }
}
