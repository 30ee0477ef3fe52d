use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{g1_hex, g1_unhex};
use crate::error::{Error, Result};
use crate::group::PairingBackend;

/// Participant to DC upload `<U, V, m, SN'>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submission<B: PairingBackend> {
    pub u: B::G1,
    pub v: B::G1,
    pub m: Vec<u8>,
    pub sn_enc: Vec<u8>,
}

/// JSON shape of a [`Submission`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmissionWire {
    pub u: String,
    pub v: String,
    pub m: String,
    pub sn_enc: String,
}

impl<B: PairingBackend> Submission<B> {
    pub fn to_wire(&self) -> SubmissionWire {
        SubmissionWire {
            u: g1_hex::<B>(&self.u),
            v: g1_hex::<B>(&self.v),
            m: B64.encode(&self.m),
            sn_enc: B64.encode(&self.sn_enc),
        }
    }

    pub fn from_wire(w: &SubmissionWire) -> Result<Self> {
        let b64 = |field: &str, s: &str| {
            B64.decode(s)
                .map_err(|e| Error::Malformed(format!("submission {field}: {e}")))
        };
        Ok(Submission {
            u: g1_unhex::<B>(&w.u)?,
            v: g1_unhex::<B>(&w.v)?,
            m: b64("m", &w.m)?,
            sn_enc: b64("sn_enc", &w.sn_enc)?,
        })
    }

    /// `{"u": hex, "v": hex, "m": base64, "sn_enc": base64}` on one line.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_wire()).expect("submission serializes")
    }

    /// Parses and validates both group elements.
    pub fn from_json(s: &str) -> Result<Self> {
        let w: SubmissionWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(format!("submission: {e}")))?;
        Self::from_wire(&w)
    }

    pub fn parse_jsonl(text: &str) -> Result<Vec<Self>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(Self::from_json)
            .collect()
    }

    /// Raw bytes: `ser(U) || ser(V) || len(m) || m || sn_enc`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = B::g1_to_bytes(&self.u);
        out.extend_from_slice(&B::g1_to_bytes(&self.v));
        out.extend_from_slice(&(self.m.len() as u64).to_be_bytes());
        out.extend_from_slice(&self.m);
        out.extend_from_slice(&self.sn_enc);
        out
    }

    pub fn digest(&self) -> [u8; 32] {
        Sha256::digest(self.to_bytes()).into()
    }
}
