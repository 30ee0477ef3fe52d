//! One-slot simulation: register `n` participants, sign, open, batch-verify,
//! optionally with one tampered submission.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::derive_rng;
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};
use crate::mhcs::{
    close_slot_and_batch_verify, ms_init, BatchReport, DataCenter, ManagementServer, Participant,
    Submission, TimeSlot,
};

/// Start of the simulated slot (unix seconds).
pub const SCENARIO_EPOCH: u64 = 1_700_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TamperField {
    M,
    U,
    V,
    SnEnc,
    /// Signed with a timestamp outside the slot window.
    T,
}

impl FromStr for TamperField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "m" => TamperField::M,
            "u" => TamperField::U,
            "v" => TamperField::V,
            "sn_enc" | "sn" => TamperField::SnEnc,
            "t" => TamperField::T,
            other => return Err(Error::Malformed(format!("tamper field {other:?}"))),
        })
    }
}

impl fmt::Display for TamperField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TamperField::M => "m",
            TamperField::U => "u",
            TamperField::V => "v",
            TamperField::SnEnc => "sn_enc",
            TamperField::T => "t",
        })
    }
}

/// `field:index`, index 1-based over participants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperSpec {
    pub index: usize,
    pub field: TamperField,
}

impl FromStr for TamperSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (field, index) = s
            .split_once(':')
            .ok_or_else(|| Error::Malformed(format!("tamper spec {s:?}, expected field:index")))?;
        let index: usize = index
            .parse()
            .map_err(|_| Error::Malformed(format!("tamper index {index:?}")))?;
        if index == 0 {
            return Err(Error::Malformed("tamper index is 1-based".into()));
        }
        Ok(TamperSpec {
            index,
            field: field.parse()?,
        })
    }
}

fn default_message_bits() -> u64 {
    160
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_participants: usize,
    pub slot_duration_s: u64,
    #[serde(default = "default_message_bits")]
    pub message_bits: u64,
    #[serde(default)]
    pub tamper: Option<TamperSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ScenarioConfig {
    pub fn new(n_participants: usize) -> Self {
        ScenarioConfig {
            n_participants,
            slot_duration_s: 60,
            message_bits: default_message_bits(),
            tamper: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_participants == 0 {
            return Err(Error::NonPositiveN);
        }
        if self.slot_duration_s == 0 {
            return Err(Error::Malformed("slot_duration_s must be positive".into()));
        }
        if let Some(t) = &self.tamper {
            if t.index > self.n_participants {
                return Err(Error::Malformed(format!(
                    "tamper index {} exceeds {} participants",
                    t.index, self.n_participants
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub seq: u64,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub report: BatchReport,
    /// MS traces of every accepted submission, in arrival order.
    pub traced: Vec<TraceEntry>,
    /// Verified with nothing rejected.
    pub success: bool,
}

fn flip_byte(bytes: &mut [u8], rng: &mut impl RngCore) {
    if bytes.is_empty() {
        return;
    }
    let i = rng.gen_range(0..bytes.len());
    bytes[i] ^= 1 << rng.gen_range(0..8);
}

/// Applies `field` tampering to a signed submission in transit.
pub fn tamper_submission<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    sub: &mut Submission<B>,
    field: TamperField,
    rng: &mut (impl RngCore + rand::CryptoRng),
) {
    match field {
        TamperField::M => flip_byte(&mut sub.m, rng),
        TamperField::U => sub.u = suite.random_g1(rng),
        TamperField::V => sub.v = suite.random_g1(rng),
        TamperField::SnEnc => flip_byte(&mut sub.sn_enc, rng),
        // produced at signing time; see run_scenario
        TamperField::T => {}
    }
}

pub fn run_scenario<B: PairingBackend>(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let seed = cfg.seed.unwrap_or_else(rand::random);
    let mut rng = derive_rng(seed, b"scenario/init");
    let (suite, ms_keys, dc_keys) = ms_init::<B, _>(B::SECURITY_BITS, &mut rng)?;
    let mut ms = ManagementServer::new(ms_keys);
    let dc = DataCenter::new(dc_keys);
    let ms_pk = ms.public().clone();
    let start = SCENARIO_EPOCH;
    let end = start + cfg.slot_duration_s;
    let mut slot = TimeSlot::<B>::new(0, start, end)?;

    let msg_len = cfg.message_bits.div_ceil(8) as usize;
    for i in 0..cfg.n_participants {
        let mut rng = derive_rng(seed, format!("scenario/participant/{i}").as_bytes());
        let mut p = Participant::new(
            &suite,
            format!("participant-{}", i + 1).into_bytes(),
            &mut rng,
        );
        let grant = ms.register(&suite, p.keys().id(), p.keys().q1(), &mut rng)?;
        p.complete_registration(&suite, &ms_pk, grant)?;

        let mut m = vec![0u8; msg_len];
        rng.fill_bytes(&mut m);
        let tamper = cfg.tamper.filter(|t| t.index == i + 1).map(|t| t.field);
        let t = match tamper {
            Some(TamperField::T) => end + rng.gen_range(0..cfg.slot_duration_s.max(1)),
            _ => start + (i as u64 % cfg.slot_duration_s),
        };
        let mut sub = p.sign(&suite, &ms_pk.pk_g1, dc.public_g1(), &m, t, &mut rng)?;
        if let Some(field) = tamper {
            tamper_submission(&suite, &mut sub, field, &mut rng);
        }
        let _ = dc.dc_open(&suite, sub, &mut slot);
    }

    let report = match close_slot_and_batch_verify(&suite, &slot, &ms_pk.pk_g2) {
        Ok(r) => r,
        Err(Error::EmptySlot) => BatchReport {
            slot_id: slot.slot_id(),
            n: 0,
            verified: false,
            aggregate: crate::mhcs::AggregateWire {
                u: String::new(),
                v: String::new(),
                index_v: String::new(),
            },
            rejected_submissions: slot.rejected().to_vec(),
            offending: Vec::new(),
            localization_pairings: 0,
        },
        Err(e) => return Err(e),
    };
    let traced = slot
        .accepted()
        .iter()
        .map(|o| {
            ms.trace(&o.index_v).map(|id| TraceEntry {
                seq: o.seq,
                id: String::from_utf8_lossy(id).into_owned(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let success = report.verified && report.rejected_submissions.is_empty();
    Ok(ScenarioOutcome {
        report,
        traced,
        success,
    })
}
