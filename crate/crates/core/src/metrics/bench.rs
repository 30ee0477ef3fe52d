//! Per-phase operation counts and wall-clock for growing participant counts.
//!
//! Each `n` runs both the plain CL-AS flow (KGC, sign, verify, aggregate,
//! aggregate-verify) and the pseudonymous slot flow (register, sign with
//! envelope, DC open-and-fold, slot verification). Per-item work fans out
//! over a worker pool; every worker measures its own counts and the totals
//! are summed afterwards, since counters are thread-local.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::complexity::{SymbolicCost, OURS};
use super::counter::{measure, OpCounts};
use super::storage::{storage_batch, storage_unbatched, StorageModel};
use crate::clas::{self, AggregateItem, KeyGenerationCenter, ParticipantKeys};
use crate::derive_rng;
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};
use crate::mhcs::{
    batch_verdict, close_slot_and_batch_verify, ms_init, verify_single, DataCenter,
    ManagementServer, Participant, TimeSlot,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n_values: Vec<u64>,
    pub seed: u64,
    pub workers: usize,
    pub message_bits: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_values: vec![1, 10, 100],
            seed: 0,
            workers: 1,
            message_bits: 160,
        }
    }
}

/// Measured totals over all `n` items of a phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasuredPhases {
    pub clas_signing: OpCounts,
    pub clas_verification: OpCounts,
    pub clas_aggregation: OpCounts,
    pub clas_aggregate_verification: OpCounts,
    pub mhcs_registration: OpCounts,
    pub mhcs_signing: OpCounts,
    pub mhcs_open_and_fold: OpCounts,
    pub mhcs_verify_single: OpCounts,
    pub mhcs_batch_verification: OpCounts,
}

/// The complexity-table prediction for this scheme, evaluated at `n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictedPhases {
    pub signing: OpCounts,
    pub verification: OpCounts,
    pub aggregation: OpCounts,
    pub aggregate_verification: OpCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageColumns {
    pub batch_paper: u64,
    pub unbatched_paper: u64,
    pub batch_actual: u64,
    pub unbatched_actual: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: u64,
    pub measured: MeasuredPhases,
    pub predicted: PredictedPhases,
    pub clas_aggregate_verified: bool,
    pub batch_verified: bool,
    pub storage_bits: StorageColumns,
    /// Wall-clock per phase in milliseconds. Hardware-dependent.
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub backend: String,
    pub security_level: u32,
    pub seed: u64,
    pub workers: usize,
    pub message_bits: u64,
    pub rows: Vec<BenchRow>,
}

fn eval(c: &SymbolicCost, n: u64) -> OpCounts {
    c.eval(n)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Malformed(format!("worker pool: {e}")))
}

/// Runs `f` on each index in the pool, each under its own counting scope.
fn fan_out<T: Send>(
    pool: &rayon::ThreadPool,
    n: usize,
    f: impl Fn(usize) -> T + Sync,
) -> (Vec<T>, OpCounts) {
    let results: Vec<(T, OpCounts)> =
        pool.install(|| (0..n).into_par_iter().map(|i| measure(|| f(i))).collect());
    let total = results.iter().map(|(_, c)| *c).sum();
    (results.into_iter().map(|(t, _)| t).collect(), total)
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn message(seed: u64, n: u64, i: usize, bits: u64) -> Vec<u8> {
    use rand::RngCore;
    let mut m = vec![0u8; bits.div_ceil(8) as usize];
    derive_rng(seed, format!("bench/m/{n}/{i}").as_bytes()).fill_bytes(&mut m);
    m
}

pub fn run_benchmark<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    cfg: &BenchConfig,
) -> Result<BenchReport> {
    let pool = pool(cfg.workers)?;
    let mut rows = Vec::new();
    for &n in &cfg.n_values {
        if n == 0 {
            return Err(Error::NonPositiveN);
        }
        rows.push(bench_one(suite, cfg, &pool, n)?);
    }
    Ok(BenchReport {
        backend: B::NAME.to_string(),
        security_level: B::SECURITY_BITS,
        seed: cfg.seed,
        workers: cfg.workers,
        message_bits: cfg.message_bits,
        rows,
    })
}

fn bench_one<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    cfg: &BenchConfig,
    pool: &rayon::ThreadPool,
    n: u64,
) -> Result<BenchRow> {
    let seed = cfg.seed;
    let count = n as usize;
    let mut timings = BTreeMap::new();
    let messages: Vec<Vec<u8>> = (0..count)
        .map(|i| message(seed, n, i, cfg.message_bits))
        .collect();

    // Plain CL-AS.
    let mut rng = derive_rng(seed, format!("bench/kgc/{n}").as_bytes());
    let (_, kgc_keys) = clas::setup::<B, _>(B::SECURITY_BITS, &mut rng)?;
    let mut kgc = KeyGenerationCenter::new(kgc_keys);
    let pk = kgc.public().clone();
    let mut signers = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = derive_rng(seed, format!("bench/clas-keys/{n}/{i}").as_bytes());
        let id = format!("participant-{i}").into_bytes();
        let mut keys = ParticipantKeys::generate(suite, id.clone(), &mut rng);
        let partial = kgc.set_partial_key(suite, &id, keys.q1())?;
        keys.install_partial_key(suite, &pk, partial)?;
        signers.push(keys);
    }

    let t = Instant::now();
    let (sigs, clas_signing) = fan_out(pool, count, |i| {
        let mut rng = derive_rng(seed, format!("bench/clas-sign/{n}/{i}").as_bytes());
        clas::sign(suite, &signers[i], &pk.pk_g1, &messages[i], &mut rng)
    });
    timings.insert("clas_signing".into(), ms_since(t));
    let sigs = sigs.into_iter().collect::<Result<Vec<_>>>()?;

    let t = Instant::now();
    let (oks, clas_verification) = fan_out(pool, count, |i| {
        clas::verify(
            suite,
            signers[i].id(),
            signers[i].q1(),
            &pk.pk_g2,
            &messages[i],
            &sigs[i],
        )
    });
    timings.insert("clas_verification".into(), ms_since(t));
    if oks.iter().any(|ok| !ok) {
        return Err(Error::Malformed("honest signature failed to verify".into()));
    }

    let items: Vec<AggregateItem<'_, B>> = (0..count)
        .map(|i| AggregateItem {
            id: signers[i].id(),
            q1: signers[i].q1(),
            m: &messages[i],
            sig: &sigs[i],
        })
        .collect();
    let t = Instant::now();
    let (agg, clas_aggregation) = measure(|| clas::aggregate(suite, &items));
    timings.insert("clas_aggregation".into(), ms_since(t));
    let agg = agg?;
    let t = Instant::now();
    let (clas_ok, clas_aggregate_verification) =
        measure(|| clas::aggregate_verify(suite, &pk.pk_g2, &agg));
    timings.insert("clas_aggregate_verification".into(), ms_since(t));

    // Pseudonymous slot flow.
    let mut rng = derive_rng(seed, format!("bench/ms-init/{n}").as_bytes());
    let (_, ms_keys, dc_keys) = ms_init::<B, _>(B::SECURITY_BITS, &mut rng)?;
    let mut ms = ManagementServer::new(ms_keys);
    let dc = DataCenter::new(dc_keys);
    let ms_pk = ms.public().clone();
    let t = Instant::now();
    let (participants, mhcs_registration) = measure(|| -> Result<Vec<Participant<B>>> {
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut rng = derive_rng(seed, format!("bench/register/{n}/{i}").as_bytes());
            let mut p = Participant::new(suite, format!("participant-{i}").into_bytes(), &mut rng);
            let grant = ms.register(suite, p.keys().id(), p.keys().q1(), &mut rng)?;
            p.complete_registration(suite, &ms_pk, grant)?;
            out.push(p);
        }
        Ok(out)
    });
    timings.insert("mhcs_registration".into(), ms_since(t));
    let participants = participants?;

    let slot_start = 1_000_000u64;
    let t = Instant::now();
    let (subs, mhcs_signing) = fan_out(pool, count, |i| {
        let mut rng = derive_rng(seed, format!("bench/mhcs-sign/{n}/{i}").as_bytes());
        participants[i].sign(
            suite,
            &ms_pk.pk_g1,
            dc.public_g1(),
            &messages[i],
            slot_start + i as u64,
            &mut rng,
        )
    });
    timings.insert("mhcs_signing".into(), ms_since(t));
    let subs = subs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut slot = TimeSlot::<B>::new(0, slot_start, slot_start + n + 1)?;
    let t = Instant::now();
    let (opened, mhcs_open_and_fold) = measure(|| {
        let mut all_opened = true;
        for s in subs {
            all_opened &= dc.dc_open(suite, s, &mut slot).is_ok();
        }
        all_opened
    });
    timings.insert("mhcs_open_and_fold".into(), ms_since(t));
    if !opened {
        return Err(Error::Malformed("honest submission rejected".into()));
    }

    let t = Instant::now();
    let (singles, mhcs_verify_single) = fan_out(pool, count, |i| {
        verify_single(suite, &slot.accepted()[i], &ms_pk.pk_g2)
    });
    timings.insert("mhcs_verify_single".into(), ms_since(t));
    if singles.iter().any(|ok| !ok) {
        return Err(Error::Malformed(
            "honest submission failed single verification".into(),
        ));
    }

    let (u, v, iv) = slot.sums();
    let t = Instant::now();
    let (batch_ok, mhcs_batch_verification) =
        measure(|| batch_verdict(suite, u, v, iv, &ms_pk.pk_g2));
    timings.insert("mhcs_batch_verification".into(), ms_since(t));
    let report = close_slot_and_batch_verify(suite, &slot, &ms_pk.pk_g2)?;
    debug_assert_eq!(report.verified, batch_ok);

    let paper = StorageModel::paper();
    let actual = StorageModel::actual::<B>(cfg.message_bits);
    Ok(BenchRow {
        n,
        measured: MeasuredPhases {
            clas_signing,
            clas_verification,
            clas_aggregation,
            clas_aggregate_verification,
            mhcs_registration,
            mhcs_signing,
            mhcs_open_and_fold,
            mhcs_verify_single,
            mhcs_batch_verification,
        },
        predicted: PredictedPhases {
            signing: eval(&OURS.signing, n),
            verification: eval(&OURS.verification, n),
            aggregation: eval(&OURS.aggregation, n),
            aggregate_verification: eval(&OURS.aggregate_verification, n),
        },
        clas_aggregate_verified: clas_ok,
        batch_verified: batch_ok,
        storage_bits: StorageColumns {
            batch_paper: storage_batch(n, &paper)?,
            unbatched_paper: storage_unbatched(n, &paper)?,
            batch_actual: storage_batch(n, &actual)?,
            unbatched_actual: storage_unbatched(n, &actual)?,
        },
        timings_ms: timings,
    })
}

const CSV_COLUMNS: &[&str] = &[
    "n",
    "sign_h",
    "sign_s",
    "sign_p",
    "verify_h",
    "verify_s",
    "verify_p",
    "aggregation_h",
    "aggregation_s",
    "pairings_aggregate_verify",
    "mhcs_sign_h",
    "mhcs_sign_s",
    "mhcs_sign_envelope",
    "mhcs_open_h",
    "mhcs_open_s",
    "mhcs_verify_single_s",
    "mhcs_verify_single_p",
    "pairings_batch_verify",
    "predicted_sign_s",
    "predicted_aggregation_s",
    "verified",
    "storage_batch_paper",
    "storage_unbatched_paper",
    "storage_batch_actual",
    "storage_unbatched_actual",
    "time_clas_signing_ms",
    "time_clas_verification_ms",
    "time_clas_aggregate_verification_ms",
    "time_mhcs_batch_verification_ms",
];

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with wall-clock fields removed; byte-identical across runs with one seed.
    pub fn to_json_without_timings(&self) -> String {
        let mut copy = self.clone();
        for r in &mut copy.rows {
            r.timings_ms.clear();
        }
        copy.to_json()
    }

    pub fn to_csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let m = &r.measured;
            let time = |k: &str| format!("{:.3}", r.timings_ms.get(k).copied().unwrap_or(0.0));
            let fields: Vec<String> = vec![
                r.n.to_string(),
                m.clas_signing.hash.to_string(),
                m.clas_signing.scalar_mul.to_string(),
                m.clas_signing.pairing.to_string(),
                m.clas_verification.hash.to_string(),
                m.clas_verification.scalar_mul.to_string(),
                m.clas_verification.pairing.to_string(),
                m.clas_aggregation.hash.to_string(),
                m.clas_aggregation.scalar_mul.to_string(),
                m.clas_aggregate_verification.pairing.to_string(),
                m.mhcs_signing.hash.to_string(),
                m.mhcs_signing.scalar_mul.to_string(),
                m.mhcs_signing.envelope.to_string(),
                m.mhcs_open_and_fold.hash.to_string(),
                m.mhcs_open_and_fold.scalar_mul.to_string(),
                m.mhcs_verify_single.scalar_mul.to_string(),
                m.mhcs_verify_single.pairing.to_string(),
                m.mhcs_batch_verification.pairing.to_string(),
                r.predicted.signing.scalar_mul.to_string(),
                r.predicted.aggregation.scalar_mul.to_string(),
                (r.clas_aggregate_verified && r.batch_verified).to_string(),
                r.storage_bits.batch_paper.to_string(),
                r.storage_bits.unbatched_paper.to_string(),
                r.storage_bits.batch_actual.to_string(),
                r.storage_bits.unbatched_actual.to_string(),
                time("clas_signing"),
                time("clas_verification"),
                time("clas_aggregate_verification"),
                time("mhcs_batch_verification"),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text table: measured counts next to the predictions.
    pub fn to_table(&self) -> String {
        let mut lines: Vec<[String; 5]> = vec![[
            "n".into(),
            "phase".into(),
            "measured".into(),
            "predicted".into(),
            "ms".into(),
        ]];
        for r in &self.rows {
            let m = &r.measured;
            let p = &r.predicted;
            let t = |k: &str| format!("{:.2}", r.timings_ms.get(k).copied().unwrap_or(0.0));
            let rows: [(&str, OpCounts, String, &str); 9] = [
                (
                    "signing",
                    m.clas_signing,
                    p.signing.to_string(),
                    "clas_signing",
                ),
                (
                    "verification",
                    m.clas_verification,
                    p.verification.to_string(),
                    "clas_verification",
                ),
                (
                    "aggregation",
                    m.clas_aggregation,
                    p.aggregation.to_string(),
                    "clas_aggregation",
                ),
                (
                    "aggregate verification",
                    m.clas_aggregate_verification,
                    p.aggregate_verification.to_string(),
                    "clas_aggregate_verification",
                ),
                (
                    "slot: registration",
                    m.mhcs_registration,
                    "-".into(),
                    "mhcs_registration",
                ),
                (
                    "slot: signing",
                    m.mhcs_signing,
                    p.signing.to_string(),
                    "mhcs_signing",
                ),
                (
                    "slot: open and fold",
                    m.mhcs_open_and_fold,
                    p.aggregation.to_string(),
                    "mhcs_open_and_fold",
                ),
                (
                    "slot: verify each",
                    m.mhcs_verify_single,
                    "-".into(),
                    "mhcs_verify_single",
                ),
                (
                    "slot: batch verify",
                    m.mhcs_batch_verification,
                    p.aggregate_verification.to_string(),
                    "mhcs_batch_verification",
                ),
            ];
            for (name, measured, predicted, key) in rows {
                lines.push([
                    r.n.to_string(),
                    name.into(),
                    measured.to_string(),
                    predicted,
                    t(key),
                ]);
            }
            lines.push([
                r.n.to_string(),
                "storage bits (batch/unbatched)".into(),
                format!(
                    "{}/{} actual",
                    r.storage_bits.batch_actual, r.storage_bits.unbatched_actual
                ),
                format!(
                    "{}/{} paper",
                    r.storage_bits.batch_paper, r.storage_bits.unbatched_paper
                ),
                String::new(),
            ]);
        }
        let widths: Vec<usize> = (0..5)
            .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for l in &lines {
            let mut line = String::new();
            for (c, cell) in l.iter().enumerate() {
                let _ = write!(line, "{:<w$}  ", cell, w = widths[c]);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}
