use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    g1_hex, g1_unhex, hash_with_time, scalar_hex, scalar_unhex, Submission, SubmissionWire,
};
use crate::clas::AuthorityKeyPair;
use crate::envelope::{open_bytes, SerialPlaintext};
use crate::error::{Error, Result};
use crate::group::{BilinearSuite, PairingBackend};

/// Why the DC refused a submission at open time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    /// Envelope failed authentication or its plaintext did not parse.
    DecryptFailure,
    /// Sealed `h` differs from `H2(m || t, V)`.
    HashMismatch,
    /// `t` lies outside `[start, end)`.
    StaleTimestamp,
    /// Byte-identical submission already accepted into this slot.
    Replay,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rejection::DecryptFailure => "decrypt-failure",
            Rejection::HashMismatch => "hash-mismatch",
            Rejection::StaleTimestamp => "stale-timestamp",
            Rejection::Replay => "replay",
        })
    }
}

/// A submission whose envelope opened and whose checks passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenedSubmission<B: PairingBackend> {
    pub submission: Submission<B>,
    pub index_v: B::G1,
    pub h: B::Scalar,
    pub t: u64,
    /// Arrival sequence number within the slot.
    pub seq: u64,
}

/// Decrypts `SN'`, recomputes `h` and checks freshness. Pure: no slot mutation.
pub fn open_submission<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    dc_sk: &B::Scalar,
    sub: &Submission<B>,
    start: u64,
    end: u64,
) -> std::result::Result<(B::G1, B::Scalar, u64), Rejection> {
    let plain = open_bytes::<B>(dc_sk, &sub.sn_enc).map_err(|_| Rejection::DecryptFailure)?;
    let sp = SerialPlaintext::<B>::from_bytes(&plain).map_err(|_| Rejection::DecryptFailure)?;
    if hash_with_time(suite, &sub.m, sp.t, &sub.v) != sp.h {
        return Err(Rejection::HashMismatch);
    }
    if sp.t < start || sp.t >= end {
        return Err(Rejection::StaleTimestamp);
    }
    Ok((sp.index_v, sp.h, sp.t))
}

/// `e(U, P2) = e(index_v + h V, Q_MS)`. Uses the transported `h`: no hashing.
pub fn verify_single<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    opened: &OpenedSubmission<B>,
    ms_pk_g2: &B::G2,
) -> bool {
    let sub = &opened.submission;
    if suite.is_g1_identity(&sub.u) || suite.is_g1_identity(&sub.v) {
        return false;
    }
    let rhs = suite.g1_add(&opened.index_v, &suite.g1_mul(&sub.v, &opened.h));
    suite.pairing(&sub.u, suite.gen_g2()) == suite.pairing(&rhs, ms_pk_g2)
}

/// The two-pairing slot equation `e(U, P2) = e(index_v + V, Q_MS)` on folded sums.
pub fn batch_verdict<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    sum_u: &B::G1,
    sum_v: &B::G1,
    sum_index_v: &B::G1,
    ms_pk_g2: &B::G2,
) -> bool {
    let rhs = suite.g1_add(sum_index_v, sum_v);
    suite.pairing(sum_u, suite.gen_g2()) == suite.pairing(&rhs, ms_pk_g2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedEntry {
    pub seq: u64,
    pub reason: Rejection,
}

/// One aggregation window `[start, end)` with its running sums.
#[derive(Debug, Clone)]
pub struct TimeSlot<B: PairingBackend> {
    slot_id: u64,
    start: u64,
    end: u64,
    accepted: Vec<OpenedSubmission<B>>,
    weighted_v: Vec<B::G1>,
    rejected: Vec<RejectedEntry>,
    sum_u: B::G1,
    sum_v: B::G1,
    sum_index_v: B::G1,
    next_seq: u64,
    digests: HashSet<[u8; 32]>,
}

impl<B: PairingBackend> TimeSlot<B> {
    pub fn new(slot_id: u64, start: u64, end: u64) -> Result<Self> {
        if end <= start {
            return Err(Error::Malformed("slot window must be non-empty".into()));
        }
        Ok(TimeSlot {
            slot_id,
            start,
            end,
            accepted: Vec::new(),
            weighted_v: Vec::new(),
            rejected: Vec::new(),
            sum_u: B::g1_identity(),
            sum_v: B::g1_identity(),
            sum_index_v: B::g1_identity(),
            next_seq: 0,
            digests: HashSet::new(),
        })
    }

    pub fn slot_id(&self) -> u64 {
        self.slot_id
    }

    pub fn window(&self) -> (u64, u64) {
        (self.start, self.end)
    }

    pub fn contains(&self, t: u64) -> bool {
        self.start <= t && t < self.end
    }

    pub fn accepted(&self) -> &[OpenedSubmission<B>] {
        &self.accepted
    }

    pub fn rejected(&self) -> &[RejectedEntry] {
        &self.rejected
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    /// Running `(sum U, sum h V, sum index_v)`.
    pub fn sums(&self) -> (&B::G1, &B::G1, &B::G1) {
        (&self.sum_u, &self.sum_v, &self.sum_index_v)
    }

    /// Recomputes the sums from the accepted list, independently of the running fold.
    pub fn recompute_sums(&self) -> (B::G1, B::G1, B::G1) {
        let mut u = B::g1_identity();
        let mut v = B::g1_identity();
        let mut iv = B::g1_identity();
        for o in &self.accepted {
            u = B::g1_add(&u, &o.submission.u);
            v = B::g1_add(&v, &B::g1_mul(&o.submission.v, &o.h));
            iv = B::g1_add(&iv, &o.index_v);
        }
        (u, v, iv)
    }

    fn next_seq(&mut self) -> u64 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    fn reject(&mut self, seq: u64, reason: Rejection) -> Rejection {
        self.rejected.push(RejectedEntry { seq, reason });
        reason
    }

    /// Appends an opened submission and folds `U`, `h V` and `index_v` into the sums.
    fn accept(&mut self, suite: &BilinearSuite<B>, opened: OpenedSubmission<B>, digest: [u8; 32]) {
        let hv = suite.g1_mul(&opened.submission.v, &opened.h);
        self.sum_u = suite.g1_add(&self.sum_u, &opened.submission.u);
        self.sum_v = suite.g1_add(&self.sum_v, &hv);
        self.sum_index_v = suite.g1_add(&self.sum_index_v, &opened.index_v);
        self.weighted_v.push(hv);
        self.digests.insert(digest);
        self.accepted.push(opened);
    }

    /// Test hook: replace `U` of an accepted submission after the fact, keeping
    /// the running sums consistent. Models corruption past `dc_open`.
    pub fn corrupt_u(&mut self, suite: &BilinearSuite<B>, position: usize, new_u: B::G1) {
        let old = self.accepted[position].submission.u.clone();
        self.sum_u = suite.g1_add(&suite.g1_add(&self.sum_u, &suite.g1_neg(&old)), &new_u);
        self.accepted[position].submission.u = new_u;
    }
}

/// DC role: holds the long-term key pair used to open serial-number envelopes.
#[derive(Debug, Clone)]
pub struct DataCenter<B: PairingBackend> {
    keys: AuthorityKeyPair<B>,
}

impl<B: PairingBackend> DataCenter<B> {
    pub fn new(keys: AuthorityKeyPair<B>) -> Self {
        DataCenter { keys }
    }

    pub fn keys(&self) -> &AuthorityKeyPair<B> {
        &self.keys
    }

    pub fn public_g1(&self) -> &B::G1 {
        &self.keys.public().pk_g1
    }

    /// Opens a submission into `slot`. On success returns its sequence number;
    /// on failure the reason is also logged in the slot.
    pub fn dc_open(
        &self,
        suite: &BilinearSuite<B>,
        sub: Submission<B>,
        slot: &mut TimeSlot<B>,
    ) -> std::result::Result<u64, Rejection> {
        let seq = slot.next_seq();
        let digest = sub.digest();
        if slot.digests.contains(&digest) {
            return Err(slot.reject(seq, Rejection::Replay));
        }
        match open_submission(suite, self.keys.secret(), &sub, slot.start, slot.end) {
            Ok((index_v, h, t)) => {
                let opened = OpenedSubmission {
                    submission: sub,
                    index_v,
                    h,
                    t,
                    seq,
                };
                slot.accept(suite, opened, digest);
                Ok(seq)
            }
            Err(reason) => Err(slot.reject(seq, reason)),
        }
    }
}

/// Slot verdict plus aggregate values and rejection log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchReport {
    pub slot_id: u64,
    pub n: usize,
    pub verified: bool,
    pub aggregate: AggregateWire,
    pub rejected_submissions: Vec<RejectedEntry>,
    /// Sequence numbers isolated by bisection when the verdict is false.
    pub offending: Vec<u64>,
    /// Pairings spent on bisection, on top of the two for the verdict.
    pub localization_pairings: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregateWire {
    pub u: String,
    pub v: String,
    pub index_v: String,
}

impl BatchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Batch verification of a closed slot; bisects to locate bad submissions on failure.
pub fn close_slot_and_batch_verify<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    slot: &TimeSlot<B>,
    ms_pk_g2: &B::G2,
) -> Result<BatchReport> {
    if slot.is_empty() {
        return Err(Error::EmptySlot);
    }
    let (u, v, iv) = slot.sums();
    let verified = batch_verdict(suite, u, v, iv, ms_pk_g2);
    let mut offending = Vec::new();
    let mut pairings = 0;
    if !verified {
        let all: Vec<usize> = (0..slot.len()).collect();
        bisect(suite, slot, ms_pk_g2, &all, &mut offending, &mut pairings);
        offending.sort_unstable();
    }
    Ok(BatchReport {
        slot_id: slot.slot_id,
        n: slot.len(),
        verified,
        aggregate: AggregateWire {
            u: g1_hex::<B>(u),
            v: g1_hex::<B>(v),
            index_v: g1_hex::<B>(iv),
        },
        rejected_submissions: slot.rejected.clone(),
        offending,
        localization_pairings: pairings,
    })
}

fn subset_holds<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    slot: &TimeSlot<B>,
    pk: &B::G2,
    idx: &[usize],
    pairings: &mut u64,
) -> bool {
    let mut u = B::g1_identity();
    let mut rhs = B::g1_identity();
    for &i in idx {
        u = B::g1_add(&u, &slot.accepted[i].submission.u);
        rhs = B::g1_add(
            &rhs,
            &B::g1_add(&slot.weighted_v[i], &slot.accepted[i].index_v),
        );
    }
    *pairings += 2;
    suite.pairing(&u, suite.gen_g2()) == suite.pairing(&rhs, pk)
}

// Called only on subsets known to fail. If the left half holds, the right
// half must fail, so it is not re-checked.
fn bisect<B: PairingBackend>(
    suite: &BilinearSuite<B>,
    slot: &TimeSlot<B>,
    pk: &B::G2,
    idx: &[usize],
    out: &mut Vec<u64>,
    pairings: &mut u64,
) {
    if idx.len() == 1 {
        out.push(slot.accepted[idx[0]].seq);
        return;
    }
    let (left, right) = idx.split_at(idx.len() / 2);
    if subset_holds(suite, slot, pk, left, pairings) {
        bisect(suite, slot, pk, right, out, pairings);
        return;
    }
    bisect(suite, slot, pk, left, out, pairings);
    if !subset_holds(suite, slot, pk, right, pairings) {
        bisect(suite, slot, pk, right, out, pairings);
    }
}

/// Persisted slot. Holds only what the DC sees: no identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlotWire {
    pub slot_id: u64,
    pub start: u64,
    pub end: u64,
    pub next_seq: u64,
    pub accepted: Vec<OpenedWire>,
    pub rejected: Vec<RejectedEntry>,
    pub sum_u: String,
    pub sum_v: String,
    pub sum_index_v: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpenedWire {
    pub seq: u64,
    pub submission: SubmissionWire,
    pub index_v: String,
    pub h: String,
    pub t: u64,
}

impl<B: PairingBackend> TimeSlot<B> {
    pub fn to_wire(&self) -> SlotWire {
        SlotWire {
            slot_id: self.slot_id,
            start: self.start,
            end: self.end,
            next_seq: self.next_seq,
            accepted: self
                .accepted
                .iter()
                .map(|o| OpenedWire {
                    seq: o.seq,
                    submission: o.submission.to_wire(),
                    index_v: g1_hex::<B>(&o.index_v),
                    h: scalar_hex::<B>(&o.h),
                    t: o.t,
                })
                .collect(),
            rejected: self.rejected.clone(),
            sum_u: g1_hex::<B>(&self.sum_u),
            sum_v: g1_hex::<B>(&self.sum_v),
            sum_index_v: g1_hex::<B>(&self.sum_index_v),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_wire()).expect("slot serializes")
    }

    /// Restores a slot. The stored sums are kept as-is (they are what the DC
    /// folded), so corruption between open and close remains detectable.
    pub fn from_wire(suite: &BilinearSuite<B>, w: &SlotWire) -> Result<Self> {
        let mut slot = TimeSlot::new(w.slot_id, w.start, w.end)?;
        for o in &w.accepted {
            let submission = Submission::<B>::from_wire(&o.submission)?;
            let digest = submission.digest();
            let opened = OpenedSubmission {
                submission,
                index_v: g1_unhex::<B>(&o.index_v)?,
                h: scalar_unhex::<B>(&o.h)?,
                t: o.t,
                seq: o.seq,
            };
            slot.accept(suite, opened, digest);
        }
        slot.rejected = w.rejected.clone();
        slot.next_seq = w.next_seq;
        slot.sum_u = g1_unhex::<B>(&w.sum_u)?;
        slot.sum_v = g1_unhex::<B>(&w.sum_v)?;
        slot.sum_index_v = g1_unhex::<B>(&w.sum_index_v)?;
        Ok(slot)
    }

    pub fn from_json(suite: &BilinearSuite<B>, s: &str) -> Result<Self> {
        let w: SlotWire =
            serde_json::from_str(s).map_err(|e| Error::Malformed(format!("slot: {e}")))?;
        Self::from_wire(suite, &w)
    }
}
