//! Thread-local operation counting.
//!
//! Group operations report themselves through [`record`]. Nothing is counted
//! unless a [`CounterScope`] is open on the current thread. Scopes nest: when
//! an inner scope ends, its totals are added to the enclosing scope, so a
//! parent always reads at least the sum of its children.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// Counted operation classes. `Hash`, `ScalarMul` and `Pairing` are the
/// three classes compared against the complexity table; `Envelope` keeps the
/// public-key encryption work out of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpClass {
    Hash,
    ScalarMul,
    Pairing,
    PointAdd,
    Envelope,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounts {
    pub hash: u64,
    pub scalar_mul: u64,
    pub pairing: u64,
    pub point_add: u64,
    pub envelope: u64,
}

impl OpCounts {
    pub const ZERO: OpCounts = OpCounts {
        hash: 0,
        scalar_mul: 0,
        pairing: 0,
        point_add: 0,
        envelope: 0,
    };

    /// Counts with only the three complexity-table classes set.
    pub const fn hsp(hash: u64, scalar_mul: u64, pairing: u64) -> Self {
        OpCounts {
            hash,
            scalar_mul,
            pairing,
            point_add: 0,
            envelope: 0,
        }
    }

    /// Projection onto (H, S, P).
    pub fn table_classes(&self) -> (u64, u64, u64) {
        (self.hash, self.scalar_mul, self.pairing)
    }

    fn bump(&mut self, class: OpClass) {
        match class {
            OpClass::Hash => self.hash += 1,
            OpClass::ScalarMul => self.scalar_mul += 1,
            OpClass::Pairing => self.pairing += 1,
            OpClass::PointAdd => self.point_add += 1,
            OpClass::Envelope => self.envelope += 1,
        }
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, rhs: OpCounts) -> OpCounts {
        OpCounts {
            hash: self.hash + rhs.hash,
            scalar_mul: self.scalar_mul + rhs.scalar_mul,
            pairing: self.pairing + rhs.pairing,
            point_add: self.point_add + rhs.point_add,
            envelope: self.envelope + rhs.envelope,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, rhs: OpCounts) {
        *self = *self + rhs;
    }
}

impl Mul<u64> for OpCounts {
    type Output = OpCounts;

    fn mul(self, n: u64) -> OpCounts {
        OpCounts {
            hash: self.hash * n,
            scalar_mul: self.scalar_mul * n,
            pairing: self.pairing * n,
            point_add: self.point_add * n,
            envelope: self.envelope * n,
        }
    }
}

impl std::iter::Sum for OpCounts {
    fn sum<I: Iterator<Item = OpCounts>>(iter: I) -> OpCounts {
        iter.fold(OpCounts::ZERO, |a, b| a + b)
    }
}

impl fmt::Display for OpCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{{H:{}, S:{}, P:{}}}",
            self.hash, self.scalar_mul, self.pairing
        )?;
        if self.envelope > 0 {
            write!(f, " +env:{}", self.envelope)?;
        }
        Ok(())
    }
}

thread_local! {
    static FRAMES: RefCell<Vec<OpCounts>> = const { RefCell::new(Vec::new()) };
}

/// Record one operation against the innermost open scope, if any.
pub fn record(class: OpClass) {
    FRAMES.with(|frames| {
        if let Some(top) = frames.borrow_mut().last_mut() {
            top.bump(class);
        }
    });
}

/// Whether any scope is open on this thread.
pub fn instrumentation_active() -> bool {
    FRAMES.with(|frames| !frames.borrow().is_empty())
}

/// An open counting scope. Closing it (by [`CounterScope::finish`] or by
/// drop) folds its totals into the parent scope.
pub struct CounterScope {
    depth: usize,
    closed: bool,
    // Frames live in thread-local storage; the guard must stay on its thread.
    _not_send: PhantomData<*const ()>,
}

impl CounterScope {
    pub fn enter() -> Self {
        let depth = FRAMES.with(|frames| {
            let mut frames = frames.borrow_mut();
            frames.push(OpCounts::ZERO);
            frames.len()
        });
        CounterScope {
            depth,
            closed: false,
            _not_send: PhantomData,
        }
    }

    /// Counts accumulated so far, including closed child scopes.
    pub fn counts(&self) -> OpCounts {
        FRAMES.with(|frames| frames.borrow()[self.depth - 1])
    }

    pub fn finish(mut self) -> OpCounts {
        self.close()
    }

    fn close(&mut self) -> OpCounts {
        self.closed = true;
        FRAMES.with(|frames| {
            let mut frames = frames.borrow_mut();
            assert_eq!(
                frames.len(),
                self.depth,
                "counter scopes must close in LIFO order"
            );
            let mine = frames.pop().expect("scope frame present");
            if let Some(parent) = frames.last_mut() {
                *parent += mine;
            }
            mine
        })
    }
}

impl Drop for CounterScope {
    fn drop(&mut self) {
        if !self.closed {
            self.close();
        }
    }
}

/// Run `f` inside a fresh scope and return its result with the counts it incurred.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let scope = CounterScope::enter();
    let out = f();
    (out, scope.finish())
}

/// Protocol phases used as counter labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Setup,
    Registration,
    Signing,
    Verification,
    Aggregation,
    AggregateVerification,
    Localization,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Registration => "registration",
            Phase::Signing => "signing",
            Phase::Verification => "verification",
            Phase::Aggregation => "aggregation",
            Phase::AggregateVerification => "aggregate_verification",
            Phase::Localization => "localization",
        }
    }
}

/// Per-phase totals for one run. One instance per run; it is not shared
/// between threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OperationCounter {
    phases: BTreeMap<Phase, OpCounts>,
}

impl OperationCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn measure<T>(&mut self, phase: Phase, f: impl FnOnce() -> T) -> T {
        let (out, counts) = measure(f);
        self.add(phase, counts);
        out
    }

    /// Add externally measured counts (for example from worker threads).
    pub fn add(&mut self, phase: Phase, counts: OpCounts) {
        *self.phases.entry(phase).or_default() += counts;
    }

    pub fn get(&self, phase: Phase) -> OpCounts {
        self.phases.get(&phase).copied().unwrap_or_default()
    }

    pub fn total(&self) -> OpCounts {
        self.phases.values().copied().sum()
    }

    pub fn phases(&self) -> impl Iterator<Item = (Phase, OpCounts)> + '_ {
        self.phases.iter().map(|(p, c)| (*p, *c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nothing_recorded_without_scope() {
        assert!(!instrumentation_active());
        record(OpClass::Pairing);
        let (_, c) = measure(|| ());
        assert_eq!(c, OpCounts::ZERO);
    }

    #[test]
    fn counts_by_class() {
        let (_, c) = measure(|| {
            record(OpClass::ScalarMul);
            record(OpClass::ScalarMul);
            record(OpClass::ScalarMul);
            record(OpClass::Hash);
            record(OpClass::Envelope);
        });
        assert_eq!(c.scalar_mul, 3);
        assert_eq!(c.hash, 1);
        assert_eq!(c.envelope, 1);
        assert_eq!(c.table_classes(), (1, 3, 0));
    }

    #[test]
    fn nested_scopes_fold_into_parent() {
        let outer = CounterScope::enter();
        let (_, a) = measure(|| record(OpClass::Pairing));
        let (_, b) = measure(|| {
            record(OpClass::Hash);
            let (_, inner) = measure(|| record(OpClass::ScalarMul));
            assert_eq!(inner, OpCounts::hsp(0, 1, 0));
        });
        assert_eq!(b, OpCounts::hsp(1, 1, 0));
        assert_eq!(outer.finish(), a + b);
    }

    #[test]
    fn dropped_scope_still_folds() {
        let outer = CounterScope::enter();
        {
            let _inner = CounterScope::enter();
            record(OpClass::Pairing);
        }
        assert_eq!(outer.counts().pairing, 1);
    }

    #[test]
    fn operation_counter_by_phase() {
        let mut counter = OperationCounter::new();
        counter.measure(Phase::Signing, || record(OpClass::Hash));
        counter.measure(Phase::Signing, || record(OpClass::Hash));
        counter.measure(Phase::Verification, || record(OpClass::Pairing));
        assert_eq!(counter.get(Phase::Signing).hash, 2);
        assert_eq!(counter.get(Phase::Verification).pairing, 1);
        assert_eq!(counter.get(Phase::Aggregation), OpCounts::ZERO);
        assert_eq!(counter.total(), OpCounts::hsp(2, 0, 1));
    }

    #[test]
    fn threads_do_not_share_counts() {
        let scope = CounterScope::enter();
        std::thread::spawn(|| {
            let (_, c) = measure(|| record(OpClass::Pairing));
            assert_eq!(c.pairing, 1);
        })
        .join()
        .unwrap();
        assert_eq!(scope.finish(), OpCounts::ZERO);
    }
}
