//! The idle-tasks preorder and antichains of maximal states.
//!
//! `a` idle-simulates `b` when both have the same `rct` vector, agree on
//! `nat` for every active task, and every idle task of `a` is at least as
//! close to its next release as in `b`. With a memoryless scheduler `a`
//! can then mimic every move of `b`, and fails whenever `b` fails, so a
//! search only needs to keep the maximal states it has seen.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use crate::automaton::SystemState;

/// A preorder on states, read as "`a` simulates `b`".
pub trait Preorder {
    fn simulates(&self, a: &SystemState, b: &SystemState) -> bool;
}

/// The idle-tasks preorder.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdlePreorder;

impl Preorder for IdlePreorder {
    fn simulates(&self, a: &SystemState, b: &SystemState) -> bool {
        idle_simulates(a, b)
    }
}

/// The idle-tasks preorder without the requirement that active tasks agree
/// on `nat`. It is *not* a simulation; it exists so the soundness checks
/// can be shown to reject it.
#[derive(Debug, Clone, Copy, Default)]
pub struct RelaxedIdlePreorder;

impl Preorder for RelaxedIdlePreorder {
    fn simulates(&self, a: &SystemState, b: &SystemState) -> bool {
        a.rct() == b.rct()
            && (0..a.len())
                .filter(|&i| a.rct()[i] == 0)
                .all(|i| a.nat()[i] <= b.nat()[i])
    }
}

/// Whether `a` idle-simulates `b`.
pub fn idle_simulates(a: &SystemState, b: &SystemState) -> bool {
    if a.rct() != b.rct() {
        return false;
    }
    a.rct()
        .iter()
        .zip(a.nat().iter().zip(b.nat()))
        .all(|(&r, (&na, &nb))| if r == 0 { na <= nb } else { na == nb })
}

/// Hash of the part of a state that comparable states share: the `rct`
/// vector and the `nat` of active tasks.
fn partition_key(s: &SystemState) -> u64 {
    let mut h = DefaultHasher::new();
    s.rct().hash(&mut h);
    for (&r, &n) in s.rct().iter().zip(s.nat()) {
        if r > 0 {
            n.hash(&mut h);
        }
    }
    h.finish()
}

/// A set of pairwise incomparable states under [`IdlePreorder`].
///
/// States are bucketed by [`partition_key`]; only states in the same
/// bucket can be comparable, and each bucket is scanned linearly.
#[derive(Debug, Clone, Default)]
pub struct Antichain {
    buckets: HashMap<u64, Vec<SystemState>>,
    len: usize,
}

impl Antichain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Adds `state` unless some element already simulates it (which
    /// includes `state` itself being present). Elements simulated by
    /// `state` are dropped. Returns whether `state` was added.
    pub fn insert(&mut self, state: SystemState) -> bool {
        let bucket = self.buckets.entry(partition_key(&state)).or_default();
        if bucket.iter().any(|e| idle_simulates(e, &state)) {
            return false;
        }
        let before = bucket.len();
        bucket.retain(|e| !idle_simulates(&state, e));
        self.len -= before - bucket.len();
        bucket.push(state);
        self.len += 1;
        true
    }

    /// Whether some element simulates `state`.
    pub fn simulates_membership(&self, state: &SystemState) -> bool {
        self.buckets
            .get(&partition_key(state))
            .is_some_and(|b| b.iter().any(|e| idle_simulates(e, state)))
    }

    /// Whether `state` itself is an element.
    pub fn contains(&self, state: &SystemState) -> bool {
        self.buckets
            .get(&partition_key(state))
            .is_some_and(|b| b.contains(state))
    }

    /// Maximal elements of the union of both element sets.
    pub fn union(&self, other: &Antichain) -> Antichain {
        let mut out = self.clone();
        for s in other.iter() {
            out.insert(s.clone());
        }
        out
    }

    /// Elements in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = &SystemState> {
        self.buckets.values().flatten()
    }

    /// Elements in ascending state order.
    pub fn to_sorted_vec(&self) -> Vec<SystemState> {
        let mut v: Vec<SystemState> = self.iter().cloned().collect();
        v.sort_unstable();
        v
    }
}

impl PartialEq for Antichain {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter().all(|s| other.contains(s))
    }
}

impl Eq for Antichain {}

impl FromIterator<SystemState> for Antichain {
    fn from_iter<I: IntoIterator<Item = SystemState>>(iter: I) -> Self {
        let mut ac = Antichain::new();
        for s in iter {
            ac.insert(s);
        }
        ac
    }
}

impl Extend<SystemState> for Antichain {
    fn extend<I: IntoIterator<Item = SystemState>>(&mut self, iter: I) {
        for s in iter {
            self.insert(s);
        }
    }
}

/// The maximal elements of `states`.
pub fn max_elements(states: impl IntoIterator<Item = SystemState>) -> Antichain {
    states.into_iter().collect()
}
