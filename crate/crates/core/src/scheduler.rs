//! Deterministic schedulers and checkers for their structural properties.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::automaton::{SystemState, TaskMask};
use crate::task::{TaskSet, Time};

/// A scheduler maps a state to the set of active tasks that run for the
/// next time unit. Implementations must be pure functions of their inputs.
pub trait Scheduler: Sync {
    fn name(&self) -> &str;

    fn run(&self, ts: &TaskSet, state: &SystemState) -> TaskMask;
}

/// Schedulers whose decisions depend only on the `(nat, rct)` values of
/// active tasks. Only these are sound with antichain pruning.
pub trait Memoryless: Scheduler {}

/// Picks the `min(m, |active|)` active tasks with the smallest key. Ties
/// are broken by smaller task index.
fn pick_smallest<K: Ord>(ts: &TaskSet, state: &SystemState, key: impl Fn(usize) -> K) -> TaskMask {
    let active = state.active();
    let slots = ts.processors();
    if active.len() <= slots {
        return active;
    }
    // keep the `slots` best (key, index) pairs seen so far
    let mut best: Vec<(K, usize)> = Vec::with_capacity(slots + 1);
    for i in active.iter() {
        let k = key(i);
        let pos = best.partition_point(|(bk, bi)| (bk, *bi) < (&k, i));
        if pos < slots {
            best.insert(pos, (k, i));
            best.truncate(slots);
        }
    }
    best.into_iter().map(|(_, i)| i).collect()
}

/// Preemptive global earliest-deadline-first.
#[derive(Debug, Clone, Copy, Default)]
pub struct Edf;

impl Scheduler for Edf {
    fn name(&self) -> &str {
        "edf"
    }

    fn run(&self, ts: &TaskSet, state: &SystemState) -> TaskMask {
        pick_smallest(ts, state, |i| state.ttd_unchecked(ts, i))
    }
}

impl Memoryless for Edf {}

/// Preemptive global deadline-monotonic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dm;

impl Scheduler for Dm {
    fn name(&self) -> &str {
        "dm"
    }

    fn run(&self, ts: &TaskSet, state: &SystemState) -> TaskMask {
        pick_smallest(ts, state, |i| ts.task(i).deadline)
    }
}

impl Memoryless for Dm {}

/// The built-in schedulers, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerKind {
    Edf,
    Dm,
}

impl Scheduler for SchedulerKind {
    fn name(&self) -> &str {
        match self {
            SchedulerKind::Edf => Edf.name(),
            SchedulerKind::Dm => Dm.name(),
        }
    }

    fn run(&self, ts: &TaskSet, state: &SystemState) -> TaskMask {
        match self {
            SchedulerKind::Edf => Edf.run(ts, state),
            SchedulerKind::Dm => Dm.run(ts, state),
        }
    }
}

impl Memoryless for SchedulerKind {}

impl fmt::Display for SchedulerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchedulerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "edf" => Ok(SchedulerKind::Edf),
            "dm" => Ok(SchedulerKind::Dm),
            other => Err(format!("unknown scheduler `{other}` (expected edf or dm)")),
        }
    }
}

/// Wraps a closure as a scheduler. Handy for tests and experiments; it is
/// not [`Memoryless`] since nothing constrains what the closure reads.
pub struct FnScheduler<F> {
    name: String,
    f: F,
}

impl<F> FnScheduler<F>
where
    F: Fn(&TaskSet, &SystemState) -> TaskMask + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnScheduler {
            name: name.into(),
            f,
        }
    }
}

impl<F> Scheduler for FnScheduler<F>
where
    F: Fn(&TaskSet, &SystemState) -> TaskMask + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn run(&self, ts: &TaskSet, state: &SystemState) -> TaskMask {
        (self.f)(ts, state)
    }
}

/// A state on which `|Run(S)| != min(m, |Active(S)|)` or `Run(S)` is not
/// a legal choice at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkConservingViolation {
    pub state: SystemState,
    pub running: TaskMask,
    pub active: TaskMask,
}

pub fn check_work_conserving<'a, S: Scheduler + ?Sized>(
    sched: &S,
    ts: &TaskSet,
    states: impl IntoIterator<Item = &'a SystemState>,
) -> Result<(), WorkConservingViolation> {
    for state in states {
        let running = sched.run(ts, state);
        let active = state.active();
        let legal = running.is_subset(active) && running.len() <= ts.processors();
        if !legal || running.len() != ts.processors().min(active.len()) {
            return Err(WorkConservingViolation {
                state: state.clone(),
                running,
                active,
            });
        }
    }
    Ok(())
}

/// Two states that agree on their active tasks yet get different
/// scheduling decisions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemorylessViolation {
    pub first: SystemState,
    pub second: SystemState,
    pub first_run: TaskMask,
    pub second_run: TaskMask,
}

/// Whether two states have the same active set and agree on `nat` and
/// `rct` of every active task.
pub fn agree_on_active(a: &SystemState, b: &SystemState) -> bool {
    let active = a.active();
    active == b.active()
        && active
            .iter()
            .all(|i| a.nat()[i] == b.nat()[i] && a.rct()[i] == b.rct()[i])
}

/// Checks `Run(S1) = Run(S2)` on every pair that agrees on its active
/// tasks. Pairs that do not agree are outside the property and skipped.
pub fn check_memoryless<'a, S: Scheduler + ?Sized>(
    sched: &S,
    ts: &TaskSet,
    pairs: impl IntoIterator<Item = (&'a SystemState, &'a SystemState)>,
) -> Result<(), MemorylessViolation> {
    for (a, b) in pairs {
        if !agree_on_active(a, b) {
            continue;
        }
        let (ra, rb) = (sched.run(ts, a), sched.run(ts, b));
        if ra != rb {
            return Err(MemorylessViolation {
                first: a.clone(),
                second: b.clone(),
                first_run: ra,
                second_run: rb,
            });
        }
    }
    Ok(())
}

/// All ordered pairs from `states` that agree on their active tasks.
pub fn memoryless_pairs(states: &[SystemState]) -> Vec<(&SystemState, &SystemState)> {
    type ActiveView = (TaskMask, Vec<(Time, Time)>);
    let mut groups: HashMap<ActiveView, Vec<&SystemState>> = HashMap::new();
    for s in states {
        let active = s.active();
        let view = active.iter().map(|i| (s.nat()[i], s.rct()[i])).collect();
        groups.entry((active, view)).or_default().push(s);
    }
    let mut keys: Vec<_> = groups.keys().cloned().collect();
    keys.sort();
    let mut out = Vec::new();
    for k in keys {
        let g = &groups[&k];
        for a in g {
            for b in g {
                out.push((*a, *b));
            }
        }
    }
    out
}
