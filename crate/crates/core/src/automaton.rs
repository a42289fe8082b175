//! States and transitions of the task-set automaton.
//!
//! A state records, per task, the earliest next arrival time `nat` and the
//! remaining computation time `rct` of the current job. One automaton edge
//! is a request transition (a subset of eligible tasks release a job, the
//! empty subset included) followed by one clock tick under the scheduler.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheduler::Scheduler;
use crate::task::{TaskSet, Time};

/// A subset of the tasks of a set, indexed by task position.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TaskMask(u64);

impl TaskMask {
    pub const EMPTY: TaskMask = TaskMask(0);

    pub const fn from_bits(bits: u64) -> Self {
        TaskMask(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn single(index: usize) -> Self {
        TaskMask(1 << index)
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 & (1 << index) != 0
    }

    pub fn insert(&mut self, index: usize) {
        self.0 |= 1 << index;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: TaskMask) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn difference(self, other: TaskMask) -> TaskMask {
        TaskMask(self.0 & !other.0)
    }

    /// Task indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(i)
        })
    }

    /// Every subset of `self`, the empty one first and `self` last.
    pub fn subsets(self) -> impl Iterator<Item = TaskMask> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(TaskMask(cur))
        })
    }
}

impl FromIterator<usize> for TaskMask {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut mask = TaskMask::EMPTY;
        for i in iter {
            mask.insert(i);
        }
        mask
    }
}

impl fmt::Display for TaskMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "t{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// A system state: per-task `nat` and `rct` vectors.
///
/// Equality, hashing and ordering depend only on the two vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SystemState {
    nat: Box<[Time]>,
    rct: Box<[Time]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("state has {found} tasks, task set has {expected}")]
    Arity { expected: usize, found: usize },
    #[error("task {index}: nat {nat} outside 0..={period}")]
    NatOutOfRange {
        index: usize,
        nat: Time,
        period: Time,
    },
    #[error("task {index}: rct {rct} outside 0..={wcet}")]
    RctOutOfRange { index: usize, rct: Time, wcet: Time },
    #[error("request set {requested} is not a subset of the eligible tasks {eligible}")]
    NotEligible {
        requested: TaskMask,
        eligible: TaskMask,
    },
    #[error("running set {running} is not a subset of the active tasks {active}")]
    NotActive { running: TaskMask, active: TaskMask },
    #[error("running {running} tasks on {processors} processors")]
    TooManyRunning { running: usize, processors: usize },
    #[error("task {0} is idle, time to deadline is defined for active tasks only")]
    IdleTask(usize),
}

impl SystemState {
    /// Builds a state and checks it against the per-task bounds
    /// `nat <= T` and `rct <= C`.
    pub fn new(ts: &TaskSet, nat: Vec<Time>, rct: Vec<Time>) -> Result<Self, AutomatonError> {
        for len in [nat.len(), rct.len()] {
            if len != ts.len() {
                return Err(AutomatonError::Arity {
                    expected: ts.len(),
                    found: len,
                });
            }
        }
        for (index, task) in ts.tasks().iter().enumerate() {
            if nat[index] > task.period {
                return Err(AutomatonError::NatOutOfRange {
                    index,
                    nat: nat[index],
                    period: task.period,
                });
            }
            if rct[index] > task.wcet {
                return Err(AutomatonError::RctOutOfRange {
                    index,
                    rct: rct[index],
                    wcet: task.wcet,
                });
            }
        }
        Ok(Self::from_parts(nat, rct))
    }

    /// Builds a state from `(nat, rct)` pairs, one per task.
    pub fn from_pairs(ts: &TaskSet, pairs: &[(Time, Time)]) -> Result<Self, AutomatonError> {
        let (nat, rct) = pairs.iter().copied().unzip();
        Self::new(ts, nat, rct)
    }

    pub(crate) fn from_parts(nat: Vec<Time>, rct: Vec<Time>) -> Self {
        debug_assert_eq!(nat.len(), rct.len());
        SystemState {
            nat: nat.into_boxed_slice(),
            rct: rct.into_boxed_slice(),
        }
    }

    pub fn nat(&self) -> &[Time] {
        &self.nat
    }

    pub fn rct(&self) -> &[Time] {
        &self.rct
    }

    pub fn len(&self) -> usize {
        self.nat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nat.is_empty()
    }

    /// Tasks with `nat = rct = 0`, which may release a job now.
    pub fn eligible(&self) -> TaskMask {
        (0..self.len())
            .filter(|&i| self.nat[i] == 0 && self.rct[i] == 0)
            .collect()
    }

    /// Tasks with pending work (`rct > 0`). The others are idle.
    pub fn active(&self) -> TaskMask {
        (0..self.len()).filter(|&i| self.rct[i] > 0).collect()
    }

    /// `nat - (T - D) - rct`.
    pub fn laxity(&self, ts: &TaskSet, index: usize) -> i64 {
        let task = ts.task(index);
        i64::from(self.nat[index]) - i64::from(task.deadline_gap()) - i64::from(self.rct[index])
    }

    /// Whether some active task can no longer meet its deadline.
    ///
    /// Idle tasks are not considered: their laxity is `nat - (T - D)`,
    /// which is negative for any idle task with `D < T` soon after
    /// release, including in the initial state.
    pub fn is_fail(&self, ts: &TaskSet) -> bool {
        (0..self.len()).any(|i| self.rct[i] > 0 && self.laxity(ts, i) < 0)
    }

    /// Time to the absolute deadline of the current job, `nat - (T - D)`.
    pub fn ttd(&self, ts: &TaskSet, index: usize) -> Result<i64, AutomatonError> {
        if self.rct[index] == 0 {
            return Err(AutomatonError::IdleTask(index));
        }
        Ok(self.ttd_unchecked(ts, index))
    }

    pub(crate) fn ttd_unchecked(&self, ts: &TaskSet, index: usize) -> i64 {
        i64::from(self.nat[index]) - i64::from(ts.task(index).deadline_gap())
    }

    /// Compact rendering: `[21,32]` when every value is a single digit,
    /// `(2:1),(3:2)` otherwise.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for SystemState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self.nat.iter().chain(self.rct.iter()).all(|&v| v < 10);
        if compact {
            f.write_str("[")?;
            for i in 0..self.len() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{}{}", self.nat[i], self.rct[i])?;
            }
            f.write_str("]")
        } else {
            for i in 0..self.len() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "({}:{})", self.nat[i], self.rct[i])?;
            }
            Ok(())
        }
    }
}

/// The all-zero state.
pub fn initial_state(ts: &TaskSet) -> SystemState {
    SystemState::from_parts(vec![0; ts.len()], vec![0; ts.len()])
}

/// Releases a job for every task in `requests`.
pub fn request_successor(
    ts: &TaskSet,
    state: &SystemState,
    requests: TaskMask,
) -> Result<SystemState, AutomatonError> {
    let eligible = state.eligible();
    if !requests.is_subset(eligible) {
        return Err(AutomatonError::NotEligible {
            requested: requests,
            eligible,
        });
    }
    Ok(request_unchecked(ts, state, requests))
}

pub(crate) fn request_unchecked(
    ts: &TaskSet,
    state: &SystemState,
    requests: TaskMask,
) -> SystemState {
    let mut next = state.clone();
    for i in requests.iter() {
        let task = ts.task(i);
        next.nat[i] = task.period;
        next.rct[i] = task.wcet;
    }
    next
}

/// Lets one time unit elapse while the tasks in `running` execute.
pub fn clock_tick_successor(
    ts: &TaskSet,
    state: &SystemState,
    running: TaskMask,
) -> Result<SystemState, AutomatonError> {
    let active = state.active();
    if !running.is_subset(active) {
        return Err(AutomatonError::NotActive { running, active });
    }
    if running.len() > ts.processors() {
        return Err(AutomatonError::TooManyRunning {
            running: running.len(),
            processors: ts.processors(),
        });
    }
    Ok(tick_unchecked(state, running))
}

pub(crate) fn tick_unchecked(state: &SystemState, running: TaskMask) -> SystemState {
    let mut next = state.clone();
    for n in next.nat.iter_mut() {
        *n = n.saturating_sub(1);
    }
    for i in running.iter() {
        next.rct[i] -= 1;
    }
    next
}

/// One edge of the automaton: the request subset and the resulting state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub requests: TaskMask,
    /// State right after the requests, before time elapses.
    pub released: SystemState,
    pub running: TaskMask,
    pub successor: SystemState,
}

/// Every request-then-tick step out of `state`, one per eligible subset.
pub fn steps<'a, S: Scheduler + ?Sized>(
    ts: &'a TaskSet,
    state: &'a SystemState,
    sched: &'a S,
) -> impl Iterator<Item = Step> + 'a {
    state.eligible().subsets().map(move |requests| {
        let released = request_unchecked(ts, state, requests);
        let running = sched.run(ts, &released);
        debug_assert!(running.is_subset(released.active()));
        debug_assert!(running.len() <= ts.processors());
        let successor = tick_unchecked(&released, running);
        Step {
            requests,
            released,
            running,
            successor,
        }
    })
}

/// One-step successors of `state`, deduplicated and sorted.
pub fn post<S: Scheduler + ?Sized>(
    ts: &TaskSet,
    state: &SystemState,
    sched: &S,
) -> Vec<SystemState> {
    let mut out: Vec<SystemState> = steps(ts, state, sched).map(|s| s.successor).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every valid state of `ts` (product of `0..=T` and `0..=C` per task).
/// Only sensible for tiny sets.
pub fn all_states(ts: &TaskSet) -> Vec<SystemState> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for task in ts.tasks() {
        let mut next =
            Vec::with_capacity(out.len() * ((task.period + 1) * (task.wcet + 1)) as usize);
        for (nat, rct) in &out {
            for n in 0..=task.period {
                for r in 0..=task.wcet {
                    let mut nat: Vec<Time> = nat.clone();
                    let mut rct: Vec<Time> = rct.clone();
                    nat.push(n);
                    rct.push(r);
                    next.push((nat, rct));
                }
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(nat, rct)| SystemState::from_parts(nat, rct))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::{Edf, FnScheduler};
    use crate::task::Task;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn two_task_set() -> TaskSet {
        TaskSet::new(2, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap()
    }

    fn st(ts: &TaskSet, pairs: &[(Time, Time)]) -> SystemState {
        SystemState::from_pairs(ts, pairs).unwrap()
    }

    fn mask(ix: &[usize]) -> TaskMask {
        ix.iter().copied().collect()
    }

    #[test]
    fn initial_state_is_all_zero() {
        let ts = two_task_set();
        assert_eq!(initial_state(&ts).render(), "[00,00]");
        let one = TaskSet::new(1, vec![Task::new(3, 3, 1)]).unwrap();
        assert_eq!(initial_state(&one).render(), "[00]");
        let three = TaskSet::new(1, vec![Task::new(3, 3, 1); 3]).unwrap();
        assert_eq!(initial_state(&three).render(), "[00,00,00]");
    }

    #[test]
    fn eligible_and_active() {
        let ts = two_task_set();
        assert_eq!(st(&ts, &[(0, 0), (0, 0)]).eligible(), mask(&[0, 1]));
        assert_eq!(st(&ts, &[(2, 1), (3, 2)]).eligible(), mask(&[]));
        assert_eq!(st(&ts, &[(0, 0), (3, 2)]).eligible(), mask(&[0]));
        assert_eq!(st(&ts, &[(0, 0), (0, 0)]).active(), mask(&[]));
        assert_eq!(st(&ts, &[(2, 1), (3, 2)]).active(), mask(&[0, 1]));
        assert_eq!(st(&ts, &[(1, 0), (2, 1)]).active(), mask(&[1]));
    }

    #[test]
    fn laxity_examples() {
        let ts = two_task_set();
        assert_eq!(st(&ts, &[(2, 1), (3, 2)]).laxity(&ts, 1), 1);
        let t53 = TaskSet::new(1, vec![Task::new(5, 3, 3)]).unwrap();
        assert_eq!(st(&t53, &[(4, 3)]).laxity(&t53, 0), -1);
        assert_eq!(st(&t53, &[(0, 0)]).laxity(&t53, 0), -2);
        assert_eq!(initial_state(&ts).laxity(&ts, 0), 0);
    }

    #[test]
    fn failure_examples() {
        let ts = two_task_set();
        assert!(!initial_state(&ts).is_fail(&ts));
        assert!(st(&ts, &[(1, 0), (0, 2)]).is_fail(&ts));
        assert!(!st(&ts, &[(2, 1), (3, 2)]).is_fail(&ts));
        // negative laxity on an idle task is not a failure
        let t53 = TaskSet::new(1, vec![Task::new(5, 3, 3)]).unwrap();
        assert!(!initial_state(&t53).is_fail(&t53));
        assert!(st(&t53, &[(4, 3)]).is_fail(&t53));
    }

    #[test]
    fn request_examples() {
        let ts = two_task_set();
        let s0 = initial_state(&ts);
        assert_eq!(
            request_successor(&ts, &s0, mask(&[0, 1])).unwrap().render(),
            "[21,32]"
        );
        assert_eq!(request_successor(&ts, &s0, TaskMask::EMPTY).unwrap(), s0);
        let s = st(&ts, &[(0, 0), (3, 2)]);
        assert_eq!(
            request_successor(&ts, &s, mask(&[0])).unwrap().render(),
            "[21,32]"
        );
        assert!(matches!(
            request_successor(&ts, &s, mask(&[1])),
            Err(AutomatonError::NotEligible { .. })
        ));
    }

    #[test]
    fn tick_examples() {
        let ts = two_task_set();
        let s = st(&ts, &[(2, 1), (3, 2)]);
        assert_eq!(
            clock_tick_successor(&ts, &s, mask(&[0, 1]))
                .unwrap()
                .render(),
            "[10,21]"
        );
        let s = st(&ts, &[(1, 0), (2, 1)]);
        assert_eq!(
            clock_tick_successor(&ts, &s, mask(&[1])).unwrap().render(),
            "[00,10]"
        );
        let s0 = initial_state(&ts);
        assert_eq!(clock_tick_successor(&ts, &s0, TaskMask::EMPTY).unwrap(), s0);
        assert!(matches!(
            clock_tick_successor(&ts, &s0, mask(&[0])),
            Err(AutomatonError::NotActive { .. })
        ));
        let one_cpu = TaskSet::new(1, ts.tasks().to_vec()).unwrap();
        let s = st(&one_cpu, &[(2, 1), (3, 2)]);
        assert!(matches!(
            clock_tick_successor(&one_cpu, &s, mask(&[0, 1])),
            Err(AutomatonError::TooManyRunning { .. })
        ));
    }

    #[test]
    fn state_bounds_checked() {
        let ts = two_task_set();
        assert!(matches!(
            SystemState::from_pairs(&ts, &[(3, 0), (0, 0)]),
            Err(AutomatonError::NatOutOfRange { index: 0, .. })
        ));
        assert!(matches!(
            SystemState::from_pairs(&ts, &[(0, 0), (0, 3)]),
            Err(AutomatonError::RctOutOfRange { index: 1, .. })
        ));
        assert!(matches!(
            SystemState::from_pairs(&ts, &[(0, 0)]),
            Err(AutomatonError::Arity { .. })
        ));
    }

    #[test]
    fn post_of_initial_state() {
        let ts = two_task_set();
        let got: Vec<String> = post(&ts, &initial_state(&ts), &Edf)
            .iter()
            .map(|s| s.render())
            .collect();
        // subsets {}, {t1}, {t2}, {t1,t2} expanded by hand
        let mut want = vec!["[00,00]", "[10,00]", "[00,21]", "[10,21]"];
        want.sort_by_key(|r| st(&ts, &parse_bracket(r)));
        assert_eq!(got, want);
    }

    #[test]
    fn post_without_eligible_tasks_is_single() {
        let ts = two_task_set();
        let s = st(&ts, &[(2, 1), (3, 2)]);
        assert_eq!(post(&ts, &s, &Edf).len(), 1);
    }

    #[test]
    fn display_falls_back_for_wide_values() {
        let ts = TaskSet::new(1, vec![Task::new(12, 12, 3), Task::new(2, 2, 1)]).unwrap();
        assert_eq!(st(&ts, &[(11, 3), (1, 0)]).render(), "(11:3),(1:0)");
    }

    #[test]
    fn subsets_enumerates_all() {
        let m = mask(&[0, 2, 5]);
        let subs: BTreeSet<TaskMask> = m.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|s| s.is_subset(m)));
        assert_eq!(TaskMask::EMPTY.subsets().count(), 1);
        assert_eq!(mask(&[1, 3]).to_string(), "{t2,t4}");
    }

    /// Baker-style semantics: single-task requests and clock ticks as
    /// separate moves. Used to check the combined-edge construction.
    fn baker_k_ticks(
        ts: &TaskSet,
        sched: &Edf,
        from: &BTreeSet<SystemState>,
    ) -> BTreeSet<SystemState> {
        // close under single requests, then take exactly one tick
        let mut closed = from.clone();
        let mut work: Vec<SystemState> = from.iter().cloned().collect();
        while let Some(s) = work.pop() {
            for i in s.eligible().iter() {
                let n = request_unchecked(ts, &s, TaskMask::single(i));
                if closed.insert(n.clone()) {
                    work.push(n);
                }
            }
        }
        closed
            .iter()
            .map(|s| tick_unchecked(s, sched.run(ts, s)))
            .collect()
    }

    #[test]
    fn equivalent_to_single_request_semantics() {
        use crate::scheduler::Scheduler;
        let sets = [
            two_task_set(),
            TaskSet::new(
                1,
                vec![Task::new(3, 2, 1), Task::new(2, 2, 1), Task::new(4, 3, 2)],
            )
            .unwrap(),
        ];
        for ts in &sets {
            let mut ours: BTreeSet<SystemState> = [initial_state(ts)].into();
            let mut baker = ours.clone();
            for _ in 0..6 {
                ours = ours.iter().flat_map(|s| post(ts, s, &Edf)).collect();
                baker = baker_k_ticks(ts, &Edf, &baker);
                assert_eq!(ours, baker);
            }
            // k empty-request edges are k plain ticks
            let s = SystemState::from_parts(
                ts.tasks().iter().map(|t| t.period).collect(),
                ts.tasks().iter().map(|t| t.wcet).collect(),
            );
            let mut a = s.clone();
            for _ in 0..4 {
                let step = steps(ts, &a, &Edf)
                    .find(|st| st.requests.is_empty())
                    .unwrap();
                let b = tick_unchecked(&a, Edf.run(ts, &a));
                assert_eq!(step.successor, b);
                a = b;
            }
        }
    }

    #[test]
    fn lazy_scheduler_never_decrements_rct() {
        let ts = two_task_set();
        let lazy = FnScheduler::new("lazy", |_, _| TaskMask::EMPTY);
        let s = st(&ts, &[(2, 1), (3, 2)]);
        assert_eq!(post(&ts, &s, &lazy)[0].render(), "[11,22]");
    }

    fn parse_bracket(r: &str) -> Vec<(Time, Time)> {
        r.trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|p| {
                let b = p.as_bytes();
                (Time::from(b[0] - b'0'), Time::from(b[1] - b'0'))
            })
            .collect()
    }

    pub(crate) fn arb_set_and_state() -> impl Strategy<Value = (TaskSet, SystemState)> {
        let task = (1u32..=5)
            .prop_flat_map(|t| (Just(t), 1..=t))
            .prop_flat_map(|(t, d)| (Just(t), Just(d), 1..=d));
        (1usize..=3, prop::collection::vec(task, 1..=4))
            .prop_map(|(m, ts)| {
                TaskSet::new(
                    m,
                    ts.into_iter().map(|(t, d, c)| Task::new(t, d, c)).collect(),
                )
                .unwrap()
            })
            .prop_flat_map(|ts| {
                let comps: Vec<_> = ts
                    .tasks()
                    .iter()
                    .map(|t| (0..=t.period, 0..=t.wcet))
                    .collect();
                (Just(ts), comps)
            })
            .prop_map(|(ts, pairs)| {
                let s = SystemState::from_pairs(&ts, &pairs).unwrap();
                (ts, s)
            })
    }

    proptest! {
        #[test]
        fn post_preserves_ranges_and_time(( ts, s) in arb_set_and_state()) {
            let succ = post(&ts, &s, &Edf);
            prop_assert!(succ.len() <= 1 << s.eligible().len());
            for step in steps(&ts, &s, &Edf) {
                let n = &step.successor;
                prop_assert!(SystemState::new(&ts, n.nat().to_vec(), n.rct().to_vec()).is_ok());
                for i in 0..ts.len() {
                    prop_assert_eq!(n.nat()[i], step.released.nat()[i].saturating_sub(1));
                    let dr = step.released.rct()[i] - n.rct()[i];
                    prop_assert!(dr <= 1);
                    if !step.requests.contains(i) {
                        prop_assert_eq!(step.released.nat()[i], s.nat()[i]);
                        prop_assert_eq!(step.released.rct()[i], s.rct()[i]);
                    }
                }
            }
        }
    }
}
