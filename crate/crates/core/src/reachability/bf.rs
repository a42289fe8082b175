use indexmap::IndexSet;

use super::{LimitExceeded, Meter, Progress, SearchOptions};
use crate::automaton::{initial_state, post, SystemState};
use crate::scheduler::Scheduler;
use crate::task::TaskSet;

const NO_PARENT: usize = usize::MAX;

/// Breadth-first search that keeps every reached state.
///
/// Reached states are stored in insertion order, so each BFS level is a
/// contiguous index range and only the newest level is expanded.
pub struct BfSearch<'a, S: ?Sized> {
    ts: &'a TaskSet,
    sched: &'a S,
    reached: IndexSet<SystemState>,
    parents: Option<Vec<usize>>,
    level: std::ops::Range<usize>,
    failure: Option<usize>,
    stop_early: bool,
    meter: Meter,
}

impl<'a, S: Scheduler + ?Sized> BfSearch<'a, S> {
    pub fn new(ts: &'a TaskSet, sched: &'a S, opts: &SearchOptions) -> Self {
        let s0 = initial_state(ts);
        let failure = s0.is_fail(ts).then_some(0);
        let mut reached = IndexSet::new();
        reached.insert(s0);
        BfSearch {
            ts,
            sched,
            reached,
            parents: opts.trace.then(|| vec![NO_PARENT]),
            level: 0..1,
            failure,
            stop_early: true,
            meter: Meter::new(opts.limits),
        }
    }

    /// Finish every level even after a failure state shows up, so that
    /// each level's reached set is complete.
    pub fn complete_levels(mut self) -> Self {
        self.stop_early = false;
        self
    }

    /// Runs one iteration: expands the newest level.
    pub fn step(&mut self) -> Result<Progress, LimitExceeded> {
        if self.failure.is_some() {
            return Ok(Progress::Found);
        }
        self.meter.iterations += 1;
        let level = self.level.clone();
        self.meter.frontier_peak = self.meter.frontier_peak.max(level.len());
        let next_start = self.reached.len();
        for idx in level {
            self.meter.tick(self.reached.len())?;
            let successors = post(self.ts, &self.reached[idx], self.sched);
            self.meter.successors += successors.len() as u64;
            for succ in successors {
                let fail = succ.is_fail(self.ts);
                let (new_idx, fresh) = self.reached.insert_full(succ);
                if !fresh {
                    continue;
                }
                if let Some(p) = self.parents.as_mut() {
                    p.push(idx);
                }
                self.meter.admit(self.reached.len())?;
                if fail && self.failure.is_none() {
                    self.failure = Some(new_idx);
                    if self.stop_early {
                        return Ok(Progress::Found);
                    }
                }
            }
        }
        self.level = next_start..self.reached.len();
        self.meter.retained_peak = self.meter.retained_peak.max(self.reached.len());
        if self.failure.is_some() {
            Ok(Progress::Found)
        } else if self.level.is_empty() {
            Ok(Progress::Fixpoint)
        } else {
            Ok(Progress::Continue)
        }
    }

    pub fn reached(&self) -> impl Iterator<Item = &SystemState> {
        self.reached.iter()
    }

    /// States admitted by the last completed iteration.
    pub fn frontier(&self) -> &indexmap::set::Slice<SystemState> {
        &self.reached.as_slice()[self.level.clone()]
    }

    pub fn states_explored(&self) -> usize {
        self.reached.len()
    }

    pub fn iteration(&self) -> usize {
        self.meter.iterations
    }

    pub fn failure(&self) -> Option<&SystemState> {
        self.failure.map(|i| &self.reached[i])
    }

    pub(crate) fn meter(&self) -> &Meter {
        &self.meter
    }

    /// Path to the failure state, when tracing.
    pub fn witness(&self) -> Option<Vec<SystemState>> {
        let parents = self.parents.as_ref()?;
        let mut idx = self.failure?;
        let mut path = vec![self.reached[idx].clone()];
        while parents[idx] != NO_PARENT {
            idx = parents[idx];
            path.push(self.reached[idx].clone());
        }
        path.reverse();
        Some(path)
    }
}
