use std::collections::HashMap;

use super::{LimitExceeded, Meter, Progress, SearchOptions};
use crate::antichain::Antichain;
use crate::automaton::{initial_state, post, SystemState};
use crate::scheduler::Memoryless;
use crate::task::TaskSet;

/// Breadth-first search over an antichain of maximal states.
///
/// Each iteration expands every element of the previous working set that
/// was not already expanded (older elements' successors are dominated by
/// the current set), and inserts the successors one by one. The working
/// set after iteration `i` is the set of maximal elements of everything
/// plain breadth-first search reaches within `i` steps.
pub struct AcbfSearch<'a, S: ?Sized> {
    ts: &'a TaskSet,
    sched: &'a S,
    antichain: Antichain,
    frontier: Vec<SystemState>,
    parents: Option<HashMap<SystemState, SystemState>>,
    admitted: usize,
    failure: Option<SystemState>,
    stop_early: bool,
    meter: Meter,
}

impl<'a, S: Memoryless + ?Sized> AcbfSearch<'a, S> {
    pub fn new(ts: &'a TaskSet, sched: &'a S, opts: &SearchOptions) -> Self {
        let s0 = initial_state(ts);
        let failure = s0.is_fail(ts).then(|| s0.clone());
        let mut antichain = Antichain::new();
        antichain.insert(s0.clone());
        AcbfSearch {
            ts,
            sched,
            antichain,
            frontier: vec![s0],
            parents: opts.trace.then(HashMap::new),
            admitted: 1,
            failure,
            stop_early: true,
            meter: Meter::new(opts.limits),
        }
    }

    /// Finish every level even after a failure state shows up.
    pub fn complete_levels(mut self) -> Self {
        self.stop_early = false;
        self
    }

    pub fn step(&mut self) -> Result<Progress, LimitExceeded> {
        if self.failure.is_some() {
            return Ok(Progress::Found);
        }
        self.meter.iterations += 1;
        let frontier = std::mem::take(&mut self.frontier);
        self.meter.frontier_peak = self.meter.frontier_peak.max(frontier.len());
        let mut added = Vec::new();
        for state in &frontier {
            self.meter.tick(self.admitted)?;
            let successors = post(self.ts, state, self.sched);
            self.meter.successors += successors.len() as u64;
            for succ in successors {
                if !self.antichain.insert(succ.clone()) {
                    continue;
                }
                self.admitted += 1;
                if let Some(p) = self.parents.as_mut() {
                    p.entry(succ.clone()).or_insert_with(|| state.clone());
                }
                self.meter.admit(self.admitted)?;
                if self.failure.is_none() && succ.is_fail(self.ts) {
                    self.failure = Some(succ.clone());
                    if self.stop_early {
                        return Ok(Progress::Found);
                    }
                }
                added.push(succ);
            }
        }
        added.retain(|s| self.antichain.contains(s));
        self.frontier = added;
        self.meter.retained_peak = self.meter.retained_peak.max(self.antichain.len());
        if self.failure.is_some() {
            Ok(Progress::Found)
        } else if self.frontier.is_empty() {
            Ok(Progress::Fixpoint)
        } else {
            Ok(Progress::Continue)
        }
    }

    pub fn antichain(&self) -> &Antichain {
        &self.antichain
    }

    /// Elements admitted by the last iteration that are still maximal;
    /// these are expanded next.
    pub fn frontier(&self) -> &[SystemState] {
        &self.frontier
    }

    /// Distinct states ever admitted to the antichain. A state that is
    /// evicted stays dominated, so it is never admitted twice.
    pub fn states_explored(&self) -> usize {
        self.admitted
    }

    pub fn iteration(&self) -> usize {
        self.meter.iterations
    }

    pub fn failure(&self) -> Option<&SystemState> {
        self.failure.as_ref()
    }

    pub(crate) fn meter(&self) -> &Meter {
        &self.meter
    }

    pub fn witness(&self) -> Option<Vec<SystemState>> {
        let parents = self.parents.as_ref()?;
        let mut cur = self.failure.clone()?;
        let mut path = vec![cur.clone()];
        while let Some(p) = parents.get(&cur) {
            path.push(p.clone());
            cur = p.clone();
        }
        path.reverse();
        Some(path)
    }
}
