//! Reachability of failure states.
//!
//! Two breadth-first engines decide whether a failure state is reachable
//! from the initial state:
//!
//! * [`bf_reach`] keeps every reached state;
//! * [`acbf_reach`] keeps only the states that are maximal under the
//!   idle-tasks preorder and never expands a dominated state.
//!
//! Both generate successors on the fly. [`lockstep_verify`] runs them side
//! by side and checks that the antichain engine's working set is exactly
//! the set of maximal states of the plain engine's, level by level.

mod acbf;
mod bf;
mod full;
mod lockstep;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::automaton::SystemState;
use crate::cputime;
use crate::scheduler::{Memoryless, Scheduler};
use crate::task::TaskSet;

pub use acbf::AcbfSearch;
pub use bf::BfSearch;
pub use full::{build_full_automaton, FullAutomaton, Transition};
pub use lockstep::{lockstep_verify, Divergence, DivergenceKind, LockstepReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bf,
    Acbf,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bf => "bf",
            Algorithm::Acbf => "acbf",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bf" => Ok(Algorithm::Bf),
            "acbf" => Ok(Algorithm::Acbf),
            other => Err(format!("unknown algorithm `{other}` (expected bf or acbf)")),
        }
    }
}

/// Outcome of a completed search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// A failure state is reachable: the set is not schedulable.
    Reachable,
    /// No failure state is reachable: the set is schedulable.
    NotReachable,
}

impl Verdict {
    pub fn is_schedulable(self) -> bool {
        self == Verdict::NotReachable
    }
}

/// Resource caps. `None` means unlimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Limits {
    pub max_states: Option<usize>,
    pub max_time: Option<Duration>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    pub limits: Limits,
    /// Keep parent links so unschedulable verdicts come with a witness.
    pub trace: bool,
}

impl SearchOptions {
    pub fn traced() -> Self {
        SearchOptions {
            trace: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    States,
    Time,
}

/// A search stopped by a resource cap. This is never a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("{} limit exceeded after {iterations} iterations and {states_explored} states", match .kind { LimitKind::States => "state", LimitKind::Time => "time" })]
pub struct LimitExceeded {
    pub kind: LimitKind,
    pub states_explored: usize,
    pub iterations: usize,
}

/// Statistics and verdict of one engine run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachReport {
    pub algorithm: Algorithm,
    pub verdict: Verdict,
    /// Distinct states ever admitted to the working set.
    pub states_explored: usize,
    /// Iteration of the search loop at which it halted.
    pub iterations: usize,
    /// Largest number of states expanded in a single iteration.
    pub frontier_peak: usize,
    /// Largest working-set size at the end of an iteration.
    pub retained_peak: usize,
    /// Successor states computed, duplicates included.
    pub successors_generated: u64,
    #[serde(rename = "wall_time_ms", serialize_with = "as_millis")]
    pub wall_time: Duration,
    #[serde(rename = "cpu_time_ms", serialize_with = "as_millis")]
    pub cpu_time: Duration,
    /// Path from the initial state to a failure state, one state per edge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<SystemState>>,
}

impl ReachReport {
    /// Copy with timing zeroed, for comparing runs.
    pub fn without_timing(&self) -> ReachReport {
        ReachReport {
            wall_time: Duration::ZERO,
            cpu_time: Duration::ZERO,
            ..self.clone()
        }
    }
}

fn as_millis<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

/// State of a search after one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Progress {
    /// New states were admitted; more iterations needed.
    Continue,
    /// A failure state was admitted.
    Found,
    /// Nothing new was admitted: the working set is stable.
    Fixpoint,
}

/// Counters shared by both engines.
#[derive(Debug, Clone)]
pub(crate) struct Meter {
    started: Instant,
    limits: Limits,
    pub(crate) iterations: usize,
    pub(crate) frontier_peak: usize,
    pub(crate) retained_peak: usize,
    pub(crate) successors: u64,
    ticks: u32,
}

impl Meter {
    pub(crate) fn new(limits: Limits) -> Self {
        Meter {
            started: Instant::now(),
            limits,
            iterations: 0,
            frontier_peak: 1,
            retained_peak: 1,
            successors: 0,
            ticks: 0,
        }
    }

    /// Called once per admitted state.
    pub(crate) fn admit(&mut self, explored: usize) -> Result<(), LimitExceeded> {
        if self.limits.max_states.is_some_and(|cap| explored > cap) {
            return Err(self.exceeded(LimitKind::States, explored));
        }
        self.tick(explored)
    }

    /// Called once per expanded state.
    pub(crate) fn tick(&mut self, explored: usize) -> Result<(), LimitExceeded> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(256) {
            if let Some(cap) = self.limits.max_time {
                if self.started.elapsed() > cap {
                    return Err(self.exceeded(LimitKind::Time, explored));
                }
            }
        }
        Ok(())
    }

    fn exceeded(&self, kind: LimitKind, explored: usize) -> LimitExceeded {
        LimitExceeded {
            kind,
            states_explored: explored,
            iterations: self.iterations,
        }
    }
}

/// Plain breadth-first reachability. Accepts any scheduler.
pub fn bf_reach<S: Scheduler + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    opts: &SearchOptions,
) -> Result<ReachReport, LimitExceeded> {
    let wall = Instant::now();
    let cpu = cputime::thread_cpu_time();
    let mut search = BfSearch::new(ts, sched, opts);
    let verdict = drive(|| search.step())?;
    Ok(ReachReport {
        algorithm: Algorithm::Bf,
        verdict,
        states_explored: search.states_explored(),
        iterations: search.iteration(),
        frontier_peak: search.meter().frontier_peak,
        retained_peak: search.meter().retained_peak,
        successors_generated: search.meter().successors,
        wall_time: wall.elapsed(),
        cpu_time: cputime::thread_cpu_time().saturating_sub(cpu),
        witness: search.witness(),
    })
}

/// Antichain breadth-first reachability under the idle-tasks preorder.
/// The preorder is only a simulation for memoryless schedulers, hence the
/// bound.
pub fn acbf_reach<S: Memoryless + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    opts: &SearchOptions,
) -> Result<ReachReport, LimitExceeded> {
    let wall = Instant::now();
    let cpu = cputime::thread_cpu_time();
    let mut search = AcbfSearch::new(ts, sched, opts);
    let verdict = drive(|| search.step())?;
    Ok(ReachReport {
        algorithm: Algorithm::Acbf,
        verdict,
        states_explored: search.states_explored(),
        iterations: search.iteration(),
        frontier_peak: search.meter().frontier_peak,
        retained_peak: search.meter().retained_peak,
        successors_generated: search.meter().successors,
        wall_time: wall.elapsed(),
        cpu_time: cputime::thread_cpu_time().saturating_sub(cpu),
        witness: search.witness(),
    })
}

/// Runs either engine.
pub fn reach<S: Memoryless + ?Sized>(
    algorithm: Algorithm,
    ts: &TaskSet,
    sched: &S,
    opts: &SearchOptions,
) -> Result<ReachReport, LimitExceeded> {
    match algorithm {
        Algorithm::Bf => bf_reach(ts, sched, opts),
        Algorithm::Acbf => acbf_reach(ts, sched, opts),
    }
}

fn drive(
    mut step: impl FnMut() -> Result<Progress, LimitExceeded>,
) -> Result<Verdict, LimitExceeded> {
    loop {
        match step()? {
            Progress::Continue => {}
            Progress::Found => return Ok(Verdict::Reachable),
            Progress::Fixpoint => return Ok(Verdict::NotReachable),
        }
    }
}

/// Checks that `path` starts in the initial state, ends in a failure
/// state, and that each consecutive pair is an automaton edge.
pub fn is_valid_witness<S: Scheduler + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    path: &[SystemState],
) -> bool {
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return false;
    };
    *first == crate::automaton::initial_state(ts)
        && last.is_fail(ts)
        && path
            .windows(2)
            .all(|w| crate::automaton::post(ts, &w[0], sched).contains(&w[1]))
}
