//! Brute-force soundness checks on small instances.
//!
//! * [`check_simulation`]: a preorder is a simulation on an explicitly
//!   built automaton (every move is mimicked, failure is inherited).
//! * [`check_post_max_lemma`]: pruning before or after taking successors
//!   yields the same maximal set.
//! * [`run_campaign`]: runs those together with the lockstep and verdict
//!   agreement checks over bundled and randomly generated task sets.

use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antichain::{max_elements, IdlePreorder, Preorder, RelaxedIdlePreorder};
use crate::automaton::{post, SystemState};
use crate::generator::{generate, GenParams};
use crate::reachability::{
    acbf_reach, bf_reach, build_full_automaton, lockstep_verify, FullAutomaton, LockstepReport,
    SearchOptions, Verdict,
};
use crate::scheduler::{Memoryless, SchedulerKind};
use crate::task::{Task, TaskSet, Time};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimulationViolation {
    /// `simulator` simulates `state`, `state -> successor` is an edge, but
    /// no successor of `simulator` simulates `successor`.
    EdgeNotMimicked {
        state: SystemState,
        successor: SystemState,
        simulator: SystemState,
    },
    /// `simulator` simulates the failure state `state` without failing.
    FailureNotInherited {
        state: SystemState,
        simulator: SystemState,
    },
}

impl fmt::Display for SimulationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulationViolation::EdgeNotMimicked {
                state,
                successor,
                simulator,
            } => write!(
                f,
                "{simulator} simulates {state}, but no successor of {simulator} simulates {successor}"
            ),
            SimulationViolation::FailureNotInherited { state, simulator } => {
                write!(f, "{simulator} simulates failure state {state} but does not fail")
            }
        }
    }
}

/// Statistics of a passing simulation check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulationStats {
    pub states: usize,
    pub pairs: usize,
    pub edges_checked: usize,
}

/// States with the same `rct` as `state` and any `nat` vector. Both the
/// idle-tasks preorder and its relaxed variant require equal `rct`.
fn same_rct_states(ts: &TaskSet, state: &SystemState) -> Vec<SystemState> {
    let mut nats: Vec<Vec<Time>> = vec![Vec::with_capacity(ts.len())];
    for t in ts.tasks() {
        nats = nats
            .into_iter()
            .flat_map(|prefix| {
                (0..=t.period).map(move |n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    nats.into_iter()
        .map(|nat| SystemState::from_parts(nat, state.rct().to_vec()))
        .collect()
}

/// Checks both simulation conditions of `preorder` exhaustively: for every
/// reachable state `s1`, every valid state `s2` that simulates it, and
/// every edge out of `s1`.
pub fn check_simulation<P: Preorder, S: Memoryless + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    preorder: &P,
    automaton: &FullAutomaton,
) -> Result<SimulationStats, SimulationViolation> {
    let mut stats = SimulationStats {
        states: automaton.len(),
        ..Default::default()
    };
    for (i, s1) in automaton.states().iter().enumerate() {
        let succ1: Vec<&SystemState> = automaton
            .successors(i)
            .into_iter()
            .map(|j| automaton.state(j))
            .collect();
        let fails = s1.is_fail(ts);
        for s2 in same_rct_states(ts, s1) {
            if !preorder.simulates(&s2, s1) {
                continue;
            }
            stats.pairs += 1;
            if fails && !s2.is_fail(ts) {
                return Err(SimulationViolation::FailureNotInherited {
                    state: s1.clone(),
                    simulator: s2,
                });
            }
            let succ2 = post(ts, &s2, sched);
            for &t1 in &succ1 {
                stats.edges_checked += 1;
                if !succ2.iter().any(|t2| preorder.simulates(t2, t1)) {
                    return Err(SimulationViolation::EdgeNotMimicked {
                        state: s1.clone(),
                        successor: t1.clone(),
                        simulator: s2,
                    });
                }
            }
        }
    }
    Ok(stats)
}

/// `Max(Post(Max(B))) = Max(Post(B))` for one set `B`.
pub fn check_post_max_lemma<S: Memoryless + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    states: &[SystemState],
) -> bool {
    let post_all = |b: Vec<&SystemState>| -> Vec<SystemState> {
        b.into_iter().flat_map(|s| post(ts, s, sched)).collect()
    };
    let maxed = max_elements(states.iter().cloned());
    let lhs = max_elements(post_all(maxed.iter().collect()));
    let rhs = max_elements(post_all(states.iter().collect()));
    lhs == rhs
}

/// A uniformly random valid state of `ts`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, ts: &TaskSet) -> SystemState {
    let (nat, rct) = ts
        .tasks()
        .iter()
        .map(|t| (rng.random_range(0..=t.period), rng.random_range(0..=t.wcet)))
        .unzip();
    SystemState::from_parts(nat, rct)
}

/// A random set of states biased towards comparable ones: half are drawn
/// uniformly, the rest copy a drawn state and perturb idle `nat` values.
pub fn random_state_set<R: Rng + ?Sized>(
    rng: &mut R,
    ts: &TaskSet,
    size: usize,
) -> Vec<SystemState> {
    let mut out: Vec<SystemState> = Vec::with_capacity(size);
    while out.len() < size {
        let base = match out.choose(rng) {
            Some(b) if rng.random_bool(0.5) => b.clone(),
            _ => {
                out.push(random_state(rng, ts));
                continue;
            }
        };
        let (mut nat, rct) = (base.nat().to_vec(), base.rct().to_vec());
        for (i, t) in ts.tasks().iter().enumerate() {
            if rct[i] == 0 && rng.random_bool(0.5) {
                nat[i] = rng.random_range(0..=t.period);
            }
        }
        out.push(SystemState::from_parts(nat, rct));
    }
    out
}

/// Hand-picked small instances covering one and two processors, implicit
/// and constrained deadlines, schedulable and not.
pub fn bundled_instances() -> Vec<(&'static str, TaskSet)> {
    let mk = |m: usize, tasks: &[(Time, Time, Time)]| {
        TaskSet::new(
            m,
            tasks.iter().map(|&(t, d, c)| Task::new(t, d, c)).collect(),
        )
        .expect("valid bundled set")
    };
    vec![
        ("two-task example", mk(2, &[(2, 2, 1), (3, 3, 2)])),
        ("uniprocessor pair", mk(1, &[(2, 2, 1), (3, 3, 1)])),
        ("uniprocessor overload", mk(1, &[(2, 2, 1), (3, 3, 2)])),
        (
            "constrained triple",
            mk(2, &[(3, 2, 1), (4, 3, 2), (4, 4, 2)]),
        ),
        ("tight triple", mk(2, &[(2, 2, 1), (3, 2, 2), (4, 4, 3)])),
        (
            "mixed quad",
            mk(2, &[(2, 2, 1), (3, 3, 1), (4, 2, 1), (4, 4, 2)]),
        ),
    ]
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Random task sets per processor count (1 and 2).
    pub count: usize,
    pub tmax: Time,
    /// Largest automaton enumerated for the simulation check.
    pub max_states: usize,
    /// Random `B` sets per instance for the successor lemma.
    pub lemma_samples: usize,
    /// Check the relaxed preorder instead of the idle-tasks preorder.
    pub mutant: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            seed: 1,
            count: 0,
            tmax: 4,
            max_states: 5_000,
            lemma_samples: 20,
            mutant: false,
        }
    }
}

/// A failed check with enough detail to reproduce it.
#[derive(Debug, Clone)]
pub struct Finding {
    pub instance: String,
    pub taskset: TaskSet,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} failed on {}: {}",
            self.check, self.instance, self.detail
        )?;
        write!(f, "{}", self.taskset)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CampaignReport {
    pub instances: usize,
    pub lockstep_runs: usize,
    pub simulation_checks: usize,
    pub simulation_skipped: usize,
    pub lemma_checks: usize,
    pub findings: Vec<Finding>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} instances: {} lockstep runs, {} simulation checks ({} skipped as too large), {} successor-lemma checks, {} findings",
            self.instances,
            self.lockstep_runs,
            self.simulation_checks,
            self.simulation_skipped,
            self.lemma_checks,
            self.findings.len()
        )
    }
}

fn check_instance(
    name: &str,
    ts: &TaskSet,
    cfg: &CampaignConfig,
    rng: &mut ChaCha8Rng,
    report: &mut CampaignReport,
) {
    report.instances += 1;
    let finding = |check: &'static str, detail: String| Finding {
        instance: name.to_string(),
        taskset: ts.clone(),
        check,
        detail,
    };
    for kind in [SchedulerKind::Edf, SchedulerKind::Dm] {
        let lock: LockstepReport = lockstep_verify(ts, &kind, 10_000);
        report.lockstep_runs += 1;
        if let Some(d) = lock.divergence {
            report
                .findings
                .push(finding("lockstep", format!("{kind}: {d:?}")));
        }
        let opts = SearchOptions::default();
        let (bf, ac) = (bf_reach(ts, &kind, &opts), acbf_reach(ts, &kind, &opts));
        if let (Ok(b), Ok(a)) = (&bf, &ac) {
            if b.verdict != a.verdict {
                report.findings.push(finding(
                    "verdict agreement",
                    format!("{kind}: bf {:?}, acbf {:?}", b.verdict, a.verdict),
                ));
            }
            if b.verdict == Verdict::NotReachable && a.states_explored > b.states_explored {
                report.findings.push(finding(
                    "pruning",
                    format!("{kind}: acbf explored more states"),
                ));
            }
        }

        match build_full_automaton(ts, &kind, cfg.max_states) {
            Ok(full) => {
                report.simulation_checks += 1;
                let result = if cfg.mutant {
                    check_simulation(ts, &kind, &RelaxedIdlePreorder, &full)
                } else {
                    check_simulation(ts, &kind, &IdlePreorder, &full)
                };
                if let Err(v) = result {
                    report
                        .findings
                        .push(finding("simulation", format!("{kind}: {v}")));
                }
            }
            Err(_) => report.simulation_skipped += 1,
        }

        for _ in 0..cfg.lemma_samples {
            let size = rng.random_range(1..=12);
            let b = random_state_set(rng, ts, size);
            report.lemma_checks += 1;
            if !check_post_max_lemma(ts, &kind, &b) {
                let shown: Vec<String> = b.iter().map(|s| s.render()).collect();
                report
                    .findings
                    .push(finding("successor lemma", format!("{kind}: B = {shown:?}")));
                break;
            }
        }
    }
}

/// Runs every check on the bundled instances and `2 * count` generated
/// ones (`count` on one processor, `count` on two).
pub fn run_campaign(cfg: &CampaignConfig) -> CampaignReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = CampaignReport::default();
    for (name, ts) in bundled_instances() {
        check_instance(name, &ts, cfg, &mut rng, &mut report);
    }
    if cfg.count > 0 {
        for m in [1usize, 2] {
            let params = GenParams::new(cfg.count, cfg.tmax, m, cfg.seed.wrapping_add(m as u64))
                .with_tasks(m + 1, m + 1);
            match generate(&params) {
                Ok(sets) => {
                    for (i, ts) in sets.iter().enumerate() {
                        check_instance(
                            &format!("random m={m} #{i}"),
                            ts,
                            cfg,
                            &mut rng,
                            &mut report,
                        );
                    }
                }
                Err(e) => log::warn!("skipping random sets for m={m}: {e}"),
            }
        }
    }
    report
}
