use super::{AcbfSearch, BfSearch, Progress, SearchOptions};
use crate::antichain::max_elements;
use crate::automaton::SystemState;
use crate::scheduler::Memoryless;
use crate::task::TaskSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivergenceKind {
    /// The antichain working set differs from the maximal elements of the
    /// plain working set.
    SetsDiffer {
        expected: Vec<SystemState>,
        actual: Vec<SystemState>,
    },
    /// The engines halted inconsistently: one found a failure and the
    /// other did not, or the plain search reached its fixpoint first.
    HaltDiffers { bf: Progress, acbf: Progress },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub iteration: usize,
    pub kind: DivergenceKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockstepReport {
    /// Iterations compared, the initial one included.
    pub iterations_checked: usize,
    /// How both engines halted, if they did within the iteration budget.
    pub halted: Option<Progress>,
    pub divergence: Option<Divergence>,
}

impl LockstepReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }
}

/// Runs both engines level by level and checks, after every iteration,
/// that the antichain working set equals the maximal elements of the
/// plain working set. Stops at the first divergence, when both engines
/// halt, or after `max_iters` iterations.
pub fn lockstep_verify<S: Memoryless + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    max_iters: usize,
) -> LockstepReport {
    let opts = SearchOptions::default();
    let mut bf = BfSearch::new(ts, sched, &opts).complete_levels();
    let mut ac = AcbfSearch::new(ts, sched, &opts).complete_levels();
    let mut report = LockstepReport {
        iterations_checked: 0,
        halted: None,
        divergence: None,
    };
    let mut iteration = 0;
    loop {
        let expected = max_elements(bf.reached().cloned());
        report.iterations_checked += 1;
        if &expected != ac.antichain() {
            report.divergence = Some(Divergence {
                iteration,
                kind: DivergenceKind::SetsDiffer {
                    expected: expected.to_sorted_vec(),
                    actual: ac.antichain().to_sorted_vec(),
                },
            });
            return report;
        }
        if iteration >= max_iters {
            return report;
        }
        iteration += 1;
        // no limits are set, so neither engine can fail
        let p = bf.step().expect("unlimited search");
        let q = ac.step().expect("unlimited search");
        // the maximal elements may stabilise before the plain set does
        let consistent = p == q || (p == Progress::Continue && q == Progress::Fixpoint);
        if !consistent {
            report.divergence = Some(Divergence {
                iteration,
                kind: DivergenceKind::HaltDiffers { bf: p, acbf: q },
            });
            return report;
        }
        if p != Progress::Continue {
            let expected = max_elements(bf.reached().cloned());
            report.iterations_checked += 1;
            if &expected != ac.antichain() {
                report.divergence = Some(Divergence {
                    iteration,
                    kind: DivergenceKind::SetsDiffer {
                        expected: expected.to_sorted_vec(),
                        actual: ac.antichain().to_sorted_vec(),
                    },
                });
            }
            report.halted = Some(p);
            return report;
        }
    }
}
