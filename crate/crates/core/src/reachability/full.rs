use std::collections::{BTreeSet, HashMap};

use super::{LimitExceeded, LimitKind};
use crate::automaton::{initial_state, steps, SystemState, TaskMask};
use crate::scheduler::Scheduler;
use crate::task::TaskSet;

/// One request-then-tick move between two reachable states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub requests: TaskMask,
    pub running: TaskMask,
    pub to: usize,
}

/// The reachable part of the automaton, built explicitly. State 0 is the
/// initial state.
#[derive(Debug, Clone)]
pub struct FullAutomaton {
    states: Vec<SystemState>,
    index: HashMap<SystemState, usize>,
    transitions: Vec<Transition>,
    released: Vec<Option<SystemState>>,
}

/// Enumerates every state reachable from the initial state by depth-first
/// search, recording one transition per request subset. Fails with a state
/// limit error when more than `limit` states are reachable.
pub fn build_full_automaton<S: Scheduler + ?Sized>(
    ts: &TaskSet,
    sched: &S,
    limit: usize,
) -> Result<FullAutomaton, LimitExceeded> {
    let s0 = initial_state(ts);
    let mut states = vec![s0.clone()];
    let mut index = HashMap::from([(s0, 0)]);
    let mut transitions = Vec::new();
    let mut released = Vec::new();
    let mut stack = vec![0usize];
    while let Some(from) = stack.pop() {
        let state = states[from].clone();
        for step in steps(ts, &state, sched) {
            let to = match index.get(&step.successor) {
                Some(&i) => i,
                None => {
                    if states.len() >= limit {
                        return Err(LimitExceeded {
                            kind: LimitKind::States,
                            states_explored: states.len() + 1,
                            iterations: 0,
                        });
                    }
                    let i = states.len();
                    index.insert(step.successor.clone(), i);
                    states.push(step.successor);
                    stack.push(i);
                    i
                }
            };
            transitions.push(Transition {
                from,
                requests: step.requests,
                running: step.running,
                to,
            });
            released.push((!step.requests.is_empty()).then_some(step.released));
        }
    }
    Ok(FullAutomaton {
        states,
        index,
        transitions,
        released,
    })
}

impl FullAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &SystemState {
        &self.states[i]
    }

    pub fn index_of(&self, s: &SystemState) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Every transition, one per (state, request subset).
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Intermediate state after the requests of transition `t`, if any
    /// task was released.
    pub fn released_state(&self, t: usize) -> Option<&SystemState> {
        self.released[t].as_ref()
    }

    /// Distinct intermediate states reached by non-empty requests.
    pub fn released_states(&self) -> BTreeSet<&SystemState> {
        self.released.iter().flatten().collect()
    }

    /// Automaton edges as a set of `(from, to)` pairs.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.transitions.iter().map(|t| (t.from, t.to)).collect()
    }

    pub fn successors(&self, i: usize) -> BTreeSet<usize> {
        self.transitions
            .iter()
            .filter(|t| t.from == i)
            .map(|t| t.to)
            .collect()
    }

    pub fn failure_states(&self, ts: &TaskSet) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| self.states[i].is_fail(ts))
            .collect()
    }
}
