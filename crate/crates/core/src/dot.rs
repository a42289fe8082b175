//! Graphviz rendering of a [`FullAutomaton`].
//!
//! Reachable states are circles labelled in bracket notation, failure
//! states are double circles. A non-empty request goes through a dashed
//! intermediate node (the state right after the release), followed by a
//! `Run` edge for the clock tick. Empty requests are drawn as a direct
//! `Run` edge.

use std::collections::HashMap;
use std::fmt::Write;

use crate::automaton::SystemState;
use crate::reachability::FullAutomaton;
use crate::task::TaskSet;

pub fn to_dot(ts: &TaskSet, automaton: &FullAutomaton) -> String {
    let mut out = String::new();
    out.push_str("digraph automaton {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontname=\"monospace\"];\n");
    for (i, s) in automaton.states().iter().enumerate() {
        let shape = if s.is_fail(ts) {
            ", shape=doublecircle"
        } else {
            ""
        };
        let initial = if i == 0 { ", penwidth=2" } else { "" };
        writeln!(out, "  s{i} [label=\"{s}\"{shape}{initial}];").unwrap();
    }

    let mut released: HashMap<&SystemState, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (t, tr) in automaton.transitions().iter().enumerate() {
        match automaton.released_state(t) {
            None => edges.push(format!("  s{} -> s{} [label=\"Run\"];", tr.from, tr.to)),
            Some(r) => {
                let next = released.len();
                let fresh = !released.contains_key(r);
                let id = *released.entry(r).or_insert(next);
                if fresh {
                    writeln!(out, "  r{id} [label=\"{r}\", style=dashed];").unwrap();
                    edges.push(format!("  r{id} -> s{} [label=\"Run\"];", tr.to));
                }
                edges.push(format!(
                    "  s{} -> r{id} [label=\"{}\"];",
                    tr.from, tr.requests
                ));
            }
        }
    }
    edges.sort();
    edges.dedup();
    for e in edges {
        out.push_str(&e);
        out.push('\n');
    }
    out.push_str("}\n");
    out
}
