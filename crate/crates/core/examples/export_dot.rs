//! Prints the explicit automaton of the two-task example as Graphviz.
//!
//! `cargo run --example export_dot | dot -Tsvg > automaton.svg`

use schedreach::dot::to_dot;
use schedreach::prelude::*;

fn main() {
    let ts = TaskSet::new(2, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap();
    let full = build_full_automaton(&ts, &Edf, 1_000).unwrap();
    print!("{}", to_dot(&ts, &full));
}
