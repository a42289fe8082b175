//! Shows the idle-tasks preorder on a few states of the two-task example.

use schedreach::prelude::*;

fn main() {
    let ts = TaskSet::new(2, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap();
    let s = |pairs: &[(u32, u32)]| SystemState::from_pairs(&ts, pairs).unwrap();
    let pairs = [
        (s(&[(0, 0), (2, 1)]), s(&[(1, 0), (2, 1)])),
        (s(&[(0, 0), (0, 0)]), s(&[(1, 0), (1, 0)])),
        (s(&[(0, 0), (2, 1)]), s(&[(0, 0), (1, 1)])),
    ];
    for (a, b) in &pairs {
        println!(
            "{a} simulates {b}: {:5}   reverse: {}",
            idle_simulates(a, b),
            idle_simulates(b, a)
        );
    }

    let reachable = build_full_automaton(&ts, &Edf, 1_000).unwrap();
    let max = max_elements(reachable.states().iter().cloned());
    let shown: Vec<String> = max.to_sorted_vec().iter().map(|s| s.render()).collect();
    println!(
        "{} reachable states, maximal ones: {}",
        reachable.len(),
        shown.join(" ")
    );
}
