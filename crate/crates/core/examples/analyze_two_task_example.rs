//! Decides schedulability of the two-task example with both engines.

use schedreach::prelude::*;

fn main() {
    let ts: TaskSet = "m 2\ntask 2 2 1\ntask 3 3 2\n"
        .parse()
        .expect("valid task set");
    println!("{ts}");
    for sched in [SchedulerKind::Edf, SchedulerKind::Dm] {
        for algo in [Algorithm::Bf, Algorithm::Acbf] {
            let r = schedreach::reachability::reach(algo, &ts, &sched, &SearchOptions::default())
                .expect("no limits");
            println!(
                "{sched:>3} {algo:>4}: {} after {} iterations, {} states",
                if r.verdict.is_schedulable() {
                    "schedulable"
                } else {
                    "unschedulable"
                },
                r.iterations,
                r.states_explored
            );
        }
    }
}
