//! Checks that the built-in schedulers are work-conserving and memoryless
//! on every state of a small task set, and that a hand-written scheduler
//! looking at idle tasks is caught.

use schedreach::automaton::all_states;
use schedreach::prelude::*;
use schedreach::scheduler::{
    check_memoryless, check_work_conserving, memoryless_pairs, FnScheduler,
};

fn main() {
    let ts = TaskSet::new(
        2,
        vec![Task::new(2, 2, 1), Task::new(3, 3, 2), Task::new(4, 3, 1)],
    )
    .unwrap();
    let states = all_states(&ts);
    let pairs = memoryless_pairs(&states);
    for kind in [SchedulerKind::Edf, SchedulerKind::Dm] {
        let wc = check_work_conserving(&kind, &ts, &states).is_ok();
        let ml = check_memoryless(&kind, &ts, pairs.iter().copied()).is_ok();
        println!(
            "{kind}: work-conserving {wc}, memoryless {ml} ({} states)",
            states.len()
        );
    }

    let peeking = FnScheduler::new("peeking", |ts: &TaskSet, s: &SystemState| {
        if s.nat()[0] > 0 && s.rct()[0] == 0 {
            TaskMask::EMPTY
        } else {
            Edf.run(ts, s)
        }
    });
    match check_memoryless(&peeking, &ts, pairs.iter().copied()) {
        Ok(()) => println!("peeking: memoryless"),
        Err(v) => println!(
            "peeking: {} runs {}, {} runs {}",
            v.first, v.first_run, v.second, v.second_run
        ),
    }
}
