//! Finds a concrete path to a deadline miss.

use schedreach::prelude::*;
use schedreach::reachability::is_valid_witness;

fn main() {
    // one processor, utilization 1/2 + 2/3 > 1
    let ts = TaskSet::new(1, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap();
    let r = acbf_reach(&ts, &Edf, &SearchOptions::traced()).unwrap();
    let w = r.witness.expect("unschedulable sets come with a witness");
    let path: Vec<String> = w.iter().map(|s| s.render()).collect();
    println!("{:?} after {} iterations", r.verdict, r.iterations);
    println!("witness: {}", path.join(" -> "));
    assert!(is_valid_witness(&ts, &Edf, &w));
    let last = w.last().unwrap();
    for i in last.active().iter() {
        println!("task {} laxity {}", i + 1, last.laxity(&ts, i));
    }
}
