//! Runs both engines over a generated corpus and prints the CSV and a
//! summary.

use schedreach::bench::{run_bench, summarize, write_csv, BenchOptions};
use schedreach::generator::{generate, GenParams};
use schedreach::prelude::*;

fn main() {
    let sets: Vec<(String, TaskSet)> = generate(&GenParams::new(30, 5, 2, 3).with_tasks(4, 5))
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, ts)| (format!("set_{i:05}"), ts))
        .collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let records = run_bench(
        &sets,
        &Edf,
        &BenchOptions {
            jobs,
            ..Default::default()
        },
    )
    .unwrap();
    write_csv(&records, std::io::stdout()).unwrap();
    println!("{}", summarize(&records));
}
