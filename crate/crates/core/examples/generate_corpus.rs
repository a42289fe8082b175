//! Writes a small random corpus to a directory and reads it back.
//!
//! Usage: `cargo run --example generate_corpus [DIR]`

use std::path::PathBuf;

use schedreach::generator::{generate_with_stats, read_corpus, write_corpus, GenParams};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("schedreach-corpus"));
    let params = GenParams::new(20, 5, 2, 42);
    let (sets, drops) = generate_with_stats(&params).unwrap();
    write_corpus(&dir, &params, &sets).unwrap();
    println!(
        "wrote {} sets to {} (dropped {drops:?})",
        sets.len(),
        dir.display()
    );
    for (id, ts) in read_corpus(&dir).unwrap().iter().take(3) {
        println!("{id}: n={} U={}", ts.len(), ts.utilization());
    }
}
