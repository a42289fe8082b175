//! Steps both engines side by side on random sets and checks that the
//! antichain always holds the maximal elements of the plain search.

use schedreach::generator::{generate, GenParams};
use schedreach::prelude::*;

fn main() {
    let sets = generate(&GenParams::new(50, 4, 2, 11)).unwrap();
    let mut levels = 0;
    for ts in &sets {
        let r = lockstep_verify(ts, &Edf, 10_000);
        assert!(r.passed(), "{r:?}\n{ts}");
        levels += r.iterations_checked;
    }
    println!(
        "{} sets, {levels} levels compared, no divergence",
        sets.len()
    );
}
