//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use schedreach::antichain::{idle_simulates, IdlePreorder, RelaxedIdlePreorder};
use schedreach::automaton::SystemState;
use schedreach::bench::{run_bench, BenchOptions, BenchRecord};
use schedreach::generator::{generate, GenParams};
use schedreach::prelude::*;
use schedreach::verify::{check_post_max_lemma, check_simulation, random_state_set};

const AC1_MAX_TIME: Duration = Duration::from_secs(1);
const AC2_MAX_TIME: Duration = Duration::from_millis(1);
const AC3_SETS: usize = 500;
const AC3_TMAX: u32 = 5;
const AC3_SEED: u64 = 2024;
const AC3_MAX_TIME: Duration = Duration::from_secs(600);
const AC4_SETS: usize = 100;
const AC5_AUTOMATA: usize = 50;
const AC5_MAX_STATES: usize = 5_000;
const AC6_SAMPLES: usize = 1_000;
const AC7_MIN_BF_STATES: usize = 1_000;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn two_task_set() -> TaskSet {
    TaskSet::new(2, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap()
}

fn state(ts: &TaskSet, pairs: &[(u32, u32)]) -> SystemState {
    SystemState::from_pairs(ts, pairs).unwrap()
}

fn ac1() -> Outcome {
    let ts = two_task_set();
    let opts = SearchOptions::default();
    let start = Instant::now();
    let bf = bf_reach(&ts, &Edf, &opts);
    let ac = acbf_reach(&ts, &Edf, &opts);
    let elapsed = start.elapsed();
    let ok = |r: &Result<ReachReport, _>| matches!(r, Ok(r) if r.verdict == Verdict::NotReachable);
    outcome(
        ok(&bf) && ok(&ac) && elapsed < AC1_MAX_TIME,
        format!("bf and acbf schedulable in {elapsed:?} (limit {AC1_MAX_TIME:?})"),
    )
}

fn ac2() -> Outcome {
    let ts = two_task_set();
    let pairs = [
        (state(&ts, &[(0, 0), (2, 1)]), state(&ts, &[(1, 0), (2, 1)])),
        (state(&ts, &[(0, 0), (0, 0)]), state(&ts, &[(1, 0), (1, 0)])),
    ];
    let start = Instant::now();
    let forward = pairs.iter().all(|(a, b)| idle_simulates(a, b));
    let reverse = pairs.iter().any(|(a, b)| idle_simulates(b, a));
    let elapsed = start.elapsed();
    outcome(
        forward && !reverse && elapsed < AC2_MAX_TIME,
        format!("forward {forward}, reverse {reverse}, {elapsed:?} (limit {AC2_MAX_TIME:?})"),
    )
}

fn fuzz_corpus() -> Vec<(String, TaskSet)> {
    let params = GenParams::new(AC3_SETS, AC3_TMAX, 2, AC3_SEED).with_tasks(3, 4);
    generate(&params)
        .expect("fuzz corpus")
        .into_iter()
        .enumerate()
        .map(|(i, ts)| (format!("set_{i:05}"), ts))
        .collect()
}

fn ac3(records: &Result<Vec<BenchRecord>, String>, elapsed: Duration) -> Outcome {
    match records {
        Err(e) => outcome(false, e.clone()),
        Ok(recs) => {
            let completed = recs.iter().filter(|r| r.verdict.is_some()).count();
            outcome(
                recs.len() >= AC3_SETS && completed == recs.len() && elapsed < AC3_MAX_TIME,
                format!(
                    "{} sets, {completed} completed, all verdicts agree, {elapsed:.1?} (limit {AC3_MAX_TIME:?})",
                    recs.len()
                ),
            )
        }
    }
}

fn small_sets(count: usize, tmax: u32, seed: u64) -> Vec<TaskSet> {
    let mut out = generate(&GenParams::new(count / 2, tmax, 1, seed).with_tasks(2, 3)).unwrap();
    out.extend(
        generate(&GenParams::new(count - count / 2, tmax, 2, seed + 1).with_tasks(3, 3)).unwrap(),
    );
    out
}

fn ac4() -> Outcome {
    let sets = small_sets(AC4_SETS, 4, 41);
    let mut levels = 0;
    for (i, ts) in sets.iter().enumerate() {
        for kind in [SchedulerKind::Edf, SchedulerKind::Dm] {
            let r = lockstep_verify(ts, &kind, 10_000);
            levels += r.iterations_checked;
            if !r.passed() || r.halted.is_none() {
                return outcome(false, format!("set {i} under {kind}: {r:?}\n{ts}"));
            }
        }
    }
    outcome(
        sets.len() >= AC4_SETS,
        format!(
            "{} sets, edf and dm, {levels} levels compared, 0 violations",
            sets.len()
        ),
    )
}

fn ac5() -> Outcome {
    let sets = small_sets(AC5_AUTOMATA + 30, 4, 51);
    let (mut checked, mut mutant_violations, mut pairs) = (0, 0, 0);
    for ts in &sets {
        let Ok(full) = build_full_automaton(ts, &Edf, AC5_MAX_STATES) else {
            continue;
        };
        checked += 1;
        match check_simulation(ts, &Edf, &IdlePreorder, &full) {
            Ok(stats) => pairs += stats.pairs,
            Err(v) => return outcome(false, format!("violation: {v}\n{ts}")),
        }
        if check_simulation(ts, &Edf, &RelaxedIdlePreorder, &full).is_err() {
            mutant_violations += 1;
        }
    }
    outcome(
        checked >= AC5_AUTOMATA && mutant_violations >= 1,
        format!("{checked} automata, {pairs} simulating pairs, 0 violations; mutant violated on {mutant_violations}"),
    )
}

fn ac6() -> Outcome {
    let sets = small_sets(20, 4, 61);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    while checked < AC6_SAMPLES {
        let ts = &sets[checked % sets.len()];
        let size = 1 + checked % 16;
        let b = random_state_set(&mut rng, ts, size);
        let kind = if checked % 2 == 0 {
            SchedulerKind::Edf
        } else {
            SchedulerKind::Dm
        };
        if !check_post_max_lemma(ts, &kind, &b) {
            return outcome(false, format!("lemma fails on sample {checked}\n{ts}"));
        }
        checked += 1;
    }
    outcome(
        true,
        format!("{checked} random sets over {} instances", sets.len()),
    )
}

struct PruningStats {
    qualifying: usize,
    max_schedulable_bf: usize,
    mean_avoided: Option<f64>,
    dominated: bool,
}

fn pruning_stats(recs: &[BenchRecord]) -> PruningStats {
    let schedulable: Vec<&BenchRecord> = recs
        .iter()
        .filter(|r| r.verdict == Some(Verdict::NotReachable))
        .collect();
    let big: Vec<&&BenchRecord> = schedulable
        .iter()
        .filter(|r| r.bf.is_some_and(|b| b.states >= AC7_MIN_BF_STATES))
        .collect();
    let fractions: Vec<f64> = big.iter().filter_map(|r| r.avoided_fraction()).collect();
    PruningStats {
        qualifying: big.len(),
        max_schedulable_bf: schedulable
            .iter()
            .filter_map(|r| r.bf.map(|b| b.states))
            .max()
            .unwrap_or(0),
        mean_avoided: (!fractions.is_empty())
            .then(|| fractions.iter().sum::<f64>() / fractions.len() as f64),
        dominated: big
            .iter()
            .all(|r| r.acbf.unwrap().states <= r.bf.unwrap().states),
    }
}

fn describe(p: &PruningStats) -> String {
    format!(
        "{} schedulable sets with bf_states >= {AC7_MIN_BF_STATES} (largest schedulable: {}), mean avoided {}, acbf <= bf on all: {}",
        p.qualifying,
        p.max_schedulable_bf,
        p.mean_avoided.map_or("undefined".into(), |m| format!("{:.1}%", m * 100.0)),
        p.dominated
    )
}

fn ac7(records: &Result<Vec<BenchRecord>, String>) -> Outcome {
    let Ok(recs) = records else {
        return outcome(false, "fuzz corpus did not complete");
    };
    let p = pruning_stats(recs);
    let passed = p.qualifying > 0 && p.dominated && p.mean_avoided.is_some_and(|m| m > 0.0);
    outcome(passed, describe(&p))
}

/// Same statistics on larger task sets, for context only.
fn ac7_supplement(jobs: usize) -> String {
    let params = GenParams::new(200, AC3_TMAX, 2, AC3_SEED).with_tasks(5, 6);
    let sets: Vec<(String, TaskSet)> = generate(&params)
        .unwrap()
        .into_iter()
        .enumerate()
        .map(|(i, ts)| (format!("set_{i:05}"), ts))
        .collect();
    match run_bench(
        &sets,
        &Edf,
        &BenchOptions {
            jobs,
            ..Default::default()
        },
    ) {
        Ok(recs) => format!(
            "200 sets with n in 5..=6: {}",
            describe(&pruning_stats(&recs))
        ),
        Err(e) => e.to_string(),
    }
}

fn strip_timing(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Object(map) => {
            map.remove("wall_time_ms");
            map.remove("cpu_time_ms");
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(xs) => xs.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn ac8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_schedreach");
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("set.txt");
    fs::write(&input, "m 2\ntask 3 2 1\ntask 4 4 3\ntask 3 3 2\n").unwrap();
    let analyze = || {
        let out = Command::new(bin)
            .args(["analyze", input.to_str().unwrap(), "--json", "--trace"])
            .output()
            .unwrap();
        let mut v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        strip_timing(&mut v);
        (out.status.code(), v)
    };
    let (a, b) = (analyze(), analyze());

    let generate = |name: &str| {
        let dir = tmp.path().join(name);
        let status = Command::new(bin)
            .args([
                "generate", "--count", "50", "--tmax", "5", "--m", "2", "--seed", "7", "--out",
            ])
            .arg(&dir)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        dir_contents(&dir)
    };
    let (g1, g2) = (generate("a"), generate("b"));
    outcome(
        a == b && g1 == g2 && g1.len() == 51,
        format!(
            "analyze --json identical: {}; generate identical over {} files: {}",
            a == b,
            g1.len(),
            g1 == g2
        ),
    )
}

fn main() -> ExitCode {
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let corpus = fuzz_corpus();
    let start = Instant::now();
    let records = run_bench(
        &corpus,
        &Edf,
        &BenchOptions {
            jobs,
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string());
    let fuzz_time = start.elapsed();

    let results = [
        ("AC1 two-task example schedulable", ac1()),
        ("AC2 simulation pairs", ac2()),
        ("AC3 verdict agreement fuzz", ac3(&records, fuzz_time)),
        ("AC4 lockstep maximal elements", ac4()),
        ("AC5 simulation brute force", ac5()),
        ("AC6 successor lemma", ac6()),
        ("AC7 pruning benefit", ac7(&records)),
        ("AC8 determinism", ac8()),
    ];
    let mut all = true;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        all &= o.passed;
    }
    println!("INFO AC7 outside the fuzz corpus: {}", ac7_supplement(jobs));
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
