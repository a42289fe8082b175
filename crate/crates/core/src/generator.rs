//! Random task-set generation.
//!
//! Periods are uniform in `1..=tmax`. WCETs are drawn from an exponential
//! distribution with mean `wcet_mean_factor * T` and discretised as
//! `clamp(ceil(x), 1, T)`. Deadlines are uniform in `C..=T`. A candidate is
//! dropped when `n <= m`, when its utilization exceeds `m`, when all its
//! parameters share a common factor, or when it duplicates an earlier set
//! as a multiset of tasks (checked in that order).
//!
//! The random stream is ChaCha8 (`rand_chacha` 0.9) seeded with
//! `seed_from_u64`, so a seed reproduces the same sets on every platform.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{parse_taskset, ParseError, Task, TaskSet, Time};

pub const DEFAULT_WCET_MEAN_FACTOR: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub count: usize,
    pub tmax: Time,
    pub processors: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub seed: u64,
    pub wcet_mean_factor: f64,
    /// Candidates to draw before giving up.
    pub max_attempts: usize,
}

impl GenParams {
    /// Defaults: task count uniform in `m+1 ..= m+2`, mean WCET factor
    /// 0.35, and up to 1000 candidates per requested set.
    pub fn new(count: usize, tmax: Time, processors: usize, seed: u64) -> Self {
        GenParams {
            count,
            tmax,
            processors,
            n_min: processors + 1,
            n_max: processors + 2,
            seed,
            wcet_mean_factor: DEFAULT_WCET_MEAN_FACTOR,
            max_attempts: count.saturating_mul(1000).max(10_000),
        }
    }

    pub fn with_tasks(mut self, n_min: usize, n_max: usize) -> Self {
        self.n_min = n_min;
        self.n_max = n_max;
        self
    }

    fn validate(&self) -> Result<(), GenError> {
        let bad = |msg: &str| Err(GenError::InvalidParams(msg.to_string()));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if self.tmax == 0 {
            return bad("tmax must be at least 1");
        }
        if self.processors == 0 {
            return bad("processor count must be at least 1");
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad("task count range must satisfy 1 <= min <= max");
        }
        if self.n_max > crate::task::MAX_TASKS {
            return bad("task count exceeds the supported maximum");
        }
        if !(self.wcet_mean_factor.is_finite() && self.wcet_mean_factor > 0.0) {
            return bad("wcet mean factor must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error(
        "gave up after {attempts} candidates with only {accepted} of {requested} sets accepted"
    )]
    Exhausted {
        attempts: usize,
        accepted: usize,
        requested: usize,
    },
}

/// Why candidates were dropped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropCounts {
    pub too_few_tasks: usize,
    pub over_utilized: usize,
    pub scalable: usize,
    pub duplicate: usize,
}

/// Draws one raw exponential WCET sample for period `period`, before
/// rounding and clipping.
pub fn sample_wcet_raw<R: Rng + ?Sized>(rng: &mut R, period: Time, factor: f64) -> f64 {
    let mean = factor * f64::from(period);
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

fn discretize_wcet(x: f64, period: Time) -> Time {
    let c = x.ceil();
    if c < 1.0 {
        1
    } else if c >= f64::from(period) {
        period
    } else {
        c as Time
    }
}

fn sample_task<R: Rng + ?Sized>(rng: &mut R, params: &GenParams) -> Task {
    let period = rng.random_range(1..=params.tmax);
    let wcet = discretize_wcet(
        sample_wcet_raw(rng, period, params.wcet_mean_factor),
        period,
    );
    let deadline = rng.random_range(wcet..=period);
    Task::new(period, deadline, wcet)
}

/// Generates exactly `params.count` task sets.
pub fn generate(params: &GenParams) -> Result<Vec<TaskSet>, GenError> {
    generate_with_stats(params).map(|(sets, _)| sets)
}

pub fn generate_with_stats(params: &GenParams) -> Result<(Vec<TaskSet>, DropCounts), GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let m = params.processors;
    let m_ratio = BigRational::from_integer(BigInt::from(m));
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(params.count);
    let mut drops = DropCounts::default();
    let mut attempts = 0;
    while out.len() < params.count {
        if attempts >= params.max_attempts {
            return Err(GenError::Exhausted {
                attempts,
                accepted: out.len(),
                requested: params.count,
            });
        }
        attempts += 1;
        let n = rng.random_range(params.n_min..=params.n_max);
        let tasks: Vec<Task> = (0..n).map(|_| sample_task(&mut rng, params)).collect();
        if n <= m {
            drops.too_few_tasks += 1;
            continue;
        }
        let ts = TaskSet::new(m, tasks).expect("generated tasks satisfy 1 <= C <= D <= T");
        if ts.utilization() > m_ratio {
            drops.over_utilized += 1;
            continue;
        }
        if ts.integer_scale_factor() > 1 {
            drops.scalable += 1;
            continue;
        }
        if !seen.insert(ts.multiset_key()) {
            drops.duplicate += 1;
            continue;
        }
        out.push(ts);
    }
    log::debug!(
        "generated {} sets in {attempts} attempts, dropped {drops:?}",
        out.len()
    );
    Ok((out, drops))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub n: usize,
    /// Exact utilization as `p/q`.
    pub utilization: String,
    pub utilization_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub rng: String,
    pub params: GenParams,
    pub sets: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn set_file_name(index: usize) -> String {
    format!("set_{index:05}.txt")
}

/// Writes one file per set plus the manifest into `dir`.
pub fn write_corpus(dir: &Path, params: &GenParams, sets: &[TaskSet]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(sets.len());
    for (i, ts) in sets.iter().enumerate() {
        let file = set_file_name(i);
        fs::write(dir.join(&file), ts.to_text())?;
        let u = ts.utilization();
        entries.push(ManifestEntry {
            file,
            n: ts.len(),
            utilization: u.to_string(),
            utilization_approx: u.to_f64().unwrap_or(f64::NAN),
        });
    }
    let manifest = Manifest {
        rng: "ChaCha8Rng (rand_chacha 0.9), seed_from_u64".into(),
        params: params.clone(),
        sets: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    fs::write(dir.join(MANIFEST_FILE), json + "\n")
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
}

/// Reads every `*.txt` task-set file in `dir`, sorted by file name. The
/// file stem is the set id.
pub fn read_corpus(dir: &Path) -> Result<Vec<(String, TaskSet)>, CorpusError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CorpusError::Io { path, source }
    };
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let ts = parse_taskset(&text).map_err(|source| CorpusError::Parse {
                path: path.clone(),
                source,
            })?;
            let id = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok((id, ts))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(params: &GenParams, sets: &[TaskSet]) {
        let m = BigRational::from_integer(BigInt::from(params.processors));
        let mut keys = HashSet::new();
        for ts in sets {
            assert!(ts.len() > params.processors);
            assert!((params.n_min..=params.n_max).contains(&ts.len()));
            assert!(ts.utilization() <= m);
            assert_eq!(ts.integer_scale_factor(), 1);
            assert!(keys.insert(ts.multiset_key()));
            for t in ts.tasks() {
                assert!(
                    1 <= t.wcet
                        && t.wcet <= t.deadline
                        && t.deadline <= t.period
                        && t.period <= params.tmax
                );
            }
            assert_eq!(parse_taskset(&ts.to_text()).unwrap(), *ts);
        }
    }

    #[test]
    fn generates_requested_count_with_all_rules() {
        let params = GenParams::new(300, 6, 2, 7).with_tasks(1, 5);
        let (sets, drops) = generate_with_stats(&params).unwrap();
        assert_eq!(sets.len(), 300);
        check_invariants(&params, &sets);
        assert!(drops.too_few_tasks > 0);
    }

    #[test]
    #[ignore = "full 5,000-set corpus, run with --ignored"]
    fn full_scale_corpus() {
        let params = GenParams::new(5000, 6, 2, 2011).with_tasks(3, 5);
        let sets = generate(&params).unwrap();
        assert_eq!(sets.len(), 5000);
        check_invariants(&params, &sets);
    }

    #[test]
    fn forced_rejection_exhausts() {
        let mut params = GenParams::new(1, 1, 1, 0).with_tasks(2, 2);
        params.max_attempts = 500;
        match generate(&params) {
            Err(GenError::Exhausted {
                attempts: 500,
                accepted: 0,
                ..
            }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn same_seed_same_sets() {
        let p = GenParams::new(50, 5, 2, 42);
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let q = GenParams {
            seed: 43,
            ..p.clone()
        };
        assert_ne!(generate(&p).unwrap(), generate(&q).unwrap());
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            GenParams::new(0, 5, 2, 0),
            GenParams::new(1, 0, 2, 0),
            GenParams::new(1, 5, 2, 0).with_tasks(3, 2),
            GenParams::new(1, 5, 2, 0).with_tasks(0, 2),
        ] {
            assert!(matches!(generate(&p), Err(GenError::InvalidParams(_))));
        }
    }

    #[test]
    fn raw_wcet_mean_is_near_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for period in [1u32, 4, 10] {
            let n = 10_000;
            let mean: f64 = (0..n)
                .map(|_| sample_wcet_raw(&mut rng, period, 0.35))
                .sum::<f64>()
                / n as f64;
            let target = 0.35 * f64::from(period);
            assert!(
                (mean - target).abs() <= 0.2 * target,
                "period {period}: mean {mean}"
            );
        }
    }

    #[test]
    fn discretization_clips() {
        assert_eq!(discretize_wcet(0.0, 5), 1);
        assert_eq!(discretize_wcet(0.01, 5), 1);
        assert_eq!(discretize_wcet(1.0, 5), 1);
        assert_eq!(discretize_wcet(1.2, 5), 2);
        assert_eq!(discretize_wcet(17.0, 5), 5);
    }

    #[test]
    fn corpus_round_trip_and_byte_identical() {
        let params = GenParams::new(8, 5, 2, 3);
        let sets = generate(&params).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        write_corpus(a.path(), &params, &sets).unwrap();
        write_corpus(b.path(), &params, &generate(&params).unwrap()).unwrap();
        let back = read_corpus(a.path()).unwrap();
        assert_eq!(back.len(), 8);
        assert_eq!(back[0].0, "set_00000");
        assert_eq!(back.into_iter().map(|(_, t)| t).collect::<Vec<_>>(), sets);
        for name in [
            MANIFEST_FILE.to_string(),
            set_file_name(0),
            set_file_name(7),
        ] {
            assert_eq!(
                fs::read(a.path().join(&name)).unwrap(),
                fs::read(b.path().join(&name)).unwrap()
            );
        }
        let manifest: Manifest =
            serde_json::from_slice(&fs::read(a.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(manifest.params, params);
        assert_eq!(manifest.sets.len(), 8);
    }
}
