//! Head-to-head comparison of the two engines over a corpus of task sets.

use std::fmt;
use std::io;
use std::time::Duration;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::reachability::{acbf_reach, bf_reach, Limits, ReachReport, SearchOptions, Verdict};
use crate::scheduler::Memoryless;
use crate::task::TaskSet;

pub const CSV_HEADER: [&str; 9] = [
    "set_id",
    "n",
    "utilization",
    "verdict",
    "bf_states",
    "acbf_states",
    "bf_time_ms",
    "acbf_time_ms",
    "avoided_fraction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Per-engine, per-set caps.
    pub limits: Limits,
    /// Worker threads; sets are distributed across them.
    pub jobs: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            limits: Limits::default(),
            jobs: 1,
        }
    }
}

/// Timing and size figures of one engine on one set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineRun {
    pub states: usize,
    pub cpu_time: Duration,
    pub wall_time: Duration,
}

impl From<&ReachReport> for EngineRun {
    fn from(r: &ReachReport) -> Self {
        EngineRun {
            states: r.states_explored,
            cpu_time: r.cpu_time,
            wall_time: r.wall_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub set_id: String,
    pub n: usize,
    pub utilization: f64,
    /// `None` when either engine hit a resource cap.
    pub verdict: Option<Verdict>,
    pub bf: Option<EngineRun>,
    pub acbf: Option<EngineRun>,
}

impl BenchRecord {
    pub fn is_completed(&self) -> bool {
        self.verdict.is_some()
    }

    /// `1 - acbf_states / bf_states` for completed records.
    pub fn avoided_fraction(&self) -> Option<f64> {
        self.verdict?;
        let (bf, ac) = (self.bf?, self.acbf?);
        Some(1.0 - ac.states as f64 / bf.states as f64)
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(
        "engines disagree on set {set_id}: bf says {bf:?}, acbf says {acbf:?}; this is a bug, please report it with the task set:\n{taskset}"
    )]
    VerdictMismatch {
        set_id: String,
        bf: Verdict,
        acbf: Verdict,
        taskset: String,
    },
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn bench_one<S: Memoryless + ?Sized>(
    id: &str,
    ts: &TaskSet,
    sched: &S,
    opts: &SearchOptions,
) -> Result<BenchRecord, BenchError> {
    let bf = bf_reach(ts, sched, opts);
    let ac = acbf_reach(ts, sched, opts);
    let verdict = match (&bf, &ac) {
        (Ok(b), Ok(a)) if b.verdict != a.verdict => {
            return Err(BenchError::VerdictMismatch {
                set_id: id.to_string(),
                bf: b.verdict,
                acbf: a.verdict,
                taskset: ts.to_text(),
            });
        }
        (Ok(b), Ok(_)) => Some(b.verdict),
        _ => None,
    };
    let record = BenchRecord {
        set_id: id.to_string(),
        n: ts.len(),
        utilization: ts.utilization().to_f64().unwrap_or(f64::NAN),
        verdict,
        bf: bf.as_ref().ok().map(EngineRun::from),
        acbf: ac.as_ref().ok().map(EngineRun::from),
    };
    if let (Some(v), Some(b), Some(a)) = (record.verdict, record.bf, record.acbf) {
        if a.states > b.states {
            log::info!(
                "set {id}: acbf explored more states than bf ({} > {}), verdict {v:?}",
                a.states,
                b.states
            );
        }
        if a.cpu_time > b.cpu_time {
            log::debug!(
                "set {id}: acbf slower than bf ({:?} > {:?})",
                a.cpu_time,
                b.cpu_time
            );
        }
    }
    Ok(record)
}

/// Runs both engines on every set. Records come back sorted by set id.
/// A verdict disagreement aborts the whole run.
pub fn run_bench<S: Memoryless + ?Sized>(
    sets: &[(String, TaskSet)],
    sched: &S,
    opts: &BenchOptions,
) -> Result<Vec<BenchRecord>, BenchError> {
    let search = SearchOptions {
        limits: opts.limits,
        trace: false,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()?;
    let mut records = pool.install(|| {
        sets.par_iter()
            .map(|(id, ts)| bench_one(id, ts, sched, &search))
            .collect::<Result<Vec<_>, _>>()
    })?;
    records.sort_by(|a, b| a.set_id.cmp(&b.set_id));
    Ok(records)
}

fn ms(d: Duration) -> String {
    format!("{:.3}", d.as_secs_f64() * 1e3)
}

/// Writes records with the fixed column layout of [`CSV_HEADER`].
/// Inconclusive records have verdict `inconclusive` and empty fields for
/// whatever did not complete.
pub fn write_csv<W: io::Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let verdict = match r.verdict {
            Some(Verdict::NotReachable) => "schedulable",
            Some(Verdict::Reachable) => "unschedulable",
            None => "inconclusive",
        };
        let states = |e: Option<EngineRun>| e.map(|e| e.states.to_string()).unwrap_or_default();
        let time = |e: Option<EngineRun>| e.map(|e| ms(e.cpu_time)).unwrap_or_default();
        w.write_record([
            r.set_id.clone(),
            r.n.to_string(),
            format!("{:.6}", r.utilization),
            verdict.to_string(),
            states(r.bf),
            states(r.acbf),
            time(r.bf),
            time(r.acbf),
            r.avoided_fraction()
                .map(|f| format!("{f:.6}"))
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchSummary {
    pub completed: usize,
    pub inconclusive: usize,
    pub schedulable: usize,
    pub unschedulable: usize,
    pub mean_avoided: Option<f64>,
    pub mean_avoided_schedulable: Option<f64>,
    pub mean_avoided_unschedulable: Option<f64>,
    /// Completed sets on which the antichain engine used more CPU time.
    pub acbf_slower: usize,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub fn summarize(records: &[BenchRecord]) -> BenchSummary {
    let done: Vec<&BenchRecord> = records.iter().filter(|r| r.is_completed()).collect();
    let by = |v: Verdict| done.iter().filter(move |r| r.verdict == Some(v));
    BenchSummary {
        completed: done.len(),
        inconclusive: records.len() - done.len(),
        schedulable: by(Verdict::NotReachable).count(),
        unschedulable: by(Verdict::Reachable).count(),
        mean_avoided: mean(done.iter().filter_map(|r| r.avoided_fraction())),
        mean_avoided_schedulable: mean(
            by(Verdict::NotReachable).filter_map(|r| r.avoided_fraction()),
        ),
        mean_avoided_unschedulable: mean(
            by(Verdict::Reachable).filter_map(|r| r.avoided_fraction()),
        ),
        acbf_slower: done
            .iter()
            .filter(|r| matches!((r.bf, r.acbf), (Some(b), Some(a)) if a.cpu_time > b.cpu_time))
            .count(),
    }
}

impl fmt::Display for BenchSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |x: Option<f64>| {
            x.map(|v| format!("{:.1}%", v * 100.0))
                .unwrap_or_else(|| "n/a".into())
        };
        write!(
            f,
            "{} completed ({} schedulable, {} unschedulable), {} inconclusive; states avoided by acbf: {} overall, {} unschedulable, {} schedulable; acbf slower on {} sets",
            self.completed,
            self.schedulable,
            self.unschedulable,
            self.inconclusive,
            pct(self.mean_avoided),
            pct(self.mean_avoided_unschedulable),
            pct(self.mean_avoided_schedulable),
            self.acbf_slower
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::Edf;
    use crate::task::Task;

    fn two_task() -> Vec<(String, TaskSet)> {
        vec![(
            "two_task".into(),
            TaskSet::new(2, vec![Task::new(2, 2, 1), Task::new(3, 3, 2)]).unwrap(),
        )]
    }

    #[test]
    fn single_two_task_record() {
        let recs = run_bench(&two_task(), &Edf, &BenchOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        let r = &recs[0];
        assert_eq!(r.verdict, Some(Verdict::NotReachable));
        assert!(r.acbf.unwrap().states <= r.bf.unwrap().states);
        assert!(r.avoided_fraction().unwrap() > 0.0);
    }

    #[test]
    fn empty_corpus_writes_header_only() {
        let recs = run_bench(&[], &Edf, &BenchOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "set_id,n,utilization,verdict,bf_states,acbf_states,bf_time_ms,acbf_time_ms,avoided_fraction\n"
        );
        assert_eq!(summarize(&recs).completed, 0);
    }

    #[test]
    fn capped_sets_are_inconclusive_and_excluded() {
        let opts = BenchOptions {
            limits: Limits {
                max_states: Some(2),
                max_time: None,
            },
            jobs: 2,
        };
        let recs = run_bench(&two_task(), &Edf, &opts).unwrap();
        assert_eq!(recs[0].verdict, None);
        assert_eq!(recs[0].avoided_fraction(), None);
        let s = summarize(&recs);
        assert_eq!((s.completed, s.inconclusive), (0, 1));
        assert_eq!(s.mean_avoided, None);
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("two_task,2,1.166667,inconclusive,"));
    }

    #[test]
    fn records_sorted_regardless_of_jobs() {
        let gen = crate::generator::GenParams::new(12, 4, 2, 5);
        let sets: Vec<(String, TaskSet)> = crate::generator::generate(&gen)
            .unwrap()
            .into_iter()
            .enumerate()
            .map(|(i, t)| (format!("s{i:02}"), t))
            .rev()
            .collect();
        let one = run_bench(&sets, &Edf, &BenchOptions::default()).unwrap();
        let four = run_bench(
            &sets,
            &Edf,
            &BenchOptions {
                jobs: 4,
                ..Default::default()
            },
        )
        .unwrap();
        let key = |r: &BenchRecord| {
            (
                r.set_id.clone(),
                r.verdict,
                r.bf.map(|b| b.states),
                r.acbf.map(|a| a.states),
            )
        };
        assert_eq!(
            one.iter().map(key).collect::<Vec<_>>(),
            four.iter().map(key).collect::<Vec<_>>()
        );
        assert!(one.windows(2).all(|w| w[0].set_id < w[1].set_id));
    }
}
