//! The `schedreach` command line.
//!
//! Exit codes: 0 schedulable (or success), 1 unschedulable (or a failed
//! check), 2 inconclusive, 3 usage error, 4 input or I/O error, 5 internal
//! error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench::{run_bench, summarize, write_csv, BenchOptions};
use crate::dot::to_dot;
use crate::generator::{generate_with_stats, read_corpus, write_corpus, GenParams};
use crate::reachability::{
    build_full_automaton, reach, Algorithm, LimitExceeded, Limits, ReachReport, SearchOptions,
};
use crate::scheduler::SchedulerKind;
use crate::task::{parse_taskset_with, Feasibility, TaskSet, Time};
use crate::verify::{run_campaign, CampaignConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSCHEDULABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_INPUT: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

/// Environment variable holding the `env_logger` filter.
pub const LOG_ENV: &str = "SCHEDREACH_LOG";

const DEFAULT_DOT_STATES: usize = 100_000;
const LARGE_SCALE_COUNT: usize = 5_000;
const LARGE_SCALE_TMAX: Time = 6;

#[derive(Debug, Parser)]
#[command(
    name = "schedreach",
    version,
    about = "Exact schedulability analysis by automaton reachability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide schedulability of one task-set file.
    Analyze(AnalyzeArgs),
    /// Write a corpus of random task sets.
    Generate(GenerateArgs),
    /// Run both engines over a corpus and write a CSV.
    Bench(BenchArgs),
    /// Write the explicit automaton of a task set in Graphviz format.
    ExportDot(ExportDotArgs),
    /// Run the soundness checks on bundled and random small instances.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    /// Give up after admitting this many states.
    #[arg(long, value_name = "N")]
    pub limit_states: Option<usize>,
    /// Give up after this many seconds.
    #[arg(long, value_name = "S")]
    pub limit_seconds: Option<f64>,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits, String> {
        let max_time = match self.limit_seconds {
            None => None,
            Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => {
                return Err(format!(
                    "--limit-seconds must be a non-negative number, got {s}"
                ))
            }
        };
        Ok(Limits {
            max_states: self.limit_states,
            max_time,
        })
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "edf")]
    pub scheduler: SchedulerKind,
    #[arg(long, default_value = "acbf")]
    pub algo: Algorithm,
    /// Print a witness path for unschedulable sets.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub limits: LimitArgs,
    /// Also write the explicit automaton to FILE.
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    /// Accept tasks with C > D.
    #[arg(long)]
    pub allow_infeasible: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskRange {
    pub min: usize,
    pub max: usize,
}

impl std::str::FromStr for TaskRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        let (min, max) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if min > max {
            return Err(format!("empty range {min}:{max}"));
        }
        Ok(TaskRange { min, max })
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub tmax: Time,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Task count range, `MIN:MAX` or a single number. Defaults to `m+1:m+2`.
    #[arg(long, value_name = "MIN:MAX")]
    pub n: Option<TaskRange>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Corpus directory written by `generate`. Without it, a corpus is
    /// generated in memory from the generation flags.
    #[arg(long = "in", value_name = "DIR")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value = "edf")]
    pub scheduler: SchedulerKind,
    /// CSV destination; standard output if omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub limits: LimitArgs,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    #[arg(long, default_value_t = 5)]
    pub tmax: Time,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_name = "MIN:MAX")]
    pub n: Option<TaskRange>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow in-memory corpora of 5000 or more sets with tmax of 6 or more.
    /// These runs take hours.
    #[arg(long)]
    pub full_paper_scale: bool,
}

#[derive(Debug, Args)]
pub struct ExportDotArgs {
    pub file: PathBuf,
    #[arg(long, default_value = "edf")]
    pub scheduler: SchedulerKind,
    /// Destination; standard output if omitted.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DOT_STATES)]
    pub max_states: usize,
    #[arg(long)]
    pub allow_infeasible: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random sets per processor count, on top of the bundled instances.
    #[arg(long, default_value_t = 0)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub tmax: Time,
    /// Check a deliberately unsound preorder; the run is expected to fail.
    #[arg(long)]
    pub mutant: bool,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Analyze(a) => analyze(a, out, err),
        Command::Generate(a) => generate_cmd(a, out),
        Command::Bench(a) => bench_cmd(a, out, err),
        Command::ExportDot(a) => export_dot(a, out),
        Command::Verify(a) => verify_cmd(a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Process entry point: sets up logging and runs on the real arguments.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let (stdout, stderr) = (io::stdout(), io::stderr());
    let code = run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    let _ = io::stdout().flush();
    code
}

fn load_taskset(
    path: &Path,
    allow_infeasible: bool,
    err: &mut dyn Write,
) -> Result<TaskSet, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let feasibility = if allow_infeasible {
        Feasibility::AllowInfeasible
    } else {
        Feasibility::Strict
    };
    let ts = parse_taskset_with(&text, feasibility)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if allow_infeasible {
        for (i, t) in ts.tasks().iter().enumerate() {
            if t.wcet > t.deadline {
                writeln!(
                    err,
                    "warning: task {} has C > D and cannot meet its deadline",
                    i + 1
                )?;
            }
        }
    }
    Ok(ts)
}

fn write_output(path: Option<&Path>, contents: &[u8], out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => {
            fs::write(p, contents).map_err(|e| Failure::input(format!("{}: {e}", p.display())))
        }
        None => Ok(out.write_all(contents)?),
    }
}

#[derive(Serialize)]
struct AnalyzeJson<'a> {
    verdict: &'static str,
    scheduler: SchedulerKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a ReachReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit: Option<&'a LimitExceeded>,
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let limits = a.limits.limits().map_err(Failure::usage)?;
    let ts = load_taskset(&a.file, a.allow_infeasible, err)?;
    let opts = SearchOptions {
        limits,
        trace: a.trace,
    };
    let result = reach(a.algo, &ts, &a.scheduler, &opts);

    if let Some(path) = &a.dot {
        let cap = limits.max_states.unwrap_or(DEFAULT_DOT_STATES);
        match build_full_automaton(&ts, &a.scheduler, cap) {
            Ok(full) => write_output(Some(path), to_dot(&ts, &full).as_bytes(), out)?,
            Err(e) => writeln!(err, "warning: no DOT output: {e}")?,
        }
    }

    let (label, code) = match &result {
        Ok(r) if r.verdict.is_schedulable() => ("SCHEDULABLE", EXIT_OK),
        Ok(_) => ("UNSCHEDULABLE", EXIT_UNSCHEDULABLE),
        Err(_) => ("INCONCLUSIVE", EXIT_INCONCLUSIVE),
    };
    if a.json {
        let json = AnalyzeJson {
            verdict: match code {
                EXIT_OK => "schedulable",
                EXIT_UNSCHEDULABLE => "unschedulable",
                _ => "inconclusive",
            },
            scheduler: a.scheduler,
            report: result.as_ref().ok(),
            limit: result.as_ref().err(),
        };
        let text = serde_json::to_string_pretty(&json).map_err(|e| Failure {
            code: EXIT_INTERNAL,
            message: e.to_string(),
        })?;
        writeln!(out, "{text}")?;
        return Ok(code);
    }

    writeln!(out, "{label}")?;
    match &result {
        Ok(r) => {
            writeln!(out, "algorithm: {}", r.algorithm)?;
            writeln!(out, "scheduler: {}", a.scheduler)?;
            writeln!(out, "states explored: {}", r.states_explored)?;
            writeln!(out, "iterations: {}", r.iterations)?;
            writeln!(out, "cpu time: {:.3} ms", r.cpu_time.as_secs_f64() * 1e3)?;
            if let Some(w) = &r.witness {
                let path: Vec<String> = w.iter().map(|s| s.render()).collect();
                writeln!(out, "witness: {}", path.join(" -> "))?;
            }
        }
        Err(e) => writeln!(out, "{e}")?,
    }
    Ok(code)
}

fn gen_params(count: usize, tmax: Time, m: usize, n: Option<TaskRange>, seed: u64) -> GenParams {
    let p = GenParams::new(count, tmax, m, seed);
    match n {
        Some(r) => p.with_tasks(r.min, r.max),
        None => p,
    }
}

fn generate_cmd(a: &GenerateArgs, out: &mut dyn Write) -> CmdResult {
    let params = gen_params(a.count, a.tmax, a.m, a.n, a.seed);
    let (sets, drops) = generate_with_stats(&params).map_err(|e| Failure::usage(e.to_string()))?;
    write_corpus(&a.out, &params, &sets)
        .map_err(|e| Failure::input(format!("{}: {e}", a.out.display())))?;
    writeln!(
        out,
        "wrote {} task sets to {} (dropped {drops:?})",
        sets.len(),
        a.out.display()
    )?;
    Ok(EXIT_OK)
}

fn bench_cmd(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let limits = a.limits.limits().map_err(Failure::usage)?;
    let sets = match &a.input {
        Some(dir) => read_corpus(dir).map_err(|e| Failure::input(e.to_string()))?,
        None => {
            if a.count >= LARGE_SCALE_COUNT && a.tmax >= LARGE_SCALE_TMAX && !a.full_paper_scale {
                return Err(Failure::usage(
                    format!("in-memory corpora with --count >= {LARGE_SCALE_COUNT} and --tmax >= {LARGE_SCALE_TMAX} run for hours; pass --full-paper-scale"),
                ));
            }
            let params = gen_params(a.count, a.tmax, a.m, a.n, a.seed);
            let (sets, _) =
                generate_with_stats(&params).map_err(|e| Failure::usage(e.to_string()))?;
            sets.into_iter()
                .enumerate()
                .map(|(i, ts)| (format!("set_{i:05}"), ts))
                .collect()
        }
    };
    let opts = BenchOptions {
        limits,
        jobs: a.jobs,
    };
    let records = run_bench(&sets, &a.scheduler, &opts).map_err(|e| Failure {
        code: EXIT_INTERNAL,
        message: e.to_string(),
    })?;
    let mut csv = Vec::new();
    write_csv(&records, &mut csv).map_err(|e| Failure::input(e.to_string()))?;
    write_output(a.out.as_deref(), &csv, out)?;
    let summary = summarize(&records);
    if a.out.is_some() {
        writeln!(out, "{summary}")?;
    } else {
        writeln!(err, "{summary}")?;
    }
    Ok(EXIT_OK)
}

fn export_dot(a: &ExportDotArgs, out: &mut dyn Write) -> CmdResult {
    let ts = load_taskset(&a.file, a.allow_infeasible, &mut io::sink())?;
    match build_full_automaton(&ts, &a.scheduler, a.max_states) {
        Ok(full) => {
            write_output(a.out.as_deref(), to_dot(&ts, &full).as_bytes(), out)?;
            Ok(EXIT_OK)
        }
        Err(e) => Err(Failure {
            code: EXIT_INCONCLUSIVE,
            message: format!("automaton too large: {e}"),
        }),
    }
}

fn verify_cmd(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = CampaignConfig {
        seed: a.seed,
        count: a.count,
        tmax: a.tmax,
        mutant: a.mutant,
        ..Default::default()
    };
    let report = run_campaign(&cfg);
    writeln!(out, "{report}")?;
    match report.findings.first() {
        None => {
            writeln!(out, "PASS")?;
            Ok(EXIT_OK)
        }
        Some(f) => {
            writeln!(out, "FAIL")?;
            writeln!(out, "{f}")?;
            Ok(EXIT_UNSCHEDULABLE)
        }
    }
}
