//! Sporadic task model.
//!
//! A [`TaskSet`] is an ordered list of constrained-deadline sporadic tasks
//! together with the number of identical processors `m`. Task order is
//! significant: it fixes the tie-breaking priority of the schedulers.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! m 2
//! task 2 2 1   # T D C
//! task 3 3 2
//! ```

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Discrete time, in abstract time units.
pub type Time = u32;

/// Largest number of tasks a set may hold. Task subsets are bitmasks.
pub const MAX_TASKS: usize = 64;

/// One sporadic task: minimum interarrival time `period` (T), relative
/// deadline `deadline` (D) and worst-case execution time `wcet` (C).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Task {
    pub period: Time,
    pub deadline: Time,
    pub wcet: Time,
}

impl Task {
    pub const fn new(period: Time, deadline: Time, wcet: Time) -> Self {
        Task {
            period,
            deadline,
            wcet,
        }
    }

    /// `T - D`, the slack between deadline and next allowed release.
    pub fn deadline_gap(&self) -> Time {
        self.period - self.deadline
    }

    fn scaled(&self, k: Time) -> Task {
        Task::new(self.period * k, self.deadline * k, self.wcet * k)
    }
}

/// How strictly [`TaskSet`] construction treats `C > D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feasibility {
    /// Reject tasks whose WCET exceeds their deadline.
    #[default]
    Strict,
    /// Accept them with a logged warning; such sets are trivially
    /// unschedulable.
    AllowInfeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaskError {
    #[error("task set has no tasks")]
    Empty,
    #[error("task set has {0} tasks, at most {MAX_TASKS} are supported")]
    TooManyTasks(usize),
    #[error("processor count must be positive")]
    NoProcessors,
    #[error("task {index}: {constraint}")]
    Invalid {
        index: usize,
        constraint: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: TaskError,
    },
}

/// A validated, immutable task set on `m` identical processors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaskSet {
    tasks: Vec<Task>,
    processors: usize,
}

impl TaskSet {
    /// Builds a task set with strict validation (`0 < C <= D <= T`).
    pub fn new(processors: usize, tasks: Vec<Task>) -> Result<Self, TaskError> {
        Self::with_feasibility(processors, tasks, Feasibility::Strict)
    }

    pub fn with_feasibility(
        processors: usize,
        tasks: Vec<Task>,
        feasibility: Feasibility,
    ) -> Result<Self, TaskError> {
        if processors == 0 {
            return Err(TaskError::NoProcessors);
        }
        if tasks.is_empty() {
            return Err(TaskError::Empty);
        }
        if tasks.len() > MAX_TASKS {
            return Err(TaskError::TooManyTasks(tasks.len()));
        }
        for (index, task) in tasks.iter().enumerate() {
            let invalid = |constraint| TaskError::Invalid { index, constraint };
            if task.period == 0 {
                return Err(invalid("period T must be positive"));
            }
            if task.deadline == 0 {
                return Err(invalid("deadline D must be positive"));
            }
            if task.wcet == 0 {
                return Err(invalid("wcet C must be positive"));
            }
            if task.deadline > task.period {
                return Err(invalid(
                    "deadline D exceeds period T (only constrained deadlines are supported)",
                ));
            }
            if task.wcet > task.deadline {
                match feasibility {
                    Feasibility::Strict => {
                        return Err(invalid("wcet C exceeds deadline D"));
                    }
                    Feasibility::AllowInfeasible => {
                        log::warn!("task {index}: wcet C exceeds deadline D, set is trivially unschedulable");
                    }
                }
            }
        }
        Ok(TaskSet { tasks, processors })
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, index: usize) -> &Task {
        &self.tasks[index]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Number of processors `m`.
    pub fn processors(&self) -> usize {
        self.processors
    }

    pub fn max_period(&self) -> Time {
        self.tasks.iter().map(|t| t.period).max().unwrap_or(0)
    }

    pub fn max_wcet(&self) -> Time {
        self.tasks.iter().map(|t| t.wcet).max().unwrap_or(0)
    }

    /// Exact total utilization `sum C/T`.
    pub fn utilization(&self) -> BigRational {
        self.tasks
            .iter()
            .map(|t| BigRational::new(BigInt::from(t.wcet), BigInt::from(t.period)))
            .fold(BigRational::from_integer(BigInt::from(0)), |acc, u| acc + u)
    }

    /// Gcd of every `T`, `D` and `C` in the set. A value above one means
    /// the whole set can be divided down to a coarser time unit.
    pub fn integer_scale_factor(&self) -> Time {
        self.tasks
            .iter()
            .flat_map(|t| [t.period, t.deadline, t.wcet])
            .fold(0, |g, x| g.gcd(&x))
    }

    /// Multiplies every parameter by `k`.
    pub fn scaled(&self, k: Time) -> TaskSet {
        assert!(k > 0, "scale factor must be positive");
        TaskSet {
            tasks: self.tasks.iter().map(|t| t.scaled(k)).collect(),
            processors: self.processors,
        }
    }

    /// Order-independent identity of the set: the sorted task multiset plus
    /// the processor count.
    pub fn multiset_key(&self) -> (usize, Vec<Task>) {
        let mut tasks = self.tasks.clone();
        tasks.sort_unstable();
        (self.processors, tasks)
    }

    /// Canonical text form, accepted back by [`parse_taskset`].
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for TaskSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m {}", self.processors)?;
        for t in &self.tasks {
            writeln!(f, "task {} {} {}", t.period, t.deadline, t.wcet)?;
        }
        Ok(())
    }
}

impl FromStr for TaskSet {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_taskset(s)
    }
}

/// Parses the task-set text format with strict validation.
pub fn parse_taskset(text: &str) -> Result<TaskSet, ParseError> {
    parse_taskset_with(text, Feasibility::Strict)
}

pub fn parse_taskset_with(text: &str, feasibility: Feasibility) -> Result<TaskSet, ParseError> {
    let mut processors: Option<usize> = None;
    let mut tasks = Vec::new();
    let mut task_lines = Vec::new();
    let mut last_line = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let mut words = tokens(content);
        let Some((col, keyword)) = words.next() else {
            continue;
        };
        let syntax = |column: usize, message: String| ParseError::Syntax {
            line,
            column,
            message,
        };
        match (keyword, processors) {
            ("m", None) => {
                let value = expect_int(&mut words, line, col + 1, "processor count")?;
                processors = Some(value as usize);
            }
            ("m", Some(_)) => return Err(syntax(col, "duplicate `m` line".into())),
            (_, None) => {
                return Err(syntax(
                    col,
                    format!("expected `m <int>` before anything else, found `{keyword}`"),
                ));
            }
            ("task", Some(_)) => {
                let period = expect_int(&mut words, line, col + 4, "period T")?;
                let deadline = expect_int(&mut words, line, col + 4, "deadline D")?;
                let wcet = expect_int(&mut words, line, col + 4, "wcet C")?;
                tasks.push(Task::new(period, deadline, wcet));
                task_lines.push(line);
            }
            (other, Some(_)) => {
                return Err(syntax(
                    col,
                    format!("unknown keyword `{other}`, expected `task`"),
                ));
            }
        }
        if let Some((c, extra)) = words.next() {
            return Err(syntax(c, format!("unexpected trailing token `{extra}`")));
        }
    }

    let processors = processors.ok_or(ParseError::Syntax {
        line: last_line.max(1),
        column: 1,
        message: "missing `m <int>` line".into(),
    })?;
    TaskSet::with_feasibility(processors, tasks, feasibility).map_err(|source| {
        let line = match &source {
            TaskError::Invalid { index, .. } => task_lines[*index],
            TaskError::TooManyTasks(_) => task_lines[MAX_TASKS],
            _ => last_line.max(1),
        };
        ParseError::Invalid { line, source }
    })
}

/// Whitespace-separated words with their 1-based column.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let trimmed = rest.trim_start();
        offset += rest.len() - trimmed.len();
        if trimmed.is_empty() {
            return None;
        }
        let end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let column = line[..offset].chars().count() + 1;
        let word = &trimmed[..end];
        rest = &trimmed[end..];
        offset += end;
        Some((column, word))
    })
}

fn expect_int<'a>(
    words: &mut impl Iterator<Item = (usize, &'a str)>,
    line: usize,
    end_column: usize,
    what: &str,
) -> Result<Time, ParseError> {
    match words.next() {
        None => Err(ParseError::Syntax {
            line,
            column: end_column,
            message: format!("missing {what}"),
        }),
        Some((column, word)) => word.parse::<Time>().map_err(|_| ParseError::Syntax {
            line,
            column,
            message: format!("{what} must be a non-negative integer, found `{word}`"),
        }),
    }
}
