//! Exact schedulability analysis of sporadic, constrained-deadline task sets
//! on `m` identical processors.
//!
//! A task set is schedulable under a scheduler iff no failure state is
//! reachable in a finite automaton whose states record, per task, the
//! earliest next arrival time and the remaining computation time. This
//! crate builds that automaton on the fly and decides reachability either
//! by plain breadth-first search or by an antichain search that prunes
//! states dominated under the idle-tasks simulation preorder.
//!
//! ```
//! use schedreach::prelude::*;
//!
//! let ts: TaskSet = "m 2\ntask 2 2 1\ntask 3 3 2\n".parse().unwrap();
//! let report = acbf_reach(&ts, &Edf, &SearchOptions::default()).unwrap();
//! assert!(report.verdict.is_schedulable());
//! ```
//!
//! Modules, bottom up:
//!
//! * [`task`]: task sets, validation, text format.
//! * [`automaton`]: states and transitions.
//! * [`scheduler`]: global EDF and DM, property checkers.
//! * [`antichain`]: the idle-tasks preorder and antichains.
//! * [`reachability`]: the two search engines and the lockstep check.
//! * [`generator`], [`bench`]: the random experiment pipeline.
//! * [`verify`]: brute-force soundness checks on small instances.
//! * [`dot`]: Graphviz export.
//! * [`cli`]: the `schedreach` command line.

pub mod antichain;
pub mod automaton;
pub mod bench;
pub mod cli;
pub mod cputime;
pub mod dot;
pub mod generator;
pub mod reachability;
pub mod scheduler;
pub mod task;
pub mod verify;

pub mod prelude {
    pub use crate::antichain::{idle_simulates, max_elements, Antichain, IdlePreorder, Preorder};
    pub use crate::automaton::{initial_state, post, SystemState, TaskMask};
    pub use crate::reachability::{
        acbf_reach, bf_reach, build_full_automaton, lockstep_verify, Algorithm, Limits,
        ReachReport, SearchOptions, Verdict,
    };
    pub use crate::scheduler::{Dm, Edf, Memoryless, Scheduler, SchedulerKind};
    pub use crate::task::{parse_taskset, Task, TaskSet};
}
