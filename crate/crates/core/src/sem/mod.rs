//! Small-step operational semantics of both languages.

mod oracle;
mod par;
mod seq;
mod state;

pub use oracle::{ChoiceOracle, FirstOracle, LastOracle, NoChoice, ScriptedOracle, SeededOracle};
pub use par::{
    enabled_threads, run_par, step_par, EventPar, ParAction, ParRun, ParRunEnd, ParStepError,
    Schedule, DEFAULT_ATOMIC_FUEL,
};
pub use seq::{eval_expr, run_seq, step_seq, BlockReason, EvalError, RunEnd, SeqRun, StepOutcome};
pub use state::{Action, Env, Heap, InitError, LocalContext, ParState, SeqState};
