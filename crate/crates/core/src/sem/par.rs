use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{Instr, Procs};

use super::oracle::{ChoiceOracle, NoChoice};
use super::seq::{step_seq, BlockReason, StepOutcome};
use super::state::{Action, Env, LocalContext, ParState, SeqState};

/// Step budget of one atomic block.
pub const DEFAULT_ATOMIC_FUEL: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParAction {
    Seq(Action),
    Atomic(Vec<Action>),
}

/// An action tagged with the thread that performed it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventPar {
    pub tid: usize,
    pub action: ParAction,
}

impl EventPar {
    pub fn seq(tid: usize, action: Action) -> Self {
        EventPar {
            tid,
            action: ParAction::Seq(action),
        }
    }

    pub fn atomic(tid: usize, actions: Vec<Action>) -> Self {
        EventPar {
            tid,
            action: ParAction::Atomic(actions),
        }
    }
}

impl fmt::Display for EventPar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.action {
            ParAction::Seq(a) => write!(f, "[{}] {a}", self.tid),
            ParAction::Atomic(acts) => {
                write!(f, "[{}] atomic {{", self.tid)?;
                for (i, a) in acts.iter().enumerate() {
                    f.write_str(if i == 0 { " " } else { "; " })?;
                    write!(f, "{a}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

/// Threads that still have code to run.
pub fn enabled_threads(state: &ParState) -> BTreeSet<usize> {
    state
        .stacks
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(t, _)| t)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParStepError {
    /// Caller error: the thread does not exist or has nothing to run.
    #[error("thread {0} is not enabled")]
    NotEnabled(usize),
    #[error("blocked: {0}")]
    Blocked(BlockReason),
}

/// Runs one step of thread `t`. The state is left unchanged on error.
pub fn step_par(
    procs: &Procs,
    state: &mut ParState,
    t: usize,
    atomic_fuel: u64,
) -> Result<EventPar, ParStepError> {
    let top = state
        .stacks
        .get(t)
        .and_then(|s| s.last())
        .ok_or(ParStepError::NotEnabled(t))?;

    if let Some(Instr::Atomic { body }) = top.rest.first().map(|li| &li.instr) {
        let closure = SeqState {
            stack: vec![LocalContext::new(top.proc.clone(), top.env.clone(), body.clone())],
            heap: state.heap.clone(),
        };
        let (env, heap, actions) =
            atomic_closure(procs, closure, atomic_fuel).map_err(ParStepError::Blocked)?;
        let top = state.stacks[t].last_mut().expect("enabled");
        top.env = env;
        top.rest.remove(0);
        state.heap = heap;
        return Ok(EventPar::atomic(t, actions));
    }

    // [seq]: the whole shared heap is lent to the sequential step.
    let mut seq = SeqState {
        stack: std::mem::take(&mut state.stacks[t]),
        heap: std::mem::take(&mut state.heap),
    };
    let outcome = step_seq(procs, &mut seq, &mut NoChoice);
    state.stacks[t] = seq.stack;
    state.heap = seq.heap;
    match outcome {
        StepOutcome::Stepped { action, .. } => Ok(EventPar::seq(t, action)),
        StepOutcome::Blocked(r) => Err(ParStepError::Blocked(r)),
        StepOutcome::Final => unreachable!("enabled thread has a nonempty stack"),
    }
}

/// Runs `[(m, ρ, c)]` until it reaches `[(m, ρ', [])]`.
fn atomic_closure(
    procs: &Procs,
    mut state: SeqState,
    fuel: u64,
) -> Result<(Env, super::Heap, Vec<Action>), BlockReason> {
    let mut actions = Vec::new();
    let mut steps = 0;
    loop {
        if state.stack.len() == 1 && state.stack[0].rest.is_empty() {
            let ctx = state.stack.pop().expect("one frame");
            return Ok((ctx.env, state.heap, actions));
        }
        if steps == fuel {
            return Err(BlockReason::AtomicFuel { steps });
        }
        match step_seq(procs, &mut state, &mut NoChoice) {
            StepOutcome::Stepped { action, .. } => actions.push(action),
            StepOutcome::Blocked(r) => return Err(r),
            StepOutcome::Final => unreachable!("closure stops before the last return"),
        }
        steps += 1;
    }
}

/// Thread selection policy for [`run_par`].
pub enum Schedule<'a> {
    Scripted(Vec<usize>),
    Oracle(&'a mut dyn ChoiceOracle),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParRunEnd {
    Final,
    Blocked { tid: usize, reason: BlockReason, step: usize },
    /// The scripted schedule ran out, or the oracle declined.
    ScheduleExhausted,
    /// A scripted entry named a thread with nothing to run.
    NotEnabled { tid: usize, step: usize },
    FuelExhausted,
}

#[derive(Debug, Clone)]
pub struct ParRun {
    pub trace: Vec<EventPar>,
    pub state: ParState,
    pub end: ParRunEnd,
}

impl ParRun {
    /// The thread of every event, which replays the run as a script.
    pub fn schedule(&self) -> Vec<usize> {
        self.trace.iter().map(|e| e.tid).collect()
    }
}

/// Runs at most `fuel` parallel steps from `state`.
pub fn run_par(
    procs: &Procs,
    mut state: ParState,
    schedule: Schedule<'_>,
    fuel: u64,
    atomic_fuel: u64,
) -> ParRun {
    let mut trace = Vec::new();
    let (mut script, mut oracle) = match schedule {
        Schedule::Scripted(s) => (Some(s.into_iter()), None),
        Schedule::Oracle(o) => (None, Some(o)),
    };
    let end = loop {
        if state.is_final() {
            break ParRunEnd::Final;
        }
        if trace.len() as u64 == fuel {
            break ParRunEnd::FuelExhausted;
        }
        let enabled: Vec<usize> = enabled_threads(&state).into_iter().collect();
        let pick = match (&mut script, &mut oracle) {
            (Some(s), _) => s.next(),
            (None, Some(o)) => o.choose(&enabled).filter(|t| enabled.contains(t)),
            (None, None) => None,
        };
        let Some(t) = pick else {
            break ParRunEnd::ScheduleExhausted;
        };
        match step_par(procs, &mut state, t, atomic_fuel) {
            Ok(ev) => trace.push(ev),
            Err(ParStepError::NotEnabled(tid)) => {
                break ParRunEnd::NotEnabled {
                    tid,
                    step: trace.len(),
                }
            }
            Err(ParStepError::Blocked(reason)) => {
                break ParRunEnd::Blocked {
                    tid: t,
                    reason,
                    step: trace.len(),
                }
            }
        }
    };
    ParRun { trace, state, end }
}
