//! State equivalence between a parallel state and a state of its
//! simulating program, and equivalence of their traces.

use std::fmt;

use serde::Serialize;

use crate::ast::{Label, LabeledInstr, Name, ProgramPar, Procs};
use crate::sem::{Action, EventPar, Heap, LocalContext, ParAction, ParState, SeqState};
use crate::transform::{LabelRole, SimLayout, Transformed, TERMINATED};
use crate::value::Value;
use crate::wf::{is_label_name, INTERLEAVINGS, SELECT};

/// Value written in every simulation cell of a fresh simulating heap, so
/// that reading a cell the initialization forgot to write is visible.
pub const SIM_GARBAGE: i64 = -1;

/// Initial heap of the simulating program: the parallel heap plus every
/// layout location filled with [`SIM_GARBAGE`].
pub fn initial_sim_heap(par_heap: &Heap, layout: &SimLayout) -> Heap {
    let mut heap = Heap::filled(&layout.memory, &Value::from(SIM_GARBAGE));
    heap.extend(par_heap.clone());
    heap
}

/// The simulating heap cut into the replica of the parallel heap and the
/// simulation cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeapSplit {
    pub par_part: Heap,
    pub sim_part: Heap,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("location `{0}` belongs neither to the program nor to the layout")]
pub struct StrayLocation(pub String);

pub fn split_heap(heap: &Heap, program: &ProgramPar, layout: &SimLayout) -> Result<HeapSplit, StrayLocation> {
    if let Some(l) = heap
        .locations()
        .find(|l| !program.memory.contains(l) && !layout.is_layout_location(l))
    {
        return Err(StrayLocation(l.clone()));
    }
    let par_part = heap.restrict(program.memory.iter().map(|d| d.loc.as_str()));
    let sim_part = heap.restrict(layout.memory.iter().map(|d| d.loc.as_str()));
    Ok(HeapSplit { par_part, sim_part })
}

/// Label of the next instruction of a context; the end label of its
/// procedure once its code is exhausted.
pub fn next_label(ctx: &LocalContext, procs: &Procs) -> Label {
    match ctx.rest.first() {
        Some(li) => li.label,
        None => procs.get(&ctx.proc).map_or(Label::UNSET, |p| p.end_label),
    }
}

/// Call stack of thread `t` (bottom first) against the `from` cells: each
/// callee's cell holds the resumption label of its caller, and the cell of
/// the bottom procedure holds 0.
pub fn wf_stack(stack: &[LocalContext], t: usize, sim_part: &Heap, procs: &Procs, layout: &SimLayout) -> bool {
    stack.iter().enumerate().all(|(i, ctx)| {
        let expected = match i {
            0 => 0,
            _ => next_label(&stack[i - 1], procs).0,
        };
        layout
            .from_loc(&ctx.proc)
            .ok()
            .and_then(|loc| sim_part.get(loc, t))
            == Some(&Value::from(expected))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Heap,
    Vars,
    PctRunning,
    PctTerminated,
    WfStack,
    SimLoop,
}

impl Condition {
    pub const ALL: [Condition; 6] = [
        Condition::Heap,
        Condition::Vars,
        Condition::PctRunning,
        Condition::PctTerminated,
        Condition::WfStack,
        Condition::SimLoop,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Condition::Heap => "(1)",
            Condition::Vars => "(2)",
            Condition::PctRunning => "(3a)",
            Condition::PctTerminated => "(3b)",
            Condition::WfStack => "(4)",
            Condition::SimLoop => "(5)",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivFailure {
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thread: Option<usize>,
    pub detail: String,
}

impl fmt::Display for EquivFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.condition.tag())?;
        if let Some(t) = self.thread {
            write!(f, " thread {t}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Per-condition verdicts with the failures behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivReport {
    pub heap: bool,
    pub vars: bool,
    pub pct_running: bool,
    pub pct_terminated: bool,
    pub wf_stack: bool,
    pub sim_loop: bool,
    pub failures: Vec<EquivFailure>,
}

impl EquivReport {
    fn from_failures(failures: Vec<EquivFailure>) -> Self {
        let ok = |c: Condition| failures.iter().all(|f| f.condition != c);
        EquivReport {
            heap: ok(Condition::Heap),
            vars: ok(Condition::Vars),
            pct_running: ok(Condition::PctRunning),
            pct_terminated: ok(Condition::PctTerminated),
            wf_stack: ok(Condition::WfStack),
            sim_loop: ok(Condition::SimLoop),
            failures,
        }
    }

    pub fn holds(&self, c: Condition) -> bool {
        match c {
            Condition::Heap => self.heap,
            Condition::Vars => self.vars,
            Condition::PctRunning => self.pct_running,
            Condition::PctTerminated => self.pct_terminated,
            Condition::WfStack => self.wf_stack,
            Condition::SimLoop => self.sim_loop,
        }
    }

    pub fn overall(&self) -> bool {
        Condition::ALL.iter().all(|&c| self.holds(c))
    }
}

/// The main loop of the simulating program: the last instruction of
/// `interleavings`.
pub fn sim_loop(tr: &Transformed) -> Option<&LabeledInstr> {
    tr.program
        .main()
        .filter(|p| p.name == INTERLEAVINGS)
        .and_then(|p| p.body.last())
}

/// Evaluates every equivalence condition between `par` and `sim`.
pub fn states_equivalent(par: &ParState, sim: &SeqState, program: &ProgramPar, tr: &Transformed) -> EquivReport {
    let layout = &tr.layout;
    let procs = &program.procs;
    let mut fails = Vec::new();
    let mut fail = |condition, thread, detail: String| {
        fails.push(EquivFailure {
            condition,
            thread,
            detail,
        })
    };

    let split = match split_heap(&sim.heap, program, layout) {
        Ok(s) => s,
        Err(e) => {
            fail(Condition::Heap, None, e.to_string());
            HeapSplit {
                par_part: sim.heap.restrict(program.memory.iter().map(|d| d.loc.as_str())),
                sim_part: sim.heap.restrict(layout.memory.iter().map(|d| d.loc.as_str())),
            }
        }
    };

    // (1)
    if split.par_part != par.heap {
        let detail = first_heap_difference(&par.heap, &split.par_part);
        fail(Condition::Heap, None, detail);
    }

    let cell = |loc: &str, t: usize| split.sim_part.get(loc, t);
    let all_pct_zero = (0..layout.ntid).all(|t| cell(&layout.pct, t).is_some_and(Value::is_zero));

    for (t, stack) in par.stacks.iter().enumerate() {
        // (2)
        for ctx in stack {
            for (x, v) in &ctx.env {
                let actual = layout.simvar(&ctx.proc, x).ok().and_then(|l| cell(l, t));
                if actual != Some(v) {
                    fail(
                        Condition::Vars,
                        Some(t),
                        format!("{}.{x} = {v}, simulated {}", ctx.proc, show(actual)),
                    );
                }
            }
        }
        let pc = cell(&layout.pct, t);
        // (3a)
        if let Some(top) = stack.last() {
            let want = next_label(top, procs);
            if pc != Some(&want.value()) {
                fail(
                    Condition::PctRunning,
                    Some(t),
                    format!("pct = {}, next label is {want}", show(pc)),
                );
            }
        }
        // (3b)
        let zero = pc.is_some_and(Value::is_zero);
        if stack.is_empty() != zero {
            fail(
                Condition::PctTerminated,
                Some(t),
                format!("stack has {} frame(s), pct = {}", stack.len(), show(pc)),
            );
        }
        // (4)
        if !wf_stack(stack, t, &split.sim_part, procs, layout) {
            let cells: Vec<String> = stack
                .iter()
                .map(|c| {
                    let v = layout.from_loc(&c.proc).ok().and_then(|l| cell(l, t));
                    format!("from({}) = {}", c.proc, show(v))
                })
                .collect();
            fail(Condition::WfStack, Some(t), cells.join(", "));
        }
    }
    if par.stacks.len() != layout.ntid {
        fail(
            Condition::PctTerminated,
            None,
            format!("{} threads against a layout for {}", par.stacks.len(), layout.ntid),
        );
    }

    // (5)
    match (sim.stack.as_slice(), sim_loop(tr)) {
        ([ctx], Some(lp)) if ctx.proc == INTERLEAVINGS && ctx.rest.len() == 1 && &ctx.rest[0] == lp => {
            let flag = ctx.env.get(TERMINATED);
            if flag != Some(&Value::Bool(all_pct_zero)) {
                fail(
                    Condition::SimLoop,
                    None,
                    format!("terminated = {}, all counters zero: {all_pct_zero}", show(flag)),
                );
            }
        }
        _ => fail(
            Condition::SimLoop,
            None,
            "simulation is not at the head of its main loop".into(),
        ),
    }

    EquivReport::from_failures(fails)
}

fn show(v: Option<&Value>) -> String {
    v.map_or_else(|| "undefined".into(), Value::to_string)
}

fn first_heap_difference(par: &Heap, replica: &Heap) -> String {
    for (loc, cells) in par.iter() {
        match replica.array(loc) {
            None => return format!("`{loc}` missing from the simulation"),
            Some(other) => {
                if let Some(i) = (0..cells.len().max(other.len())).find(|&i| cells.get(i) != other.get(i)) {
                    return format!(
                        "{loc}[{i}] = {}, simulated {}",
                        show(cells.get(i)),
                        show(other.get(i))
                    );
                }
            }
        }
    }
    "simulation defines extra program locations".into()
}

/// Whether a simulation action survives filtering.
pub fn is_kept(a: &Action, layout: &SimLayout) -> bool {
    match a {
        Action::Tau => false,
        Action::Read { loc, .. } | Action::Write { loc, .. } => !layout.is_layout_location(loc),
        Action::Call { name, .. } if name == SELECT => true,
        Action::Call { name, .. } | Action::Return { name } => is_boundary_proc(name, layout),
    }
}

/// Simulating procedures of call instructions and return procedures.
fn is_boundary_proc(name: &str, layout: &SimLayout) -> bool {
    dispatched_label(name)
        .and_then(|l| layout.labels.get(&l))
        .is_some_and(|info| matches!(info.role, LabelRole::Call { .. } | LabelRole::Return))
}

fn dispatched_label(name: &str) -> Option<i64> {
    is_label_name(name).then(|| name[1..].parse().ok()).flatten()
}

/// Drops τ-actions, simulation-cell accesses and calls to simulating
/// procedures other than `select`, call and return simulations.
pub fn filter_sim_trace(trace: &[Action], layout: &SimLayout) -> Vec<Action> {
    trace.iter().filter(|a| is_kept(a, layout)).cloned().collect()
}

/// Parallel event as the simulation can observe it: inside an atomic
/// block only heap accesses are visible, since inlined calls and local
/// steps leave no trace.
pub fn observable_event(e: &EventPar) -> EventPar {
    match &e.action {
        ParAction::Seq(_) => e.clone(),
        ParAction::Atomic(acts) => {
            EventPar::atomic(e.tid, acts.iter().filter(|a| a.is_memory()).cloned().collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("observable action {0} before the first select")]
    BeforeSelect(Action),
    #[error("segment {0} dispatches no simulating procedure")]
    NoDispatch(usize),
    #[error("segment {0} dispatches unknown label {1}")]
    UnknownLabel(usize, i64),
    #[error("segment {segment}: {detail}")]
    Shape { segment: usize, detail: String },
    #[error("{segments} segment(s) but {choices} recorded choice(s)")]
    ChoiceCount { segments: usize, choices: usize },
}

/// Splits a simulation trace at its `select` calls. Actions before the
/// first call are returned separately.
pub fn segments(trace: &[Action]) -> (&[Action], Vec<&[Action]>) {
    let starts: Vec<usize> = trace
        .iter()
        .enumerate()
        .filter(|(_, a)| matches!(a, Action::Call { name, .. } if name == SELECT))
        .map(|(i, _)| i)
        .collect();
    let Some(&first) = starts.first() else {
        return (trace, Vec::new());
    };
    let mut segs = Vec::new();
    for (k, &s) in starts.iter().enumerate() {
        let e = starts.get(k + 1).copied().unwrap_or(trace.len());
        segs.push(&trace[s..e]);
    }
    (&trace[..first], segs)
}

/// Maps each select-delimited segment of a raw simulation trace to the
/// parallel event it simulates. `choices[i]` is the thread picked by the
/// `i`-th select.
pub fn lift_sim_trace(
    trace: &[Action],
    choices: &[usize],
    program: &ProgramPar,
    layout: &SimLayout,
) -> Result<Vec<EventPar>, LiftError> {
    let (prefix, segs) = segments(trace);
    if let Some(a) = prefix.iter().find(|a| is_kept(a, layout)) {
        return Err(LiftError::BeforeSelect(a.clone()));
    }
    if segs.len() != choices.len() {
        return Err(LiftError::ChoiceCount {
            segments: segs.len(),
            choices: choices.len(),
        });
    }
    segs.iter()
        .zip(choices)
        .enumerate()
        .map(|(i, (seg, &t))| lift_segment(i, seg, t, program, layout))
        .collect()
}

fn lift_segment(
    i: usize,
    seg: &[Action],
    t: usize,
    program: &ProgramPar,
    layout: &SimLayout,
) -> Result<EventPar, LiftError> {
    let label = seg
        .iter()
        .find_map(|a| match a {
            Action::Call { name, .. } => dispatched_label(name),
            _ => None,
        })
        .ok_or(LiftError::NoDispatch(i))?;
    let info = layout
        .labels
        .get(&label)
        .ok_or(LiftError::UnknownLabel(i, label))?;
    let heap_ops: Vec<Action> = seg
        .iter()
        .filter(|a| a.is_memory() && !layout.is_layout_location(a.mem_loc().expect("memory action")))
        .cloned()
        .collect();
    let shape = |detail: String| LiftError::Shape { segment: i, detail };
    let quiet = |ops: &[Action]| match ops {
        [] => Ok(()),
        _ => Err(shape(format!("label {label} touches the program heap"))),
    };

    let action = match &info.role {
        LabelRole::Atomic => return Ok(EventPar::atomic(t, heap_ops)),
        LabelRole::Silent => {
            quiet(&heap_ops)?;
            Action::Tau
        }
        LabelRole::Memory => match <[Action; 1]>::try_from(heap_ops) {
            Ok([a]) => a,
            Err(ops) => {
                return Err(shape(format!(
                    "label {label} performs {} heap accesses",
                    ops.len()
                )))
            }
        },
        LabelRole::Return => {
            quiet(&heap_ops)?;
            Action::Return {
                name: info.proc.clone(),
            }
        }
        LabelRole::Call { callee } => {
            quiet(&heap_ops)?;
            let params = program
                .procs
                .get(callee)
                .map(|p| p.params.clone())
                .ok_or_else(|| shape(format!("unknown callee `{callee}`")))?;
            let args = params
                .iter()
                .map(|x| formal_value(seg, layout, callee, x, t))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| shape(format!("arguments of `{callee}` not passed")))?;
            Action::Call {
                name: callee.clone(),
                args,
            }
        }
    };
    Ok(EventPar::seq(t, action))
}

/// Last value stored into the parameter cell of `x` for thread `t`.
fn formal_value(seg: &[Action], layout: &SimLayout, callee: &str, x: &Name, t: usize) -> Option<Value> {
    let loc = layout.simvar(callee, x).ok()?;
    seg.iter().rev().find_map(|a| match a {
        Action::Write { loc: l, off, val } if l == loc && *off == t => Some(val.clone()),
        _ => None,
    })
}

/// Compares a parallel trace with a raw simulation trace.
pub fn traces_equivalent(
    par: &[EventPar],
    sim: &[Action],
    choices: &[usize],
    program: &ProgramPar,
    layout: &SimLayout,
) -> Result<bool, LiftError> {
    let lifted = lift_sim_trace(sim, choices, program, layout)?;
    Ok(lifted.len() == par.len() && lifted.iter().zip(par).all(|(l, p)| *l == observable_event(p)))
}
