//! Bounded exhaustive exploration of parallel programs and executable
//! checks that the simulating program simulates them.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use crate::ast::{LabeledInstr, ProgramPar, Procs};
use crate::equiv::{
    initial_sim_heap, lift_sim_trace, observable_event, sim_loop, states_equivalent, EquivFailure,
};
use crate::sem::{
    enabled_threads, step_par, step_seq, Action, BlockReason, EventPar, Heap, InitError, ParState,
    ParStepError, ScriptedOracle, SeqState, StepOutcome, DEFAULT_ATOMIC_FUEL,
};
use crate::transform::{transform, TransformError, Transformed};
use crate::wf::INTERLEAVINGS;

pub const DEFAULT_DEPTH: usize = 12;
/// Step budget of one iteration of the simulation loop.
pub const DEFAULT_ITERATION_FUEL: u64 = 100_000;

/// Worker pool for level-by-level expansion. With one job, or without the
/// `parallel` feature, work runs on the calling thread.
struct Pool {
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Pool {
    fn new(jobs: usize) -> Pool {
        #[cfg(feature = "parallel")]
        {
            let pool = (jobs > 1).then(|| {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .expect("thread pool")
            });
            Pool { pool }
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = jobs;
            Pool {}
        }
    }

    /// Maps `f` over `items`, keeping their order.
    fn map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExploreOptions {
    /// Maximal number of parallel steps from the initial state.
    pub depth: usize,
    pub atomic_fuel: u64,
    /// Merge identical states. Without it every schedule is enumerated.
    pub memoize: bool,
    /// Keep one trace per maximal schedule; only meaningful without
    /// memoization.
    pub collect_traces: bool,
    pub jobs: usize,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            depth: DEFAULT_DEPTH,
            atomic_fuel: DEFAULT_ATOMIC_FUEL,
            memoize: true,
            collect_traces: false,
            jobs: 1,
        }
    }
}

/// A schedule leading to a blocking step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Threads of the steps before the blocking one.
    pub schedule: Vec<usize>,
    pub tid: usize,
    #[serde(serialize_with = "ser_display")]
    pub reason: BlockReason,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Safety {
    Safe,
    Unsafe { witness: Witness },
    /// No blocking state within the bound, but some schedule was cut by
    /// the depth bound or an atomic block ran out of fuel.
    Unknown,
}

#[derive(Debug, Clone)]
pub struct ExplorationResult {
    pub safety: Safety,
    /// Distinct states visited (every node without memoization).
    pub states: usize,
    /// Number of `step_par` calls.
    pub steps: u64,
    /// Heaps of the reachable final states.
    pub finals: BTreeSet<Heap>,
    /// Non-final states left unexpanded at the depth bound.
    pub frontier: usize,
    /// Atomic steps stopped by their fuel bound.
    pub fuel_stops: usize,
    /// One trace per maximal schedule, when requested.
    pub traces: Vec<Vec<EventPar>>,
}

struct Node {
    state: ParState,
    parent: Option<usize>,
    event: Option<EventPar>,
}

fn path(nodes: &[Node], mut i: usize) -> Vec<EventPar> {
    let mut out = Vec::new();
    while let Some(ev) = &nodes[i].event {
        out.push(ev.clone());
        i = nodes[i].parent.expect("non-root node");
    }
    out.reverse();
    out
}

type Expansion = Vec<(usize, Result<(EventPar, ParState), ParStepError>)>;

fn expand(procs: &Procs, state: &ParState, atomic_fuel: u64) -> Expansion {
    enabled_threads(state)
        .into_iter()
        .map(|t| {
            let mut next = state.clone();
            let r = step_par(procs, &mut next, t, atomic_fuel).map(|ev| (ev, next));
            (t, r)
        })
        .collect()
}

/// Explores every schedule of `program` from `heap`, breadth first, up to
/// `opts.depth` steps.
pub fn explore_par(
    program: &ProgramPar,
    ntid: usize,
    heap: Heap,
    opts: &ExploreOptions,
) -> Result<ExplorationResult, InitError> {
    let init = ParState::initial(program, ntid, heap)?;
    let pool = Pool::new(opts.jobs);
    let mut nodes = vec![Node {
        state: init.clone(),
        parent: None,
        event: None,
    }];
    let mut seen: HashMap<ParState, usize> = HashMap::new();
    if opts.memoize {
        seen.insert(init, 0);
    }
    let mut level = vec![0usize];
    let mut result = ExplorationResult {
        safety: Safety::Safe,
        states: 1,
        steps: 0,
        finals: BTreeSet::new(),
        frontier: 0,
        fuel_stops: 0,
        traces: Vec::new(),
    };
    let mut witness: Option<Witness> = None;
    let mut leaves = Vec::new();

    for depth in 0..=opts.depth {
        if level.is_empty() {
            break;
        }
        let mut next_level = Vec::new();
        let mut to_expand = Vec::new();
        for &i in &level {
            if nodes[i].state.is_final() {
                result.finals.insert(nodes[i].state.heap.clone());
                leaves.push(i);
            } else if depth == opts.depth {
                result.frontier += 1;
                leaves.push(i);
            } else {
                to_expand.push(i);
            }
        }
        let states: Vec<&ParState> = to_expand.iter().map(|&i| &nodes[i].state).collect();
        let expansions = pool.map(&states, |s| expand(&program.procs, s, opts.atomic_fuel));
        for (&i, succs) in to_expand.iter().zip(expansions) {
            for (t, r) in succs {
                result.steps += 1;
                match r {
                    Ok((ev, state)) => {
                        if opts.memoize {
                            if seen.contains_key(&state) {
                                continue;
                            }
                            seen.insert(state.clone(), nodes.len());
                        }
                        next_level.push(nodes.len());
                        nodes.push(Node {
                            state,
                            parent: Some(i),
                            event: Some(ev),
                        });
                    }
                    Err(ParStepError::Blocked(BlockReason::AtomicFuel { .. })) => {
                        result.fuel_stops += 1;
                        leaves.push(i);
                    }
                    Err(ParStepError::Blocked(reason)) => {
                        leaves.push(i);
                        if witness.is_none() {
                            witness = Some(Witness {
                                schedule: path(&nodes, i).iter().map(|e| e.tid).collect(),
                                tid: t,
                                reason,
                            });
                        }
                    }
                    Err(ParStepError::NotEnabled(_)) => unreachable!("only enabled threads step"),
                }
            }
        }
        result.states = nodes.len();
        level = next_level;
    }

    if opts.collect_traces && !opts.memoize {
        leaves.sort_unstable();
        leaves.dedup();
        result.traces = leaves.iter().map(|&i| path(&nodes, i)).collect();
    }
    result.safety = match witness {
        Some(witness) => Safety::Unsafe { witness },
        None if result.frontier > 0 || result.fuel_stops > 0 => Safety::Unknown,
        None => Safety::Safe,
    };
    Ok(result)
}

/// Outcome of enumerating every `select` resolution of a sequential run.
#[derive(Debug, Clone, Default)]
pub struct SeqExploration {
    /// Final heaps.
    pub finals: BTreeSet<Heap>,
    /// Runs that ended in each final heap or block, counted with
    /// multiplicity.
    pub runs: usize,
    pub blocked: Vec<(Vec<usize>, BlockReason)>,
    /// Runs cut by the fuel or choice bound.
    pub cut: usize,
}

/// Enumerates every resolution of the `select` choices of a sequential
/// run, up to `max_choices` choices and `fuel` steps per run.
pub fn explore_seq_choices(procs: &Procs, state: SeqState, max_choices: usize, fuel: u64) -> SeqExploration {
    let mut out = SeqExploration::default();
    let mut stack = vec![(state, Vec::<usize>::new(), 0u64)];
    while let Some((mut s, choices, mut used)) = stack.pop() {
        loop {
            if used == fuel {
                out.runs += 1;
                out.cut += 1;
                break;
            }
            let mut decline = |_: &[usize]| None;
            match step_seq(procs, &mut s, &mut decline) {
                StepOutcome::Stepped { .. } => used += 1,
                StepOutcome::Final => {
                    out.runs += 1;
                    out.finals.insert(s.heap.clone());
                    break;
                }
                StepOutcome::Blocked(BlockReason::OracleDeclined { candidates }) => {
                    if choices.len() == max_choices {
                        out.runs += 1;
                        out.cut += 1;
                        break;
                    }
                    for &c in candidates.iter().rev() {
                        let mut branch = s.clone();
                        let r = step_seq(procs, &mut branch, &mut ScriptedOracle::new([c]));
                        debug_assert!(matches!(r, StepOutcome::Stepped { .. }));
                        let mut cs = choices.clone();
                        cs.push(c);
                        stack.push((branch, cs, used + 1));
                    }
                    break;
                }
                StepOutcome::Blocked(reason) => {
                    out.runs += 1;
                    out.blocked.push((choices.clone(), reason));
                    break;
                }
            }
        }
    }
    out
}

/// How one iteration of the simulation loop ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IterationEnd {
    LoopHead,
    /// The loop exited and the program returned.
    Final,
    Blocked(BlockReason),
    FuelExhausted,
}

#[derive(Debug, Clone)]
pub struct Iteration {
    pub trace: Vec<Action>,
    pub choices: Vec<usize>,
    pub state: SeqState,
    pub end: IterationEnd,
}

fn at_loop_head(s: &SeqState, lp: &LabeledInstr) -> bool {
    matches!(s.stack.as_slice(), [ctx] if ctx.proc == INTERLEAVINGS && ctx.rest.len() == 1 && &ctx.rest[0] == lp)
}

/// Runs the simulation from `s` until it is back at its loop head,
/// resolving `select` with `choice`.
fn run_until_loop_head(
    procs: &Procs,
    s: &SeqState,
    lp: &LabeledInstr,
    choice: Option<usize>,
    fuel: u64,
) -> Iteration {
    let mut state = s.clone();
    let mut oracle = ScriptedOracle::new(choice);
    let mut trace = Vec::new();
    let mut choices = Vec::new();
    let end = loop {
        if trace.len() as u64 == fuel {
            break IterationEnd::FuelExhausted;
        }
        match step_seq(procs, &mut state, &mut oracle) {
            StepOutcome::Stepped { action, chosen } => {
                trace.push(action);
                choices.extend(chosen);
            }
            StepOutcome::Final => break IterationEnd::Final,
            StepOutcome::Blocked(r) => break IterationEnd::Blocked(r),
        }
        if at_loop_head(&state, lp) {
            break IterationEnd::LoopHead;
        }
    };
    Iteration {
        trace,
        choices,
        state,
        end,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Init,
    Forward,
    Backward,
}

/// A failed check with what is needed to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: CheckKind,
    /// Parallel schedule from the initial state to the failing pair.
    pub schedule: Vec<usize>,
    /// Thread whose step was checked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thread: Option<usize>,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<EquivFailure>,
}

/// Result of one forward or backward check, with the successor pair when
/// the check passed.
#[derive(Debug, Clone)]
pub struct StepCheck {
    pub thread: usize,
    pub result: Result<(ParState, SeqState), (String, Vec<EquivFailure>)>,
}

/// Checks on the simulation of one parallel program.
pub struct Simulation<'a> {
    pub program: &'a ProgramPar,
    pub transformed: &'a Transformed,
    loop_instr: LabeledInstr,
    pub iteration_fuel: u64,
    pub atomic_fuel: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimulationError {
    #[error("simulating program has no main loop")]
    NoLoop,
    #[error(transparent)]
    Init(#[from] InitError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

impl<'a> Simulation<'a> {
    pub fn new(program: &'a ProgramPar, transformed: &'a Transformed) -> Result<Self, SimulationError> {
        let loop_instr = sim_loop(transformed).ok_or(SimulationError::NoLoop)?.clone();
        Ok(Simulation {
            program,
            transformed,
            loop_instr,
            iteration_fuel: DEFAULT_ITERATION_FUEL,
            atomic_fuel: DEFAULT_ATOMIC_FUEL,
        })
    }

    fn sim_procs(&self) -> &Procs {
        &self.transformed.program.procs
    }

    /// Runs the initialization of the simulation and compares the first
    /// loop head with the initial parallel state.
    pub fn check_init(&self, par: &ParState) -> Result<SeqState, (String, Vec<EquivFailure>)> {
        let heap = initial_sim_heap(&par.heap, &self.transformed.layout);
        let s0 = SeqState::initial(&self.transformed.program, heap).map_err(|e| (e.to_string(), vec![]))?;
        let it = run_until_loop_head(self.sim_procs(), &s0, &self.loop_instr, None, self.iteration_fuel);
        if it.end != IterationEnd::LoopHead {
            return Err((format!("initialization ended with {:?}", it.end), vec![]));
        }
        let report = states_equivalent(par, &it.state, self.program, self.transformed);
        if report.overall() {
            Ok(it.state)
        } else {
            Err(("initial states are not equivalent".into(), report.failures))
        }
    }

    /// One iteration with `select` resolved to `t`, compared with the
    /// parallel step of `t`.
    fn matched_step(&self, par: &ParState, sim: &SeqState, t: usize) -> Result<(ParState, SeqState), (String, Vec<EquivFailure>)> {
        let mut next_par = par.clone();
        let ev = step_par(&self.program.procs, &mut next_par, t, self.atomic_fuel)
            .map_err(|e| (format!("parallel step of thread {t}: {e}"), vec![]))?;
        let it = run_until_loop_head(self.sim_procs(), sim, &self.loop_instr, Some(t), self.iteration_fuel);
        if it.end != IterationEnd::LoopHead {
            return Err((format!("simulation iteration ended with {:?}", it.end), vec![]));
        }
        if it.choices != [t] {
            return Err((format!("iteration made choices {:?}", it.choices), vec![]));
        }
        let lifted = lift_sim_trace(&it.trace, &it.choices, self.program, &self.transformed.layout)
            .map_err(|e| (format!("lifting failed: {e}"), vec![]))?;
        let want = observable_event(&ev);
        if lifted != [want.clone()] {
            let got: Vec<String> = lifted.iter().map(ToString::to_string).collect();
            return Err((format!("parallel event {want}, simulated [{}]", got.join("; ")), vec![]));
        }
        let report = states_equivalent(&next_par, &it.state, self.program, self.transformed);
        if !report.overall() {
            return Err(("successor states are not equivalent".into(), report.failures));
        }
        Ok((next_par, it.state))
    }

    /// Every parallel step of thread `t` is matched by one loop iteration.
    pub fn check_forward_step(&self, par: &ParState, sim: &SeqState, t: usize) -> StepCheck {
        StepCheck {
            thread: t,
            result: self.matched_step(par, sim, t),
        }
    }

    /// Every iteration the simulation can take from `sim` maps back to a
    /// parallel step. Returns no check when the simulation terminates,
    /// in which case the parallel state must be final.
    pub fn check_backward_step(&self, par: &ParState, sim: &SeqState) -> Result<Vec<StepCheck>, String> {
        let probe = run_until_loop_head(self.sim_procs(), sim, &self.loop_instr, None, self.iteration_fuel);
        let candidates = match probe.end {
            IterationEnd::Blocked(BlockReason::OracleDeclined { candidates }) => candidates,
            IterationEnd::Final if par.is_final() => return Ok(vec![]),
            IterationEnd::Final => return Err("simulation terminated while threads remain".into()),
            end => return Err(format!("simulation stopped before select: {end:?}")),
        };
        let enabled = enabled_threads(par);
        Ok(candidates
            .into_iter()
            .map(|t| StepCheck {
                thread: t,
                result: if enabled.contains(&t) {
                    self.matched_step(par, sim, t)
                } else {
                    Err((format!("select may pick thread {t}, which has terminated"), vec![]))
                },
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub depth: usize,
    pub iteration_fuel: u64,
    pub atomic_fuel: u64,
    pub jobs: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            depth: DEFAULT_DEPTH,
            iteration_fuel: DEFAULT_ITERATION_FUEL,
            atomic_fuel: DEFAULT_ATOMIC_FUEL,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyStatus {
    /// Every reachable pair was checked.
    Verified,
    /// Checks passed, but some pairs lie beyond the depth bound.
    BoundExhausted,
    CheckFailed,
    Unsafe,
}

impl VerifyStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            VerifyStatus::Verified => 0,
            VerifyStatus::CheckFailed => 2,
            VerifyStatus::Unsafe => 3,
            VerifyStatus::BoundExhausted => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CheckCount {
    pub checked: usize,
    pub failed: usize,
}

impl CheckCount {
    fn record(&mut self, ok: bool) {
        self.checked += 1;
        self.failed += usize::from(!ok);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationVerdict {
    pub status: VerifyStatus,
    pub depth: usize,
    pub init: bool,
    pub forward: CheckCount,
    pub backward: CheckCount,
    /// Distinct state pairs visited.
    pub pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unsafe_witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<Counterexample>,
}

impl SimulationVerdict {
    fn new(depth: usize) -> Self {
        SimulationVerdict {
            status: VerifyStatus::Verified,
            depth,
            init: false,
            forward: CheckCount::default(),
            backward: CheckCount::default(),
            pairs: 0,
            unsafe_witness: None,
            counterexamples: Vec::new(),
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.init && self.forward.failed == 0 && self.backward.failed == 0
    }
}

/// Counterexamples kept per verdict; the counts cover all of them.
const KEPT_COUNTEREXAMPLES: usize = 8;

/// Transforms `program` and checks its simulation, see
/// [`verify_transformed`].
pub fn verify_program(
    program: &ProgramPar,
    ntid: usize,
    heap: Heap,
    opts: &VerifyOptions,
) -> Result<SimulationVerdict, SimulationError> {
    let tr = transform(program, ntid)?;
    verify_transformed(program, &tr, ntid, heap, opts)
}

/// Checks that `transformed` simulates `program` from the parallel
/// initial state over `heap`: the initialization, then a forward and a
/// backward check at every pair of equivalent states reachable within
/// `opts.depth` parallel steps. Unsafe programs are rejected first.
pub fn verify_transformed(
    program: &ProgramPar,
    transformed: &Transformed,
    ntid: usize,
    heap: Heap,
    opts: &VerifyOptions,
) -> Result<SimulationVerdict, SimulationError> {
    let mut verdict = SimulationVerdict::new(opts.depth);
    let explore_opts = ExploreOptions {
        depth: opts.depth,
        atomic_fuel: opts.atomic_fuel,
        jobs: opts.jobs,
        ..ExploreOptions::default()
    };
    let exploration = explore_par(program, ntid, heap.clone(), &explore_opts)?;
    if let Safety::Unsafe { witness } = exploration.safety {
        verdict.status = VerifyStatus::Unsafe;
        verdict.unsafe_witness = Some(witness);
        return Ok(verdict);
    }

    let mut sim = Simulation::new(program, transformed)?;
    sim.iteration_fuel = opts.iteration_fuel;
    sim.atomic_fuel = opts.atomic_fuel;
    let par0 = ParState::initial(program, ntid, heap)?;
    let sim0 = match sim.check_init(&par0) {
        Ok(s) => s,
        Err((detail, failures)) => {
            verdict.status = VerifyStatus::CheckFailed;
            verdict.counterexamples.push(Counterexample {
                check: CheckKind::Init,
                schedule: vec![],
                thread: None,
                detail,
                failures,
            });
            return Ok(verdict);
        }
    };
    verdict.init = true;

    struct Pair {
        par: ParState,
        sim: SeqState,
        schedule: Vec<usize>,
    }
    struct PairChecks {
        forward: Vec<StepCheck>,
        backward: Result<Vec<StepCheck>, String>,
    }

    let pool = Pool::new(opts.jobs);
    let mut seen: HashSet<(ParState, SeqState)> = HashSet::new();
    seen.insert((par0.clone(), sim0.clone()));
    let mut level = vec![Pair {
        par: par0,
        sim: sim0,
        schedule: vec![],
    }];
    let mut cut = exploration.fuel_stops > 0;
    let mut failed = false;

    for depth in 0..=opts.depth {
        if level.is_empty() {
            break;
        }
        verdict.pairs += level.len();
        if depth == opts.depth {
            cut |= level.iter().any(|p| !p.par.is_final());
            break;
        }
        let checks = pool.map(&level, |p| PairChecks {
            forward: enabled_threads(&p.par)
                .into_iter()
                .map(|t| sim.check_forward_step(&p.par, &p.sim, t))
                .collect(),
            backward: sim.check_backward_step(&p.par, &p.sim),
        });

        let mut next = Vec::new();
        for (pair, pc) in level.iter().zip(checks) {
            let mut note = |verdict: &mut SimulationVerdict, check, thread, (detail, failures): (String, Vec<EquivFailure>)| {
                failed = true;
                if verdict.counterexamples.len() < KEPT_COUNTEREXAMPLES {
                    verdict.counterexamples.push(Counterexample {
                        check,
                        schedule: pair.schedule.clone(),
                        thread,
                        detail,
                        failures,
                    });
                }
            };
            match pc.backward {
                Ok(steps) => {
                    for c in steps {
                        verdict.backward.record(c.result.is_ok());
                        if let Err(e) = c.result {
                            note(&mut verdict, CheckKind::Backward, Some(c.thread), e);
                        }
                    }
                }
                Err(d) => {
                    verdict.backward.record(false);
                    note(&mut verdict, CheckKind::Backward, None, (d, vec![]));
                }
            }
            for c in pc.forward {
                verdict.forward.record(c.result.is_ok());
                match c.result {
                    Ok(key) => {
                        if seen.insert(key.clone()) {
                            let mut schedule = pair.schedule.clone();
                            schedule.push(c.thread);
                            next.push(Pair {
                                par: key.0,
                                sim: key.1,
                                schedule,
                            });
                        }
                    }
                    Err(e) => note(&mut verdict, CheckKind::Forward, Some(c.thread), e),
                }
            }
        }
        level = next;
    }

    verdict.status = if failed {
        VerifyStatus::CheckFailed
    } else if cut {
        VerifyStatus::BoundExhausted
    } else {
        VerifyStatus::Verified
    };
    Ok(verdict)
}
