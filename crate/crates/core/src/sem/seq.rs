use std::fmt;

use crate::ast::{Expr, Instr, Name, Procs};
use crate::value::{Loc, OpError, Value, ValueKind};
use crate::wf::SELECT;

use super::oracle::ChoiceOracle;
use super::state::{Action, Env, LocalContext, SeqState};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error(transparent)]
    Op(#[from] OpError),
}

/// Evaluates a side-effect free expression in `env`.
pub fn eval_expr(env: &Env, e: &Expr) -> Result<Value, EvalError> {
    match e {
        Expr::Const(v) => Ok(v.clone()),
        Expr::Var(x) => env.get(x).cloned().ok_or_else(|| EvalError::Unbound(x.clone())),
        Expr::Op(op, args) => {
            let vals = args
                .iter()
                .map(|a| eval_expr(env, a))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(op.apply(&vals)?)
        }
    }
}

/// Why no rule applies to a non-final state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BlockReason {
    Unbound(Name),
    Type(String),
    /// A variable used as array base does not hold a location.
    NotALocation { var: Name, found: ValueKind },
    BadOffset { loc: Loc, off: Value, size: usize },
    UnknownLocation(Loc),
    UndefinedProcedure(Name),
    Arity { proc: Name, expected: usize, found: usize },
    Recursion(Name),
    NonBoolCondition(ValueKind),
    /// `select` found no thread with a nonzero counter.
    StuckSelect,
    /// The oracle refused to choose, or chose outside the candidates.
    OracleDeclined { candidates: Vec<usize> },
    AtomicInSequential,
    /// An atomic block did not finish within its step budget.
    AtomicFuel { steps: u64 },
}

impl BlockReason {
    pub fn code(&self) -> &'static str {
        match self {
            BlockReason::Unbound(_) => "unbound-variable",
            BlockReason::Type(_) => "type-error",
            BlockReason::NotALocation { .. } => "not-a-location",
            BlockReason::BadOffset { .. } => "out-of-bounds",
            BlockReason::UnknownLocation(_) => "unknown-location",
            BlockReason::UndefinedProcedure(_) => "undefined-procedure",
            BlockReason::Arity { .. } => "arity-mismatch",
            BlockReason::Recursion(_) => "recursion",
            BlockReason::NonBoolCondition(_) => "non-bool-condition",
            BlockReason::StuckSelect => "stuck-select",
            BlockReason::OracleDeclined { .. } => "oracle-declined",
            BlockReason::AtomicInSequential => "atomic-in-sequential",
            BlockReason::AtomicFuel { .. } => "atomic-fuel",
        }
    }
}

impl fmt::Display for BlockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockReason::Unbound(x) => write!(f, "unbound variable `{x}`"),
            BlockReason::Type(m) => write!(f, "type error: {m}"),
            BlockReason::NotALocation { var, found } => {
                write!(f, "`{var}` holds a {found}, not a location")
            }
            BlockReason::BadOffset { loc, off, size } => {
                write!(f, "offset {off} outside `{loc}` of size {size}")
            }
            BlockReason::UnknownLocation(l) => write!(f, "unallocated location `{l}`"),
            BlockReason::UndefinedProcedure(p) => write!(f, "undefined procedure `{p}`"),
            BlockReason::Arity {
                proc,
                expected,
                found,
            } => write!(f, "`{proc}` expects {expected} argument(s), got {found}"),
            BlockReason::Recursion(p) => write!(f, "`{p}` is already on the call stack"),
            BlockReason::NonBoolCondition(k) => write!(f, "condition evaluates to a {k}"),
            BlockReason::StuckSelect => f.write_str("select has no candidate thread"),
            BlockReason::OracleDeclined { candidates } => {
                write!(f, "no choice made among {candidates:?}")
            }
            BlockReason::AtomicInSequential => f.write_str("atomic block in sequential code"),
            BlockReason::AtomicFuel { steps } => {
                write!(f, "atomic block still running after {steps} steps")
            }
        }
    }
}

impl From<EvalError> for BlockReason {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Unbound(x) => BlockReason::Unbound(x),
            EvalError::Op(op) => BlockReason::Type(op.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// One rule applied. `chosen` is the thread picked when the rule was
    /// `select`; the action itself does not carry it.
    Stepped {
        action: Action,
        chosen: Option<usize>,
    },
    Final,
    Blocked(BlockReason),
}

/// Applies one rule of the sequential semantics to `state`, in place.
/// A blocked step leaves the state unchanged.
pub fn step_seq(procs: &Procs, state: &mut SeqState, oracle: &mut dyn ChoiceOracle) -> StepOutcome {
    match try_step(procs, state, oracle) {
        Ok(Some((action, chosen))) => StepOutcome::Stepped { action, chosen },
        Ok(None) => StepOutcome::Final,
        Err(r) => StepOutcome::Blocked(r),
    }
}

type Stepped = Option<(Action, Option<usize>)>;

fn try_step(
    procs: &Procs,
    state: &mut SeqState,
    oracle: &mut dyn ChoiceOracle,
) -> Result<Stepped, BlockReason> {
    let Some(top) = state.stack.last() else {
        return Ok(None);
    };
    let Some(head) = top.rest.first() else {
        let ctx = state.stack.pop().expect("nonempty stack");
        return Ok(Some((Action::Return { name: ctx.proc }, None)));
    };
    let env = &top.env;

    match &head.instr {
        Instr::Assign { var, expr } => {
            let v = eval_expr(env, expr)?;
            let var = var.clone();
            let top = top_mut(state);
            top.env.insert(var, v);
            top.rest.remove(0);
            Ok(Some((Action::Tau, None)))
        }
        Instr::Write {
            base,
            offset,
            value,
        } => {
            let loc = base_location(env, base)?;
            let off = eval_expr(env, offset)?;
            let val = eval_expr(env, value)?;
            let off = check_offset(state, &loc, off)?;
            state.heap.set(&loc, off, val.clone());
            top_mut(state).rest.remove(0);
            Ok(Some((Action::Write { loc, off, val }, None)))
        }
        Instr::Read { var, base, offset } => {
            let loc = base_location(env, base)?;
            let off = eval_expr(env, offset)?;
            let off = check_offset(state, &loc, off)?;
            let val = state.heap.get(&loc, off).cloned().expect("checked offset");
            let var = var.clone();
            let top = top_mut(state);
            top.env.insert(var, val.clone());
            top.rest.remove(0);
            Ok(Some((Action::Read { loc, off, val }, None)))
        }
        Instr::While { cond, body } => {
            let taken = eval_condition(env, cond)?;
            let body = taken.then(|| body.clone());
            let top = top_mut(state);
            if let Some(body) = body {
                // head stays in place as the loop re-test
                top.rest.splice(0..0, body);
            } else {
                top.rest.remove(0);
            }
            Ok(Some((Action::Tau, None)))
        }
        Instr::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let taken = eval_condition(env, cond)?;
            let branch = if taken { then_branch } else { else_branch }.clone();
            top_mut(state).rest.splice(0..1, branch);
            Ok(Some((Action::Tau, None)))
        }
        Instr::Call { proc, args } if proc == SELECT => {
            let args = args.clone();
            let (action, t) = select(state, &args, oracle)?;
            top_mut(state).rest.remove(0);
            Ok(Some((action, Some(t))))
        }
        Instr::Call { proc, args } => {
            let callee = procs
                .get(proc)
                .ok_or_else(|| BlockReason::UndefinedProcedure(proc.clone()))?;
            if callee.params.len() != args.len() {
                return Err(BlockReason::Arity {
                    proc: proc.clone(),
                    expected: callee.params.len(),
                    found: args.len(),
                });
            }
            let vals = args
                .iter()
                .map(|a| eval_expr(env, a))
                .collect::<Result<Vec<_>, _>>()?;
            if state.stack.iter().any(|c| &c.proc == proc) {
                return Err(BlockReason::Recursion(proc.clone()));
            }
            let proc = proc.clone();
            let frame_env: Env = callee.params.iter().cloned().zip(vals.iter().cloned()).collect();
            let frame = LocalContext::new(proc.clone(), frame_env, callee.body.clone());
            top_mut(state).rest.remove(0);
            state.stack.push(frame);
            Ok(Some((
                Action::Call {
                    name: proc,
                    args: vals,
                },
                None,
            )))
        }
        Instr::Atomic { .. } => Err(BlockReason::AtomicInSequential),
    }
}

fn top_mut(state: &mut SeqState) -> &mut LocalContext {
    state.stack.last_mut().expect("nonempty stack")
}

fn base_location(env: &Env, base: &str) -> Result<Loc, BlockReason> {
    match env.get(base) {
        None => Err(BlockReason::Unbound(base.to_string())),
        Some(Value::Loc(l)) => Ok(l.clone()),
        Some(v) => Err(BlockReason::NotALocation {
            var: base.to_string(),
            found: v.kind(),
        }),
    }
}

fn check_offset(state: &SeqState, loc: &str, off: Value) -> Result<usize, BlockReason> {
    let size = state
        .heap
        .size_of(loc)
        .ok_or_else(|| BlockReason::UnknownLocation(loc.to_string()))?;
    match off.as_index() {
        Some(o) if o < size => Ok(o),
        _ => Err(BlockReason::BadOffset {
            loc: loc.to_string(),
            off,
            size,
        }),
    }
}

fn eval_condition(env: &Env, cond: &Expr) -> Result<bool, BlockReason> {
    match eval_expr(env, cond)? {
        Value::Bool(b) => Ok(b),
        v => Err(BlockReason::NonBoolCondition(v.kind())),
    }
}

/// `select(n, tid, pc)`: picks `t < n` with `pc[t] ≠ 0` and stores it in
/// `tid[0]`.
fn select(
    state: &mut SeqState,
    args: &[Expr],
    oracle: &mut dyn ChoiceOracle,
) -> Result<(Action, usize), BlockReason> {
    if args.len() != 3 {
        return Err(BlockReason::Arity {
            proc: SELECT.into(),
            expected: 3,
            found: args.len(),
        });
    }
    let env = &state.top().expect("nonempty stack").env;
    let vals = args
        .iter()
        .map(|a| eval_expr(env, a))
        .collect::<Result<Vec<_>, _>>()?;
    let count = vals[0]
        .as_index()
        .ok_or_else(|| BlockReason::Type(format!("select count {} is not a natural", vals[0])))?;
    let as_loc = |v: &Value| {
        v.as_loc()
            .map(str::to_string)
            .ok_or_else(|| BlockReason::Type(format!("select expects a location, got {v}")))
    };
    let tid_loc = as_loc(&vals[1])?;
    let pc_loc = as_loc(&vals[2])?;
    let pc = state
        .heap
        .array(&pc_loc)
        .ok_or_else(|| BlockReason::UnknownLocation(pc_loc.clone()))?;
    let candidates: Vec<usize> = (0..count)
        .filter(|&t| pc.get(t).is_some_and(|v| !v.is_zero()))
        .collect();
    if candidates.is_empty() {
        return Err(BlockReason::StuckSelect);
    }
    let t = oracle
        .choose(&candidates)
        .filter(|t| candidates.contains(t))
        .ok_or_else(|| BlockReason::OracleDeclined {
            candidates: candidates.clone(),
        })?;
    if !state.heap.set(&tid_loc, 0, Value::from(t as i64)) {
        return Err(match state.heap.size_of(&tid_loc) {
            None => BlockReason::UnknownLocation(tid_loc),
            Some(size) => BlockReason::BadOffset {
                loc: tid_loc,
                off: Value::from(0),
                size,
            },
        });
    }
    Ok((
        Action::Call {
            name: SELECT.into(),
            args: vec![vals[1].clone(), vals[2].clone()],
        },
        t,
    ))
}

/// How a bounded run stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunEnd {
    Final,
    /// Blocked before step number `step` (0-based) could be taken.
    Blocked { reason: BlockReason, step: usize },
    FuelExhausted,
}

#[derive(Debug, Clone)]
pub struct SeqRun {
    pub trace: Vec<Action>,
    /// Threads chosen by successive `select` steps; replaying them through
    /// a [`super::ScriptedOracle`] reproduces the run.
    pub choices: Vec<usize>,
    pub state: SeqState,
    pub end: RunEnd,
}

/// Runs at most `fuel` steps from `state`.
pub fn run_seq(
    procs: &Procs,
    mut state: SeqState,
    oracle: &mut dyn ChoiceOracle,
    fuel: u64,
) -> SeqRun {
    let mut trace = Vec::new();
    let mut choices = Vec::new();
    let mut steps = 0u64;
    let end = loop {
        if state.is_final() {
            break RunEnd::Final;
        }
        if steps == fuel {
            break RunEnd::FuelExhausted;
        }
        match step_seq(procs, &mut state, oracle) {
            StepOutcome::Stepped { action, chosen } => {
                trace.push(action);
                choices.extend(chosen);
            }
            StepOutcome::Final => break RunEnd::Final,
            StepOutcome::Blocked(reason) => {
                break RunEnd::Blocked {
                    reason,
                    step: trace.len(),
                }
            }
        }
        steps += 1;
    };
    SeqRun {
        trace,
        choices,
        state,
        end,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{LabeledInstr, MemorySpec, Proc, ProgramSeq};
    use crate::label::label_program;
    use crate::sem::oracle::{FirstOracle, LastOracle, NoChoice, ScriptedOracle};
    use crate::sem::state::Heap;
    use crate::value::Operator;

    fn env(pairs: &[(&str, Value)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn assign(x: &str, e: Expr) -> LabeledInstr {
        Instr::Assign {
            var: x.into(),
            expr: e,
        }
        .into()
    }

    fn program(procs: Vec<Proc>, mem: &[(&str, usize)]) -> ProgramSeq {
        label_program(ProgramSeq {
            procs: Procs::new(procs),
            memory: MemorySpec::new(mem.iter().map(|(l, s)| (l.to_string(), *s))),
        })
    }

    #[test]
    fn eval_examples() {
        let e = Expr::binary(Operator::Add, Expr::var("y"), Expr::int(1));
        assert_eq!(eval_expr(&env(&[("y", Value::from(1))]), &e), Ok(Value::from(2)));
        assert_eq!(
            eval_expr(&Env::new(), &Expr::var("x")),
            Err(EvalError::Unbound("x".into()))
        );
        let same = env(&[("p", Value::loc("l1")), ("q", Value::loc("l1"))]);
        let cmp = Expr::binary(Operator::Eq, Expr::var("p"), Expr::var("q"));
        assert_eq!(eval_expr(&same, &cmp), Ok(Value::Bool(true)));
        let bad = Expr::binary(Operator::Add, Expr::var("p"), Expr::int(1));
        assert!(matches!(eval_expr(&same, &bad), Err(EvalError::Op(_))));
    }

    #[test]
    fn assign_step() {
        let p = program(vec![Proc::new("m", vec![], vec![])], &[]);
        let mut s = SeqState {
            stack: vec![LocalContext::new(
                "m",
                env(&[("y", Value::from(1))]),
                vec![assign(
                    "x",
                    Expr::binary(Operator::Add, Expr::var("y"), Expr::int(1)),
                )],
            )],
            heap: Heap::default(),
        };
        let out = step_seq(&p.procs, &mut s, &mut NoChoice);
        assert_eq!(
            out,
            StepOutcome::Stepped {
                action: Action::Tau,
                chosen: None
            }
        );
        assert_eq!(s.stack[0].env.get("x"), Some(&Value::from(2)));
        assert!(s.stack[0].rest.is_empty());
    }

    #[test]
    fn return_pops() {
        let p = program(vec![Proc::new("m", vec![], vec![])], &[]);
        let below = LocalContext::new("main", Env::new(), vec![]);
        let mut s = SeqState {
            stack: vec![below.clone(), LocalContext::new("m", Env::new(), vec![])],
            heap: Heap::default(),
        };
        let out = step_seq(&p.procs, &mut s, &mut NoChoice);
        assert_eq!(
            out,
            StepOutcome::Stepped {
                action: Action::Return { name: "m".into() },
                chosen: None
            }
        );
        assert_eq!(s.stack, vec![below]);
    }

    fn select_state(pc: Vec<Value>) -> SeqState {
        SeqState {
            stack: vec![LocalContext::new(
                "m",
                Env::new(),
                vec![Instr::Call {
                    proc: SELECT.into(),
                    args: vec![Expr::int(pc.len() as i64), Expr::loc("ptid"), Expr::loc("pct")],
                }
                .into()],
            )],
            heap: Heap::from_cells([
                ("ptid".to_string(), vec![Value::from(7)]),
                ("pct".to_string(), pc),
            ]),
        }
    }

    #[test]
    fn select_single_candidate() {
        let p = program(vec![Proc::new("m", vec![], vec![])], &[]);
        let mut s = select_state(vec![Value::from(0), Value::from(5)]);
        let mut asked = Vec::new();
        let mut hook = |c: &[usize]| {
            asked.push(c.to_vec());
            c.first().copied()
        };
        let out = step_seq(&p.procs, &mut s, &mut hook);
        assert_eq!(asked, vec![vec![1]]);
        assert_eq!(
            out,
            StepOutcome::Stepped {
                action: Action::Call {
                    name: SELECT.into(),
                    args: vec![Value::loc("ptid"), Value::loc("pct")]
                },
                chosen: Some(1)
            }
        );
        assert_eq!(s.heap.get("ptid", 0), Some(&Value::from(1)));
    }

    #[test]
    fn select_blocks_without_candidates_or_choice() {
        let p = program(vec![Proc::new("m", vec![], vec![])], &[]);
        let mut s = select_state(vec![Value::from(0), Value::from(0)]);
        let before = s.clone();
        assert_eq!(
            step_seq(&p.procs, &mut s, &mut FirstOracle),
            StepOutcome::Blocked(BlockReason::StuckSelect)
        );
        assert_eq!(s, before);
        let mut s = select_state(vec![Value::from(3), Value::from(0)]);
        assert!(matches!(
            step_seq(&p.procs, &mut s, &mut ScriptedOracle::new([1])),
            StepOutcome::Blocked(BlockReason::OracleDeclined { .. })
        ));
    }

    #[test]
    fn write_and_read_bounds() {
        let p = program(vec![Proc::new("m", vec![], vec![])], &[("c", 1)]);
        let heap = Heap::zeroed(&p.memory);
        let mk = |instr: Instr| SeqState {
            stack: vec![LocalContext::new(
                "m",
                env(&[("p", Value::loc("c")), ("n", Value::from(3))]),
                vec![instr.into()],
            )],
            heap: heap.clone(),
        };
        let mut s = mk(Instr::Write {
            base: "p".into(),
            offset: Expr::int(0),
            value: Expr::var("n"),
        });
        assert_eq!(
            step_seq(&p.procs, &mut s, &mut NoChoice),
            StepOutcome::Stepped {
                action: Action::Write {
                    loc: "c".into(),
                    off: 0,
                    val: Value::from(3)
                },
                chosen: None
            }
        );
        assert_eq!(s.heap.get("c", 0), Some(&Value::from(3)));

        let mut s = mk(Instr::Read {
            var: "v".into(),
            base: "p".into(),
            offset: Expr::int(5),
        });
        assert!(matches!(
            step_seq(&p.procs, &mut s, &mut NoChoice),
            StepOutcome::Blocked(BlockReason::BadOffset { size: 1, .. })
        ));
        let mut s = mk(Instr::Read {
            var: "v".into(),
            base: "n".into(),
            offset: Expr::int(0),
        });
        assert!(matches!(
            step_seq(&p.procs, &mut s, &mut NoChoice),
            StepOutcome::Blocked(BlockReason::NotALocation { .. })
        ));
        let mut s = mk(Instr::Read {
            var: "v".into(),
            base: "p".into(),
            offset: Expr::int(-1),
        });
        assert!(matches!(
            step_seq(&p.procs, &mut s, &mut NoChoice),
            StepOutcome::Blocked(BlockReason::BadOffset { .. })
        ));
    }

    #[test]
    fn call_binds_params_and_forbids_recursion() {
        let f = Proc::new("f", vec!["a".into()], vec![]);
        let p = program(
            vec![
                Proc::new("main", vec![], vec![]),
                f,
                Proc::new(
                    "g",
                    vec![],
                    vec![Instr::Call {
                        proc: "g".into(),
                        args: vec![],
                    }
                    .into()],
                ),
            ],
            &[],
        );
        let mut s = SeqState {
            stack: vec![LocalContext::new(
                "main",
                Env::new(),
                vec![Instr::Call {
                    proc: "f".into(),
                    args: vec![Expr::int(4)],
                }
                .into()],
            )],
            heap: Heap::default(),
        };
        let out = step_seq(&p.procs, &mut s, &mut NoChoice);
        assert_eq!(
            out,
            StepOutcome::Stepped {
                action: Action::Call {
                    name: "f".into(),
                    args: vec![Value::from(4)]
                },
                chosen: None
            }
        );
        assert_eq!(s.stack.len(), 2);
        assert_eq!(s.stack[1].env.get("a"), Some(&Value::from(4)));
        assert!(s.stack[0].rest.is_empty());

        let g = p.procs.get("g").unwrap().clone();
        let mut s = SeqState {
            stack: vec![LocalContext::new("g", Env::new(), g.body)],
            heap: Heap::default(),
        };
        assert_eq!(
            step_seq(&p.procs, &mut s, &mut NoChoice),
            StepOutcome::Blocked(BlockReason::Recursion("g".into()))
        );
    }

    #[test]
    fn loop_and_branch_are_silent() {
        let p = program(
            vec![Proc::new(
                "m",
                vec![],
                vec![
                    assign("i", Expr::int(0)),
                    Instr::While {
                        cond: Expr::binary(Operator::Lt, Expr::var("i"), Expr::int(2)),
                        body: vec![assign(
                            "i",
                            Expr::binary(Operator::Add, Expr::var("i"), Expr::int(1)),
                        )],
                    }
                    .into(),
                    Instr::If {
                        cond: Expr::binary(Operator::Eq, Expr::var("i"), Expr::int(2)),
                        then_branch: vec![assign("r", Expr::Const(Value::Bool(true)))],
                        else_branch: vec![],
                    }
                    .into(),
                ],
            )],
            &[],
        );
        let s = SeqState::initial(&p, Heap::default()).unwrap();
        let run = run_seq(&p.procs, s, &mut NoChoice, 100);
        assert_eq!(run.end, RunEnd::Final);
        // i:=0, 2×(test, body), final test, if, r:=true, return
        assert_eq!(run.trace.len(), 9);
        assert!(run.trace[..8].iter().all(|a| *a == Action::Tau));
    }

    #[test]
    fn non_bool_condition_blocks() {
        let p = program(
            vec![Proc::new(
                "m",
                vec![],
                vec![Instr::While {
                    cond: Expr::int(1),
                    body: vec![],
                }
                .into()],
            )],
            &[],
        );
        let s = SeqState::initial(&p, Heap::default()).unwrap();
        let run = run_seq(&p.procs, s, &mut NoChoice, 10);
        assert_eq!(
            run.end,
            RunEnd::Blocked {
                reason: BlockReason::NonBoolCondition(ValueKind::Int),
                step: 0
            }
        );
    }

    #[test]
    fn run_examples() {
        let empty = program(vec![Proc::new("main", vec![], vec![])], &[]);
        let s = SeqState::initial(&empty, Heap::default()).unwrap();
        let run = run_seq(&empty.procs, s.clone(), &mut NoChoice, 10);
        assert_eq!(run.trace, vec![Action::Return { name: "main".into() }]);
        assert_eq!(run.end, RunEnd::Final);

        let run = run_seq(&empty.procs, s, &mut NoChoice, 0);
        assert!(run.trace.is_empty());
        assert_eq!(run.end, RunEnd::FuelExhausted);

        let one = program(
            vec![Proc::new("main", vec![], vec![assign("x", Expr::int(1))])],
            &[],
        );
        let s = SeqState::initial(&one, Heap::default()).unwrap();
        let run = run_seq(&one.procs, s, &mut LastOracle, 10);
        assert_eq!(
            run.trace,
            vec![Action::Tau, Action::Return { name: "main".into() }]
        );
    }
}
