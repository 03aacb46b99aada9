//! Random programs and states.

use proptest::collection::{btree_map, vec};
use proptest::prelude::*;

use seqsim::ast::{Code, Expr, Instr, LabeledInstr, MemorySpec, Proc, Procs, ProgramPar};
use seqsim::label::label_program;
use seqsim::sem::{Env, Heap, LocalContext, SeqState};
use seqsim::value::{Operator, Value};

pub const VARS: &[&str] = &["x", "y", "z", "p"];
pub const PROCS: &[&str] = &["f", "g", "h"];
pub const LOCS: &[(&str, usize)] = &[("m0", 1), ("m1", 2), ("m2", 3)];

pub fn memory() -> MemorySpec {
    MemorySpec::new(LOCS.iter().map(|(l, s)| (l.to_string(), *s)))
}

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(VARS).prop_map(str::to_string)
}

pub fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        4 => (-3i64..=4).prop_map(Value::from),
        1 => any::<bool>().prop_map(Value::from),
        2 => prop::sample::select(LOCS).prop_map(|(l, _)| Value::loc(l)),
    ]
}

const BINOPS: &[Operator] = &[
    Operator::Add,
    Operator::Sub,
    Operator::Mul,
    Operator::Eq,
    Operator::Ne,
    Operator::Lt,
    Operator::Le,
    Operator::And,
    Operator::Or,
];

pub fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![value().prop_map(Expr::Const), var().prop_map(Expr::Var)];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Expr::negation),
            (prop::sample::select(BINOPS), inner.clone(), inner)
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        ]
    })
}

/// Instructions of either language; `atomic` only when `with_atomic`.
pub fn instr(with_atomic: bool) -> BoxedStrategy<Instr> {
    let simple = prop_oneof![
        (var(), expr()).prop_map(|(var, expr)| Instr::Assign { var, expr }),
        (var(), expr(), expr()).prop_map(|(base, offset, value)| Instr::Write {
            base,
            offset,
            value
        }),
        (var(), var(), expr()).prop_map(|(var, base, offset)| Instr::Read { var, base, offset }),
        (prop::sample::select(PROCS), vec(expr(), 0..3)).prop_map(|(p, args)| Instr::Call {
            proc: p.to_string(),
            args
        }),
    ];
    simple
        .prop_recursive(2, 16, 3, move |inner| {
            let block = vec(inner, 0..3).prop_map(to_code);
            let mut options = vec![
                (expr(), block.clone())
                    .prop_map(|(cond, body)| Instr::While { cond, body })
                    .boxed(),
                (expr(), block.clone(), block.clone())
                    .prop_map(|(cond, then_branch, else_branch)| Instr::If {
                        cond,
                        then_branch,
                        else_branch,
                    })
                    .boxed(),
            ];
            if with_atomic {
                options.push(block.prop_map(|body| Instr::Atomic { body }).boxed());
            }
            prop::strategy::Union::new(options)
        })
        .boxed()
}

pub fn to_code(instrs: Vec<Instr>) -> Code {
    instrs.into_iter().map(LabeledInstr::from).collect()
}

pub fn code(with_atomic: bool, max: usize) -> impl Strategy<Value = Code> {
    vec(instr(with_atomic), 0..=max).prop_map(to_code)
}

fn params() -> impl Strategy<Value = Vec<String>> {
    prop::sample::subsequence(VARS, 0..=2).prop_map(|v| v.into_iter().map(str::to_string).collect())
}

/// A labeled parallel program over `f`, `g`, `h`. It need not be well
/// formed.
pub fn program_par() -> impl Strategy<Value = ProgramPar> {
    (
        vec((params(), code(true, 4)), PROCS.len()),
        vec(prop::sample::select(PROCS), 1..=3),
    )
        .prop_map(|(bodies, mains)| {
            let procs = PROCS
                .iter()
                .zip(bodies)
                .map(|(name, (params, body))| Proc::new(*name, params, body))
                .collect();
            label_program(ProgramPar {
                procs: Procs::new(procs),
                memory: memory(),
                mains: mains.into_iter().map(str::to_string).collect(),
            })
        })
}

fn env() -> impl Strategy<Value = Env> {
    btree_map(var(), value(), 0..=VARS.len())
}

fn heap() -> impl Strategy<Value = Heap> {
    LOCS.iter()
        .map(|(l, n)| vec(value(), *n).prop_map(move |cells| (l.to_string(), cells)))
        .collect::<Vec<_>>()
        .prop_map(Heap::from_cells)
}

/// A sequential configuration without `select`: procedures `f`, `g`, `h`
/// and a stack whose frames hold arbitrary remaining code.
pub fn seq_state() -> impl Strategy<Value = (Procs, SeqState)> {
    let frame = (prop::sample::select(PROCS), env(), code(false, 3))
        .prop_map(|(p, env, rest)| LocalContext::new(p, env, rest));
    (
        vec((params(), code(false, 3)), PROCS.len()),
        vec(frame, 0..=3),
        heap(),
    )
        .prop_map(|(bodies, stack, heap)| {
            let procs = PROCS
                .iter()
                .zip(bodies)
                .map(|(name, (params, body))| Proc::new(*name, params, body))
                .collect::<Vec<_>>();
            let mut procs = Procs::new(procs);
            procs.update(|ps| seqsim::label::label_procs(ps));
            (procs, SeqState { stack, heap })
        })
}

/// A random program made well formed: calls only go to later procedures
/// with matching arity, mains take no parameters, and atomic blocks only
/// appear unnested in `f`, which nobody calls.
pub fn well_formed_par() -> impl Strategy<Value = ProgramPar> {
    program_par().prop_map(|p| {
        let mains = p.mains.clone();
        let mut procs = p.procs.into_vec();
        for proc in procs.iter_mut() {
            if mains.contains(&proc.name) {
                proc.params.clear();
            }
        }
        let params: Vec<Vec<String>> = procs.iter().map(|p| p.params.clone()).collect();
        for (i, proc) in procs.iter_mut().enumerate() {
            fix_code(&mut proc.body, i, &params, i == 0, false);
        }
        label_program(ProgramPar {
            procs: Procs::new(procs),
            memory: p.memory,
            mains,
        })
    })
}

fn fix_code(code: &mut Code, owner: usize, params: &[Vec<String>], atomic_ok: bool, in_atomic: bool) {
    for li in code.iter_mut() {
        let replacement = match &mut li.instr {
            Instr::Call { proc, args } => {
                let j = PROCS.iter().position(|p| p == proc).unwrap();
                if j > owner {
                    fix_args(args, params[j].len());
                    None
                } else if owner + 1 < PROCS.len() {
                    *proc = PROCS[owner + 1].to_string();
                    fix_args(args, params[owner + 1].len());
                    None
                } else {
                    Some(Instr::Assign {
                        var: "x".into(),
                        expr: Expr::int(0),
                    })
                }
            }
            Instr::Atomic { body } if !atomic_ok || in_atomic => {
                fix_code(body, owner, params, atomic_ok, in_atomic);
                Some(Instr::If {
                    cond: Expr::Const(Value::from(true)),
                    then_branch: std::mem::take(body),
                    else_branch: Vec::new(),
                })
            }
            Instr::Atomic { body } => {
                fix_code(body, owner, params, atomic_ok, true);
                None
            }
            Instr::While { body, .. } => {
                fix_code(body, owner, params, atomic_ok, in_atomic);
                None
            }
            Instr::If {
                then_branch,
                else_branch,
                ..
            } => {
                fix_code(then_branch, owner, params, atomic_ok, in_atomic);
                fix_code(else_branch, owner, params, atomic_ok, in_atomic);
                None
            }
            _ => None,
        };
        if let Some(i) = replacement {
            li.instr = i;
        }
    }
}

fn fix_args(args: &mut Vec<Expr>, n: usize) {
    args.truncate(n);
    while args.len() < n {
        args.push(Expr::int(0));
    }
}
