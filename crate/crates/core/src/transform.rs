//! Compilation of a parallel program into the sequential program that
//! simulates all of its interleavings.
//!
//! Every instruction outside an atomic block becomes one procedure
//! `L<label>(tid)`, every procedure `m` gets a return procedure named
//! after its end label, and the `interleavings` main loop repeatedly
//! selects a thread and dispatches on its program counter.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::ast::{
    walk_code, Code, Expr, Instr, Label, LabeledInstr, MemoryDecl, MemorySpec, Name, Proc,
    ProgramPar, ProgramSeq, Procs,
};
use crate::diag::Diagnostic;
use crate::label::label_program;
use crate::value::{Loc, Operator, Value};
use crate::wf::{check_well_formed, INTERLEAVINGS, SELECT};

/// Fresh locals of generated code. `$` never occurs in user identifiers.
pub const TID: &str = "$tid";
pub const TMP: &str = "$tmp";
pub const AUX: &str = "$aux";
pub const TERMINATED: &str = "$terminated";

/// Name of the procedure simulating the instruction labeled `l`.
pub fn to_name(l: Label) -> Name {
    format!("L{}", l.0)
}

/// What the procedure dispatched at a label simulates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelRole {
    /// Assignment, conditional or loop: no observable effect.
    Silent,
    /// A single heap read or write.
    Memory,
    Atomic,
    Call { callee: Name },
    /// End label of the procedure.
    Return,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelInfo {
    pub proc: Name,
    pub role: LabelRole,
}

/// Where the simulating program keeps the state of the simulated threads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimLayout {
    #[serde(skip)]
    pub ntid: usize,
    pub pct: Loc,
    pub ptid: Loc,
    pub from: BTreeMap<Name, Loc>,
    pub simvar: BTreeMap<Name, BTreeMap<Name, Loc>>,
    /// Dispatch targets, keyed by label.
    #[serde(skip)]
    pub labels: BTreeMap<i64, LabelInfo>,
    /// Layout locations in declaration order.
    #[serde(skip)]
    pub memory: MemorySpec,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LayoutError {
    #[error("procedure `{0}` has no simulated variable `{1}`")]
    UnknownVariable(Name, Name),
    #[error("unknown procedure `{0}`")]
    UnknownProc(Name),
}

impl SimLayout {
    pub fn simvar(&self, proc: &str, var: &str) -> Result<&Loc, LayoutError> {
        self.simvar
            .get(proc)
            .and_then(|vs| vs.get(var))
            .ok_or_else(|| LayoutError::UnknownVariable(proc.into(), var.into()))
    }

    pub fn from_loc(&self, proc: &str) -> Result<&Loc, LayoutError> {
        self.from
            .get(proc)
            .ok_or_else(|| LayoutError::UnknownProc(proc.into()))
    }

    /// True for every location the layout adds to the program memory.
    pub fn is_layout_location(&self, loc: &str) -> bool {
        self.memory.contains(loc)
    }

    /// `tmp := &simvar(m,x); x := tmp[tid]`
    pub fn load(&self, proc: &str, var: &str) -> Result<Code, LayoutError> {
        Ok(load_into(self.simvar(proc, var)?, var))
    }

    /// `tmp := &simvar(m,x); tmp[tid] := e`
    pub fn store(&self, proc: &str, var: &str, e: Expr) -> Result<Code, LayoutError> {
        Ok(store_from(self.simvar(proc, var)?, e))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("layout serializes")
    }
}

fn simvar_name(proc: &str, var: &str) -> Loc {
    format!("$sim${proc}${var}")
}

fn from_name(proc: &str) -> Loc {
    format!("$from${proc}")
}

/// Allocates the simulation locations of `program` run by `ntid` threads.
/// The program must be labeled.
pub fn plan_layout(program: &ProgramPar, ntid: usize) -> SimLayout {
    let pct = "$pct".to_string();
    let ptid = "$ptid".to_string();
    let mut decls = vec![
        MemoryDecl {
            loc: pct.clone(),
            size: ntid,
        },
        MemoryDecl {
            loc: ptid.clone(),
            size: 1,
        },
    ];
    let mut from = BTreeMap::new();
    for p in &program.procs {
        let loc = from_name(&p.name);
        decls.push(MemoryDecl {
            loc: loc.clone(),
            size: ntid,
        });
        from.insert(p.name.clone(), loc);
    }
    let mut simvar = BTreeMap::new();
    for p in &program.procs {
        let mut vars = BTreeMap::new();
        for x in p.locals() {
            let loc = simvar_name(&p.name, &x);
            decls.push(MemoryDecl {
                loc: loc.clone(),
                size: ntid,
            });
            vars.insert(x, loc);
        }
        simvar.insert(p.name.clone(), vars);
    }

    let mut labels = BTreeMap::new();
    for p in &program.procs {
        for li in &p.body {
            collect_roles(&p.name, li, &mut labels);
        }
        labels.insert(
            p.end_label.0,
            LabelInfo {
                proc: p.name.clone(),
                role: LabelRole::Return,
            },
        );
    }

    SimLayout {
        ntid,
        pct,
        ptid,
        from,
        simvar,
        labels,
        memory: MemorySpec(decls),
    }
}

fn collect_roles(proc: &str, li: &LabeledInstr, out: &mut BTreeMap<i64, LabelInfo>) {
    let role = match &li.instr {
        Instr::Assign { .. } | Instr::If { .. } | Instr::While { .. } => LabelRole::Silent,
        Instr::Read { .. } | Instr::Write { .. } => LabelRole::Memory,
        Instr::Call { proc, .. } => LabelRole::Call {
            callee: proc.clone(),
        },
        Instr::Atomic { .. } => LabelRole::Atomic,
    };
    out.insert(
        li.label.0,
        LabelInfo {
            proc: proc.into(),
            role,
        },
    );
    // instructions inside an atomic block are never dispatched
    if !matches!(li.instr, Instr::Atomic { .. }) {
        for block in li.instr.blocks() {
            for inner in block {
                collect_roles(proc, inner, out);
            }
        }
    }
}

/// The simulating program together with its memory layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transformed {
    pub program: ProgramSeq,
    pub layout: SimLayout,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("program is not well formed ({} diagnostic(s))", .0.len())]
    IllFormed(Vec<Diagnostic>),
    #[error("program is not labeled")]
    Unlabeled,
}

/// Builds the simulating sequential program of a labeled, well-formed
/// parallel program run by `ntid` threads.
pub fn transform(program: &ProgramPar, ntid: usize) -> Result<Transformed, TransformError> {
    let report = check_well_formed(program, ntid);
    if !report.is_empty() {
        return Err(TransformError::IllFormed(report));
    }
    if !is_labeled(program) {
        return Err(TransformError::Unlabeled);
    }
    let layout = plan_layout(program, ntid);
    let mut c = Compiler {
        layout: &layout,
        procs: &program.procs,
        inlined: 0,
    };

    let mut instr_procs = Vec::new();
    for p in &program.procs {
        walk_dispatched(&p.body, &mut |li| instr_procs.push(c.compile_instruction(p, li)));
    }
    instr_procs.sort_by_key(|(l, _)| *l);

    let mut procs = vec![gen_interleavings(&layout, program, ntid)];
    procs.extend(instr_procs.into_iter().map(|(_, p)| p));
    procs.extend(program.procs.iter().map(|p| gen_return_proc(&layout, p)));

    let mut memory = program.memory.clone();
    memory.0.extend(layout.memory.iter().cloned());
    let program = label_program(ProgramSeq {
        procs: Procs::new(procs),
        memory,
    });
    Ok(Transformed { program, layout })
}

fn is_labeled(program: &ProgramPar) -> bool {
    program.procs.iter().all(|p| {
        let mut ok = p.end_label.is_set();
        walk_code(&p.body, &mut |li| ok &= li.label.is_set() && li.next.is_set());
        ok
    })
}

/// Visits the instructions that get their own simulating procedure: all of
/// them except those nested in an atomic block.
fn walk_dispatched<'a>(code: &'a Code, f: &mut impl FnMut(&'a LabeledInstr)) {
    for li in code {
        f(li);
        if !matches!(li.instr, Instr::Atomic { .. }) {
            for block in li.instr.blocks() {
                walk_dispatched(block, f);
            }
        }
    }
}

fn assign(var: &str, expr: Expr) -> LabeledInstr {
    Instr::Assign {
        var: var.into(),
        expr,
    }
    .into()
}

fn loc_const(loc: &str) -> Expr {
    Expr::loc(loc)
}

fn load_into(sim: &str, target: &str) -> Code {
    vec![
        assign(TMP, loc_const(sim)),
        Instr::Read {
            var: target.into(),
            base: TMP.into(),
            offset: Expr::var(TID),
        }
        .into(),
    ]
}

fn store_from(sim: &str, e: Expr) -> Code {
    vec![
        assign(TMP, loc_const(sim)),
        Instr::Write {
            base: TMP.into(),
            offset: Expr::var(TID),
            value: e,
        }
        .into(),
    ]
}

fn set_pct(layout: &SimLayout, l: Label) -> Code {
    store_from(&layout.pct, Expr::int(l.0))
}

fn first_label_or(code: &Code, fallback: Label) -> Label {
    code.first().map_or(fallback, |li| li.label)
}

/// Renaming of the locals of one inlined procedure body.
#[derive(Clone, Copy)]
struct Scope<'a> {
    proc: &'a str,
    suffix: Option<usize>,
}

impl Scope<'_> {
    fn local(&self, x: &str) -> Name {
        match self.suffix {
            Some(k) => format!("{x}#{k}"),
            None => x.to_string(),
        }
    }

    fn expr(&self, e: &Expr) -> Expr {
        match self.suffix {
            Some(_) => e.rename(&|x| self.local(x)),
            None => e.clone(),
        }
    }
}

struct Compiler<'a> {
    layout: &'a SimLayout,
    procs: &'a Procs,
    inlined: usize,
}

impl Compiler<'_> {
    /// Loads each variable once, in order of first occurrence.
    fn loads(&self, scope: Scope<'_>, vars: &[Name]) -> Code {
        let mut seen: Vec<&Name> = Vec::new();
        let mut out = Vec::new();
        for x in vars {
            if seen.contains(&x) {
                continue;
            }
            seen.push(x);
            let sim = self.layout.simvar(scope.proc, x).expect("layout covers locals");
            out.extend(load_into(sim, &scope.local(x)));
        }
        out
    }

    fn store(&self, scope: Scope<'_>, x: &str, e: Expr) -> Code {
        let sim = self.layout.simvar(scope.proc, x).expect("layout covers locals");
        store_from(sim, e)
    }

    /// Passes call arguments through the callee's parameter cells.
    fn pass_args(&self, scope: Scope<'_>, callee: &Proc, args: &[Expr]) -> Code {
        let mut vars = Vec::new();
        for a in args {
            a.collect_vars(&mut vars);
        }
        let mut out = self.loads(scope, &vars);
        for (x, a) in callee.params.iter().zip(args) {
            let sim = self.layout.simvar(&callee.name, x).expect("layout covers params");
            out.extend(store_from(sim, scope.expr(a)));
        }
        out
    }

    /// Translation of an assignment, read or write, without the program
    /// counter update.
    fn compile_basic(&self, scope: Scope<'_>, instr: &Instr) -> Code {
        match instr {
            Instr::Assign { var, expr } => {
                let mut out = self.loads(scope, &expr.vars());
                out.extend(self.store(scope, var, scope.expr(expr)));
                out
            }
            Instr::Read { var, base, offset } => {
                let mut vars = vec![base.clone()];
                offset.collect_vars(&mut vars);
                let mut out = self.loads(scope, &vars);
                out.push(
                    Instr::Read {
                        var: scope.local(var),
                        base: scope.local(base),
                        offset: scope.expr(offset),
                    }
                    .into(),
                );
                out.extend(self.store(scope, var, Expr::var(scope.local(var))));
                out
            }
            Instr::Write {
                base,
                offset,
                value,
            } => {
                let mut vars = vec![base.clone()];
                offset.collect_vars(&mut vars);
                value.collect_vars(&mut vars);
                let mut out = self.loads(scope, &vars);
                out.push(
                    Instr::Write {
                        base: scope.local(base),
                        offset: scope.expr(offset),
                        value: scope.expr(value),
                    }
                    .into(),
                );
                out
            }
            _ => unreachable!("not a basic instruction"),
        }
    }

    fn compile_instruction(&mut self, proc: &Proc, li: &LabeledInstr) -> (Label, Proc) {
        let scope = Scope {
            proc: &proc.name,
            suffix: None,
        };
        let layout = self.layout;
        let body = match &li.instr {
            Instr::Assign { .. } | Instr::Read { .. } | Instr::Write { .. } => {
                let mut out = self.compile_basic(scope, &li.instr);
                out.extend(set_pct(layout, li.next));
                out
            }
            Instr::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut out = self.loads(scope, &cond.vars());
                out.push(
                    Instr::If {
                        cond: cond.clone(),
                        then_branch: set_pct(layout, first_label_or(then_branch, li.next)),
                        else_branch: set_pct(layout, first_label_or(else_branch, li.next)),
                    }
                    .into(),
                );
                out
            }
            Instr::While { cond, body } => {
                let mut out = self.loads(scope, &cond.vars());
                out.push(
                    Instr::If {
                        cond: cond.clone(),
                        then_branch: set_pct(layout, first_label_or(body, li.label)),
                        else_branch: set_pct(layout, li.next),
                    }
                    .into(),
                );
                out
            }
            Instr::Call { proc: callee, args } => {
                let callee = self.procs.get(callee).expect("well-formed call");
                let mut out = self.pass_args(scope, callee, args);
                out.extend(store_from(
                    layout.from_loc(&callee.name).expect("layout covers procs"),
                    Expr::int(li.next.0),
                ));
                out.extend(set_pct(layout, callee.begin_label()));
                out
            }
            Instr::Atomic { body } => {
                let mut out = self.compile_atomic(scope, body);
                out.extend(set_pct(layout, li.next));
                out
            }
        };
        (li.label, Proc::new(to_name(li.label), vec![TID.into()], body))
    }

    /// Translation of code run without interleaving: no program counter
    /// updates, structure kept, calls inlined.
    fn compile_atomic(&mut self, scope: Scope<'_>, code: &Code) -> Code {
        let mut out = Vec::new();
        for li in code {
            match &li.instr {
                Instr::Assign { .. } | Instr::Read { .. } | Instr::Write { .. } => {
                    out.extend(self.compile_basic(scope, &li.instr));
                }
                Instr::If {
                    cond,
                    then_branch,
                    else_branch,
                } => {
                    out.extend(self.loads(scope, &cond.vars()));
                    let then_branch = self.compile_atomic(scope, then_branch);
                    let else_branch = self.compile_atomic(scope, else_branch);
                    out.push(
                        Instr::If {
                            cond: scope.expr(cond),
                            then_branch,
                            else_branch,
                        }
                        .into(),
                    );
                }
                Instr::While { cond, body } => {
                    let reload = self.loads(scope, &cond.vars());
                    out.extend(reload.clone());
                    let mut body = self.compile_atomic(scope, body);
                    body.extend(reload);
                    out.push(
                        Instr::While {
                            cond: scope.expr(cond),
                            body,
                        }
                        .into(),
                    );
                }
                Instr::Call { proc: callee, args } => {
                    let procs = self.procs;
                    let callee = procs.get(callee).expect("well-formed call");
                    out.extend(self.pass_args(scope, callee, args));
                    self.inlined += 1;
                    let inner = Scope {
                        proc: &callee.name,
                        suffix: Some(self.inlined),
                    };
                    out.extend(self.compile_atomic(inner, &callee.body));
                }
                // rejected by the well-formedness check
                Instr::Atomic { body } => out.extend(self.compile_atomic(scope, body)),
            }
        }
        out
    }
}

/// `L<elbl(m)>(tid) { tmp := &from(m); aux := tmp[tid]; tmp := &pct; tmp[tid] := aux }`
pub fn gen_return_proc(layout: &SimLayout, proc: &Proc) -> Proc {
    let from = layout.from_loc(&proc.name).expect("layout covers procs");
    let mut body = load_into(from, AUX);
    body.extend(store_from(&layout.pct, Expr::var(AUX)));
    Proc::new(to_name(proc.end_label), vec![TID.into()], body)
}

/// The main procedure: initialization, then the select/dispatch loop.
pub fn gen_interleavings(layout: &SimLayout, program: &ProgramPar, ntid: usize) -> Proc {
    let begin = |t: usize| {
        program
            .procs
            .get(&program.mains[t])
            .expect("well-formed mains")
    };
    let write_const = |t: usize, v: Expr| -> LabeledInstr {
        Instr::Write {
            base: TMP.into(),
            offset: Expr::int(t as i64),
            value: v,
        }
        .into()
    };

    let mut body = vec![assign(TMP, loc_const(&layout.pct))];
    for t in 0..ntid {
        body.push(write_const(t, Expr::int(begin(t).begin_label().0)));
    }
    for t in 0..ntid {
        let from = layout.from_loc(&program.mains[t]).expect("layout covers procs");
        body.push(assign(TMP, loc_const(from)));
        body.push(write_const(t, Expr::int(0)));
    }
    body.push(assign(TERMINATED, Expr::Const(Value::Bool(false))));

    let mut step = vec![Instr::Call {
        proc: SELECT.into(),
        args: vec![
            Expr::int(ntid as i64),
            loc_const(&layout.ptid),
            loc_const(&layout.pct),
        ],
    }
    .into()];
    step.push(assign(TMP, loc_const(&layout.ptid)));
    step.push(
        Instr::Read {
            var: TID.into(),
            base: TMP.into(),
            offset: Expr::int(0),
        }
        .into(),
    );
    step.extend(load_into(&layout.pct, AUX));
    if let Some(d) = dispatch(layout.labels.keys().copied()) {
        step.push(d);
    }
    step.extend(termination_scan(layout, ntid));

    body.push(
        Instr::While {
            cond: Expr::negation(Expr::var(TERMINATED)),
            body: step,
        }
        .into(),
    );
    Proc::new(INTERLEAVINGS, vec![], body)
}

/// Nested conditionals testing `aux` against each label in ascending order.
fn dispatch(labels: impl DoubleEndedIterator<Item = i64>) -> Option<LabeledInstr> {
    let mut chain: Option<LabeledInstr> = None;
    for l in labels.rev() {
        let call = Instr::Call {
            proc: to_name(Label(l)),
            args: vec![Expr::var(TID)],
        };
        chain = Some(
            Instr::If {
                cond: Expr::binary(Operator::Eq, Expr::var(AUX), Expr::int(l)),
                then_branch: vec![call.into()],
                else_branch: chain.into_iter().collect(),
            }
            .into(),
        );
    }
    chain
}

/// `terminated := true` unless some program counter is nonzero. The scan
/// counter reuses `tmp`, and `aux` holds the array then the cell.
fn termination_scan(layout: &SimLayout, ntid: usize) -> Code {
    vec![
        assign(TERMINATED, Expr::Const(Value::Bool(true))),
        assign(TMP, Expr::int(0)),
        Instr::While {
            cond: Expr::binary(Operator::Lt, Expr::var(TMP), Expr::int(ntid as i64)),
            body: vec![
                assign(AUX, loc_const(&layout.pct)),
                Instr::Read {
                    var: AUX.into(),
                    base: AUX.into(),
                    offset: Expr::var(TMP),
                }
                .into(),
                Instr::If {
                    cond: Expr::binary(Operator::Ne, Expr::var(AUX), Expr::int(0)),
                    then_branch: vec![assign(TERMINATED, Expr::Const(Value::Bool(false)))],
                    else_branch: vec![],
                }
                .into(),
                assign(
                    TMP,
                    Expr::binary(Operator::Add, Expr::var(TMP), Expr::int(1)),
                ),
            ],
        }
        .into(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sem::{run_seq, Heap, RunEnd, ScriptedOracle, SeqState};
    use crate::wf::check_well_formed_seq;

    fn par(procs: Vec<Proc>, mem: &[(&str, usize)], mains: &[&str]) -> ProgramPar {
        label_program(ProgramPar {
            procs: Procs::new(procs),
            memory: MemorySpec::new(mem.iter().map(|(l, s)| (l.to_string(), *s))),
            mains: mains.iter().map(|m| m.to_string()).collect(),
        })
    }

    fn a(x: &str, e: Expr) -> LabeledInstr {
        assign(x, e)
    }

    fn body_of<'a>(t: &'a Transformed, name: &str) -> &'a Code {
        &t.program.procs.get(name).expect("generated proc").body
    }

    /// Strips labels so generated bodies compare structurally.
    fn shape(code: &Code) -> Vec<Instr> {
        code.iter()
            .map(|li| match &li.instr {
                Instr::If {
                    cond,
                    then_branch,
                    else_branch,
                } => Instr::If {
                    cond: cond.clone(),
                    then_branch: strip(then_branch),
                    else_branch: strip(else_branch),
                },
                Instr::While { cond, body } => Instr::While {
                    cond: cond.clone(),
                    body: strip(body),
                },
                i => i.clone(),
            })
            .collect()
    }

    fn strip(code: &Code) -> Code {
        shape(code).into_iter().map(LabeledInstr::from).collect()
    }

    fn pct_update(l: i64) -> Vec<Instr> {
        shape(&store_from("$pct", Expr::int(l)))
    }

    #[test]
    fn layout_covers_params_and_locals() {
        let p = par(
            vec![Proc::new("f", vec!["a".into()], vec![a("x", Expr::var("a"))])],
            &[("c", 1)],
            &["f", "f", "f"],
        );
        let l = plan_layout(&p, 3);
        assert!(l.simvar("f", "a").is_ok());
        assert!(l.simvar("f", "x").is_ok());
        assert_eq!(l.memory.size_of(&l.pct), Some(3));
        assert_eq!(l.memory.size_of(&l.ptid), Some(1));
        assert_eq!(l.memory.size_of(l.from_loc("f").unwrap()), Some(3));
        assert_eq!(l.memory.size_of(l.simvar("f", "x").unwrap()), Some(3));
        assert!(matches!(
            l.load("f", "nope"),
            Err(LayoutError::UnknownVariable(..))
        ));
    }

    #[test]
    fn layout_locations_are_fresh() {
        let p = par(
            vec![Proc::new("f", vec![], vec![]), Proc::new("g", vec![], vec![])],
            &[("c", 1)],
            &["f", "g"],
        );
        let l = plan_layout(&p, 2);
        let mut names: Vec<&str> = l.memory.iter().map(|d| d.loc.as_str()).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
        assert!(!names.contains(&"c"));
        assert_ne!(l.from_loc("f").unwrap(), l.from_loc("g").unwrap());
    }

    #[test]
    fn load_and_store_shapes() {
        let p = par(
            vec![Proc::new("f", vec!["a".into()], vec![a("y", Expr::int(0))])],
            &[],
            &["f"],
        );
        let l = plan_layout(&p, 1);
        assert_eq!(
            shape(&l.load("f", "y").unwrap()),
            vec![
                Instr::Assign {
                    var: TMP.into(),
                    expr: Expr::loc("$sim$f$y")
                },
                Instr::Read {
                    var: "y".into(),
                    base: TMP.into(),
                    offset: Expr::var(TID)
                },
            ]
        );
        assert_eq!(shape(&l.load("f", "a").unwrap()).len(), 2);
        let e = Expr::binary(Operator::Add, Expr::var("y"), Expr::int(1));
        assert_eq!(
            shape(&l.store("f", "y", e.clone()).unwrap()),
            vec![
                Instr::Assign {
                    var: TMP.into(),
                    expr: Expr::loc("$sim$f$y")
                },
                Instr::Write {
                    base: TMP.into(),
                    offset: Expr::var(TID),
                    value: e
                },
            ]
        );
    }

    #[test]
    fn assign_translation() {
        // (x := y + 1) at label 2, next 3
        let p = par(
            vec![Proc::new(
                "m",
                vec![],
                vec![
                    a("y", Expr::int(0)),
                    a("x", Expr::binary(Operator::Add, Expr::var("y"), Expr::int(1))),
                ],
            )],
            &[],
            &["m"],
        );
        let t = transform(&p, 1).unwrap();
        let l = &t.layout;
        let mut want = shape(&l.load("m", "y").unwrap());
        want.extend(shape(
            &l.store(
                "m",
                "x",
                Expr::binary(Operator::Add, Expr::var("y"), Expr::int(1)),
            )
            .unwrap(),
        ));
        want.extend(pct_update(3));
        assert_eq!(shape(body_of(&t, "L2")), want);
    }

    #[test]
    fn empty_branches_both_go_to_next() {
        let p = par(
            vec![Proc::new(
                "m",
                vec![],
                vec![Instr::If {
                    cond: Expr::Const(Value::Bool(true)),
                    then_branch: vec![],
                    else_branch: vec![],
                }
                .into()],
            )],
            &[],
            &["m"],
        );
        let t = transform(&p, 1).unwrap();
        let body = body_of(&t, "L1");
        let Instr::If {
            then_branch,
            else_branch,
            ..
        } = &body[0].instr
        else {
            panic!("expected a conditional");
        };
        assert_eq!(shape(then_branch), pct_update(2));
        assert_eq!(shape(else_branch), pct_update(2));
    }

    #[test]
    fn empty_loop_spins_on_itself() {
        let p = par(
            vec![Proc::new(
                "m",
                vec![],
                vec![Instr::While {
                    cond: Expr::var("b"),
                    body: vec![],
                }
                .into()],
            )],
            &[],
            &["m"],
        );
        let t = transform(&p, 1).unwrap();
        let body = body_of(&t, "L1");
        let Instr::If { then_branch, .. } = &body.last().unwrap().instr else {
            panic!("expected a conditional");
        };
        assert_eq!(shape(then_branch), pct_update(1));
    }

    #[test]
    fn return_proc_shape() {
        let p = par(
            vec![Proc::new("f", vec![], vec![]), Proc::new("g", vec![], vec![])],
            &[],
            &["f", "g"],
        );
        let t = transform(&p, 2).unwrap();
        let f = p.procs.get("f").unwrap();
        let g = p.procs.get("g").unwrap();
        assert_ne!(to_name(f.end_label), to_name(g.end_label));
        let mut want = shape(&load_into("$from$f", AUX));
        want.extend(shape(&store_from("$pct", Expr::var(AUX))));
        assert_eq!(shape(body_of(&t, &to_name(f.end_label))), want);
    }

    #[test]
    fn call_passes_arguments_and_return_label() {
        let p = par(
            vec![
                Proc::new(
                    "main",
                    vec![],
                    vec![
                        Instr::Call {
                            proc: "f".into(),
                            args: vec![Expr::int(5)],
                        }
                        .into(),
                        a("z", Expr::int(0)),
                    ],
                ),
                Proc::new("f", vec!["a".into()], vec![a("x", Expr::var("a"))]),
            ],
            &[],
            &["main"],
        );
        let t = transform(&p, 1).unwrap();
        let f = p.procs.get("f").unwrap();
        let mut want = shape(&store_from("$sim$f$a", Expr::int(5)));
        want.extend(shape(&store_from("$from$f", Expr::int(2))));
        want.extend(pct_update(f.begin_label().0));
        assert_eq!(shape(body_of(&t, "L1")), want);
        assert_eq!(
            t.layout.labels[&1].role,
            LabelRole::Call {
                callee: "f".into()
            }
        );
    }

    #[test]
    fn atomic_call_is_inlined() {
        let p = par(
            vec![
                Proc::new(
                    "main",
                    vec![],
                    vec![Instr::Atomic {
                        body: vec![Instr::Call {
                            proc: "f".into(),
                            args: vec![],
                        }
                        .into()],
                    }
                    .into()],
                ),
                Proc::new("f", vec![], vec![a("x", Expr::int(1))]),
            ],
            &[],
            &["main"],
        );
        let t = transform(&p, 1).unwrap();
        let body = body_of(&t, "L1");
        let mut calls = 0;
        walk_code(body, &mut |li| calls += matches!(li.instr, Instr::Call { .. }) as usize);
        assert_eq!(calls, 0);
        let mut want = shape(&store_from("$sim$f$x", Expr::int(1)));
        want.extend(pct_update(4));
        assert_eq!(shape(body), want);
    }

    #[test]
    fn empty_atomic_only_updates_pct() {
        let p = par(
            vec![Proc::new("m", vec![], vec![Instr::Atomic { body: vec![] }.into()])],
            &[],
            &["m"],
        );
        let t = transform(&p, 1).unwrap();
        assert_eq!(shape(body_of(&t, "L1")), pct_update(2));
    }

    #[test]
    fn inlined_locals_are_renamed() {
        let p = par(
            vec![
                Proc::new(
                    "main",
                    vec![],
                    vec![
                        a("x", Expr::int(2)),
                        Instr::Atomic {
                            body: vec![Instr::Call {
                                proc: "f".into(),
                                args: vec![Expr::var("x")],
                            }
                            .into()],
                        }
                        .into(),
                    ],
                ),
                Proc::new("f", vec!["x".into()], vec![a("y", Expr::var("x"))]),
            ],
            &[],
            &["main"],
        );
        let t = transform(&p, 1).unwrap();
        let mut reads = Vec::new();
        walk_code(body_of(&t, "L2"), &mut |li| {
            if let Instr::Read { var, .. } = &li.instr {
                reads.push(var.clone());
            }
        });
        assert_eq!(reads, vec!["x".to_string(), "x#1".to_string()]);
    }

    #[test]
    fn structure_and_determinism() {
        let p = par(
            vec![Proc::new(
                "t",
                vec![],
                vec![
                    a("x", Expr::int(1)),
                    Instr::Atomic {
                        body: vec![a("y", Expr::var("x"))],
                    }
                    .into(),
                ],
            )],
            &[],
            &["t", "t"],
        );
        let t = transform(&p, 2).unwrap();
        let names: Vec<&str> = t.program.procs.iter().map(|p| p.name.as_str()).collect();
        // the atomic body's own label gets no procedure
        assert_eq!(names, vec![INTERLEAVINGS, "L1", "L2", "L4"]);
        assert!(check_well_formed_seq(&t.program).is_empty());
        assert_eq!(transform(&p, 2).unwrap(), t);
        assert_eq!(
            t.layout.to_json()["simvar"]["t"]["x"],
            serde_json::json!("$sim$t$x")
        );
    }

    #[test]
    fn rejects_bad_thread_counts() {
        let p = par(vec![Proc::new("m", vec![], vec![])], &[], &["m"]);
        assert!(matches!(transform(&p, 0), Err(TransformError::IllFormed(_))));
        assert!(matches!(transform(&p, 2), Err(TransformError::IllFormed(_))));
        let unlabeled = ProgramPar {
            procs: Procs::new(vec![Proc::new("m", vec![], vec![])]),
            memory: MemorySpec::default(),
            mains: vec!["m".into()],
        };
        assert_eq!(transform(&unlabeled, 1), Err(TransformError::Unlabeled));
    }

    #[test]
    fn empty_main_terminates_after_one_iteration() {
        let p = par(vec![Proc::new("m", vec![], vec![])], &[], &["m"]);
        let t = transform(&p, 1).unwrap();
        let s = SeqState::initial(&t.program, Heap::zeroed(&t.program.memory)).unwrap();
        let run = run_seq(&t.program.procs, s, &mut ScriptedOracle::new([0]), 10_000);
        assert_eq!(run.end, RunEnd::Final);
        assert_eq!(run.choices, vec![0]);
        assert!(run.state.heap.array("$pct").unwrap().iter().all(Value::is_zero));
    }
}
