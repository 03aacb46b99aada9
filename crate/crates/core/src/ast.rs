//! Abstract syntax shared by parallel and sequential programs.
//!
//! A parallel program is a list of procedures, a shared memory declaration
//! and the list of per-thread main procedures. A sequential program drops the
//! mains and uses its first procedure as entry point. Instructions carry a
//! pair of labels `(label, next)` assigned by [`crate::label::label_program`].

use std::collections::HashMap;
use std::fmt;

use crate::value::{Loc, Operator, Value};

/// Name of a procedure or of a local variable.
pub type Name = String;

/// Instruction label. `0` is reserved: it marks a terminated thread in the
/// simulation and, before labeling, an instruction that has no label yet.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label(pub i64);

impl Label {
    pub const UNSET: Label = Label(0);

    pub fn is_set(self) -> bool {
        self.0 != 0
    }

    pub fn value(self) -> Value {
        Value::from(self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(Value),
    Var(Name),
    Op(Operator, Vec<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<Name>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(Value::from(n))
    }

    pub fn loc(name: impl Into<Loc>) -> Expr {
        Expr::Const(Value::Loc(name.into()))
    }

    pub fn binary(op: Operator, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Op(op, vec![lhs, rhs])
    }

    pub fn negation(e: Expr) -> Expr {
        Expr::Op(Operator::Not, vec![e])
    }

    /// Appends the variables of the expression to `out`, in order of first
    /// occurrence, skipping names already present.
    pub fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(x) => push_unique(out, x),
            Expr::Op(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    /// Renames every variable through `f`.
    pub fn rename(&self, f: &impl Fn(&str) -> Name) -> Expr {
        match self {
            Expr::Const(v) => Expr::Const(v.clone()),
            Expr::Var(x) => Expr::Var(f(x)),
            Expr::Op(op, args) => Expr::Op(*op, args.iter().map(|a| a.rename(f)).collect()),
        }
    }
}

pub(crate) fn push_unique(out: &mut Vec<Name>, x: &str) {
    if !out.iter().any(|y| y == x) {
        out.push(x.to_string());
    }
}

/// A sequence of labeled instructions.
pub type Code = Vec<LabeledInstr>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    /// `x := e`
    Assign { var: Name, expr: Expr },
    /// `x[offset] := value`, where `x` holds a location.
    Write {
        base: Name,
        offset: Expr,
        value: Expr,
    },
    /// `x := y[offset]`, where `y` holds a location.
    Read { var: Name, base: Name, offset: Expr },
    While { cond: Expr, body: Code },
    If {
        cond: Expr,
        then_branch: Code,
        else_branch: Code,
    },
    Call { proc: Name, args: Vec<Expr> },
    Atomic { body: Code },
}

impl Instr {
    /// Nested blocks of the instruction, in textual order.
    pub fn blocks(&self) -> Vec<&Code> {
        match self {
            Instr::While { body, .. } | Instr::Atomic { body } => vec![body],
            Instr::If {
                then_branch,
                else_branch,
                ..
            } => vec![then_branch, else_branch],
            _ => Vec::new(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Instr::Assign { .. } => "assign",
            Instr::Write { .. } => "write",
            Instr::Read { .. } => "read",
            Instr::While { .. } => "while",
            Instr::If { .. } => "if",
            Instr::Call { .. } => "call",
            Instr::Atomic { .. } => "atomic",
        }
    }

    /// Variables syntactically used or defined by this instruction alone
    /// (not by nested blocks), in textual order.
    pub fn own_vars(&self, out: &mut Vec<Name>) {
        match self {
            Instr::Assign { var, expr } => {
                push_unique(out, var);
                expr.collect_vars(out);
            }
            Instr::Write {
                base,
                offset,
                value,
            } => {
                push_unique(out, base);
                offset.collect_vars(out);
                value.collect_vars(out);
            }
            Instr::Read { var, base, offset } => {
                push_unique(out, var);
                push_unique(out, base);
                offset.collect_vars(out);
            }
            Instr::While { cond, .. } | Instr::If { cond, .. } => cond.collect_vars(out),
            Instr::Call { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Instr::Atomic { .. } => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledInstr {
    pub label: Label,
    pub next: Label,
    pub instr: Instr,
}

impl LabeledInstr {
    pub fn unlabeled(instr: Instr) -> Self {
        LabeledInstr {
            label: Label::UNSET,
            next: Label::UNSET,
            instr,
        }
    }
}

impl From<Instr> for LabeledInstr {
    fn from(instr: Instr) -> Self {
        LabeledInstr::unlabeled(instr)
    }
}

/// Visits every instruction of `code`, nested ones included, in pre-order.
pub fn walk_code<'a>(code: &'a Code, f: &mut impl FnMut(&'a LabeledInstr)) {
    for li in code {
        f(li);
        for block in li.instr.blocks() {
            walk_code(block, f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proc {
    pub name: Name,
    pub params: Vec<Name>,
    pub body: Code,
    /// Label of the return point. Also the begin label when the body is
    /// empty.
    pub end_label: Label,
}

impl Proc {
    pub fn new(name: impl Into<Name>, params: Vec<Name>, body: Code) -> Self {
        Proc {
            name: name.into(),
            params,
            body,
            end_label: Label::UNSET,
        }
    }

    pub fn begin_label(&self) -> Label {
        self.body.first().map_or(self.end_label, |li| li.label)
    }

    /// Parameters followed by every other variable of the body, in order of
    /// first occurrence.
    pub fn locals(&self) -> Vec<Name> {
        let mut out = Vec::new();
        for p in &self.params {
            push_unique(&mut out, p);
        }
        walk_code(&self.body, &mut |li| li.instr.own_vars(&mut out));
        out
    }
}

/// Procedure list with lookup by name.
#[derive(Debug, Clone, Default)]
pub struct Procs {
    list: Vec<Proc>,
    index: HashMap<Name, usize>,
}

impl Procs {
    /// Builds the table. On duplicate names the first definition wins for
    /// lookups; well-formedness checking reports the duplicate.
    pub fn new(list: Vec<Proc>) -> Self {
        let mut index = HashMap::with_capacity(list.len());
        for (i, p) in list.iter().enumerate() {
            index.entry(p.name.clone()).or_insert(i);
        }
        Procs { list, index }
    }

    pub fn get(&self, name: &str) -> Option<&Proc> {
        self.index.get(name).map(|&i| &self.list[i])
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Proc> {
        self.list.iter()
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn first(&self) -> Option<&Proc> {
        self.list.first()
    }

    pub fn as_slice(&self) -> &[Proc] {
        &self.list
    }

    pub fn into_vec(self) -> Vec<Proc> {
        self.list
    }

    /// Mutable access to the procedures; the index is rebuilt afterwards.
    pub fn update(&mut self, f: impl FnOnce(&mut Vec<Proc>)) {
        f(&mut self.list);
        *self = Procs::new(std::mem::take(&mut self.list));
    }
}

impl PartialEq for Procs {
    fn eq(&self, other: &Self) -> bool {
        self.list == other.list
    }
}

impl Eq for Procs {}

impl FromIterator<Proc> for Procs {
    fn from_iter<T: IntoIterator<Item = Proc>>(iter: T) -> Self {
        Procs::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Procs {
    type Item = &'a Proc;
    type IntoIter = std::slice::Iter<'a, Proc>;

    fn into_iter(self) -> Self::IntoIter {
        self.list.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemoryDecl {
    pub loc: Loc,
    pub size: usize,
}

/// Ordered list of allocated locations with their sizes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemorySpec(pub Vec<MemoryDecl>);

impl MemorySpec {
    pub fn new(decls: impl IntoIterator<Item = (Loc, usize)>) -> Self {
        MemorySpec(
            decls
                .into_iter()
                .map(|(loc, size)| MemoryDecl { loc, size })
                .collect(),
        )
    }

    pub fn size_of(&self, loc: &str) -> Option<usize> {
        self.0.iter().find(|d| d.loc == loc).map(|d| d.size)
    }

    pub fn contains(&self, loc: &str) -> bool {
        self.0.iter().any(|d| d.loc == loc)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MemoryDecl> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramPar {
    pub procs: Procs,
    pub memory: MemorySpec,
    /// Entry `t` names the main procedure of thread `t`.
    pub mains: Vec<Name>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramSeq {
    /// The first procedure is the main one.
    pub procs: Procs,
    pub memory: MemorySpec,
}

impl ProgramSeq {
    pub fn main(&self) -> Option<&Proc> {
        self.procs.first()
    }
}

/// Either kind of program, as produced by the parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Program {
    Par(ProgramPar),
    Seq(ProgramSeq),
}

impl Program {
    pub fn procs(&self) -> &Procs {
        match self {
            Program::Par(p) => &p.procs,
            Program::Seq(p) => &p.procs,
        }
    }

    pub fn memory(&self) -> &MemorySpec {
        match self {
            Program::Par(p) => &p.memory,
            Program::Seq(p) => &p.memory,
        }
    }
}
