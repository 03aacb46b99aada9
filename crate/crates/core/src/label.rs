//! Instruction labeling.
//!
//! Labels are allocated densely from 1 in pre-order over the procedures in
//! declaration order; the return labels of the procedures come after every
//! instruction label. The `next` label of an instruction is the label of its
//! textual successor. The last instruction of a conditional branch continues
//! with the successor of the conditional, the last instruction of a loop
//! body with the loop itself, and the last instruction of a procedure body
//! with the procedure's return label.

use crate::ast::{Code, Instr, Label, Proc, ProgramPar, ProgramSeq, Program, Procs};

/// Common access to the procedures of either program kind.
pub trait HasProcs {
    fn procs(&self) -> &Procs;
    fn procs_mut(&mut self) -> &mut Procs;
}

impl HasProcs for ProgramPar {
    fn procs(&self) -> &Procs {
        &self.procs
    }
    fn procs_mut(&mut self) -> &mut Procs {
        &mut self.procs
    }
}

impl HasProcs for ProgramSeq {
    fn procs(&self) -> &Procs {
        &self.procs
    }
    fn procs_mut(&mut self) -> &mut Procs {
        &mut self.procs
    }
}

impl HasProcs for Program {
    fn procs(&self) -> &Procs {
        Program::procs(self)
    }
    fn procs_mut(&mut self) -> &mut Procs {
        match self {
            Program::Par(p) => &mut p.procs,
            Program::Seq(p) => &mut p.procs,
        }
    }
}

/// Assigns canonical labels to every instruction and return point.
/// Existing labels are overwritten, so labeling is idempotent.
pub fn label_program<P: HasProcs>(mut program: P) -> P {
    program.procs_mut().update(|procs| label_procs(procs));
    program
}

pub fn label_procs(procs: &mut [Proc]) {
    let mut counter = 1i64;
    for p in procs.iter_mut() {
        number(&mut p.body, &mut counter);
    }
    for p in procs.iter_mut() {
        p.end_label = Label(counter);
        counter += 1;
    }
    for p in procs.iter_mut() {
        link(&mut p.body, p.end_label);
    }
}

fn number(code: &mut Code, counter: &mut i64) {
    for li in code {
        li.label = Label(*counter);
        *counter += 1;
        match &mut li.instr {
            Instr::While { body, .. } | Instr::Atomic { body } => number(body, counter),
            Instr::If {
                then_branch,
                else_branch,
                ..
            } => {
                number(then_branch, counter);
                number(else_branch, counter);
            }
            _ => {}
        }
    }
}

fn link(code: &mut Code, follow: Label) {
    let heads: Vec<Label> = code.iter().map(|li| li.label).collect();
    for (i, li) in code.iter_mut().enumerate() {
        let next = heads.get(i + 1).copied().unwrap_or(follow);
        li.next = next;
        let own = li.label;
        match &mut li.instr {
            Instr::While { body, .. } => link(body, own),
            Instr::Atomic { body } => link(body, next),
            Instr::If {
                then_branch,
                else_branch,
                ..
            } => {
                link(then_branch, next);
                link(else_branch, next);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown procedure `{0}`")]
pub struct UnknownProc(pub String);

/// Label of the first instruction of `name`, or its return label when the
/// body is empty.
pub fn begin_label(program: &impl HasProcs, name: &str) -> Result<Label, UnknownProc> {
    program
        .procs()
        .get(name)
        .map(Proc::begin_label)
        .ok_or_else(|| UnknownProc(name.to_string()))
}

/// Return label of `name`.
pub fn end_label(program: &impl HasProcs, name: &str) -> Result<Label, UnknownProc> {
    program
        .procs()
        .get(name)
        .map(|p| p.end_label)
        .ok_or_else(|| UnknownProc(name.to_string()))
}
