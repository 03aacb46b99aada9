use std::fmt::Write;

use crate::ast::{Code, Expr, Instr, MemorySpec, Proc, Procs, Program, ProgramPar, ProgramSeq};
use crate::value::{Operator, Value};

const INDENT: &str = "    ";

/// Canonical text of a parallel program. Labels appear as `/*l,next*/`
/// comments; the parser ignores them and derives the same labels again.
pub fn print_par(p: &ProgramPar) -> String {
    let mut out = print_parts(&p.memory, &p.procs);
    let _ = writeln!(out, "\nmains [{}]", p.mains.join(", "));
    out
}

pub fn print_seq(p: &ProgramSeq) -> String {
    print_parts(&p.memory, &p.procs)
}

pub fn print_program(p: &Program) -> String {
    match p {
        Program::Par(p) => print_par(p),
        Program::Seq(p) => print_seq(p),
    }
}

fn print_parts(memory: &MemorySpec, procs: &Procs) -> String {
    let mut out = String::new();
    if memory.is_empty() {
        out.push_str("memory { }\n");
    } else {
        out.push_str("memory {\n");
        for d in memory.iter() {
            let _ = writeln!(out, "{INDENT}{}: {};", d.loc, d.size);
        }
        out.push_str("}\n");
    }
    for p in procs {
        out.push('\n');
        print_proc(&mut out, p);
    }
    out
}

fn print_proc(out: &mut String, p: &Proc) {
    let _ = write!(out, "proc {}({}) ", p.name, p.params.join(", "));
    print_block(out, &p.body, 0);
    out.push('\n');
}

fn print_block(out: &mut String, code: &Code, depth: usize) {
    if code.is_empty() {
        out.push_str("{ }");
        return;
    }
    out.push_str("{\n");
    for li in code {
        out.push_str(&INDENT.repeat(depth + 1));
        if li.label.is_set() {
            let _ = write!(out, "/*{},{}*/ ", li.label, li.next);
        }
        print_instr(out, &li.instr, depth + 1);
        out.push('\n');
    }
    out.push_str(&INDENT.repeat(depth));
    out.push('}');
}

fn print_instr(out: &mut String, instr: &Instr, depth: usize) {
    match instr {
        Instr::Assign { var, expr } => {
            let _ = write!(out, "{var} := {};", print_expr(expr));
        }
        Instr::Write {
            base,
            offset,
            value,
        } => {
            let _ = write!(out, "{base}[{}] := {};", print_expr(offset), print_expr(value));
        }
        Instr::Read { var, base, offset } => {
            let _ = write!(out, "{var} := {base}[{}];", print_expr(offset));
        }
        Instr::While { cond, body } => {
            let _ = write!(out, "while {} ", print_expr(cond));
            print_block(out, body, depth);
        }
        Instr::If {
            cond,
            then_branch,
            else_branch,
        } => {
            let _ = write!(out, "if {} ", print_expr(cond));
            print_block(out, then_branch, depth);
            out.push_str(" else ");
            print_block(out, else_branch, depth);
        }
        Instr::Call { proc, args } => {
            let args: Vec<_> = args.iter().map(print_expr).collect();
            let _ = write!(out, "{proc}({});", args.join(", "));
        }
        Instr::Atomic { body } => {
            out.push_str("atomic ");
            print_block(out, body, depth);
        }
    }
}

/// Text of an expression with the fewest parentheses that parse back to
/// the same tree.
pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Op(op, _) => op.precedence(),
        _ => u8::MAX,
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Const(v) => write_value(out, v),
        Expr::Var(x) => out.push_str(x),
        Expr::Op(Operator::Not, args) => {
            out.push('!');
            write_operand(out, &args[0], precedence(&args[0]) < Operator::Not.precedence());
        }
        Expr::Op(op, args) => {
            let p = op.precedence();
            write_operand(out, &args[0], precedence(&args[0]) < p);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, &args[1], precedence(&args[1]) <= p);
        }
    }
}

fn write_operand(out: &mut String, e: &Expr, parens: bool) {
    if parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_value(out: &mut String, v: &Value) {
    let _ = write!(out, "{v}");
}
