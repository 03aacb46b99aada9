use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::ast::{
    walk_code, Code, Expr, Instr, LabeledInstr, MemorySpec, Name, Proc, Procs, Program,
    ProgramPar, ProgramSeq,
};
use crate::diag::{DiagCode, Diagnostic, Severity, SourceSpan};
use crate::label::label_program;
use crate::value::{Loc, Operator, Value};

use super::lexer::{span, tokenize, Pos, Tok, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Parallel,
    Sequential,
}

/// Source positions of a parsed program, kept beside the AST. Instructions
/// are keyed by their label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanTable {
    pub file: Option<String>,
    pub instrs: BTreeMap<i64, SourceSpan>,
    pub procs: BTreeMap<Name, SourceSpan>,
    pub memory: BTreeMap<Loc, SourceSpan>,
    pub mains: Option<SourceSpan>,
}

impl SpanTable {
    /// The most precise span for the program point a diagnostic refers to.
    pub fn locate(&self, d: &Diagnostic) -> Option<SourceSpan> {
        let at = &d.at;
        at.label
            .and_then(|l| self.instrs.get(&l.0))
            .or_else(|| at.location.as_ref().and_then(|l| self.memory.get(l)))
            .or_else(|| at.proc.as_ref().and_then(|p| self.procs.get(p)))
            .or(match d.code {
                DiagCode::NtidRange | DiagCode::UnknownMain => self.mains.as_ref(),
                _ => None,
            })
            .cloned()
    }

    /// Fills in missing spans and stamps every span with the file name.
    pub fn attach(&self, diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
        diags
            .into_iter()
            .map(|mut d| {
                if d.span.is_none() {
                    d.span = self.locate(&d);
                }
                if let Some(s) = &mut d.span {
                    s.file = self.file.clone();
                }
                d
            })
            .collect()
    }

    pub fn with_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    /// Present when no error was reported.
    pub program: Option<Program>,
    pub spans: SpanTable,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses and labels a program. Without an explicit kind, a file with a
/// `mains` block is parallel and any other file is sequential.
pub fn parse_program(text: &str, kind: Option<FileKind>) -> Parsed {
    let tokens = match tokenize(text) {
        Ok(t) => t,
        Err(d) => {
            return Parsed {
                program: None,
                spans: SpanTable::default(),
                diagnostics: vec![*d],
            }
        }
    };
    let kind = kind.unwrap_or_else(|| {
        if tokens.iter().any(|t| t.tok == Tok::Sym("mains")) {
            FileKind::Parallel
        } else {
            FileKind::Sequential
        }
    });
    let mut p = Parser {
        tokens,
        at: 0,
        kind,
        memory: MemorySpec::default(),
        instr_spans: Vec::new(),
        spans: SpanTable::default(),
        diags: Vec::new(),
    };
    let raw = match p.program() {
        Ok(raw) => raw,
        Err(d) => {
            p.diags.push(*d);
            return Parsed {
                program: None,
                spans: p.spans,
                diagnostics: p.diags,
            };
        }
    };
    let program = match (kind, raw.mains) {
        (FileKind::Parallel, Some(mains)) => Program::Par(label_program(ProgramPar {
            procs: raw.procs,
            memory: raw.memory,
            mains,
        })),
        (FileKind::Parallel, None) => {
            p.diags.push(Diagnostic::error(
                DiagCode::MissingMains,
                "a parallel program needs a `mains [...]` block",
            ));
            Program::Par(label_program(ProgramPar {
                procs: raw.procs,
                memory: raw.memory,
                mains: Vec::new(),
            }))
        }
        (FileKind::Sequential, mains) => {
            if mains.is_some() {
                let mut d = Diagnostic::error(
                    DiagCode::UnexpectedMains,
                    "a sequential program has no `mains` block",
                );
                d.span = p.spans.mains.clone();
                p.diags.push(d);
            }
            Program::Seq(label_program(ProgramSeq {
                procs: raw.procs,
                memory: raw.memory,
            }))
        }
    };
    let mut order = Vec::new();
    for proc in program.procs() {
        walk_code(&proc.body, &mut |li| order.push(li.label.0));
    }
    p.spans.instrs = order.into_iter().zip(p.instr_spans).collect();
    let ok = !p.diags.iter().any(|d| d.severity == Severity::Error);
    Parsed {
        program: ok.then_some(program),
        spans: p.spans,
        diagnostics: p.diags,
    }
}

pub fn parse_par(text: &str) -> Result<(ProgramPar, SpanTable), Vec<Diagnostic>> {
    let parsed = parse_program(text, Some(FileKind::Parallel));
    match parsed.program {
        Some(Program::Par(p)) => Ok((p, parsed.spans)),
        _ => Err(parsed.diagnostics),
    }
}

pub fn parse_seq(text: &str) -> Result<(ProgramSeq, SpanTable), Vec<Diagnostic>> {
    let parsed = parse_program(text, Some(FileKind::Sequential));
    match parsed.program {
        Some(Program::Seq(p)) => Ok((p, parsed.spans)),
        _ => Err(parsed.diagnostics),
    }
}

struct RawProgram {
    procs: Procs,
    memory: MemorySpec,
    mains: Option<Vec<Name>>,
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
    kind: FileKind,
    memory: MemorySpec,
    /// Instruction spans in pre-order, matched to labels after labeling.
    instr_spans: Vec<SourceSpan>,
    spans: SpanTable,
    diags: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Box<Diagnostic>>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.tokens[(self.at + 1).min(self.tokens.len() - 1)].tok
    }

    fn start(&self) -> Pos {
        self.tokens[self.at].start
    }

    fn last_end(&self) -> Pos {
        match self.at {
            0 => self.tokens[0].start,
            n => self.tokens[n - 1].end,
        }
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> Box<Diagnostic> {
        let t = &self.tokens[self.at];
        Box::new(
            Diagnostic::error(
                DiagCode::Syntax,
                format!("expected {expected}, found {}", t.tok.describe()),
            )
            .with_span(t.span()),
        )
    }

    fn eat(&mut self, sym: &'static str) -> bool {
        if *self.peek() == Tok::Sym(sym) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &'static str) -> PResult<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            Err(self.error_here(&format!("`{sym}`")))
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(x)
            }
            _ => Err(self.error_here("an identifier")),
        }
    }

    fn program(&mut self) -> PResult<RawProgram> {
        if *self.peek() == Tok::Sym("memory") {
            self.memory_block()?;
        }
        let mut procs = Vec::new();
        while *self.peek() == Tok::Sym("proc") {
            procs.push(self.proc()?);
        }
        let mut mains = None;
        if *self.peek() == Tok::Sym("mains") {
            let start = self.start();
            self.advance();
            self.expect("[")?;
            let mut names = vec![self.ident()?];
            while self.eat(",") {
                names.push(self.ident()?);
            }
            self.expect("]")?;
            self.spans.mains = Some(span(start, self.last_end()));
            mains = Some(names);
        }
        if *self.peek() != Tok::Eof {
            let what = if mains.is_some() {
                "end of input"
            } else {
                "`proc`, `mains` or end of input"
            };
            return Err(self.error_here(what));
        }
        Ok(RawProgram {
            procs: Procs::new(procs),
            memory: std::mem::take(&mut self.memory),
            mains,
        })
    }

    fn memory_block(&mut self) -> PResult<()> {
        self.expect("memory")?;
        self.expect("{")?;
        while let Tok::Ident(_) = self.peek() {
            let start = self.start();
            let loc = self.ident()?;
            self.expect(":")?;
            let size = match self.peek().clone() {
                Tok::Int(n) => {
                    self.advance();
                    n.to_usize().ok_or_else(|| {
                        Diagnostic::error(DiagCode::Syntax, format!("size {n} is too large"))
                            .with_span(span(start, self.last_end()))
                    })?
                }
                _ => return Err(self.error_here("a size")),
            };
            self.expect(";")?;
            let here = span(start, self.last_end());
            self.spans.memory.entry(loc.clone()).or_insert(here);
            self.memory.0.push(crate::ast::MemoryDecl { loc, size });
        }
        self.expect("}")
    }

    fn proc(&mut self) -> PResult<Proc> {
        let start = self.start();
        self.expect("proc")?;
        let name = self.ident()?;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.eat(")") {
            params.push(self.ident()?);
            while self.eat(",") {
                params.push(self.ident()?);
            }
            self.expect(")")?;
        }
        let head = span(start, self.last_end());
        let body = self.block()?;
        self.spans.procs.entry(name.clone()).or_insert(head);
        Ok(Proc::new(name, params, body))
    }

    fn block(&mut self) -> PResult<Code> {
        self.expect("{")?;
        let mut code = Vec::new();
        while !self.eat("}") {
            code.push(LabeledInstr::unlabeled(self.instr()?));
        }
        Ok(code)
    }

    fn instr(&mut self) -> PResult<Instr> {
        let start = self.start();
        let slot = self.instr_spans.len();
        self.instr_spans.push(span(start, start));
        let instr = self.instr_inner()?;
        self.instr_spans[slot] = span(start, self.last_end());
        if matches!(instr, Instr::Atomic { .. }) && self.kind == FileKind::Sequential {
            self.diags.push(
                Diagnostic::error(
                    DiagCode::AtomicInSequential,
                    "`atomic` is not part of the sequential language",
                )
                .with_span(span(start, self.last_end())),
            );
        }
        Ok(instr)
    }

    fn instr_inner(&mut self) -> PResult<Instr> {
        match self.peek().clone() {
            Tok::Sym("while") => {
                self.advance();
                let cond = self.expr()?;
                let body = self.block()?;
                Ok(Instr::While { cond, body })
            }
            Tok::Sym("if") => {
                self.advance();
                let cond = self.expr()?;
                let then_branch = self.block()?;
                let else_branch = if self.eat("else") {
                    self.block()?
                } else {
                    Vec::new()
                };
                Ok(Instr::If {
                    cond,
                    then_branch,
                    else_branch,
                })
            }
            Tok::Sym("atomic") => {
                self.advance();
                let body = self.block()?;
                Ok(Instr::Atomic { body })
            }
            Tok::Ident(x) => {
                self.advance();
                let instr = if self.eat(":=") {
                    match (self.peek().clone(), self.peek2()) {
                        (Tok::Ident(base), Tok::Sym("[")) => {
                            self.advance();
                            self.advance();
                            let offset = self.expr()?;
                            self.expect("]")?;
                            Instr::Read {
                                var: x,
                                base,
                                offset,
                            }
                        }
                        _ => Instr::Assign {
                            var: x,
                            expr: self.expr()?,
                        },
                    }
                } else if self.eat("[") {
                    let offset = self.expr()?;
                    self.expect("]")?;
                    self.expect(":=")?;
                    let value = self.expr()?;
                    Instr::Write {
                        base: x,
                        offset,
                        value,
                    }
                } else if self.eat("(") {
                    let mut args = Vec::new();
                    if !self.eat(")") {
                        args.push(self.expr()?);
                        while self.eat(",") {
                            args.push(self.expr()?);
                        }
                        self.expect(")")?;
                    }
                    Instr::Call { proc: x, args }
                } else {
                    return Err(self.error_here("`:=`, `[` or `(`"));
                };
                self.expect(";")?;
                Ok(instr)
            }
            _ => Err(self.error_here("an instruction")),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<Operator> {
        let Tok::Sym(s) = self.peek() else {
            return None;
        };
        Some(match *s {
            "+" => Operator::Add,
            "-" => Operator::Sub,
            "*" => Operator::Mul,
            "=" => Operator::Eq,
            "!=" => Operator::Ne,
            "<" => Operator::Lt,
            "<=" => Operator::Le,
            "&&" => Operator::And,
            "||" => Operator::Or,
            _ => return None,
        })
    }

    // Precedence climbing; every binary operator is left associative.
    fn binary(&mut self, min: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op().filter(|op| op.precedence() >= min) {
            self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat("!") {
            return Ok(Expr::negation(self.unary()?));
        }
        if self.eat("-") {
            if let Tok::Int(n) = self.peek().clone() {
                self.advance();
                return Ok(Expr::Const(Value::Int(-n)));
            }
            let e = self.unary()?;
            return Ok(Expr::binary(Operator::Sub, Expr::int(0), e));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.start();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(Expr::Const(Value::Int(n)))
            }
            Tok::Sym("true") => {
                self.advance();
                Ok(Expr::Const(Value::Bool(true)))
            }
            Tok::Sym("false") => {
                self.advance();
                Ok(Expr::Const(Value::Bool(false)))
            }
            Tok::Sym("&") => {
                self.advance();
                let loc = self.ident()?;
                if !self.memory.contains(&loc) {
                    self.diags.push(
                        Diagnostic::error(
                            DiagCode::UnknownLocation,
                            format!("`&{loc}` names no declared memory location"),
                        )
                        .at_location(loc.clone())
                        .with_span(span(start, self.last_end())),
                    );
                }
                Ok(Expr::loc(loc))
            }
            Tok::Ident(x) => {
                self.advance();
                Ok(Expr::Var(x))
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}
