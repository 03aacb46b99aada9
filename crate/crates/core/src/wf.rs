//! Static well-formedness checks.
//!
//! Every reported entry is an error: a program with a non-empty report is
//! rejected by the transformation and the explorer.

use std::collections::HashSet;

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;

use crate::ast::{Code, Instr, LabeledInstr, MemorySpec, Proc, ProgramPar, ProgramSeq, Procs};
use crate::diag::{DiagCode, Diagnostic};

pub const SELECT: &str = "select";
pub const INTERLEAVINGS: &str = "interleavings";

/// Procedure names that user programs may not define: the two built-in
/// names and the names of per-label simulating procedures (`L` followed by
/// digits).
pub fn is_reserved_proc_name(name: &str) -> bool {
    name == SELECT || name == INTERLEAVINGS || is_label_name(name)
}

pub fn is_label_name(name: &str) -> bool {
    name.strip_prefix('L')
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

/// Identifiers containing `$` or `#` are reserved for generated code.
pub fn is_user_identifier(name: &str) -> bool {
    !name.contains(['$', '#'])
}

/// Checks a parallel program for execution with `ntid` threads.
pub fn check_well_formed(program: &ProgramPar, ntid: usize) -> Vec<Diagnostic> {
    let mut report = Vec::new();
    check_memory(&program.memory, &mut report);
    check_procs(&program.procs, Kind::Parallel, &mut report);

    if program.mains.is_empty() {
        report.push(Diagnostic::error(
            DiagCode::MissingMains,
            "the mains list is empty",
        ));
    }
    for (t, m) in program.mains.iter().enumerate() {
        if program.procs.get(m).is_none() {
            report.push(
                Diagnostic::error(
                    DiagCode::UnknownMain,
                    format!("main of thread {t} names undefined procedure `{m}`"),
                )
                .in_proc(m.clone()),
            );
        }
    }
    if ntid == 0 || ntid > program.mains.len() {
        report.push(Diagnostic::error(
            DiagCode::NtidRange,
            format!(
                "thread count {ntid} outside 1..={} (length of mains)",
                program.mains.len()
            ),
        ));
    }
    report
}

/// Checks a sequential program; generated simulating programs must pass.
pub fn check_well_formed_seq(program: &ProgramSeq) -> Vec<Diagnostic> {
    let mut report = Vec::new();
    check_memory(&program.memory, &mut report);
    match program.main() {
        None => report.push(Diagnostic::error(
            DiagCode::EmptyProgram,
            "a sequential program needs at least a main procedure",
        )),
        Some(main) if !main.params.is_empty() => report.push(
            Diagnostic::error(
                DiagCode::MainHasParams,
                format!("main procedure `{}` must not take parameters", main.name),
            )
            .in_proc(main.name.clone()),
        ),
        Some(_) => {}
    }
    check_procs(&program.procs, Kind::Sequential, &mut report);
    report
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Parallel,
    Sequential,
}

fn check_memory(memory: &MemorySpec, report: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for d in memory.iter() {
        if d.size == 0 {
            report.push(
                Diagnostic::error(
                    DiagCode::BadMemorySize,
                    format!("location `{}` must have a positive size", d.loc),
                )
                .at_location(d.loc.clone()),
            );
        }
        if !seen.insert(d.loc.as_str()) {
            report.push(
                Diagnostic::error(
                    DiagCode::DuplicateLocation,
                    format!("location `{}` declared twice", d.loc),
                )
                .at_location(d.loc.clone()),
            );
        }
    }
}

fn check_procs(procs: &Procs, kind: Kind, report: &mut Vec<Diagnostic>) {
    let mut names = HashSet::new();
    for p in procs {
        if !names.insert(p.name.as_str()) {
            report.push(
                Diagnostic::error(
                    DiagCode::DuplicateProc,
                    format!("procedure `{}` defined twice", p.name),
                )
                .in_proc(p.name.clone()),
            );
        }
        let reserved = match kind {
            Kind::Parallel => is_reserved_proc_name(&p.name),
            Kind::Sequential => p.name == SELECT,
        };
        if reserved {
            report.push(
                Diagnostic::error(
                    DiagCode::ReservedName,
                    format!("`{}` is a reserved procedure name", p.name),
                )
                .in_proc(p.name.clone()),
            );
        }
        let mut params = HashSet::new();
        for x in &p.params {
            if !params.insert(x.as_str()) {
                report.push(
                    Diagnostic::error(
                        DiagCode::DuplicateParam,
                        format!("parameter `{x}` repeated in `{}`", p.name),
                    )
                    .in_proc(p.name.clone()),
                );
            }
        }
        if kind == Kind::Parallel {
            for x in p.locals().iter().chain(std::iter::once(&p.name)) {
                if !is_user_identifier(x) {
                    report.push(
                        Diagnostic::error(
                            DiagCode::ReservedIdentifier,
                            format!("identifier `{x}` is reserved for generated code"),
                        )
                        .in_proc(p.name.clone()),
                    );
                }
            }
        }
        check_code(procs, p, &p.body, kind, false, report);
    }
    check_cycles(procs, report);
    if kind == Kind::Parallel {
        check_atomic_calls(procs, report);
    }
}

fn check_code(
    procs: &Procs,
    owner: &Proc,
    code: &Code,
    kind: Kind,
    in_atomic: bool,
    report: &mut Vec<Diagnostic>,
) {
    for li in code {
        check_instr(procs, owner, li, kind, in_atomic, report);
    }
}

fn check_instr(
    procs: &Procs,
    owner: &Proc,
    li: &LabeledInstr,
    kind: Kind,
    in_atomic: bool,
    report: &mut Vec<Diagnostic>,
) {
    let here = |d: Diagnostic| d.in_proc(owner.name.clone()).at_label(li.label);
    match &li.instr {
        Instr::Call { proc, args } if proc == SELECT => match kind {
            Kind::Parallel => report.push(here(Diagnostic::error(
                DiagCode::SelectCall,
                "`select` cannot be called by a parallel program",
            ))),
            Kind::Sequential if args.len() != 3 => report.push(here(Diagnostic::error(
                DiagCode::ArityMismatch,
                format!("`select` takes 3 arguments, found {}", args.len()),
            ))),
            Kind::Sequential => {}
        },
        Instr::Call { proc, args } => match procs.get(proc) {
            None => report.push(here(Diagnostic::error(
                DiagCode::UndefinedProc,
                format!("call to undefined procedure `{proc}`"),
            ))),
            Some(callee) if callee.params.len() != args.len() => {
                report.push(here(Diagnostic::error(
                    DiagCode::ArityMismatch,
                    format!(
                        "`{proc}` takes {} argument(s), found {}",
                        callee.params.len(),
                        args.len()
                    ),
                )))
            }
            Some(_) => {}
        },
        Instr::Atomic { body } => {
            match kind {
                Kind::Sequential => report.push(here(Diagnostic::error(
                    DiagCode::AtomicInSequential,
                    "atomic blocks are not allowed in sequential programs",
                ))),
                Kind::Parallel if in_atomic => report.push(here(Diagnostic::error(
                    DiagCode::NestedAtomic,
                    "atomic blocks cannot be nested",
                ))),
                Kind::Parallel => {}
            }
            check_code(procs, owner, body, kind, true, report);
            return;
        }
        _ => {}
    }
    for block in li.instr.blocks() {
        check_code(procs, owner, block, kind, in_atomic, report);
    }
}

/// Rejects every cycle of the call graph, self-loops included.
fn check_cycles(procs: &Procs, report: &mut Vec<Diagnostic>) {
    let mut graph: DiGraphMap<&str, ()> = DiGraphMap::new();
    for p in procs {
        graph.add_node(p.name.as_str());
    }
    for p in procs {
        for callee in callees(&p.body) {
            if let Some(c) = procs.get(callee) {
                graph.add_edge(p.name.as_str(), c.name.as_str(), ());
            }
        }
    }
    let mut cycles: Vec<Vec<&str>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
        .map(|mut scc| {
            scc.sort_unstable();
            scc
        })
        .collect();
    cycles.sort();
    for cycle in cycles {
        report.push(
            Diagnostic::error(
                DiagCode::RecursionCycle,
                format!("recursive call cycle [{}]", cycle.join(", ")),
            )
            .in_proc(cycle[0].to_string()),
        );
    }
}

fn callees(code: &Code) -> Vec<&str> {
    let mut out = Vec::new();
    crate::ast::walk_code(code, &mut |li| {
        if let Instr::Call { proc, .. } = &li.instr {
            if proc != SELECT {
                out.push(proc.as_str());
            }
        }
    });
    out
}

/// Atomic blocks that reach another atomic block through calls are nested
/// too: the callee's block would run inside the caller's.
fn check_atomic_calls(procs: &Procs, report: &mut Vec<Diagnostic>) {
    fn contains_atomic(procs: &Procs, code: &[LabeledInstr], seen: &mut HashSet<String>) -> bool {
        code.iter().any(|li| match &li.instr {
            Instr::Atomic { .. } => true,
            Instr::Call { proc, .. } => {
                seen.insert(proc.clone())
                    && procs
                        .get(proc)
                        .is_some_and(|p| contains_atomic(procs, &p.body, seen))
            }
            other => other
                .blocks()
                .into_iter()
                .any(|b| contains_atomic(procs, b, seen)),
        })
    }
    for p in procs {
        crate::ast::walk_code(&p.body, &mut |li| {
            let Instr::Atomic { body } = &li.instr else {
                return;
            };
            let mut calls = Vec::new();
            crate::ast::walk_code(body, &mut |inner| {
                if let Instr::Call { proc, .. } = &inner.instr {
                    calls.push(proc.clone());
                }
            });
            let mut seen = HashSet::new();
            let reaches = calls.iter().any(|c| {
                seen.insert(c.clone())
                    && procs
                        .get(c)
                        .is_some_and(|callee| contains_atomic(procs, &callee.body, &mut seen))
            });
            if reaches {
                report.push(
                    Diagnostic::error(
                        DiagCode::NestedAtomic,
                        "atomic block calls a procedure containing an atomic block",
                    )
                    .in_proc(p.name.clone())
                    .at_label(li.label),
                );
            }
        });
    }
}
