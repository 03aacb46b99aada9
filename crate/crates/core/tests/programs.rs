mod common;

use seqsim::ast::{walk_code, Program};
use seqsim::diag::SourceSpan;
use seqsim::explorer::{explore_par, ExploreOptions, Safety};
use seqsim::frontend::{parse_program, parse_seq, print_par, print_seq, FileKind};
use seqsim::sem::Heap;
use seqsim::transform::transform;
use seqsim::wf::{check_well_formed, check_well_formed_seq};

#[test]
fn corpus_is_large_enough() {
    assert!(common::corpus().len() >= 10);
}

#[test]
fn corpus_programs_are_small_and_well_formed() {
    for c in common::corpus() {
        assert!(c.ntid >= 1 && c.ntid <= 3, "{}: {} threads", c.name, c.ntid);
        for p in &c.program.procs {
            let mut n = 0;
            walk_code(&p.body, &mut |_| n += 1);
            assert!(n <= 8, "{}: `{}` has {n} instructions", c.name, p.name);
        }
        let diags = check_well_formed(&c.program, c.ntid);
        assert!(diags.is_empty(), "{}: {diags:?}", c.name);
    }
}

#[test]
fn corpus_programs_are_safe_and_terminate() {
    let opts = ExploreOptions {
        depth: 64,
        ..ExploreOptions::default()
    };
    for c in common::corpus() {
        let r = explore_par(&c.program, c.ntid, Heap::zeroed(&c.program.memory), &opts).unwrap();
        assert_eq!(r.safety, Safety::Safe, "{}", c.name);
        assert!(!r.finals.is_empty(), "{}", c.name);
    }
}

#[test]
fn print_parse_round_trip_on_corpus() {
    for c in common::corpus() {
        let text = print_par(&c.program);
        let parsed = parse_program(&text, None);
        assert_eq!(parsed.program, Some(Program::Par(c.program.clone())), "{}", c.name);
        assert_eq!(print_par(&c.program), text);
    }
}

#[test]
fn transformed_corpus_round_trips_as_sequential_text() {
    for c in common::corpus() {
        let tr = transform(&c.program, c.ntid).unwrap();
        assert!(check_well_formed_seq(&tr.program).is_empty(), "{}", c.name);
        let text = print_seq(&tr.program);
        let (back, _) = parse_seq(&text).unwrap_or_else(|d| panic!("{}: {d:?}", c.name));
        assert_eq!(back, tr.program, "{}", c.name);
    }
}

#[test]
fn fig1_transform_matches_golden() {
    let c = common::corpus_program("fig1");
    let tr = transform(&c.program, 2).unwrap();
    let golden = std::fs::read_to_string(common::golden_dir().join("fig1_ntid2.seq")).unwrap();
    assert_eq!(print_seq(&tr.program), golden);
}

fn within(span: &SourceSpan, text: &str) -> bool {
    let lines: Vec<&str> = text.split('\n').collect();
    let ok = |line: u32, col: u32| {
        line >= 1
            && (line as usize) <= lines.len()
            && col >= 1
            && (col as usize) <= lines[line as usize - 1].chars().count() + 1
    };
    ok(span.start_line, span.start_col)
        && ok(span.end_line, span.end_col)
        && (span.start_line, span.start_col) <= (span.end_line, span.end_col)
}

#[test]
fn spans_lie_inside_the_source() {
    for c in common::corpus() {
        let parsed = parse_program(&c.text, None);
        let spans = &parsed.spans;
        let all = spans
            .instrs
            .values()
            .chain(spans.procs.values())
            .chain(spans.memory.values())
            .chain(spans.mains.iter());
        for s in all {
            assert!(within(s, &c.text), "{}: {s:?}", c.name);
        }
        let mut labels = Vec::new();
        for p in &c.program.procs {
            walk_code(&p.body, &mut |li| labels.push(li.label.0));
        }
        assert_eq!(spans.instrs.keys().copied().collect::<Vec<_>>(), {
            labels.sort();
            labels
        });
    }
}

#[test]
fn broken_inputs_give_spanned_diagnostics() {
    let broken = [
        "proc m() { x := 1 }",
        "proc m() { x := ; }",
        "proc m( { }",
        "memory { c: ; }",
        "proc m() { x := 1; } mains [",
        "proc m() { while { } }",
        "proc m() { x[1 := 2; }",
        "proc m() { x := 1 @ 2; }",
        "proc m() { /* unterminated",
        "",
        "proc m() { atomic { } }",
        "proc m() { x := &zz; } mains [m]",
    ];
    for text in broken {
        let r = parse_program(text, Some(FileKind::Sequential));
        if text.is_empty() {
            assert!(r.diagnostics.is_empty());
            continue;
        }
        assert!(!r.diagnostics.is_empty(), "{text:?} accepted");
        for d in &r.diagnostics {
            let s = d.span.as_ref().unwrap_or_else(|| panic!("{text:?}: {d} has no span"));
            assert!(within(s, text), "{text:?}: {s:?}");
        }
    }
}
