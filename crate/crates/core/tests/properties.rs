mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use common::gen;
use seqsim::ast::{walk_code, Code, Instr, Program};
use seqsim::equiv::{filter_sim_trace, initial_sim_heap, segments};
use seqsim::explorer::Simulation;
use seqsim::frontend::{parse_program, parse_seq, print_par, print_seq};
use seqsim::label::{end_label, label_program};
use seqsim::sem::{run_seq, step_seq, FirstOracle, Heap, LastOracle, ParState, SeededOracle, SeqState, StepOutcome};
use seqsim::transform::transform;
use seqsim::wf::{check_well_formed, check_well_formed_seq};

fn all_labels(program: &Program) -> Vec<i64> {
    let mut out = Vec::new();
    for p in program.procs() {
        walk_code(&p.body, &mut |li| out.push(li.label.0));
    }
    out
}

/// Checks the `next` of every instruction that has a textual successor.
fn successors_agree(code: &Code) -> bool {
    code.windows(2).all(|w| w[0].next == w[1].label)
        && code.iter().all(|li| li.instr.blocks().into_iter().all(successors_agree))
}

fn last_of_loop_bodies_go_back(code: &Code) -> bool {
    code.iter().all(|li| {
        let own = match &li.instr {
            Instr::While { body, .. } => body.last().is_none_or(|l| l.next == li.label),
            Instr::If {
                then_branch,
                else_branch,
                ..
            } => [then_branch, else_branch]
                .iter()
                .all(|b| b.last().is_none_or(|l| l.next == li.next)),
            _ => true,
        };
        own && li.instr.blocks().into_iter().all(last_of_loop_bodies_go_back)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn labels_are_unique_and_canonical(p in gen::program_par()) {
        let program = Program::Par(p.clone());
        let labels = all_labels(&program);
        let set: HashSet<i64> = labels.iter().copied().collect();
        prop_assert_eq!(set.len(), labels.len());
        prop_assert!(labels.iter().all(|l| *l >= 1));
        for proc in &p.procs {
            prop_assert!(successors_agree(&proc.body));
            prop_assert!(last_of_loop_bodies_go_back(&proc.body));
            let end = end_label(&p, &proc.name).unwrap();
            prop_assert!(!set.contains(&end.0));
            prop_assert_eq!(proc.body.last().map_or(end, |l| l.next), end);
        }
        prop_assert_eq!(label_program(p.clone()), p);
    }

    #[test]
    fn print_then_parse_is_identity(p in gen::program_par()) {
        let text = print_par(&p);
        let parsed = parse_program(&text, None);
        prop_assert_eq!(parsed.program, Some(Program::Par(p.clone())));
        prop_assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn blocked_steps_leave_the_state_alone((procs, state) in gen::seq_state()) {
        let mut s = state.clone();
        if let StepOutcome::Blocked(_) = step_seq(&procs, &mut s, &mut FirstOracle) {
            prop_assert_eq!(s, state);
        }
    }

    #[test]
    fn step_is_oracle_independent_without_select((procs, state) in gen::seq_state()) {
        let (mut a, mut b) = (state.clone(), state);
        let oa = step_seq(&procs, &mut a, &mut FirstOracle);
        let ob = step_seq(&procs, &mut b, &mut LastOracle);
        prop_assert_eq!(oa, ob);
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_programs_are_well_formed(p in gen::well_formed_par()) {
        let diags = check_well_formed(&p, p.mains.len());
        prop_assert!(diags.is_empty(), "{:?}\n{}", diags, print_par(&p));
    }

    #[test]
    fn transform_output_is_a_well_formed_sequential_program(p in gen::well_formed_par()) {
        let ntid = p.mains.len();
        let tr = transform(&p, ntid).unwrap();
        prop_assert!(check_well_formed_seq(&tr.program).is_empty());
        let (back, _) = parse_seq(&print_seq(&tr.program)).unwrap();
        prop_assert_eq!(back, tr.program);
    }

    #[test]
    fn initial_states_are_equivalent(p in gen::well_formed_par()) {
        let ntid = p.mains.len();
        let tr = transform(&p, ntid).unwrap();
        let sim = Simulation::new(&p, &tr).unwrap();
        let par0 = ParState::initial(&p, ntid, Heap::zeroed(&p.memory)).unwrap();
        prop_assert!(sim.check_init(&par0).is_ok());
    }

    #[test]
    fn trace_filtering_is_idempotent(p in gen::well_formed_par(), seed in any::<u64>()) {
        let ntid = p.mains.len();
        let tr = transform(&p, ntid).unwrap();
        let heap = initial_sim_heap(&Heap::zeroed(&p.memory), &tr.layout);
        let s0 = SeqState::initial(&tr.program, heap).unwrap();
        let run = run_seq(&tr.program.procs, s0, &mut SeededOracle::new(seed), 2_000);
        let once = filter_sim_trace(&run.trace, &tr.layout);
        prop_assert_eq!(filter_sim_trace(&once, &tr.layout), once.clone());
        prop_assert_eq!(segments(&once).1.len(), run.choices.len());
    }
}
