//! JavaScript bindings for the browser playground in `www/`.
//!
//! Every export takes the program text and returns a JSON document. Failures
//! are reported as `{"ok": false, "diagnostics": [...]}` rather than thrown.

use serde_json::{json, Value as Json};
use wasm_bindgen::prelude::wasm_bindgen;

use seqsim::ast::{Program, ProgramPar};
use seqsim::equiv::initial_sim_heap;
use seqsim::explorer::{explore_par, verify_transformed, ExploreOptions, VerifyOptions};
use seqsim::frontend::json::{heap_json, par_trace_json, seq_trace_json};
use seqsim::frontend::{parse_program, print_seq, FileKind};
use seqsim::sem::{
    run_par, run_seq, Heap, ParRunEnd, ParState, RunEnd, Schedule, ScriptedOracle, SeededOracle,
    SeqState, DEFAULT_ATOMIC_FUEL,
};
use seqsim::transform::{transform, Transformed};
use seqsim::wf::check_well_formed;

/// Step bound of a single run.
const RUN_FUEL: u64 = 100_000;
/// Largest exploration depth accepted from the page.
const MAX_DEPTH: u32 = 24;

fn failure(messages: Json) -> Json {
    json!({ "ok": false, "diagnostics": messages })
}

fn message(text: impl ToString) -> Json {
    failure(json!([{ "message": text.to_string() }]))
}

/// Parses and checks a parallel program for `ntid` threads.
fn load(src: &str, ntid: u32) -> Result<ProgramPar, Json> {
    let parsed = parse_program(src, Some(FileKind::Parallel));
    if !parsed.diagnostics.is_empty() {
        return Err(failure(json!(parsed.diagnostics)));
    }
    let Some(Program::Par(p)) = parsed.program else {
        return Err(message("expected a parallel program"));
    };
    let diags = parsed.spans.attach(check_well_formed(&p, ntid as usize));
    if !diags.is_empty() {
        return Err(failure(json!(diags)));
    }
    Ok(p)
}

fn load_transformed(src: &str, ntid: u32) -> Result<(ProgramPar, Transformed), Json> {
    let p = load(src, ntid)?;
    let tr = transform(&p, ntid as usize).map_err(message)?;
    Ok((p, tr))
}

fn parse_schedule(text: &str) -> Result<Option<Vec<usize>>, Json> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(None);
    }
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| message(format!("bad thread id `{s}` in schedule"))))
        .collect::<Result<_, _>>()
        .map(Some)
}

pub fn transform_json(src: &str, ntid: u32) -> Json {
    match load_transformed(src, ntid) {
        Ok((_, tr)) => json!({
            "ok": true,
            "output": print_seq(&tr.program),
            "layout": tr.layout.to_json(),
        }),
        Err(e) => e,
    }
}

/// Runs the parallel program and its sequentialization side by side. With
/// an empty `schedule` the threads are picked by a generator seeded with
/// `seed`; the sequential run then replays the same choices.
pub fn run_json(src: &str, ntid: u32, schedule: &str, seed: u32) -> Json {
    let run = || -> Result<Json, Json> {
        let (p, tr) = load_transformed(src, ntid)?;
        let script = parse_schedule(schedule)?;
        let heap = Heap::zeroed(&p.memory);
        let state = ParState::initial(&p, ntid as usize, heap.clone()).map_err(message)?;
        let mut seeded = SeededOracle::new(seed.into());
        let sched = match script {
            Some(s) => Schedule::Scripted(s),
            None => Schedule::Oracle(&mut seeded),
        };
        let par = run_par(&p.procs, state, sched, RUN_FUEL, DEFAULT_ATOMIC_FUEL);
        let par_end = match &par.end {
            ParRunEnd::Final => "final".to_string(),
            ParRunEnd::Blocked { tid, reason, step } => {
                format!("blocked: thread {tid} at step {step}: {reason}")
            }
            ParRunEnd::ScheduleExhausted => "schedule exhausted".into(),
            ParRunEnd::FuelExhausted => "fuel exhausted".into(),
            ParRunEnd::NotEnabled { tid, step } => {
                format!("thread {tid} has nothing to run at step {step}")
            }
        };

        let s0 = SeqState::initial(&tr.program, initial_sim_heap(&heap, &tr.layout))
            .map_err(message)?;
        let mut oracle = ScriptedOracle::new(par.schedule());
        let seq = run_seq(&tr.program.procs, s0, &mut oracle, RUN_FUEL);
        let seq_end = match &seq.end {
            RunEnd::Final => "final".to_string(),
            RunEnd::Blocked { reason, step } => format!("blocked at step {step}: {reason}"),
            RunEnd::FuelExhausted => "fuel exhausted".into(),
        };
        Ok(json!({
            "ok": true,
            "parallel": {
                "end": par_end,
                "schedule": par.schedule(),
                "trace": par_trace_json(&par.trace),
                "heap": heap_json(&par.state.heap),
            },
            "sequential": {
                "end": seq_end,
                "choices": seq.choices,
                "steps": seq.trace.len(),
                "trace": seq_trace_json(&seq.trace),
                "heap": heap_json(&seq.state.heap.restrict(p.memory.iter().map(|d| d.loc.as_str()))),
            },
        }))
    };
    run().unwrap_or_else(|e| e)
}

pub fn explore_json(src: &str, ntid: u32, depth: u32) -> Json {
    let p = match load(src, ntid) {
        Ok(p) => p,
        Err(e) => return e,
    };
    let depth = depth.min(MAX_DEPTH) as usize;
    let opts = ExploreOptions { depth, ..ExploreOptions::default() };
    match explore_par(&p, ntid as usize, Heap::zeroed(&p.memory), &opts) {
        Ok(r) => json!({
            "ok": true,
            "safety": r.safety,
            "depth": depth,
            "states": r.states,
            "steps": r.steps,
            "frontier": r.frontier,
            "fuel_stops": r.fuel_stops,
            "finals": r.finals.iter().map(heap_json).collect::<Vec<_>>(),
        }),
        Err(e) => message(e),
    }
}

pub fn verify_json(src: &str, ntid: u32, depth: u32) -> Json {
    let (p, tr) = match load_transformed(src, ntid) {
        Ok(x) => x,
        Err(e) => return e,
    };
    let opts = VerifyOptions { depth: depth.min(MAX_DEPTH) as usize, ..VerifyOptions::default() };
    match verify_transformed(&p, &tr, ntid as usize, Heap::zeroed(&p.memory), &opts) {
        Ok(v) => {
            let mut out = json!({ "ok": true });
            out["verdict"] = serde_json::to_value(&v).expect("verdict serializes");
            out
        }
        Err(e) => message(e),
    }
}

#[wasm_bindgen]
pub fn transform_program(src: &str, ntid: u32) -> String {
    transform_json(src, ntid).to_string()
}

#[wasm_bindgen]
pub fn run_program(src: &str, ntid: u32, schedule: &str, seed: u32) -> String {
    run_json(src, ntid, schedule, seed).to_string()
}

#[wasm_bindgen]
pub fn explore_program(src: &str, ntid: u32, depth: u32) -> String {
    explore_json(src, ntid, depth).to_string()
}

#[wasm_bindgen]
pub fn verify_program(src: &str, ntid: u32, depth: u32) -> String {
    verify_json(src, ntid, depth).to_string()
}
