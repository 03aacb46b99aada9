//! Command-line driver.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 check or verification
//! failure, 3 unsafe program, 4 bound exhausted.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::ast::{Program, ProgramPar, ProgramSeq};
use crate::diag::Diagnostic;
use crate::explorer::{explore_par, verify_program, ExploreOptions, Safety, VerifyOptions};
use crate::frontend::json::{heap_json, par_trace_json, seq_trace_json};
use crate::frontend::{parse_program, print_seq, SpanTable};
use crate::sem::{
    run_par, run_seq, ChoiceOracle, Heap, ParRunEnd, ParState, RunEnd, Schedule, ScriptedOracle,
    SeededOracle, SeqState,
};
use crate::transform::{transform, TransformError};
use crate::wf::{check_well_formed, check_well_formed_seq};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_UNSAFE: i32 = 3;
pub const EXIT_BOUND: i32 = 4;

const DEFAULT_RUN_FUEL: u64 = 100_000;

#[derive(Parser, Debug)]
#[command(
    name = "seqsim",
    version,
    about = "Sequentialize concurrent programs and check the simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Program file; `mains [...]` marks a parallel program.
    file: PathBuf,
    /// Number of threads.
    #[arg(long, default_value_t = 1)]
    ntid: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and check well-formedness.
    Check(Input),
    /// Write the simulating sequential program.
    Transform {
        #[command(flatten)]
        input: Input,
        /// Output file; standard output when absent.
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
        #[arg(long)]
        layout_json: Option<PathBuf>,
    },
    /// Run one execution.
    Run {
        #[command(flatten)]
        input: Input,
        /// Comma-separated thread ids: the scheduler of a parallel program,
        /// the `select` answers of a sequential one.
        #[arg(long, conflicts_with = "seed")]
        schedule: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_RUN_FUEL)]
        fuel: u64,
        #[arg(long)]
        trace_json: Option<PathBuf>,
    },
    /// Enumerate every schedule up to a depth.
    Explore {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = crate::explorer::DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
    },
    /// Check that the transformed program simulates the original.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = crate::explorer::DEFAULT_DEPTH)]
        depth: usize,
        /// Step bound for one iteration of the simulating loop.
        #[arg(long, default_value_t = crate::explorer::DEFAULT_ITERATION_FUEL)]
        fuel: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        json: bool,
    },
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let mut out = std::io::stdout().lock();
    let mut err = std::io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut ctx = Ctx { out, err };
    let result = match cli.command {
        Command::Check(input) => ctx.check(&input),
        Command::Transform {
            input,
            output,
            layout_json,
        } => ctx.transform(&input, output.as_deref(), layout_json.as_deref()),
        Command::Run {
            input,
            schedule,
            seed,
            fuel,
            trace_json,
        } => ctx.run(&input, schedule.as_deref(), seed, fuel, trace_json.as_deref()),
        Command::Explore {
            input,
            depth,
            jobs,
            json,
        } => ctx.explore(&input, depth, jobs, json),
        Command::Verify {
            input,
            depth,
            fuel,
            jobs,
            json,
        } => ctx.verify(&input, depth, fuel, jobs, json),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            if !msg.is_empty() {
                let _ = writeln!(ctx.err, "error: {msg}");
            }
            code
        }
    }
}

struct Failure(i32, String);

type CliResult = Result<i32, Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure(EXIT_USAGE, format!("{}: {e}", path.display()))
}

struct Ctx<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn report(&mut self, diags: &[Diagnostic]) {
        for d in diags {
            let _ = writeln!(self.err, "{d}");
        }
    }

    fn load(&mut self, file: &Path) -> Result<(Program, SpanTable), Failure> {
        let text = std::fs::read_to_string(file).map_err(|e| io_failure(file, e))?;
        let parsed = parse_program(&text, None);
        let spans = parsed.spans.with_file(file.display().to_string());
        let diags = spans.attach(parsed.diagnostics);
        self.report(&diags);
        match parsed.program {
            Some(p) => Ok((p, spans)),
            None => Err(Failure(EXIT_USAGE, String::new())),
        }
    }

    fn load_checked(&mut self, input: &Input) -> Result<Program, Failure> {
        let (program, spans) = self.load(&input.file)?;
        let diags = match &program {
            Program::Par(p) => check_well_formed(p, input.ntid),
            Program::Seq(p) => check_well_formed_seq(p),
        };
        if !diags.is_empty() {
            self.report(&spans.attach(diags));
            return Err(Failure(EXIT_CHECK, String::new()));
        }
        Ok(program)
    }

    fn load_par(&mut self, input: &Input) -> Result<ProgramPar, Failure> {
        match self.load_checked(input)? {
            Program::Par(p) => Ok(p),
            Program::Seq(_) => Err(Failure(
                EXIT_USAGE,
                format!("{}: a parallel program is required", input.file.display()),
            )),
        }
    }

    fn write_file(&mut self, path: &Path, text: &str) -> Result<(), Failure> {
        std::fs::write(path, text).map_err(|e| io_failure(path, e))
    }

    fn check(&mut self, input: &Input) -> CliResult {
        let program = self.load_checked(input)?;
        let (kind, procs) = match &program {
            Program::Par(_) => ("parallel", program.procs().len()),
            Program::Seq(_) => ("sequential", program.procs().len()),
        };
        let _ = writeln!(self.out, "ok: {kind} program, {procs} procedures");
        Ok(EXIT_OK)
    }

    fn transform(&mut self, input: &Input, output: Option<&Path>, layout: Option<&Path>) -> CliResult {
        let program = self.load_par(input)?;
        let tr = match transform(&program, input.ntid) {
            Ok(tr) => tr,
            Err(TransformError::IllFormed(diags)) => {
                self.report(&diags);
                return Err(Failure(EXIT_CHECK, String::new()));
            }
            Err(e) => return Err(Failure(EXIT_CHECK, e.to_string())),
        };
        let text = print_seq(&tr.program);
        match output {
            Some(path) => self.write_file(path, &text)?,
            None => {
                let _ = self.out.write_all(text.as_bytes());
            }
        }
        if let Some(path) = layout {
            let json = pretty(&tr.layout.to_json());
            self.write_file(path, &json)?;
        }
        Ok(EXIT_OK)
    }

    fn run(
        &mut self,
        input: &Input,
        schedule: Option<&str>,
        seed: Option<u64>,
        fuel: u64,
        trace_json: Option<&Path>,
    ) -> CliResult {
        let script = schedule.map(parse_schedule).transpose()?;
        if script.is_none() && seed.is_none() {
            return Err(Failure(EXIT_USAGE, "either --schedule or --seed is required".into()));
        }
        match self.load_checked(input)? {
            Program::Par(p) => self.run_par(&p, input.ntid, script, seed, fuel, trace_json),
            Program::Seq(p) => self.run_seq(&p, script, seed, fuel, trace_json),
        }
    }

    fn run_par(
        &mut self,
        program: &ProgramPar,
        ntid: usize,
        script: Option<Vec<usize>>,
        seed: Option<u64>,
        fuel: u64,
        trace_json: Option<&Path>,
    ) -> CliResult {
        let state = ParState::initial(program, ntid, Heap::zeroed(&program.memory))
            .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
        let mut oracle = SeededOracle::new(seed.unwrap_or(0));
        let schedule = match script {
            Some(s) => Schedule::Scripted(s),
            None => Schedule::Oracle(&mut oracle),
        };
        let run = run_par(&program.procs, state, schedule, fuel, crate::sem::DEFAULT_ATOMIC_FUEL);
        for ev in &run.trace {
            let _ = writeln!(self.out, "{ev}");
        }
        let _ = writeln!(self.out, "heap: {}", run.state.heap);
        if let Some(path) = trace_json {
            self.write_file(path, &pretty(&par_trace_json(&run.trace)))?;
        }
        let (status, code) = match &run.end {
            ParRunEnd::Final => ("final".to_string(), EXIT_OK),
            ParRunEnd::Blocked { tid, reason, step } => {
                (format!("blocked: thread {tid} at step {step}: {reason}"), EXIT_UNSAFE)
            }
            ParRunEnd::ScheduleExhausted => ("schedule exhausted".into(), EXIT_BOUND),
            ParRunEnd::FuelExhausted => ("fuel exhausted".into(), EXIT_BOUND),
            ParRunEnd::NotEnabled { tid, step } => {
                (format!("thread {tid} has nothing to run at step {step}"), EXIT_USAGE)
            }
        };
        let _ = writeln!(self.out, "end: {status}");
        Ok(code)
    }

    fn run_seq(
        &mut self,
        program: &ProgramSeq,
        script: Option<Vec<usize>>,
        seed: Option<u64>,
        fuel: u64,
        trace_json: Option<&Path>,
    ) -> CliResult {
        let state = SeqState::initial(program, Heap::zeroed(&program.memory))
            .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
        let mut scripted;
        let mut seeded;
        let oracle: &mut dyn ChoiceOracle = match script {
            Some(s) => {
                scripted = ScriptedOracle::new(s);
                &mut scripted
            }
            None => {
                seeded = SeededOracle::new(seed.unwrap_or(0));
                &mut seeded
            }
        };
        let run = run_seq(&program.procs, state, oracle, fuel);
        for a in &run.trace {
            let _ = writeln!(self.out, "{a}");
        }
        let _ = writeln!(self.out, "heap: {}", run.state.heap);
        if let Some(path) = trace_json {
            self.write_file(path, &pretty(&seq_trace_json(&run.trace)))?;
        }
        let (status, code) = match &run.end {
            RunEnd::Final => ("final".to_string(), EXIT_OK),
            RunEnd::Blocked { reason, step } => (format!("blocked at step {step}: {reason}"), EXIT_UNSAFE),
            RunEnd::FuelExhausted => ("fuel exhausted".into(), EXIT_BOUND),
        };
        let _ = writeln!(self.out, "end: {status}");
        Ok(code)
    }

    fn explore(&mut self, input: &Input, depth: usize, jobs: usize, json: bool) -> CliResult {
        let program = self.load_par(input)?;
        let opts = ExploreOptions {
            depth,
            jobs,
            ..ExploreOptions::default()
        };
        let r = explore_par(&program, input.ntid, Heap::zeroed(&program.memory), &opts)
            .map_err(|e| Failure(EXIT_USAGE, e.to_string()))?;
        if json {
            let finals: Vec<_> = r.finals.iter().map(heap_json).collect();
            let v = json!({
                "safety": r.safety,
                "depth": depth,
                "states": r.states,
                "steps": r.steps,
                "frontier": r.frontier,
                "fuel_stops": r.fuel_stops,
                "finals": finals,
            });
            let _ = writeln!(self.out, "{}", pretty(&v));
        } else {
            let verdict = match &r.safety {
                Safety::Safe => "safe".to_string(),
                Safety::Unknown => format!("no blocking state within depth {depth}"),
                Safety::Unsafe { witness } => format!(
                    "unsafe: thread {} blocks after schedule {:?}: {}",
                    witness.tid, witness.schedule, witness.reason
                ),
            };
            let _ = writeln!(self.out, "{verdict}");
            let _ = writeln!(
                self.out,
                "states: {}, steps: {}, frontier: {}",
                r.states, r.steps, r.frontier
            );
            for h in &r.finals {
                let _ = writeln!(self.out, "final: {h}");
            }
        }
        Ok(match r.safety {
            Safety::Safe => EXIT_OK,
            Safety::Unsafe { .. } => EXIT_UNSAFE,
            Safety::Unknown => EXIT_BOUND,
        })
    }

    fn verify(&mut self, input: &Input, depth: usize, fuel: u64, jobs: usize, json: bool) -> CliResult {
        let program = self.load_par(input)?;
        let opts = VerifyOptions {
            depth,
            iteration_fuel: fuel,
            jobs,
            ..VerifyOptions::default()
        };
        let verdict = verify_program(&program, input.ntid, Heap::zeroed(&program.memory), &opts)
            .map_err(|e| Failure(EXIT_CHECK, e.to_string()))?;
        if json {
            let v = serde_json::to_value(&verdict).expect("verdict serializes");
            let _ = writeln!(self.out, "{}", pretty(&v));
        } else {
            let _ = writeln!(
                self.out,
                "status: {}",
                serde_json::to_value(verdict.status).expect("status serializes").as_str().unwrap_or("?")
            );
            let _ = writeln!(
                self.out,
                "init: {}, forward: {}/{} failed, backward: {}/{} failed, pairs: {}",
                if verdict.init { "ok" } else { "failed" },
                verdict.forward.failed,
                verdict.forward.checked,
                verdict.backward.failed,
                verdict.backward.checked,
                verdict.pairs
            );
            if let Some(w) = &verdict.unsafe_witness {
                let _ = writeln!(
                    self.out,
                    "unsafe: thread {} blocks after schedule {:?}: {}",
                    w.tid, w.schedule, w.reason
                );
            }
            for c in &verdict.counterexamples {
                let text = serde_json::to_string(c).expect("counterexample serializes");
                let _ = writeln!(self.out, "counterexample: {text}");
            }
        }
        Ok(verdict.status.exit_code())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value serializes");
    s.push('\n');
    s
}

fn parse_schedule(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| Failure(EXIT_USAGE, format!("bad thread id `{x}` in schedule")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("0, 1,0").ok(), Some(vec![0, 1, 0]));
        assert_eq!(parse_schedule("").ok(), Some(vec![]));
        assert!(parse_schedule("0,x").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["seqsim", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["seqsim", "--help"], &mut out, &mut err), EXIT_OK);
    }
}
