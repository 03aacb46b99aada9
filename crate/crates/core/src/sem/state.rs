use std::collections::BTreeMap;
use std::fmt;

use crate::ast::{Code, MemorySpec, Name, ProgramPar, ProgramSeq};
use crate::value::{Loc, Value};

/// Local environment: a partial map from variables to values.
pub type Env = BTreeMap<Name, Value>;

/// The shared memory: each defined location maps to an array of fixed
/// length, indexed from 0. Locations are never allocated or freed while a
/// program runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Heap(BTreeMap<Loc, Vec<Value>>);

impl Heap {
    /// Every declared cell set to the integer 0.
    pub fn zeroed(memory: &MemorySpec) -> Heap {
        Heap::filled(memory, &Value::from(0))
    }

    pub fn filled(memory: &MemorySpec, v: &Value) -> Heap {
        Heap(
            memory
                .iter()
                .map(|d| (d.loc.clone(), vec![v.clone(); d.size]))
                .collect(),
        )
    }

    pub fn from_cells(cells: impl IntoIterator<Item = (Loc, Vec<Value>)>) -> Heap {
        Heap(cells.into_iter().collect())
    }

    pub fn get(&self, loc: &str, off: usize) -> Option<&Value> {
        self.0.get(loc).and_then(|a| a.get(off))
    }

    pub fn array(&self, loc: &str) -> Option<&[Value]> {
        self.0.get(loc).map(Vec::as_slice)
    }

    pub fn size_of(&self, loc: &str) -> Option<usize> {
        self.0.get(loc).map(Vec::len)
    }

    /// Overwrites one cell. Returns `false`, leaving the heap untouched,
    /// when the cell is not allocated.
    pub fn set(&mut self, loc: &str, off: usize, v: Value) -> bool {
        match self.0.get_mut(loc).and_then(|a| a.get_mut(off)) {
            Some(cell) => {
                *cell = v;
                true
            }
            None => false,
        }
    }

    pub fn locations(&self) -> impl Iterator<Item = &Loc> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Loc, &Vec<Value>)> {
        self.0.iter()
    }

    pub fn contains(&self, loc: &str) -> bool {
        self.0.contains_key(loc)
    }

    /// The sub-heap made of the given locations.
    pub fn restrict<'a>(&self, locs: impl IntoIterator<Item = &'a str>) -> Heap {
        Heap(
            locs.into_iter()
                .filter_map(|l| self.0.get_key_value(l))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }

    /// Union of two heaps over disjoint domains; `other` wins on overlap.
    pub fn extend(&mut self, other: Heap) {
        self.0.extend(other.0);
    }

    /// Checks the initial-heap constraints against a memory declaration:
    /// exactly the declared locations, each with its declared size, holding
    /// no location values.
    pub fn check_initial(&self, memory: &MemorySpec) -> Result<(), InitError> {
        for d in memory.iter() {
            match self.0.get(&d.loc) {
                None => return Err(InitError::MissingLocation(d.loc.clone())),
                Some(a) if a.len() != d.size => {
                    return Err(InitError::WrongSize {
                        loc: d.loc.clone(),
                        declared: d.size,
                        found: a.len(),
                    })
                }
                Some(a) => {
                    if let Some(off) = a.iter().position(|v| matches!(v, Value::Loc(_))) {
                        return Err(InitError::LocationValue {
                            loc: d.loc.clone(),
                            off,
                        });
                    }
                }
            }
        }
        if let Some(extra) = self.0.keys().find(|l| !memory.contains(l)) {
            return Err(InitError::UndeclaredLocation(extra.clone()));
        }
        Ok(())
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (loc, cells)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{loc}=[")?;
            for (j, v) in cells.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InitError {
    #[error("declared location `{0}` is missing from the initial heap")]
    MissingLocation(Loc),
    #[error("location `{loc}` has {found} cells, declared {declared}")]
    WrongSize {
        loc: Loc,
        declared: usize,
        found: usize,
    },
    #[error("initial heap holds a location value at `{loc}[{off}]`")]
    LocationValue { loc: Loc, off: usize },
    #[error("initial heap defines undeclared location `{0}`")]
    UndeclaredLocation(Loc),
    #[error("unknown procedure `{0}`")]
    UnknownProc(Name),
    #[error("thread count {ntid} outside 1..={mains}")]
    ThreadCount { ntid: usize, mains: usize },
}

/// A procedure activation: its name, its environment and the code that
/// remains to run (head first).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalContext {
    pub proc: Name,
    pub env: Env,
    pub rest: Code,
}

impl LocalContext {
    pub fn new(proc: impl Into<Name>, env: Env, rest: Code) -> Self {
        LocalContext {
            proc: proc.into(),
            env,
            rest,
        }
    }
}

/// Configuration of a sequential program. The call stack is stored bottom
/// first: the running context is the last element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeqState {
    pub stack: Vec<LocalContext>,
    pub heap: Heap,
}

impl SeqState {
    /// The initial state `[(main, ∅, body(main))]` over `heap`.
    pub fn initial(program: &ProgramSeq, heap: Heap) -> Result<SeqState, InitError> {
        heap.check_initial(&program.memory)?;
        let main = program
            .main()
            .ok_or_else(|| InitError::UnknownProc("<main>".into()))?;
        Ok(SeqState {
            stack: vec![LocalContext::new(main.name.clone(), Env::new(), main.body.clone())],
            heap,
        })
    }

    pub fn is_final(&self) -> bool {
        self.stack.is_empty()
    }

    pub fn top(&self) -> Option<&LocalContext> {
        self.stack.last()
    }
}

/// Configuration of a parallel program: one call stack per thread (bottom
/// first, as in [`SeqState`]) over a shared heap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParState {
    pub stacks: Vec<Vec<LocalContext>>,
    pub heap: Heap,
}

impl ParState {
    /// Every thread `t < ntid` starts with `[(mains t, ∅, body(mains t))]`.
    pub fn initial(program: &ProgramPar, ntid: usize, heap: Heap) -> Result<ParState, InitError> {
        if ntid == 0 || ntid > program.mains.len() {
            return Err(InitError::ThreadCount {
                ntid,
                mains: program.mains.len(),
            });
        }
        heap.check_initial(&program.memory)?;
        let stacks = program.mains[..ntid]
            .iter()
            .map(|m| {
                let p = program
                    .procs
                    .get(m)
                    .ok_or_else(|| InitError::UnknownProc(m.clone()))?;
                Ok(vec![LocalContext::new(m.clone(), Env::new(), p.body.clone())])
            })
            .collect::<Result<_, InitError>>()?;
        Ok(ParState { stacks, heap })
    }

    pub fn ntid(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_final(&self) -> bool {
        self.stacks.iter().all(Vec::is_empty)
    }
}

/// Observable action of one sequential step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    Tau,
    Call { name: Name, args: Vec<Value> },
    Return { name: Name },
    Read { loc: Loc, off: usize, val: Value },
    Write { loc: Loc, off: usize, val: Value },
}

impl Action {
    pub fn is_memory(&self) -> bool {
        matches!(self, Action::Read { .. } | Action::Write { .. })
    }

    pub fn mem_loc(&self) -> Option<&str> {
        match self {
            Action::Read { loc, .. } | Action::Write { loc, .. } => Some(loc),
            _ => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Tau => f.write_str("tau"),
            Action::Call { name, args } => {
                write!(f, "call {name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Action::Return { name } => write!(f, "return {name}"),
            Action::Read { loc, off, val } => write!(f, "read {loc}[{off}] = {val}"),
            Action::Write { loc, off, val } => write!(f, "write {loc}[{off}] := {val}"),
        }
    }
}
