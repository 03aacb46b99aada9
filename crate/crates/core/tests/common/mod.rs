#![allow(dead_code)]

pub mod gen;

use std::path::{Path, PathBuf};

use seqsim::ast::ProgramPar;
use seqsim::frontend::parse_par;

pub struct CorpusProgram {
    pub name: String,
    pub path: PathBuf,
    pub text: String,
    pub program: ProgramPar,
    /// Every main runs.
    pub ntid: usize,
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("corpus")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub fn load(path: &Path) -> CorpusProgram {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let (program, _) =
        parse_par(&text).unwrap_or_else(|d| panic!("{}: {d:?}", path.display()));
    CorpusProgram {
        name: path.file_stem().unwrap().to_string_lossy().into_owned(),
        path: path.to_path_buf(),
        ntid: program.mains.len(),
        text,
        program,
    }
}

/// Every `.par` file of the corpus, sorted by name.
pub fn corpus() -> Vec<CorpusProgram> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "par"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}

pub fn corpus_program(name: &str) -> CorpusProgram {
    load(&corpus_dir().join(format!("{name}.par")))
}
