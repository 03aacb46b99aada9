//! Concrete syntax: parsing, canonical printing and JSON encodings.

pub mod json;
pub mod lexer;
pub mod parser;
pub mod printer;

pub use parser::{parse_par, parse_program, parse_seq, FileKind, Parsed, SpanTable};
pub use printer::{print_expr, print_par, print_program, print_seq};
