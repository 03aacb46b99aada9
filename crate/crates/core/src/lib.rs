//! Sequentialization of a small concurrent imperative language.
//!
//! A parallel program runs a fixed set of threads over a shared heap.
//! [`transform`] turns it into a single sequential program that simulates
//! every interleaving through a `select` primitive, and [`explorer`] checks
//! that simulation by bounded exhaustive search over both semantics.

pub mod ast;
pub mod diag;
pub mod equiv;
pub mod explorer;
pub mod frontend;
pub mod label;
pub mod sem;
pub mod transform;
pub mod value;
pub mod wf;

#[cfg(feature = "cli")]
pub mod cli;
