//! Graph DSL toolchain: a frontend for the algorithm and scheduling
//! languages, graph-iteration-space lowering with dependence-based
//! synchronization inference, an in-memory graph store with segmented and
//! blocked partitions, a schedule-driven traversal engine, and a schedule
//! autotuner.

pub mod ast;
pub mod deps;
pub mod exec;
pub mod frontier;
pub mod gen;
pub mod gis;
pub mod graph;
pub mod labels;
pub mod lexer;
pub mod parser;
pub mod partition;
pub mod pipeline;
pub mod pretty;
pub mod report;
pub mod tuner;
pub mod sema;
pub mod token;
pub mod transforms;

pub use ast::{ProgramIR, Schedule};
pub use gis::{apply_schedule, LoweredProgram, Mode};
pub use parser::{parse_program, parse_schedule, parse_source};
pub use sema::check_semantics;
