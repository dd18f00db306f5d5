//! End-to-end composition: source text to a runnable executor.

use crate::ast::Schedule;
use crate::exec::{ExecError, Executor, RunOptions};
use crate::gis::{self, GisError, LoweredProgram, Mode};
use crate::graph::Graph;
use crate::parser::{self, ParseError};
use crate::sema::{self, SemaError, SemaInfo};
use crate::transforms;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("semantic errors:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Sema(Vec<SemaError>),
    #[error(transparent)]
    Gis(#[from] GisError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

/// A checked, lowered program ready to bind to a graph.
pub struct CompiledProgram {
    pub lowered: LoweredProgram,
    pub sema: SemaInfo,
}

/// Parse, check, and lower a program. `extra_schedule` (a `.sched` file)
/// runs after any schedule section embedded in the source.
pub fn compile_program(
    source: &str,
    extra_schedule: Option<&str>,
    mode: Mode,
) -> Result<CompiledProgram, PipelineError> {
    let parsed = parser::parse_source(source)?;
    let mut schedule = parsed.schedule;
    if let Some(s) = extra_schedule {
        let extra = parser::parse_schedule(s)?;
        schedule.calls.extend(extra.calls);
    }
    compile_with_schedule(&parsed.program, &schedule, mode)
}

pub fn compile_with_schedule(
    program: &crate::ast::ProgramIR,
    schedule: &Schedule,
    mode: Mode,
) -> Result<CompiledProgram, PipelineError> {
    sema::check_semantics(program).map_err(PipelineError::Sema)?;
    let mut lowered = gis::apply_schedule(program, schedule, mode)?;
    transforms::lower_vector_initializers(&mut lowered.ir)
        .map_err(|e| PipelineError::Gis(e.into()))?;
    // Re-check after transforms: fused functions need access classes too.
    let sema = sema::check_semantics(&lowered.ir).map_err(PipelineError::Sema)?;
    Ok(CompiledProgram { lowered, sema })
}

impl CompiledProgram {
    pub fn executor(&self, graph: Graph, opts: RunOptions) -> Result<Executor, PipelineError> {
        Ok(Executor::new(self.lowered.clone(), self.sema.clone(), graph, opts)?)
    }
}
