//! Shared plumbing between the CLI commands and the acceptance suite:
//! loading inputs, running programs, comparing outputs.

use crate::kinds::ProgramKind;
use anyhow::{anyhow, bail, Context, Result};
use graphweave_core::exec::value::RtVal;
use graphweave_core::exec::{Executor, ParamValue, RunOptions, RunOutput};
use graphweave_core::gis::Mode;
use graphweave_core::graph::{self, Graph};
use graphweave_core::pipeline::{compile_program, CompiledProgram};
use std::collections::BTreeMap;
use std::path::Path;

/// Frontend failures exit with 1, runtime failures with 2.
#[derive(Debug)]
pub enum CliFailure {
    Frontend(anyhow::Error),
    Runtime(anyhow::Error),
}

impl std::fmt::Display for CliFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliFailure::Frontend(e) | CliFailure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliFailure {}

pub fn frontend(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(CliFailure::Frontend(e.into()))
}

pub fn runtime(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(CliFailure::Runtime(e.into()))
}

pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<CliFailure>() {
            return match f {
                CliFailure::Frontend(_) => 1,
                CliFailure::Runtime(_) => 2,
            };
        }
    }
    1
}

pub fn read_source(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read program `{}`", path.display()))
        .map_err(frontend)
}

pub fn read_schedule(path: Option<&Path>) -> Result<Option<String>> {
    match path {
        None => Ok(None),
        Some(p) => Ok(Some(
            std::fs::read_to_string(p)
                .with_context(|| format!("cannot read schedule `{}`", p.display()))
                .map_err(frontend)?,
        )),
    }
}

pub fn load_graph(path: &Path, symmetrize: bool) -> Result<Graph> {
    graph::load_graph(path, symmetrize)
        .with_context(|| format!("cannot load graph `{}`", path.display()))
        .map_err(frontend)
}

pub fn compile(source: &str, schedule: Option<&str>, mode: Mode) -> Result<CompiledProgram> {
    compile_program(source, schedule, mode).map_err(|e| frontend(anyhow!("{e}")))
}

pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<String, ParamValue>> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| frontend(anyhow!("--param expects name=value, got `{pair}`")))?;
        let value = ParamValue::parse(v)
            .ok_or_else(|| frontend(anyhow!("--param {k}: `{v}` is not a number")))?;
        out.insert(k.to_string(), value);
    }
    Ok(out)
}

pub struct RunSpec<'a> {
    pub source: &'a str,
    pub schedule: Option<&'a str>,
    pub mode: Mode,
    pub graph: Graph,
    pub opts: RunOptions,
}

pub fn run_program(spec: RunSpec<'_>) -> Result<(Executor, RunOutput)> {
    let compiled = compile(spec.source, spec.schedule, spec.mode)?;
    let mut ex = compiled
        .executor(spec.graph, spec.opts)
        .map_err(|e| frontend(anyhow!("{e}")))?;
    let out = ex.run().map_err(|e| runtime(anyhow!("{e}")))?;
    Ok((ex, out))
}

/// Resolve thread count: GRAPHWEAVE_THREADS overrides the flag.
pub fn effective_threads(flag: usize) -> usize {
    std::env::var("GRAPHWEAVE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|v| *v > 0)
        .unwrap_or(flag)
}

pub fn default_params(kind: Option<ProgramKind>, iters: i64, source: i64) -> BTreeMap<String, ParamValue> {
    let mut out = BTreeMap::new();
    match kind {
        Some(k) => {
            if k.needs_iters() {
                out.insert("maxIters".to_string(), ParamValue::Int(iters));
            }
            if k.needs_source() {
                out.insert("source".to_string(), ParamValue::Int(source));
            }
        }
        None => {
            out.insert("maxIters".to_string(), ParamValue::Int(iters));
            out.insert("source".to_string(), ParamValue::Int(source));
        }
    }
    out
}

pub fn floats_of(ex: &Executor, name: &str) -> Result<Vec<f64>> {
    ex.vector_values(name)
        .map(|v| v.into_iter().map(RtVal::as_f64).collect())
        .ok_or_else(|| runtime(anyhow!("no vector `{name}`")))
}

pub fn ints_of(ex: &Executor, name: &str) -> Result<Vec<i64>> {
    ex.vector_values(name)
        .map(|v| v.into_iter().map(RtVal::as_i64).collect())
        .ok_or_else(|| runtime(anyhow!("no vector `{name}`")))
}

/// First index where two float vectors diverge beyond the relative
/// tolerance.
pub fn first_float_divergence(a: &[f64], b: &[f64], rel_tol: f64) -> Option<(usize, f64, f64)> {
    let n = a.len().max(b.len());
    for v in 0..n {
        let (x, y) = (a.get(v).copied().unwrap_or(f64::NAN), b.get(v).copied().unwrap_or(f64::NAN));
        let scale = x.abs().max(y.abs()).max(1e-12);
        if !((x - y).abs() <= rel_tol * scale) {
            return Some((v, x, y));
        }
    }
    None
}

pub fn first_int_divergence(a: &[i64], b: &[i64]) -> Option<(usize, i64, i64)> {
    let n = a.len().max(b.len());
    for v in 0..n {
        let (x, y) = (a.get(v).copied().unwrap_or(i64::MIN), b.get(v).copied().unwrap_or(i64::MIN));
        if x != y {
            return Some((v, x, y));
        }
    }
    None
}

/// Median of a set of nanosecond timings.
pub fn median(mut xs: Vec<u128>) -> u128 {
    if xs.is_empty() {
        return 0;
    }
    xs.sort_unstable();
    xs[xs.len() / 2]
}

pub fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        bail!("{msg}")
    }
}
