//! Schedule verification: run every matrix schedule and compare against the
//! serial reference oracle (and the serial default run) at the
//! schedule-invariance tolerances.

use crate::driver::{self, RunSpec};
use crate::kinds::ProgramKind;
use crate::matrix::schedule_matrix;
use crate::oracles;
use anyhow::{anyhow, Result};
use graphweave_core::exec::{ParamValue, RunOptions};
use graphweave_core::gis::Mode;
use graphweave_core::graph::{Graph, VertexId};
use std::collections::BTreeMap;

pub const FLOAT_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct ScheduleReport {
    pub schedule: String,
    pub passed: bool,
    pub detail: String,
    pub edges_examined: u64,
    pub wall_time_ns: u128,
}

pub struct VerifyConfig {
    pub iters: i64,
    pub source: i64,
    pub threads: usize,
    pub extra_params: BTreeMap<String, ParamValue>,
}

fn opts(cfg: &VerifyConfig, kind: ProgramKind) -> RunOptions {
    let mut params = driver::default_params(Some(kind), cfg.iters, cfg.source);
    params.extend(cfg.extra_params.clone());
    RunOptions { threads: cfg.threads, hybrid_threshold: None, params }
}

/// Oracle answer for one program kind, as floats (ints widen losslessly).
fn oracle_answer(kind: ProgramKind, graph: &Graph, cfg: &VerifyConfig) -> Option<Vec<f64>> {
    let src = cfg.source as VertexId;
    Some(match kind {
        ProgramKind::PageRank => oracles::pagerank(graph, cfg.iters as usize, 0.85),
        ProgramKind::PrDelta => oracles::prdelta(graph, cfg.iters as usize, 0.85, 0.1),
        ProgramKind::Bfs => {
            oracles::bfs_levels(graph, src).into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::Cc | ProgramKind::CcAsync => {
            oracles::cc_labels(graph).into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::Sssp => {
            oracles::sssp_dijkstra(graph, src).into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::Bc => oracles::bc_dependencies(graph, src),
        ProgramKind::Cf => return None,
    })
}

/// Program output in oracle-comparable form.
fn program_answer(
    kind: ProgramKind,
    ex: &graphweave_core::exec::Executor,
) -> Result<Vec<f64>> {
    Ok(match kind {
        ProgramKind::Bfs => {
            let parents = driver::ints_of(ex, "parent")?;
            oracles::levels_from_parents(&parents).into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::Cc | ProgramKind::CcAsync => {
            driver::ints_of(ex, "IDs")?.into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::Sssp => {
            driver::ints_of(ex, "SP")?.into_iter().map(|v| v as f64).collect()
        }
        ProgramKind::PageRank => driver::floats_of(ex, "OldRank")?,
        ProgramKind::PrDelta => driver::floats_of(ex, "Rank")?,
        ProgramKind::Bc => driver::floats_of(ex, "Centrality")?,
        ProgramKind::Cf => unreachable!("cf compares by loss"),
    })
}

fn compare(kind: ProgramKind, got: &[f64], want: &[f64]) -> Option<String> {
    if kind.integer_output() {
        for (v, (g, w)) in got.iter().zip(want).enumerate() {
            if g != w {
                return Some(format!("vertex {v}: got {g}, oracle {w}"));
            }
        }
        None
    } else {
        driver::first_float_divergence(got, want, FLOAT_TOL)
            .map(|(v, g, w)| format!("vertex {v}: got {g}, oracle {w}"))
    }
}

/// Collaborative filtering verifies loss decrease under each schedule, plus
/// schedule invariance of the latent vectors against the default run.
fn verify_cf(
    source: &str,
    schedule: Option<&str>,
    graph: &Graph,
    cfg: &VerifyConfig,
    baseline: &[Vec<f64>],
) -> Result<(bool, String)> {
    let run = |iters: i64, sched: Option<&str>| -> Result<(Vec<Vec<f64>>, f64)> {
        let mut o = opts(cfg, ProgramKind::Cf);
        o.params.insert("maxIters".into(), ParamValue::Int(iters));
        let (ex, _) = driver::run_program(RunSpec {
            source,
            schedule: sched,
            mode: Mode::Strict,
            graph: graph.clone(),
            opts: o,
        })?;
        let mut lu = Vec::new();
        let mut li = Vec::new();
        for k in 0..8 {
            lu.push(driver::floats_of(&ex, &format!("Lu{k}"))?);
            li.push(driver::floats_of(&ex, &format!("Li{k}"))?);
        }
        let loss = oracles::cf_loss(graph, &lu, &li);
        let mut all = lu;
        all.extend(li);
        Ok((all, loss))
    };
    let (_, l1) = run(1, schedule)?;
    let (vecs, lfull) = run(cfg.iters.max(2), schedule)?;
    if lfull >= l1 {
        return Ok((false, format!("loss did not decrease: {l1} -> {lfull}")));
    }
    for (k, (got, want)) in vecs.iter().zip(baseline).enumerate() {
        if let Some((v, g, w)) = driver::first_float_divergence(got, want, FLOAT_TOL) {
            return Ok((false, format!("latent {k} vertex {v}: got {g}, baseline {w}")));
        }
    }
    Ok((true, format!("loss {l1:.4} -> {lfull:.4}")))
}

pub fn verify_program(
    kind: ProgramKind,
    source: &str,
    graph: &Graph,
    cfg: &VerifyConfig,
) -> Result<Vec<ScheduleReport>> {
    let mut reports = Vec::new();

    // Baseline: the serial default run.
    let (base_ex, _) = driver::run_program(RunSpec {
        source,
        schedule: None,
        mode: Mode::Strict,
        graph: graph.clone(),
        opts: opts(cfg, kind),
    })?;
    let cf_baseline: Vec<Vec<f64>> = if kind == ProgramKind::Cf {
        let mut all = Vec::new();
        for k in 0..8 {
            all.push(driver::floats_of(&base_ex, &format!("Lu{k}"))?);
        }
        for k in 0..8 {
            all.push(driver::floats_of(&base_ex, &format!("Li{k}"))?);
        }
        all
    } else {
        Vec::new()
    };
    let oracle = oracle_answer(kind, graph, cfg);

    for (name, text) in schedule_matrix(kind) {
        let schedule = if text.is_empty() { None } else { Some(text.as_str()) };
        let report = if kind == ProgramKind::Cf {
            match verify_cf(source, schedule, graph, cfg, &cf_baseline) {
                Ok((passed, detail)) => ScheduleReport {
                    schedule: name,
                    passed,
                    detail,
                    edges_examined: 0,
                    wall_time_ns: 0,
                },
                Err(e) => ScheduleReport {
                    schedule: name,
                    passed: false,
                    detail: format!("{e:#}"),
                    edges_examined: 0,
                    wall_time_ns: 0,
                },
            }
        } else {
            match driver::run_program(RunSpec {
                source,
                schedule,
                mode: Mode::Strict,
                graph: graph.clone(),
                opts: opts(cfg, kind),
            }) {
                Ok((ex, out)) => {
                    let got = program_answer(kind, &ex)?;
                    let want = oracle.as_ref().ok_or_else(|| anyhow!("missing oracle"))?;
                    let diverged = compare(kind, &got, want);
                    ScheduleReport {
                        schedule: name,
                        passed: diverged.is_none(),
                        detail: diverged.unwrap_or_else(|| "matches oracle".into()),
                        edges_examined: out.counters.edges_examined,
                        wall_time_ns: out.wall_time_ns,
                    }
                }
                Err(e) => ScheduleReport {
                    schedule: name,
                    passed: false,
                    detail: format!("{e:#}"),
                    edges_examined: 0,
                    wall_time_ns: 0,
                },
            }
        };
        reports.push(report);
    }
    Ok(reports)
}
