//! Run statistics (JSON) and vector dumps (TSV).

use anyhow::{Context, Result};
use graphweave_core::exec::counters::{Counters, TraversalRecord};
use graphweave_core::exec::value::RtVal;
use graphweave_core::exec::Executor;
use serde::Serialize;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct StatsReport<'a> {
    pub schema_version: u32,
    pub program: &'a str,
    pub graph: &'a str,
    pub schedule: &'a str,
    pub threads: usize,
    pub wall_time_ns: u128,
    pub totals: Counters,
    pub traversals: &'a [TraversalRecord],
}

pub fn write_stats(report: &StatsReport<'_>, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)?;
    std::fs::write(path, json).with_context(|| format!("cannot write `{}`", path.display()))
}

fn fmt_val(v: RtVal) -> String {
    match v {
        RtVal::Int(x) => x.to_string(),
        RtVal::Double(x) => format!("{x}"),
        RtVal::Bool(b) => (b as i32).to_string(),
    }
}

/// TSV dump: `vertex\tvalue` for one vector, or one column per declared
/// vector when `vector` is None.
pub fn dump_tsv(ex: &Executor, vector: Option<&str>) -> String {
    let names: Vec<String> = match vector {
        Some(v) => vec![v.to_string()],
        None => ex.lowered.ir.vector_decls.iter().map(|d| d.name.clone()).collect(),
    };
    let columns: Vec<Vec<RtVal>> =
        names.iter().filter_map(|n| ex.vector_values(n)).collect();
    let mut out = String::new();
    out.push_str("vertex");
    for n in &names {
        out.push('\t');
        out.push_str(n);
    }
    out.push('\n');
    let n = columns.first().map_or(0, |c| c.len());
    for v in 0..n {
        out.push_str(&v.to_string());
        for c in &columns {
            out.push('\t');
            out.push_str(&fmt_val(c[v]));
        }
        out.push('\n');
    }
    out
}
