//! Text reports: per-plan dependence tables (`dump-deps`) and generated-code
//! style pseudo-code (`dump-plan`).

use crate::deps::{self, SyncKind};
use crate::gis::{Endpoint, FilterTag, ParallelTag, PlanVariant, VariantKind};
use crate::pipeline::CompiledProgram;
use std::fmt::Write;

/// Per vector, one line `name  ⟨d_outer,d_inner⟩  class  sync`, grouped per
/// plan variant.
pub fn dump_deps_report(compiled: &CompiledProgram) -> String {
    let mut out = String::new();
    for plan in &compiled.lowered.plans {
        let access = match compiled.sema.access.get(&plan.apply_func) {
            Some(a) => a.clone(),
            None => continue,
        };
        for variant in &plan.variants {
            let dvs = deps::distance_vectors(&access, &variant.gis);
            let sync = deps::infer_sync(
                variant,
                &access,
                &dvs,
                plan.dedup_enabled,
                plan.tracked_vector.as_deref(),
            );
            out.push_str(&deps::dump_deps(&plan.label, variant.kind, &access, &dvs, &sync));
            out.push('\n');
        }
    }
    out
}

fn parallel_comment(tag: ParallelTag) -> &'static str {
    match tag {
        ParallelTag::SR => "serial",
        ParallelTag::SP => "static-parallel",
        ParallelTag::WSP => "work-stealing",
    }
}

/// Pseudo-code rendering of one traversal variant, mirroring the nested
/// S → B → Outer → Inner loop structure the engine interprets.
pub fn dump_plan_report(compiled: &CompiledProgram) -> String {
    let mut out = String::new();
    for plan in &compiled.lowered.plans {
        writeln!(out, "{}:", plan.label).unwrap();
        if plan.hybrid {
            writeln!(
                out,
                "  if (frontier.size() + sum_out_degrees(frontier) > threshold) {{ // runtime selector"
            )
            .unwrap();
            render_variant(&mut out, plan, &plan.variants[0], 2);
            writeln!(out, "  }} else {{").unwrap();
            render_variant(&mut out, plan, &plan.variants[1], 2);
            writeln!(out, "  }}").unwrap();
        } else {
            render_variant(&mut out, plan, &plan.variants[0], 1);
        }
        out.push('\n');
    }
    out
}

fn render_variant(
    out: &mut String,
    plan: &crate::gis::ExecutionPlan,
    variant: &PlanVariant,
    base_indent: usize,
) {
    let gis = &variant.gis;
    let ind = |n: usize| "    ".repeat(n);
    let mut depth = base_indent;
    writeln!(out, "{}// {:?} {}", ind(depth), variant.kind, gis).unwrap();

    if let Some(s) = &gis.ssg {
        writeln!(
            out,
            "{}for (SSG_ID = 0; SSG_ID < {}; SSG_ID++) {{ // {}",
            ind(depth),
            s.num_segments,
            parallel_comment(s.parallel)
        )
        .unwrap();
        depth += 1;
        writeln!(out, "{}sg = G.SSG_list[SSG_ID];", ind(depth)).unwrap();
    }
    let graph_name = if gis.ssg.is_some() { "sg" } else { "G" };
    if let Some(b) = &gis.bsg {
        writeln!(
            out,
            "{}parallel_for (BSG_ID = 0; BSG_ID < {graph_name}.num_chunks; BSG_ID++) {{ // {}, {:?} grain {}",
            ind(depth),
            parallel_comment(b.parallel),
            b.scheme,
            b.grain
        )
        .unwrap();
        depth += 1;
    }

    let (outer_name, inner_name, nghs) = match variant.kind {
        VariantKind::DensePull => ("dst", "src", "getInNghs"),
        _ => ("src", "dst", "getOutNghs"),
    };
    let outer_range = if gis.bsg.is_some() {
        format!("{graph_name}.chunk_start[BSG_ID] .. {graph_name}.chunk_end[BSG_ID]")
    } else {
        "0 .. num_verts".to_string()
    };
    match (variant.kind, gis.outer.filter) {
        (VariantKind::SparsePush, _) => {
            writeln!(out, "{}for (i = 0; i < Frontier.size(); i++) {{", ind(depth)).unwrap();
            depth += 1;
            writeln!(out, "{}NodeID src = Frontier.vert_array[i];", ind(depth)).unwrap();
        }
        (VariantKind::DensePush, tag) => {
            writeln!(out, "{}for (NodeID src : {outer_range}) {{", ind(depth)).unwrap();
            depth += 1;
            if plan.has_from {
                let repr = if tag == FilterTag::BV { "bitvector" } else { "bool_map" };
                writeln!(out, "{}if (!Frontier.{repr}(src)) continue;", ind(depth)).unwrap();
            }
        }
        (VariantKind::DensePull, tag) => {
            writeln!(out, "{}for (NodeID dst : {outer_range}) {{", ind(depth)).unwrap();
            depth += 1;
            if plan.has_to {
                let repr = if tag == FilterTag::BV { "bitvector" } else { "bool_map" };
                writeln!(out, "{}if (!ToSet.{repr}(dst)) continue;", ind(depth)).unwrap();
            }
        }
    }
    // Outer-side function filter.
    let (outer_func, inner_func) = if variant.kind == VariantKind::DensePull {
        (&plan.dst_filter, &plan.src_filter)
    } else {
        (&plan.src_filter, &plan.dst_filter)
    };
    if let Some(f) = outer_func {
        writeln!(out, "{}if (!{f}({outer_name})) continue;", ind(depth)).unwrap();
    }

    let par = if gis.inner.parallel.is_parallel() { "parallel_for" } else { "for" };
    writeln!(
        out,
        "{}{par} (NodeID {inner_name} : {graph_name}.{nghs}({outer_name})) {{",
        ind(depth)
    )
    .unwrap();
    depth += 1;
    match variant.kind {
        VariantKind::DensePull => {
            if plan.has_from {
                let repr = if gis.inner.filter == FilterTag::BV { "bitvector" } else { "bool_map" };
                writeln!(out, "{}if (!Frontier.{repr}(src)) continue;", ind(depth)).unwrap();
            }
        }
        _ => {
            if plan.has_to {
                writeln!(out, "{}if (!ToSet.bool_map(dst)) continue;", ind(depth)).unwrap();
            }
        }
    }
    if let Some(f) = inner_func {
        writeln!(out, "{}if (!{f}({inner_name})) continue;", ind(depth)).unwrap();
    }
    if let Some(f) = &plan.edge_filter {
        writeln!(out, "{}if (!{f}(src, dst)) continue;", ind(depth)).unwrap();
    }

    // The apply call with its synchronization note.
    let sync_note = sync_note(compiled_sync(plan, variant));
    writeln!(out, "{}{}(src, dst);{sync_note}", ind(depth), plan.apply_func).unwrap();
    if plan.tracked_vector.is_some() {
        let dedup = if plan.dedup_enabled { " // CAS dedup" } else { "" };
        let side = inner_side(variant);
        writeln!(out, "{}if (modified) NextFrontier.add({side});{dedup}", ind(depth)).unwrap();
    }
    while depth > base_indent {
        depth -= 1;
        writeln!(out, "{}}}", ind(depth)).unwrap();
    }
}

fn inner_side(variant: &PlanVariant) -> &'static str {
    // applyModified tracks destinations regardless of direction.
    if variant.kind == VariantKind::DensePull {
        "dst"
    } else {
        "dst"
    }
}

fn compiled_sync(plan: &crate::gis::ExecutionPlan, variant: &PlanVariant) -> Option<SyncKind> {
    // Summarize: the strongest sync any vector needs under this variant.
    let _ = plan;
    if variant.gis.ssg.map_or(false, |s| s.parallel.is_parallel()) {
        Some(SyncKind::LocalBufferMerge)
    } else if variant.gis.outer_parallel() && variant.kind != VariantKind::DensePull {
        Some(SyncKind::AtomicReduction)
    } else if variant.gis.inner_parallel() {
        Some(SyncKind::AtomicReduction)
    } else {
        None
    }
}

fn sync_note(kind: Option<SyncKind>) -> &'static str {
    match kind {
        Some(SyncKind::AtomicReduction) => " // atomic reductions",
        Some(SyncKind::LocalBufferMerge) => " // per-segment buffers, merged after",
        _ => "",
    }
}

// Endpoint is re-exported for dump consumers juggling directions.
#[allow(unused)]
fn endpoint_name(e: Endpoint) -> &'static str {
    e.as_str()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gis::Mode;
    use crate::pipeline::compile_program;

    const PRDELTA: &str = include_str!("../tests/fixtures/prdelta.gt");

    #[test]
    fn deps_report_matches_push_pull_tables() {
        let push = compile_program(PRDELTA, None, Mode::Strict).unwrap();
        let report = dump_deps_report(&push);
        assert!(report.contains("DeltaSum  ⟨*,0⟩  reduction(sum)"), "{report}");
        assert!(report.contains("Delta  ⟨0,0⟩  read-only  none"));
        assert!(report.contains("OutDegree  ⟨0,0⟩  read-only  none"));

        let pull = compile_program(
            PRDELTA,
            Some(r#"program->configApplyDirection("s1","DensePull");"#),
            Mode::Strict,
        )
        .unwrap();
        let report = dump_deps_report(&pull);
        assert!(report.contains("DeltaSum  ⟨0,*⟩  reduction(sum)"), "{report}");
    }

    #[test]
    fn plan_report_mentions_loops() {
        let compiled = compile_program(
            PRDELTA,
            Some(
                r#"program->configApplyDirection("s1","DensePull")
                   ->configApplyParallelization("s1","dynamic-vertex-parallel")
                   ->configApplyNumSSG("s1","fixed-vertex-count",4);"#,
            ),
            Mode::Strict,
        )
        .unwrap();
        let report = dump_plan_report(&compiled);
        assert!(report.contains("SSG_list[SSG_ID]"), "{report}");
        assert!(report.contains("parallel_for"), "{report}");
        assert!(report.contains("getInNghs"), "{report}");
    }
}
