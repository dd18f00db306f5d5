//! The schedule matrix the verification and acceptance suites sweep: every
//! direction, three parallelization modes, boolean-array and bitvector
//! frontiers, 1/4/8 segments with serial and parallel segment execution,
//! and both vertex-data layouts.

use crate::kinds::ProgramKind;

/// Named schedules applied to the statement labeled `s1`.
pub fn schedule_matrix(kind: ProgramKind) -> Vec<(String, String)> {
    let fuse = kind
        .fuse_candidates()
        .iter()
        .map(|v| format!("\"{v}\""))
        .collect::<Vec<_>>()
        .join(",");
    let mut m: Vec<(&str, String)> = vec![
        ("default", String::new()),
        (
            "push-dvp",
            r#"program->configApplyParallelization("s1","dynamic-vertex-parallel");"#.into(),
        ),
        (
            "push-static",
            r#"program->configApplyParallelization("s1","static-vertex-parallel",128);"#.into(),
        ),
        (
            "dense-push-dvp",
            r#"program->configApplyDirection("s1","DensePush")
->configApplyParallelization("s1","dynamic-vertex-parallel");"#
                .into(),
        ),
        (
            "pull-dvp",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","dynamic-vertex-parallel");"#
                .into(),
        ),
        (
            "pull-edge-aware",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","edge-aware-dynamic-vertex-parallel",512);"#
                .into(),
        ),
        (
            "pull-edge-parallel",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","edge-parallel");"#
                .into(),
        ),
        (
            "hybrid-pull-dvp",
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
->configApplyParallelization("s1","dynamic-vertex-parallel");"#
                .into(),
        ),
        (
            "hybrid-push-dvp",
            r#"program->configApplyDirection("s1","DensePush-SparsePush")
->configApplyParallelization("s1","dynamic-vertex-parallel");"#
                .into(),
        ),
        (
            "hybrid-bitvector",
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
->configApplyParallelization("s1","dynamic-vertex-parallel")
->configApplyDenseVertexSet("s1","src-vertexset","bitvector","DensePull");"#
                .into(),
        ),
        (
            "pull-ssg1",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","dynamic-vertex-parallel")
->configApplyNumSSG("s1","fixed-vertex-count",1);"#
                .into(),
        ),
        (
            "pull-ssg4",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","dynamic-vertex-parallel")
->configApplyNumSSG("s1","fixed-vertex-count",4);"#
                .into(),
        ),
        (
            "pull-ssg8-evc-numa-static",
            r#"program->configApplyDirection("s1","DensePull")
->configApplyParallelization("s1","dynamic-vertex-parallel")
->configApplyNumSSG("s1","edge-aware-vertex-count",8)
->configApplyNUMA("s1","static-parallel");"#
                .into(),
        ),
        (
            "hybrid-ssg-numa-dynamic",
            r#"program->configApplyDirection("s1","DensePull-SparsePush")
->configApplyParallelization("s1","dynamic-vertex-parallel")
->configApplyNumSSG("s1","fixed-vertex-count",4,"DensePull")
->configApplyNUMA("s1","dynamic-parallel","DensePull");"#
                .into(),
        ),
    ];
    m.push((
        "aos-push-dvp",
        format!(
            "program->fuseFields({fuse})\n->configApplyParallelization(\"s1\",\"dynamic-vertex-parallel\");"
        ),
    ));
    m.push((
        "aos-pull-dvp",
        format!(
            "program->fuseFields({fuse})\n->configApplyDirection(\"s1\",\"DensePull\")\n->configApplyParallelization(\"s1\",\"dynamic-vertex-parallel\");"
        ),
    ));
    m.into_iter().map(|(n, s)| (n.to_string(), s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_has_at_least_twelve_schedules() {
        let m = schedule_matrix(ProgramKind::PrDelta);
        assert!(m.len() >= 12, "only {} schedules", m.len());
        for (_, text) in &m {
            if !text.is_empty() {
                graphweave_core::parse_schedule(text).unwrap();
            }
        }
    }
}
