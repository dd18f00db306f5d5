//! The shipped benchmark programs and what `verify` knows about each.

use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgramKind {
    PageRank,
    PrDelta,
    Bfs,
    Cc,
    CcAsync,
    Sssp,
    Bc,
    Cf,
}

impl ProgramKind {
    pub fn detect(path: &Path) -> Option<ProgramKind> {
        let stem = path.file_stem()?.to_str()?;
        Some(match stem {
            "pagerank" | "pr" => ProgramKind::PageRank,
            "prdelta" => ProgramKind::PrDelta,
            "bfs" => ProgramKind::Bfs,
            "cc" => ProgramKind::Cc,
            "cc_async" => ProgramKind::CcAsync,
            "sssp" => ProgramKind::Sssp,
            "bc" => ProgramKind::Bc,
            "cf" => ProgramKind::Cf,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ProgramKind::PageRank => "pagerank",
            ProgramKind::PrDelta => "prdelta",
            ProgramKind::Bfs => "bfs",
            ProgramKind::Cc => "cc",
            ProgramKind::CcAsync => "cc_async",
            ProgramKind::Sssp => "sssp",
            ProgramKind::Bc => "bc",
            ProgramKind::Cf => "cf",
        }
    }

    /// Vector(s) that carry the program's answer.
    pub fn output_vectors(self) -> &'static [&'static str] {
        match self {
            ProgramKind::PageRank => &["OldRank"],
            ProgramKind::PrDelta => &["Rank"],
            ProgramKind::Bfs => &["parent"],
            ProgramKind::Cc | ProgramKind::CcAsync => &["IDs"],
            ProgramKind::Sssp => &["SP"],
            ProgramKind::Bc => &["Centrality"],
            ProgramKind::Cf => &[
                "Lu0", "Lu1", "Lu2", "Lu3", "Lu4", "Lu5", "Lu6", "Lu7", "Li0", "Li1", "Li2",
                "Li3", "Li4", "Li5", "Li6", "Li7",
            ],
        }
    }

    /// Integer outputs compare exactly; floating-point ones by relative
    /// tolerance.
    pub fn integer_output(self) -> bool {
        matches!(
            self,
            ProgramKind::Bfs | ProgramKind::Cc | ProgramKind::CcAsync | ProgramKind::Sssp
        )
    }

    pub fn needs_source(self) -> bool {
        matches!(self, ProgramKind::Bfs | ProgramKind::Sssp | ProgramKind::Bc)
    }

    pub fn needs_iters(self) -> bool {
        matches!(self, ProgramKind::PageRank | ProgramKind::PrDelta | ProgramKind::Cf)
    }

    /// Two same-element vectors worth fusing in the AoS schedule rows.
    pub fn fuse_candidates(self) -> &'static [&'static str] {
        match self {
            ProgramKind::PageRank => &["OldRank", "OutDegree"],
            ProgramKind::PrDelta => &["Delta", "OutDegree"],
            ProgramKind::Bfs => &["parent"],
            ProgramKind::Cc | ProgramKind::CcAsync => &["IDs"],
            ProgramKind::Sssp => &["SP"],
            ProgramKind::Bc => &["NumPaths", "Dep"],
            ProgramKind::Cf => &["Lu0", "Lu1"],
        }
    }
}
