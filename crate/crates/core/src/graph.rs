//! In-memory graph store: CSR out-adjacency plus its CSC transpose, degree
//! tables, edge-list loading, and the `GWCSR1` binary cache.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use thiserror::Error;

pub type VertexId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{path}:{line}: malformed edge line: {detail}")]
    Parse { path: String, line: usize, detail: String },
    #[error("{path}:{line}: negative vertex id")]
    NegativeId { path: String, line: usize },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("`{path}` is not a {expect} cache: {detail}")]
    BadCache { path: String, expect: &'static str, detail: String },
}

/// One direction of adjacency in compressed sparse form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Adjacency {
    pub offsets: Vec<usize>,
    pub neighbors: Vec<VertexId>,
    pub weights: Option<Vec<i64>>,
}

impl Adjacency {
    pub fn degree(&self, v: VertexId) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    pub fn neighbors_of(&self, v: VertexId) -> &[VertexId] {
        &self.neighbors[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }

    pub fn edge_range(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v as usize]..self.offsets[v as usize + 1]
    }

    /// Build from an unsorted edge list by counting sort on the key side.
    fn from_edges(n: usize, edges: &[(VertexId, VertexId, i64)], by_src: bool, weighted: bool) -> Adjacency {
        let mut counts = vec![0usize; n + 1];
        for &(s, d, _) in edges {
            let key = if by_src { s } else { d };
            counts[key as usize + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut neighbors = vec![0 as VertexId; edges.len()];
        let mut weights = if weighted { Some(vec![0i64; edges.len()]) } else { None };
        let mut cursor = counts;
        for &(s, d, w) in edges {
            let (key, val) = if by_src { (s, d) } else { (d, s) };
            let at = cursor[key as usize];
            neighbors[at] = val;
            if let Some(ws) = weights.as_mut() {
                ws[at] = w;
            }
            cursor[key as usize] += 1;
        }
        Adjacency { offsets, neighbors, weights }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub m: usize,
    pub out_adj: Adjacency,
    pub in_adj: Adjacency,
    pub weighted: bool,
}

impl Graph {
    pub fn from_edges(n_hint: Option<usize>, edges: Vec<(VertexId, VertexId, i64)>, weighted: bool) -> Graph {
        let max_id =
            edges.iter().map(|&(s, d, _)| s.max(d) as usize + 1).max().unwrap_or(0);
        let n = n_hint.map_or(max_id, |h| h.max(max_id));
        let m = edges.len();
        let out_adj = Adjacency::from_edges(n, &edges, true, weighted);
        let in_adj = Adjacency::from_edges(n, &edges, false, weighted);
        Graph { n, m, out_adj, in_adj, weighted }
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_adj.degree(v)
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_adj.degree(v)
    }

    /// Every directed edge as (src, dst, weight), in CSR order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, i64)> + '_ {
        (0..self.n as VertexId).flat_map(move |s| {
            self.out_adj.edge_range(s).map(move |i| {
                let w = self.out_adj.weights.as_ref().map_or(1, |ws| ws[i]);
                (s, self.out_adj.neighbors[i], w)
            })
        })
    }
}

/// Load a text edge list: one `src dst [weight]` per line, `#` comments
/// ignored. A comment of the form `# n = <count>` overrides the vertex
/// count. With `symmetrize`, each edge is also added in reverse.
pub fn load_edge_list(path: &Path, weighted: bool, symmetrize: bool) -> Result<Graph, GraphError> {
    let text = fs::read_to_string(path)
        .map_err(|e| GraphError::Io { path: path.display().to_string(), source: e })?;
    let mut edges = Vec::new();
    let mut n_hint = None;
    let pathstr = path.display().to_string();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let squeezed: String = comment.split_whitespace().collect::<Vec<_>>().join("");
            if let Some(v) = squeezed.strip_prefix("n=") {
                if let Ok(v) = v.parse::<usize>() {
                    n_hint = Some(v);
                }
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut field = |what: &str| -> Result<i64, GraphError> {
            let raw = fields.next().ok_or_else(|| GraphError::Parse {
                path: pathstr.clone(),
                line: lineno,
                detail: format!("missing {what}"),
            })?;
            raw.parse::<i64>().map_err(|_| GraphError::Parse {
                path: pathstr.clone(),
                line: lineno,
                detail: format!("bad {what} `{raw}`"),
            })
        };
        let src = field("source id")?;
        let dst = field("destination id")?;
        if src < 0 || dst < 0 {
            return Err(GraphError::NegativeId { path: pathstr, line: lineno });
        }
        let w = if weighted { field("weight")? } else { 1 };
        edges.push((src as VertexId, dst as VertexId, w));
        if symmetrize {
            edges.push((dst as VertexId, src as VertexId, w));
        }
    }
    Ok(Graph::from_edges(n_hint, edges, weighted))
}

const CACHE_MAGIC: &[u8; 6] = b"GWCSR1";

/// Write the binary cache: magic, weighted flag, little-endian u64 n and m,
/// offsets, neighbors, and weights when present.
pub fn write_cache(graph: &Graph, path: &Path) -> Result<(), GraphError> {
    let io_err = |e| GraphError::Io { path: path.display().to_string(), source: e };
    let mut buf = Vec::with_capacity(16 + 8 * (graph.n + 1 + graph.m));
    buf.extend_from_slice(CACHE_MAGIC);
    buf.push(graph.weighted as u8);
    buf.push(0); // reserved
    buf.extend_from_slice(&(graph.n as u64).to_le_bytes());
    buf.extend_from_slice(&(graph.m as u64).to_le_bytes());
    for &o in &graph.out_adj.offsets {
        buf.extend_from_slice(&(o as u64).to_le_bytes());
    }
    for &v in &graph.out_adj.neighbors {
        buf.extend_from_slice(&(v as u64).to_le_bytes());
    }
    if let Some(ws) = &graph.out_adj.weights {
        for &w in ws {
            buf.extend_from_slice(&w.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path).map_err(io_err)?;
    f.write_all(&buf).map_err(io_err)?;
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<Graph, GraphError> {
    let pathstr = path.display().to_string();
    let io_err = |e| GraphError::Io { path: pathstr.clone(), source: e };
    let bad = |detail: String| GraphError::BadCache { path: pathstr.clone(), expect: "GWCSR1", detail };
    let mut f = fs::File::open(path).map_err(io_err)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(io_err)?;
    if bytes.len() < 24 || &bytes[..6] != CACHE_MAGIC {
        return Err(bad("missing magic header".into()));
    }
    let weighted = bytes[6] != 0;
    let mut at = 8;
    let u64_at = |at: &mut usize| -> Result<u64, GraphError> {
        if *at + 8 > bytes.len() {
            return Err(bad("truncated".into()));
        }
        let v = u64::from_le_bytes(bytes[*at..*at + 8].try_into().unwrap());
        *at += 8;
        Ok(v)
    };
    let n = u64_at(&mut at)? as usize;
    let m = u64_at(&mut at)? as usize;
    let mut offsets = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        offsets.push(u64_at(&mut at)? as usize);
    }
    let mut neighbors = Vec::with_capacity(m);
    for _ in 0..m {
        neighbors.push(u64_at(&mut at)? as VertexId);
    }
    let weights = if weighted {
        let mut ws = Vec::with_capacity(m);
        for _ in 0..m {
            ws.push(u64_at(&mut at)? as i64);
        }
        Some(ws)
    } else {
        None
    };
    if *offsets.last().unwrap_or(&0) != m {
        return Err(bad("offset table does not cover all edges".into()));
    }
    // Rebuild edges and the transpose.
    let mut edges = Vec::with_capacity(m);
    for s in 0..n {
        for i in offsets[s]..offsets[s + 1] {
            let w = weights.as_ref().map_or(1, |ws| ws[i]);
            edges.push((s as VertexId, neighbors[i], w));
        }
    }
    Ok(Graph::from_edges(Some(n), edges, weighted))
}

/// Load either a text edge list (`.el`/`.wel`, weighted inferred from the
/// extension unless forced) or a `.csr` binary cache.
pub fn load_graph(path: &Path, symmetrize: bool) -> Result<Graph, GraphError> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csr") => read_cache(path),
        Some("wel") => load_edge_list(path, true, symmetrize),
        _ => load_edge_list(path, false, symmetrize),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str, ext: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(ext).tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn tiny_edge_list() {
        let f = write_tmp("0 1\n1 2\n", ".el");
        let g = load_edge_list(f.path(), false, false).unwrap();
        assert_eq!((g.n, g.m), (3, 2));
        assert_eq!(
            (0..3).map(|v| g.out_degree(v)).collect::<Vec<_>>(),
            vec![1, 1, 0]
        );
        assert_eq!(g.in_adj.neighbors_of(1), &[0]);
    }

    #[test]
    fn empty_file() {
        let f = write_tmp("", ".el");
        let g = load_edge_list(f.path(), false, false).unwrap();
        assert_eq!((g.n, g.m), (0, 0));
    }

    #[test]
    fn comments_and_header_override() {
        let f = write_tmp("# a comment\n# n = 10\n0 1\n", ".el");
        let g = load_edge_list(f.path(), false, false).unwrap();
        assert_eq!((g.n, g.m), (10, 1));
    }

    #[test]
    fn negative_id_rejected() {
        let f = write_tmp("0 -1\n", ".el");
        let err = load_edge_list(f.path(), false, false).unwrap_err();
        assert!(matches!(err, GraphError::NegativeId { line: 1, .. }));
    }

    #[test]
    fn parse_error_carries_line() {
        let f = write_tmp("0 1\n0\n", ".el");
        let err = load_edge_list(f.path(), false, false).unwrap_err();
        assert!(matches!(err, GraphError::Parse { line: 2, .. }));
    }

    #[test]
    fn duplicates_and_self_loops_kept() {
        let f = write_tmp("0 1\n0 1\n2 2\n", ".el");
        let g = load_edge_list(f.path(), false, false).unwrap();
        assert_eq!(g.m, 3);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.out_degree(2), 1);
    }

    #[test]
    fn symmetrize_doubles_edges() {
        let f = write_tmp("0 1\n", ".el");
        let g = load_edge_list(f.path(), false, true).unwrap();
        assert_eq!(g.m, 2);
        assert_eq!(g.out_adj.neighbors_of(1), &[0]);
    }

    #[test]
    fn transpose_is_exact() {
        // Deterministic pseudo-random multigraph.
        let mut edges = Vec::new();
        let mut x = 12345u64;
        for _ in 0..2000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let s = ((x >> 20) % 97) as VertexId;
            let d = ((x >> 40) % 97) as VertexId;
            edges.push((s, d, 1));
        }
        let g = Graph::from_edges(None, edges.clone(), false);
        let mut fwd: Vec<(VertexId, VertexId)> = g.edges().map(|(s, d, _)| (s, d)).collect();
        let mut rev: Vec<(VertexId, VertexId)> = (0..g.n as VertexId)
            .flat_map(|d| g.in_adj.neighbors_of(d).iter().map(move |&s| (s, d)))
            .collect();
        fwd.sort_unstable();
        rev.sort_unstable();
        assert_eq!(fwd, rev);
    }

    #[test]
    fn cache_round_trip() {
        let f = write_tmp("0 1 5\n1 2 7\n2 0 1\n", ".wel");
        let g = load_edge_list(f.path(), true, false).unwrap();
        let cache = tempfile::Builder::new().suffix(".csr").tempfile().unwrap();
        write_cache(&g, cache.path()).unwrap();
        let g2 = read_cache(cache.path()).unwrap();
        assert_eq!(g, g2);
    }
}
