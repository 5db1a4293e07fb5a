//! Simple undirected graphs on vertex labels `0..n`, plus the induced
//! subgraph / edge contraction primitives and the two text formats
//! (edge-list and graph6) used by the command line tools.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A sorted, duplicate-free set of vertex labels.
///
/// Bags, separators, apex sets and dominating sets are all `VertexSet`s;
/// keeping them sorted makes every derived iteration order reproducible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn insert(&mut self, v: usize) {
        if let Err(pos) = self.0.binary_search(&v) {
            self.0.insert(pos, v);
        }
    }

    pub fn remove(&mut self, v: usize) {
        if let Ok(pos) = self.0.binary_search(&v) {
            self.0.remove(pos);
        }
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::from_iter(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        VertexSet::from_iter(v)
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        VertexSet::from_iter(v)
    }
}

/// Simple undirected graph. Immutable after construction; neighbor lists
/// are kept sorted ascending so every iteration order downstream is
/// derived from label order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            g.add_edge_checked(u, v)?;
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        Ok(g)
    }

    fn add_edge_checked(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        if u >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: u, n: self.n });
        }
        if v >= self.n {
            return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
        }
        if u == v {
            return Err(GraphError::InvalidEdge {
                u,
                v,
                reason: "self-loop".into(),
            });
        }
        if self.adj[u].contains(&v) {
            return Err(GraphError::InvalidEdge {
                u,
                v,
                reason: "duplicate edge".into(),
            });
        }
        self.adj[u].push(v);
        self.adj[v].push(u);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|nb| nb.len()).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// All edges as (u, v) with u < v, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Neighbor bitmasks; only valid for n <= 64 (all oracle-bounded code
    /// paths stay far below that).
    pub fn neighbor_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "bitmask representation requires n <= 64");
        self.adj
            .iter()
            .map(|nb| nb.iter().fold(0u64, |m, &v| m | (1 << v)))
            .collect()
    }

    /// Connected components as sorted vertex sets, ordered by least member.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            out.push(VertexSet::from_iter(comp));
        }
        out
    }

    /// Components of the subgraph induced on `within` after removing `removed`.
    pub fn components_within(&self, within: &VertexSet, removed: &VertexSet) -> Vec<VertexSet> {
        let mut seen: Vec<usize> = Vec::new();
        let mut out = Vec::new();
        let mut seen_flags: BTreeMap<usize, ()> = BTreeMap::new();
        for start in within.iter() {
            if removed.contains(start) || seen_flags.contains_key(&start) {
                continue;
            }
            let mut stack = vec![start];
            seen_flags.insert(start, ());
            let mut comp = Vec::new();
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if within.contains(w) && !removed.contains(w) && !seen_flags.contains_key(&w) {
                        seen_flags.insert(w, ());
                        stack.push(w);
                    }
                }
            }
            seen.extend(comp.iter().copied());
            out.push(VertexSet::from_iter(comp));
        }
        out
    }

    /// Induced subgraph on `s`, relabeled to 0..|s| preserving label order.
    /// Returns the new graph and the old-label -> new-label mapping.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Result<(Graph, BTreeMap<usize, usize>), GraphError> {
        for v in s.iter() {
            if v >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        let mapping: BTreeMap<usize, usize> =
            s.iter().enumerate().map(|(new, old)| (old, new)).collect();
        let mut g = Graph::empty(s.len());
        for (old_u, &new_u) in &mapping {
            for &old_v in &self.adj[*old_u] {
                if let Some(&new_v) = mapping.get(&old_v) {
                    if new_u < new_v {
                        g.adj[new_u].push(new_v);
                        g.adj[new_v].push(new_u);
                    }
                }
            }
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        Ok((g, mapping))
    }

    /// Contract the edge {u, v}. The merged vertex keeps label min(u, v);
    /// labels above max(u, v) shift down by one; parallel edges collapse and
    /// the contracted edge disappears.
    pub fn contract_edge(&self, u: usize, v: usize) -> Result<Graph, GraphError> {
        if !self.has_edge(u, v) {
            return Err(GraphError::InvalidEdge {
                u,
                v,
                reason: "not an edge of the graph".into(),
            });
        }
        let (lo, hi) = (u.min(v), u.max(v));
        let relabel = |w: usize| -> usize {
            if w == hi {
                lo
            } else if w > hi {
                w - 1
            } else {
                w
            }
        };
        let mut g = Graph::empty(self.n - 1);
        for (a, b) in self.edges() {
            if (a, b) == (lo, hi) {
                continue;
            }
            let (x, y) = (relabel(a), relabel(b));
            if x != y && !g.has_edge(x, y) {
                g.adj[x].push(y);
                g.adj[y].push(x);
                g.adj[x].sort_unstable();
                g.adj[y].sort_unstable();
            }
        }
        Ok(g)
    }

    /// Relabel by permutation `perm`, where `perm[old] = new`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n);
        let mut g = Graph::empty(self.n);
        for (u, v) in self.edges() {
            let (x, y) = (perm[u], perm[v]);
            g.adj[x].push(y);
            g.adj[y].push(x);
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
        }
        g
    }

    // -- small constructors used all over the tests and docs --

    pub fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3);
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    /// The Petersen graph: outer 5-cycle 0..4, inner pentagram 5..9, spokes.
    pub fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
            edges.push((i, 5 + i));
        }
        Graph::from_edges(10, edges).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Edge-list format
// ---------------------------------------------------------------------------

/// Parse the edge-list format: first line `n=<count>`, then one `<u> <v>`
/// line per edge with u < v.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(GraphError::Parse {
        line: 1,
        msg: "empty input, expected header `n=<count>`".into(),
    })?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| GraphError::Parse {
            line: 1,
            msg: format!("malformed header {header:?}, expected `n=<count>`"),
        })?;
    let mut g = Graph::empty(n);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (u, v) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => {
                let u: usize = a.parse().map_err(|_| GraphError::Parse {
                    line: lineno,
                    msg: format!("bad vertex {a:?}"),
                })?;
                let v: usize = b.parse().map_err(|_| GraphError::Parse {
                    line: lineno,
                    msg: format!("bad vertex {b:?}"),
                })?;
                (u, v)
            }
            _ => {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: format!("expected `<u> <v>`, got {line:?}"),
                })
            }
        };
        if u >= v {
            return Err(GraphError::Parse {
                line: lineno,
                msg: format!("edge ({u}, {v}) must satisfy u < v"),
            });
        }
        g.add_edge_checked(u, v).map_err(|e| GraphError::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
    }
    for nb in &mut g.adj {
        nb.sort_unstable();
    }
    Ok(g)
}

/// Emit the edge-list format, edges sorted lexicographically.
pub fn emit_edge_list(g: &Graph) -> String {
    let mut out = format!("n={}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// graph6 format (header-free)
// ---------------------------------------------------------------------------

/// Parse a graph6 string (standard header-free ASCII encoding).
pub fn parse_graph6(text: &str) -> Result<Graph, GraphError> {
    let bytes: Vec<u8> = text.trim().bytes().collect();
    let err = |msg: String| GraphError::Parse { line: 1, msg };
    if bytes.is_empty() {
        return Err(err("empty graph6 input".into()));
    }
    let (n, mut pos) = if bytes[0] == 126 {
        if bytes.len() >= 2 && bytes[1] == 126 {
            if bytes.len() < 8 {
                return Err(err("truncated graph6 size field".into()));
            }
            let mut n = 0usize;
            for &b in &bytes[2..8] {
                if !(63..=126).contains(&b) {
                    return Err(err(format!("invalid graph6 byte {b}")));
                }
                n = (n << 6) | (b as usize - 63);
            }
            (n, 8)
        } else {
            if bytes.len() < 4 {
                return Err(err("truncated graph6 size field".into()));
            }
            let mut n = 0usize;
            for &b in &bytes[1..4] {
                if !(63..=126).contains(&b) {
                    return Err(err(format!("invalid graph6 byte {b}")));
                }
                n = (n << 6) | (b as usize - 63);
            }
            (n, 4)
        }
    } else {
        if !(63..=126).contains(&bytes[0]) {
            return Err(err(format!("invalid graph6 byte {}", bytes[0])));
        }
        (bytes[0] as usize - 63, 1)
    };
    let nbits = n * n.saturating_sub(1) / 2;
    let nbytes = nbits.div_ceil(6);
    if bytes.len() - pos != nbytes {
        return Err(err(format!(
            "expected {} data bytes for n={}, got {}",
            nbytes,
            n,
            bytes.len() - pos
        )));
    }
    let mut g = Graph::empty(n);
    let mut bit = 0usize;
    let mut cur = 0u8;
    let mut left = 0u32;
    for v in 1..n {
        for u in 0..v {
            if left == 0 {
                cur = bytes[pos];
                if !(63..=126).contains(&cur) {
                    return Err(err(format!("invalid graph6 byte {cur}")));
                }
                cur -= 63;
                left = 6;
                pos += 1;
            }
            left -= 1;
            if (cur >> left) & 1 == 1 {
                g.adj[u].push(v);
                g.adj[v].push(u);
            }
            bit += 1;
        }
    }
    let _ = bit;
    for nb in &mut g.adj {
        nb.sort_unstable();
    }
    Ok(g)
}

/// Emit the graph6 encoding (header-free).
pub fn emit_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out: Vec<u8> = Vec::new();
    if n <= 62 {
        out.push(63 + n as u8);
    } else if n <= 258047 {
        out.push(126);
        out.push(63 + ((n >> 12) & 0x3f) as u8);
        out.push(63 + ((n >> 6) & 0x3f) as u8);
        out.push(63 + (n & 0x3f) as u8);
    } else {
        out.push(126);
        out.push(126);
        for shift in (0..36).step_by(6).rev() {
            out.push(63 + ((n >> shift) & 0x3f) as u8);
        }
    }
    let mut cur = 0u8;
    let mut filled = 0u32;
    for v in 1..n {
        for u in 0..v {
            cur = (cur << 1) | u8::from(g.has_edge(u, v));
            filled += 1;
            if filled == 6 {
                out.push(63 + cur);
                cur = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push(63 + (cur << (6 - filled)));
    }
    String::from_utf8(out).unwrap()
}

/// Supported text formats for graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Graph6,
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, GraphError> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::Graph6 => parse_graph6(text),
    }
}

pub fn emit_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::EdgeList => emit_edge_list(g),
        GraphFormat::Graph6 => emit_graph6(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_subgraph_of_triangle() {
        let g = Graph::complete(3);
        let (h, map) = g.induced_subgraph(&VertexSet::from([0, 1])).unwrap();
        assert_eq!(h.n(), 2);
        assert_eq!(h.edges(), vec![(0, 1)]);
        assert_eq!(map[&0], 0);
        assert_eq!(map[&1], 1);
    }

    #[test]
    fn induced_subgraph_identity() {
        let g = Graph::petersen();
        let all = VertexSet::from_iter(0..10);
        let (h, map) = g.induced_subgraph(&all).unwrap();
        assert_eq!(h, g);
        assert!(map.iter().all(|(o, n)| o == n));
    }

    #[test]
    fn induced_subgraph_of_path() {
        // path 0-1-2-3 restricted to {0,2,3}: only the 2-3 edge survives
        let g = Graph::path(4);
        let (h, map) = g.induced_subgraph(&VertexSet::from([0, 2, 3])).unwrap();
        assert_eq!(h.n(), 3);
        assert_eq!(h.edges(), vec![(map[&2], map[&3])]);
        assert_eq!(h.edge_count(), 1);
    }

    #[test]
    fn induced_subgraph_rejects_out_of_range() {
        let g = Graph::path(3);
        assert!(g.induced_subgraph(&VertexSet::from([0, 7])).is_err());
    }

    #[test]
    fn contract_triangle_edge() {
        let g = Graph::complete(3);
        let h = g.contract_edge(0, 1).unwrap();
        assert_eq!(h.n(), 2);
        assert_eq!(h.edges(), vec![(0, 1)]);
    }

    #[test]
    fn contract_c4_gives_triangle() {
        let g = Graph::cycle(4);
        let h = g.contract_edge(0, 1).unwrap();
        assert_eq!(h.n(), 3);
        assert_eq!(h.edge_count(), 3);
        assert_eq!(h, Graph::complete(3));
    }

    #[test]
    fn contract_single_edge_graph() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let h = g.contract_edge(0, 1).unwrap();
        assert_eq!(h.n(), 1);
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn contract_non_edge_is_error() {
        let g = Graph::path(3);
        assert!(g.contract_edge(0, 2).is_err());
    }

    #[test]
    fn contract_relabeling_rule() {
        // contract (1,3): merged vertex keeps 1, vertex 4 shifts down to 3
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3)]).unwrap();
        let h = g.contract_edge(1, 3).unwrap();
        assert_eq!(h.n(), 4);
        // old 4 becomes 3, adjacent to merged vertex 1? old 4 was adjacent to 3 -> yes
        assert!(h.has_edge(1, 3));
        assert!(h.has_edge(0, 1));
        assert!(h.has_edge(1, 2));
        assert_eq!(h.edge_count(), 3);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = parse_edge_list("n=3\n0 1\n1 2\n").unwrap();
        assert_eq!(g, Graph::path(3));
        assert_eq!(emit_edge_list(&g), "n=3\n0 1\n1 2\n");
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("m=3\n").is_err());
        assert!(parse_edge_list("n=3\n0 5\n").is_err());
        assert!(parse_edge_list("n=3\n1 0\n").is_err());
        assert!(parse_edge_list("n=3\n0 1\n0 1\n").is_err());
        let err = parse_edge_list("n=3\n0 1\nx y\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn graph6_c5() {
        // reference encodings produced by networkx
        let g = parse_graph6("Dhc").unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.edge_count(), 5);
        assert!((0..5).all(|v| g.degree(v) == 2));
        assert_eq!(g.components().len(), 1);
        assert_eq!(parse_graph6("IheA@GUAo").unwrap(), Graph::petersen());
        assert_eq!(emit_graph6(&Graph::complete(6)), "E~~w");
        assert_eq!(emit_graph6(&Graph::path(4)), "Ch");
        assert_eq!(emit_graph6(&Graph::empty(0)), "?");
    }

    #[test]
    fn graph6_round_trip_small() {
        for g in [
            Graph::empty(0),
            Graph::empty(1),
            Graph::path(4),
            Graph::cycle(5),
            Graph::complete(6),
            Graph::petersen(),
        ] {
            let enc = emit_graph6(&g);
            assert_eq!(parse_graph6(&enc).unwrap(), g);
        }
    }

    #[test]
    fn graph6_large_n_header() {
        let g = Graph::empty(100);
        let enc = emit_graph6(&g);
        assert_eq!(parse_graph6(&enc).unwrap().n(), 100);
    }

    #[test]
    fn components_of_disjoint_triangles() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], VertexSet::from([0, 1, 2]));
        assert_eq!(comps[1], VertexSet::from([3, 4, 5]));
    }
}
