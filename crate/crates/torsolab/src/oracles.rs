//! Exact exponential-time containment and symmetry oracles.
//!
//! These are ground truth for everything else in the crate. They are
//! exhaustive searches guarded by explicit size ceilings; exceeding a
//! ceiling is an error, never a silent truncation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexSet};

/// Size ceilings for the exhaustive searches.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub host_ceiling: usize,
    pub pattern_ceiling: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            host_ceiling: 16,
            pattern_ceiling: 8,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("host graph has {n} vertices, exceeding the oracle ceiling {ceiling}")]
    HostTooLarge { n: usize, ceiling: usize },
    #[error("pattern graph has {n} vertices, exceeding the pattern ceiling {ceiling}")]
    PatternTooLarge { n: usize, ceiling: usize },
}

/// Witness that a pattern H is a minor of a host G: one branch set per
/// pattern vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorModel {
    pub branch_sets: Vec<VertexSet>,
}

impl MinorModel {
    /// Independent re-check of the minor-model invariants.
    pub fn validate(&self, pattern: &Graph, host: &Graph) -> bool {
        if self.branch_sets.len() != pattern.n() {
            return false;
        }
        let mut seen = VertexSet::new();
        for bs in &self.branch_sets {
            if bs.is_empty() {
                return false;
            }
            for v in bs.iter() {
                if v >= host.n() || seen.contains(v) {
                    return false;
                }
                seen.insert(v);
            }
            // connectivity of the induced subgraph
            if host.components_within(bs, &VertexSet::new()).len() != 1 {
                return false;
            }
        }
        for (i, j) in pattern.edges() {
            let joined = self.branch_sets[i].iter().any(|u| {
                host.neighbors(u)
                    .iter()
                    .any(|&w| self.branch_sets[j].contains(w))
            });
            if !joined {
                return false;
            }
        }
        true
    }
}

/// Witness that a subdivision of H is a subgraph of G.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalModel {
    /// branch_vertices[i] hosts pattern vertex i (injective).
    pub branch_vertices: Vec<usize>,
    /// One host path per pattern edge, in `pattern.edges()` order, including
    /// both endpoints. Paths are internally disjoint from each other and
    /// from all branch vertices.
    pub paths: Vec<Vec<usize>>,
}

impl TopologicalModel {
    pub fn validate(&self, pattern: &Graph, host: &Graph) -> bool {
        if self.branch_vertices.len() != pattern.n() {
            return false;
        }
        let mut bv_seen = VertexSet::new();
        for &v in &self.branch_vertices {
            if v >= host.n() || bv_seen.contains(v) {
                return false;
            }
            bv_seen.insert(v);
        }
        let edges = pattern.edges();
        if self.paths.len() != edges.len() {
            return false;
        }
        let mut internal_seen = VertexSet::new();
        for (path, &(i, j)) in self.paths.iter().zip(edges.iter()) {
            if path.len() < 2
                || path[0] != self.branch_vertices[i]
                || path[path.len() - 1] != self.branch_vertices[j]
            {
                return false;
            }
            for w in path.windows(2) {
                if !host.has_edge(w[0], w[1]) {
                    return false;
                }
            }
            for &v in &path[1..path.len() - 1] {
                if bv_seen.contains(v) || internal_seen.contains(v) {
                    return false;
                }
                internal_seen.insert(v);
            }
        }
        true
    }
}

fn check_ceilings(pattern: &Graph, host: &Graph, cfg: &OracleConfig) -> Result<(), OracleError> {
    if host.n() > cfg.host_ceiling {
        return Err(OracleError::HostTooLarge {
            n: host.n(),
            ceiling: cfg.host_ceiling,
        });
    }
    if pattern.n() > cfg.pattern_ceiling {
        return Err(OracleError::PatternTooLarge {
            n: pattern.n(),
            ceiling: cfg.pattern_ceiling,
        });
    }
    Ok(())
}

fn mask_to_set(mask: u64) -> VertexSet {
    VertexSet::from_iter((0..64).filter(|&i| mask >> i & 1 == 1))
}

/// Is the sub-mask connected in the host (given neighbor masks)?
fn mask_connected(mask: u64, nbr: &[u64]) -> bool {
    if mask == 0 {
        return false;
    }
    let start = mask.trailing_zeros() as usize;
    let mut reached = 1u64 << start;
    loop {
        let mut grow = reached;
        let mut m = reached;
        while m != 0 {
            let v = m.trailing_zeros() as usize;
            m &= m - 1;
            grow |= nbr[v] & mask;
        }
        if grow == reached {
            break;
        }
        reached = grow;
    }
    reached == mask
}

fn masks_adjacent(a: u64, b: u64, nbr: &[u64]) -> bool {
    let mut m = a;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        m &= m - 1;
        if nbr[v] & b != 0 {
            return true;
        }
    }
    false
}

/// Exact minor test. Returns the first witness in the deterministic
/// search order (branch sets assigned to pattern vertices in ascending
/// order, candidate sets enumerated by ascending bitmask value).
pub fn find_minor(
    pattern: &Graph,
    host: &Graph,
    cfg: &OracleConfig,
) -> Result<Option<MinorModel>, OracleError> {
    check_ceilings(pattern, host, cfg)?;
    let hn = pattern.n();
    if hn == 0 {
        return Ok(Some(MinorModel { branch_sets: vec![] }));
    }
    if hn > host.n() || pattern.edge_count() > host.edge_count() {
        return Ok(None);
    }
    let nbr = host.neighbor_masks();
    let full: u64 = if host.n() == 64 { !0 } else { (1 << host.n()) - 1 };
    // pattern neighbors with smaller index, per pattern vertex
    let earlier_nbrs: Vec<Vec<usize>> = (0..hn)
        .map(|i| pattern.neighbors(i).iter().copied().filter(|&j| j < i).collect())
        .collect();
    let mut chosen: Vec<u64> = Vec::with_capacity(hn);

    fn rec(
        i: usize,
        used: u64,
        hn: usize,
        full: u64,
        nbr: &[u64],
        earlier: &[Vec<usize>],
        chosen: &mut Vec<u64>,
    ) -> bool {
        if i == hn {
            return true;
        }
        let avail = full & !used;
        let remaining_needed = hn - i - 1;
        if (avail.count_ones() as usize) < remaining_needed + 1 {
            return false;
        }
        let max_size = avail.count_ones() as usize - remaining_needed;
        let mut cand: u64 = 0;
        loop {
            // next submask of avail in ascending numeric order
            cand = (cand.wrapping_sub(avail)) & avail;
            if cand == 0 {
                return false;
            }
            if cand.count_ones() as usize > max_size {
                continue;
            }
            if !mask_connected(cand, nbr) {
                continue;
            }
            if !earlier[i].iter().all(|&j| masks_adjacent(cand, chosen[j], nbr)) {
                continue;
            }
            chosen.push(cand);
            if rec(i + 1, used | cand, hn, full, nbr, earlier, chosen) {
                return true;
            }
            chosen.pop();
        }
    }

    if rec(0, 0, hn, full, &nbr, &earlier_nbrs, &mut chosen) {
        Ok(Some(MinorModel {
            branch_sets: chosen.into_iter().map(mask_to_set).collect(),
        }))
    } else {
        Ok(None)
    }
}

/// Exact topological-subgraph test: is some subdivision of the pattern a
/// subgraph of the host?
pub fn find_topological_subgraph(
    pattern: &Graph,
    host: &Graph,
    cfg: &OracleConfig,
) -> Result<Option<TopologicalModel>, OracleError> {
    check_ceilings(pattern, host, cfg)?;
    let hn = pattern.n();
    if hn == 0 {
        return Ok(Some(TopologicalModel {
            branch_vertices: vec![],
            paths: vec![],
        }));
    }
    if hn > host.n() || pattern.edge_count() > host.edge_count() {
        return Ok(None);
    }
    let edges = pattern.edges();

    struct Search<'a> {
        pattern: &'a Graph,
        host: &'a Graph,
        edges: &'a [(usize, usize)],
        branch: Vec<usize>,
        branch_used: Vec<bool>,
        // host vertices used as path internals
        internal_used: Vec<bool>,
        paths: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        fn place_branch(&mut self, i: usize) -> bool {
            if i == self.pattern.n() {
                return self.route_edge(0);
            }
            let need = self.pattern.degree(i);
            for v in 0..self.host.n() {
                if self.branch_used[v] || self.host.degree(v) < need {
                    continue;
                }
                self.branch[i] = v;
                self.branch_used[v] = true;
                if self.place_branch(i + 1) {
                    return true;
                }
                self.branch_used[v] = false;
            }
            false
        }

        fn route_edge(&mut self, e: usize) -> bool {
            if e == self.edges.len() {
                return true;
            }
            let (i, j) = self.edges[e];
            let (src, dst) = (self.branch[i], self.branch[j]);
            let mut path = vec![src];
            self.extend_path(e, &mut path, dst)
        }

        fn extend_path(&mut self, e: usize, path: &mut Vec<usize>, dst: usize) -> bool {
            let last = *path.last().unwrap();
            for &w in self.host.neighbors(last) {
                if w == dst {
                    path.push(dst);
                    self.paths.push(path.clone());
                    if self.route_edge(e + 1) {
                        return true;
                    }
                    self.paths.pop();
                    path.pop();
                    continue;
                }
                if self.branch_used[w] || self.internal_used[w] {
                    continue;
                }
                path.push(w);
                self.internal_used[w] = true;
                if self.extend_path(e, path, dst) {
                    return true;
                }
                self.internal_used[w] = false;
                path.pop();
            }
            false
        }
    }

    let mut search = Search {
        pattern,
        host,
        edges: &edges,
        branch: vec![0; hn],
        branch_used: vec![false; host.n()],
        internal_used: vec![false; host.n()],
        paths: Vec::new(),
    };
    if search.place_branch(0) {
        Ok(Some(TopologicalModel {
            branch_vertices: search.branch,
            paths: search.paths,
        }))
    } else {
        Ok(None)
    }
}

/// Exhaustive isomorphism test; returns the lexicographically first
/// adjacency-preserving bijection (as `map[g_vertex] = h_vertex`) if any.
pub fn is_isomorphic_brute(
    g: &Graph,
    h: &Graph,
    cfg: &OracleConfig,
) -> Result<Option<Vec<usize>>, OracleError> {
    if g.n() > cfg.host_ceiling {
        return Err(OracleError::HostTooLarge {
            n: g.n(),
            ceiling: cfg.host_ceiling,
        });
    }
    if h.n() > cfg.host_ceiling {
        return Err(OracleError::HostTooLarge {
            n: h.n(),
            ceiling: cfg.host_ceiling,
        });
    }
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return Ok(None);
    }
    let mut dg: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let mut dh: Vec<usize> = (0..h.n()).map(|v| h.degree(v)).collect();
    dg.sort_unstable();
    dh.sort_unstable();
    if dg != dh {
        return Ok(None);
    }
    let n = g.n();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn rec(k: usize, g: &Graph, h: &Graph, map: &mut [usize], used: &mut [bool]) -> bool {
        let n = g.n();
        if k == n {
            return true;
        }
        'cand: for c in 0..n {
            if used[c] || g.degree(k) != h.degree(c) {
                continue;
            }
            for &w in g.neighbors(k) {
                if w < k && !h.has_edge(map[w], c) {
                    continue 'cand;
                }
            }
            // non-edges among mapped prefix must stay non-edges
            for w in 0..k {
                if !g.has_edge(k, w) && h.has_edge(c, map[w]) {
                    continue 'cand;
                }
            }
            map[k] = c;
            used[c] = true;
            if rec(k + 1, g, h, map, used) {
                return true;
            }
            used[c] = false;
        }
        false
    }

    if rec(0, g, h, &mut map, &mut used) {
        Ok(Some(map))
    } else {
        Ok(None)
    }
}

/// All adjacency-preserving permutations of the vertices of `g`, in
/// lexicographic order. Always contains the identity.
pub fn automorphisms(g: &Graph, cfg: &OracleConfig) -> Result<Vec<Vec<usize>>, OracleError> {
    if g.n() > cfg.host_ceiling {
        return Err(OracleError::HostTooLarge {
            n: g.n(),
            ceiling: cfg.host_ceiling,
        });
    }
    let n = g.n();
    let mut out = Vec::new();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn rec(
        k: usize,
        g: &Graph,
        map: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let n = g.n();
        if k == n {
            out.push(map.clone());
            return;
        }
        'cand: for c in 0..n {
            if used[c] || g.degree(k) != g.degree(c) {
                continue;
            }
            for w in 0..k {
                if g.has_edge(k, w) != g.has_edge(c, map[w]) {
                    continue 'cand;
                }
            }
            map[k] = c;
            used[c] = true;
            rec(k + 1, g, map, used, out);
            used[c] = false;
        }
    }

    rec(0, g, &mut map, &mut used, &mut out);
    Ok(out)
}

/// Convert a topological model into a minor model: each branch set is the
/// branch vertex plus the internal vertices of half of its incident paths.
pub fn topological_to_minor(model: &TopologicalModel, pattern: &Graph) -> MinorModel {
    let mut branch_sets: Vec<Vec<usize>> = model
        .branch_vertices
        .iter()
        .map(|&v| vec![v])
        .collect();
    for (path, &(i, _j)) in model.paths.iter().zip(pattern.edges().iter()) {
        // all internal vertices go to the endpoint-i side; the last host
        // edge of the path then joins branch set i to branch set j
        for &v in &path[1..path.len() - 1] {
            branch_sets[i].push(v);
        }
    }
    MinorModel {
        branch_sets: branch_sets.into_iter().map(VertexSet::from).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, edges).unwrap()
    }

    #[test]
    fn minor_identity() {
        let g = Graph::cycle(8);
        let m = find_minor(&g, &g, &cfg()).unwrap().unwrap();
        assert!(m.validate(&g, &g));
        assert!(m.branch_sets.iter().all(|bs| bs.len() == 1));
    }

    #[test]
    fn k5_is_minor_of_petersen() {
        let k5 = Graph::complete(5);
        let p = Graph::petersen();
        let m = find_minor(&k5, &p, &cfg()).unwrap().unwrap();
        assert!(m.validate(&k5, &p));
    }

    #[test]
    fn k4_is_not_minor_of_c5() {
        let k4 = Graph::complete(4);
        let c5 = Graph::cycle(5);
        assert!(find_minor(&k4, &c5, &cfg()).unwrap().is_none());
    }

    #[test]
    fn minor_ceiling_is_enforced() {
        let big = Graph::empty(17);
        assert!(find_minor(&Graph::empty(1), &big, &cfg()).is_err());
        let pat = Graph::empty(9);
        assert!(find_minor(&pat, &Graph::empty(10), &cfg()).is_err());
    }

    #[test]
    fn topological_identity() {
        let k4 = Graph::complete(4);
        let m = find_topological_subgraph(&k4, &k4, &cfg()).unwrap().unwrap();
        assert!(m.validate(&k4, &k4));
        assert!(m.paths.iter().all(|p| p.len() == 2));
    }

    #[test]
    fn k5_not_topological_in_petersen() {
        // branch vertices would need degree >= 4 but Petersen is 3-regular
        let k5 = Graph::complete(5);
        let p = Graph::petersen();
        assert!(find_topological_subgraph(&k5, &p, &cfg()).unwrap().is_none());
    }

    #[test]
    fn c4_topological_in_c6() {
        let c4 = Graph::cycle(4);
        let c6 = Graph::cycle(6);
        let m = find_topological_subgraph(&c4, &c6, &cfg()).unwrap().unwrap();
        assert!(m.validate(&c4, &c6));
    }

    #[test]
    fn iso_identity() {
        let g = Graph::petersen();
        let bij = is_isomorphic_brute(&g, &g, &cfg()).unwrap().unwrap();
        assert_eq!(bij, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn p4_not_isomorphic_to_star() {
        let p4 = Graph::path(4);
        let star = Graph::star(3);
        assert_eq!(p4.edge_count(), star.edge_count());
        assert!(is_isomorphic_brute(&p4, &star, &cfg()).unwrap().is_none());
    }

    #[test]
    fn c6_not_isomorphic_to_two_triangles() {
        let c6 = Graph::cycle(6);
        let tt = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(is_isomorphic_brute(&c6, &tt, &cfg()).unwrap().is_none());
    }

    #[test]
    fn automorphism_counts() {
        assert_eq!(automorphisms(&Graph::complete(3), &cfg()).unwrap().len(), 6);
        assert_eq!(automorphisms(&Graph::cycle(4), &cfg()).unwrap().len(), 8);
        let single = automorphisms(&Graph::empty(1), &cfg()).unwrap();
        assert_eq!(single, vec![vec![0]]);
    }

    #[test]
    fn automorphisms_sorted_and_contain_identity() {
        let auts = automorphisms(&Graph::cycle(5), &cfg()).unwrap();
        let id: Vec<usize> = (0..5).collect();
        assert!(auts.contains(&id));
        let mut sorted = auts.clone();
        sorted.sort();
        assert_eq!(auts, sorted);
    }

    #[test]
    fn automorphisms_form_a_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 6, 0.5);
            let auts = automorphisms(&g, &cfg()).unwrap();
            for a in &auts {
                // inverse
                let mut inv = vec![0; 6];
                for (i, &ai) in a.iter().enumerate() {
                    inv[ai] = i;
                }
                assert!(auts.contains(&inv));
                // closure with one other element
                for b in &auts {
                    let comp: Vec<usize> = (0..6).map(|i| b[a[i]]).collect();
                    assert!(auts.contains(&comp));
                }
            }
        }
    }

    #[test]
    fn topological_implies_minor() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut hits = 0;
        for _ in 0..150 {
            let np = rng.gen_range(1..=5);
            let pat = random_graph(&mut rng, np, 0.5);
            let nh = rng.gen_range(1..=8);
            let host = random_graph(&mut rng, nh, 0.5);
            if let Some(tm) = find_topological_subgraph(&pat, &host, &cfg()).unwrap() {
                assert!(tm.validate(&pat, &host));
                let mm = topological_to_minor(&tm, &pat);
                assert!(mm.validate(&pat, &host), "converted minor model invalid");
                let found = find_minor(&pat, &host, &cfg()).unwrap();
                assert!(found.is_some(), "topological present but minor absent");
                hits += 1;
            }
        }
        assert!(hits > 10);
    }

    #[test]
    fn minor_monotone_under_supergraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..60 {
            let np = rng.gen_range(1..=4);
            let pat = random_graph(&mut rng, np, 0.6);
            let host = random_graph(&mut rng, 7, 0.35);
            if find_minor(&pat, &host, &cfg()).unwrap().is_some() {
                // add one random missing edge
                let mut edges = host.edges();
                let missing: Vec<(usize, usize)> = (0..7)
                    .flat_map(|u| (u + 1..7).map(move |v| (u, v)))
                    .filter(|&(u, v)| !host.has_edge(u, v))
                    .collect();
                if let Some(&e) = missing.first() {
                    edges.push(e);
                    let bigger = Graph::from_edges(7, edges).unwrap();
                    assert!(find_minor(&pat, &bigger, &cfg()).unwrap().is_some());
                }
            }
        }
    }

    #[test]
    fn returned_models_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..80 {
            let np = rng.gen_range(1..=4);
            let pat = random_graph(&mut rng, np, 0.5);
            let nh = rng.gen_range(1..=8);
            let host = random_graph(&mut rng, nh, 0.45);
            if let Some(m) = find_minor(&pat, &host, &cfg()).unwrap() {
                assert!(m.validate(&pat, &host));
            }
            if let Some(b) = is_isomorphic_brute(&pat, &pat, &cfg()).unwrap() {
                // a self-map must be an automorphism
                let permuted = pat.permuted(&b);
                assert_eq!(permuted, pat);
            }
        }
    }

    #[test]
    fn disconnected_pattern_embeds_disjointly() {
        // two disjoint edges as a minor of P5 (needs 4 disjoint branch sets)
        let pat = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let host = Graph::path(5);
        let m = find_minor(&pat, &host, &cfg()).unwrap().unwrap();
        assert!(m.validate(&pat, &host));
        // but not of a single edge
        let tiny = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(find_minor(&pat, &tiny, &cfg()).unwrap().is_none());
    }
}
