//! Canonical forms: colored-graph canonisers, lifting along a treelike
//! decomposition, and the isomorphism test built on certificate equality.
//!
//! The canonical serialization of a colored graph under a labeling is:
//! vertex count (u32 BE), colors in label order (u32 BE each), then the
//! row-major upper-triangle adjacency bitstring (MSB-first packed). The
//! certificate is the lexicographically least serialization over all
//! relabelings; since the color block precedes adjacency, minimisation
//! automatically restricts to labelings listing colors in ascending order.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::decomposition::{
    Budget, DecompositionError, TorsoConstraint, VerificationReport,
};
use crate::graph::Graph;
use crate::oracles::{OracleConfig, OracleError};
use crate::treelike::{
    invariant_decompose, verify_invariance, verify_treelike_axioms, TreelikeDecomposition,
    TreelikeLimits,
};

/// A graph with a color per vertex; color ids need not be contiguous.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    pub graph: Graph,
    pub colors: Vec<u32>,
}

impl ColoredGraph {
    pub fn new(graph: Graph, colors: Vec<u32>) -> Self {
        assert_eq!(graph.n(), colors.len(), "one color per vertex");
        ColoredGraph { graph, colors }
    }

    pub fn uncolored(graph: Graph) -> Self {
        let n = graph.n();
        ColoredGraph {
            graph,
            colors: vec![0; n],
        }
    }
}

/// A certificate plus the relabeling that attains it; `witness[v]` is the
/// canonical label of input vertex `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub certificate: Vec<u8>,
    pub witness: Vec<usize>,
}

impl CanonicalForm {
    pub fn hex(&self) -> String {
        self.certificate
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CanonConfig {
    /// Largest graph handed to the exhaustive canoniser; anything bigger
    /// goes to the refinement-based engine (results are identical).
    pub exhaustive_ceiling: usize,
}

impl Default for CanonConfig {
    fn default() -> Self {
        CanonConfig {
            exhaustive_ceiling: 10,
        }
    }
}

#[derive(Debug, Error)]
pub enum CanonError {
    #[error("graph with {n} vertices exceeds the exhaustive canonisation ceiling {ceiling}")]
    TooLarge { n: usize, ceiling: usize },
    #[error("decomposition fails verification ({} violations)", report.violations.len())]
    InvalidDecomposition { report: VerificationReport },
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Serialize a colored graph under the labeling `pos` (`pos[v]` = new label).
pub fn serialize_colored(cg: &ColoredGraph, pos: &[usize]) -> Vec<u8> {
    let n = cg.graph.n();
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(4 + 4 * n + n * n / 16 + 1);
    out.extend_from_slice(&(n as u32).to_be_bytes());
    let mut color_at = vec![0u32; n];
    let mut vert_at = vec![0usize; n];
    for v in 0..n {
        color_at[pos[v]] = cg.colors[v];
        vert_at[pos[v]] = v;
    }
    for c in &color_at {
        out.extend_from_slice(&c.to_be_bytes());
    }
    let bits = n * (n - 1) / 2;
    let mut adj = vec![0u8; bits.div_ceil(8)];
    let mut idx = 0;
    for p in 0..n {
        for q in p + 1..n {
            if cg.graph.has_edge(vert_at[p], vert_at[q]) {
                adj[idx / 8] |= 0x80 >> (idx % 8);
            }
            idx += 1;
        }
    }
    out.extend_from_slice(&adj);
    out
}

fn empty_form() -> CanonicalForm {
    CanonicalForm {
        certificate: Vec::new(),
        witness: Vec::new(),
    }
}

/// Exhaustive canoniser: tries every color-compatible relabeling and keeps
/// the least serialization. Only usable up to the configured ceiling.
pub fn canonise_small(cg: &ColoredGraph, cfg: &CanonConfig) -> Result<CanonicalForm, CanonError> {
    let n = cg.graph.n();
    if n > cfg.exhaustive_ceiling {
        return Err(CanonError::TooLarge {
            n,
            ceiling: cfg.exhaustive_ceiling,
        });
    }
    if n == 0 {
        return Ok(empty_form());
    }
    // color classes in ascending color order; positions are assigned
    // class-block by class-block, permuting within each class
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_color.entry(cg.colors[v]).or_default().push(v);
    }
    let classes: Vec<Vec<usize>> = by_color.into_values().collect();
    let masks = cg.graph.neighbor_masks();
    let bits = n * (n - 1) / 2;
    assert!(bits <= 64, "exhaustive ceiling must keep the packed adjacency in a u64 (n <= 11)");

    struct Search<'a> {
        classes: &'a [Vec<usize>],
        masks: &'a [u64],
        n: usize,
        order: Vec<usize>,
        used: Vec<bool>,
        best_word: u64,
        best_order: Vec<usize>,
    }
    impl Search<'_> {
        fn go(&mut self, class: usize, slot: usize) {
            if class == self.classes.len() {
                let mut word = 0u64;
                for p in 0..self.n {
                    let mp = self.masks[self.order[p]];
                    for q in p + 1..self.n {
                        word = (word << 1) | ((mp >> self.order[q]) & 1);
                    }
                }
                if word < self.best_word {
                    self.best_word = word;
                    self.best_order = self.order.clone();
                }
                return;
            }
            let members = &self.classes[class];
            if slot == members.len() {
                self.go(class + 1, 0);
                return;
            }
            for i in 0..members.len() {
                let v = members[i];
                if self.used[i + class_offset(self.classes, class)] {
                    continue;
                }
                self.used[i + class_offset(self.classes, class)] = true;
                self.order.push(v);
                self.go(class, slot + 1);
                self.order.pop();
                self.used[i + class_offset(self.classes, class)] = false;
            }
        }
    }
    fn class_offset(classes: &[Vec<usize>], class: usize) -> usize {
        classes[..class].iter().map(|c| c.len()).sum()
    }
    let mut search = Search {
        classes: &classes,
        masks: &masks,
        n,
        order: Vec::with_capacity(n),
        used: vec![false; n],
        best_word: u64::MAX,
        best_order: Vec::new(),
    };
    search.go(0, 0);
    let mut pos = vec![0usize; n];
    for (p, &v) in search.best_order.iter().enumerate() {
        pos[v] = p;
    }
    let certificate = serialize_colored(cg, &pos);
    debug_assert_eq!(certificate, serialize_colored(cg, &pos));
    Ok(CanonicalForm {
        certificate,
        witness: pos,
    })
}

/// Refinement-based canoniser. Positions are assigned left to right; at each
/// step the next adjacency row is minimised over all vertices of the first
/// cell, every cell is split into non-neighbors-then-neighbors of the chosen
/// vertex (the split is forced by the committed row pattern), and all tied
/// states are kept, deduplicated by their remaining ordered partition.
/// Produces exactly the same certificate as `canonise_small`.
pub fn canonise_refined(cg: &ColoredGraph) -> CanonicalForm {
    let n = cg.graph.n();
    if n == 0 {
        return empty_form();
    }
    let mut by_color: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        by_color.entry(cg.colors[v]).or_default().push(v);
    }
    #[derive(Clone)]
    struct State {
        order: Vec<usize>,
        cells: Vec<Vec<usize>>,
    }
    let mut frontier = vec![State {
        order: Vec::with_capacity(n),
        cells: by_color.into_values().collect(),
    }];
    for _ in 0..n {
        // minimal next row = fewest neighbors cell by cell (within a cell
        // the committed pattern is non-neighbors first, so fewer neighbors
        // means more leading zeros); cell sizes agree across the frontier,
        // so keys are comparable globally
        let mut best_key: Option<Vec<usize>> = None;
        let mut winners: Vec<(usize, usize)> = Vec::new();
        for (si, st) in frontier.iter().enumerate() {
            for &cand in &st.cells[0] {
                let mut key = Vec::with_capacity(st.cells.len());
                for cell in &st.cells {
                    let ones = cell
                        .iter()
                        .filter(|&&v| v != cand && cg.graph.has_edge(cand, v))
                        .count();
                    key.push(ones);
                }
                match &best_key {
                    Some(b) if key > *b => {}
                    Some(b) if key == *b => winners.push((si, cand)),
                    _ => {
                        best_key = Some(key);
                        winners.clear();
                        winners.push((si, cand));
                    }
                }
            }
        }
        let mut seen: HashSet<Vec<Vec<usize>>> = HashSet::new();
        let mut next = Vec::new();
        for (si, cand) in winners {
            let st = &frontier[si];
            let mut cells = Vec::with_capacity(st.cells.len() + 2);
            for cell in &st.cells {
                let mut non = Vec::new();
                let mut nbr = Vec::new();
                for &v in cell {
                    if v == cand {
                        continue;
                    }
                    if cg.graph.has_edge(cand, v) {
                        nbr.push(v);
                    } else {
                        non.push(v);
                    }
                }
                if !non.is_empty() {
                    cells.push(non);
                }
                if !nbr.is_empty() {
                    cells.push(nbr);
                }
            }
            if seen.insert(cells.clone()) {
                let mut order = st.order.clone();
                order.push(cand);
                next.push(State { order, cells });
            }
        }
        frontier = next;
    }
    let order = &frontier[0].order;
    let mut pos = vec![0usize; n];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let certificate = serialize_colored(cg, &pos);
    CanonicalForm {
        certificate,
        witness: pos,
    }
}

/// Dispatch: exhaustive canoniser under the ceiling, refined above it.
pub fn canonise_torso(cg: &ColoredGraph, cfg: &CanonConfig) -> CanonicalForm {
    if cg.graph.n() <= cfg.exhaustive_ceiling {
        canonise_small(cg, cfg).expect("under the ceiling by dispatch")
    } else {
        canonise_refined(cg)
    }
}

struct NodeCode {
    code: Vec<u8>,
    torso_witness: Vec<usize>,
    bag: Vec<usize>,
    /// children sorted by (code, id) for the witness traversal
    children_by_code: Vec<usize>,
}

/// Torso of a DAG node: induced bag plus cliques on the node's own boundary
/// and on each child's boundary.
fn dag_torso(g: &Graph, d: &TreelikeDecomposition, node: usize, children: &[usize]) -> Graph {
    let bag = &d.nodes[node].bag;
    let labels: Vec<usize> = bag.as_slice().to_vec();
    let index: HashMap<usize, usize> = labels.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, &v) in labels.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(&j) = index.get(&w) {
                if i < j {
                    edges.insert((i, j));
                }
            }
        }
    }
    let mut clique = |set: &[usize]| {
        for (a, &u) in set.iter().enumerate() {
            for &w in &set[a + 1..] {
                let (i, j) = (index[&u], index[&w]);
                edges.insert((i.min(j), i.max(j)));
            }
        }
    };
    clique(d.nodes[node].boundary.as_slice());
    for &c in children {
        clique(d.nodes[c].boundary.as_slice());
    }
    Graph::from_edges(labels.len(), edges).unwrap()
}

fn node_code(
    g: &Graph,
    d: &TreelikeDecomposition,
    node: usize,
    ccfg: &CanonConfig,
    memo: &mut Vec<Option<NodeCode>>,
) {
    if memo[node].is_some() {
        return;
    }
    let children = d.children(node);
    for &c in &children {
        node_code(g, d, c, ccfg, memo);
    }
    let bag: Vec<usize> = d.nodes[node].bag.as_slice().to_vec();
    // color each bag vertex by (child-code multiset rank, boundary flag)
    let mut multisets: Vec<Vec<&[u8]>> = Vec::with_capacity(bag.len());
    for &v in &bag {
        let mut ms: Vec<&[u8]> = children
            .iter()
            .filter(|&&c| d.nodes[c].boundary.contains(v))
            .map(|&c| memo[c].as_ref().unwrap().code.as_slice())
            .collect();
        ms.sort_unstable();
        multisets.push(ms);
    }
    let mut distinct: Vec<&Vec<&[u8]>> = multisets.iter().filter(|m| !m.is_empty()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let colors: Vec<u32> = bag
        .iter()
        .zip(&multisets)
        .map(|(&v, ms)| {
            let rank = if ms.is_empty() {
                0
            } else {
                1 + distinct.binary_search(&ms).unwrap()
            } as u32;
            let flag = u32::from(d.nodes[node].boundary.contains(v));
            2 * rank + flag
        })
        .collect();
    let torso = dag_torso(g, d, node, &children);
    let cf = canonise_torso(&ColoredGraph::new(torso, colors), ccfg);
    let mut code = cf.certificate;
    if !children.is_empty() {
        let mut blocks: Vec<(&[u8], usize)> = children
            .iter()
            .map(|&c| (memo[c].as_ref().unwrap().code.as_slice(), c))
            .collect();
        blocks.sort_unstable();
        code.extend_from_slice(&(blocks.len() as u32).to_be_bytes());
        for (b, _) in &blocks {
            code.extend_from_slice(&(b.len() as u32).to_be_bytes());
            code.extend_from_slice(b);
        }
        memo[node] = Some(NodeCode {
            code,
            torso_witness: cf.witness,
            bag,
            children_by_code: blocks.into_iter().map(|(_, c)| c).collect(),
        });
    } else {
        memo[node] = Some(NodeCode {
            code,
            torso_witness: cf.witness,
            bag,
            children_by_code: Vec::new(),
        });
    }
}

fn lift_unchecked(g: &Graph, d: &TreelikeDecomposition, ccfg: &CanonConfig) -> CanonicalForm {
    let n = g.n();
    if n == 0 {
        return empty_form();
    }
    let mut memo: Vec<Option<NodeCode>> = (0..d.nodes.len()).map(|_| None).collect();
    for &r in &d.roots {
        node_code(g, d, r, ccfg, &mut memo);
    }
    let mut root_codes: Vec<(&[u8], usize)> = d
        .roots
        .iter()
        .map(|&r| (memo[r].as_ref().unwrap().code.as_slice(), r))
        .collect();
    root_codes.sort_unstable();
    // a node code starts with a u32 vertex count whose first byte is 0 at
    // any realistic size, so the 0xFF multi-root tag cannot collide
    let certificate = if root_codes.len() == 1 {
        root_codes[0].0.to_vec()
    } else {
        let mut cert = vec![0xFFu8];
        cert.extend_from_slice(&(root_codes.len() as u32).to_be_bytes());
        for (b, _) in &root_codes {
            cert.extend_from_slice(&(b.len() as u32).to_be_bytes());
            cert.extend_from_slice(b);
        }
        cert
    };
    // witness: first-visit order along a code-sorted traversal, vertices
    // within a node ordered by the torso's canonical labeling
    let mut witness = vec![usize::MAX; n];
    let mut next_label = 0usize;
    let mut visited = vec![false; d.nodes.len()];
    let mut stack: Vec<usize> = root_codes.iter().rev().map(|&(_, r)| r).collect();
    while let Some(node) = stack.pop() {
        if visited[node] {
            continue;
        }
        visited[node] = true;
        let nc = memo[node].as_ref().unwrap();
        let mut by_pos: Vec<(usize, usize)> = nc
            .bag
            .iter()
            .enumerate()
            .map(|(i, &v)| (nc.torso_witness[i], v))
            .collect();
        by_pos.sort_unstable();
        for (_, v) in by_pos {
            if witness[v] == usize::MAX {
                witness[v] = next_label;
                next_label += 1;
            }
        }
        for &c in nc.children_by_code.iter().rev() {
            stack.push(c);
        }
    }
    for w in witness.iter_mut() {
        if *w == usize::MAX {
            *w = next_label;
            next_label += 1;
        }
    }
    CanonicalForm {
        certificate,
        witness,
    }
}

/// Combine torso canonical forms along a verified treelike decomposition
/// into a whole-graph canonical form.
pub fn lift_canonisation(
    g: &Graph,
    d: &TreelikeDecomposition,
    ocfg: &OracleConfig,
    ccfg: &CanonConfig,
) -> Result<CanonicalForm, CanonError> {
    let report = verify_treelike_axioms(g, d);
    if !report.ok {
        return Err(CanonError::InvalidDecomposition { report });
    }
    let report = verify_invariance(g, d, ocfg)?;
    if !report.ok {
        return Err(CanonError::InvalidDecomposition { report });
    }
    Ok(lift_unchecked(g, d, ccfg))
}

/// Canonical form of a whole graph: invariant decomposition followed by
/// lifting. The decomposition is invariant by construction, so it is not
/// re-verified here.
pub fn canonical_form(
    g: &Graph,
    c: &TorsoConstraint,
    budget: Budget,
    ocfg: &OracleConfig,
    ccfg: &CanonConfig,
) -> Result<CanonicalForm, CanonError> {
    if g.n() == 0 {
        return Ok(empty_form());
    }
    let d = invariant_decompose(g, c, budget, ocfg, TreelikeLimits::default())?;
    Ok(lift_unchecked(g, &d, ccfg))
}

/// Isomorphism via certificate equality.
pub fn isomorphic(
    g: &Graph,
    h: &Graph,
    c: &TorsoConstraint,
    budget: Budget,
    ocfg: &OracleConfig,
    ccfg: &CanonConfig,
) -> Result<bool, CanonError> {
    if g.n() != h.n() {
        return Ok(false);
    }
    let cg = canonical_form(g, c, budget, ocfg, ccfg)?;
    let ch = canonical_form(h, c, budget, ocfg, ccfg)?;
    Ok(cg.certificate == ch.certificate)
}
