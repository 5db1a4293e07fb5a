//! Automorphism-invariant treelike (DAG-shaped) decompositions.
//!
//! Where the tree decomposer picks one lexicographically-least separator,
//! the invariant decomposer keeps every minimum-size balanced separator of
//! the current part, one DAG child per (separator, component) pair. Bags
//! are determined purely by graph-theoretic properties, so every
//! automorphism of the host maps the node set and arc set onto themselves.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::decomposition::{
    balanced_separators_of_size, prospective_torso, split_part, Budget, DecompositionError, Part,
    TorsoConstraint, VerificationReport, Violation,
};
use crate::graph::{Graph, VertexSet};
use crate::oracles::{automorphisms, OracleConfig, OracleError};

/// A DAG node: the bag plus its role tag (the boundary and part it was
/// generated from), which disambiguates bags that occur in several roles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DagNode {
    pub bag: VertexSet,
    pub boundary: VertexSet,
    pub part: VertexSet,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreelikeDecomposition {
    pub nodes: Vec<DagNode>,
    /// (parent, child) arcs, sorted and deduplicated.
    pub arcs: Vec<(usize, usize)>,
    pub roots: Vec<usize>,
}

impl TreelikeDecomposition {
    pub fn children(&self, node: usize) -> Vec<usize> {
        self.arcs
            .iter()
            .filter(|&&(p, _)| p == node)
            .map(|&(_, c)| c)
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TreelikeLimits {
    /// Hard ceiling on the number of DAG nodes.
    pub max_nodes: usize,
}

impl Default for TreelikeLimits {
    fn default() -> Self {
        TreelikeLimits { max_nodes: 10_000 }
    }
}

// --- JSON wire format ---

#[derive(Serialize, Deserialize)]
struct DagNodeJson {
    id: usize,
    bag: Vec<usize>,
    boundary: Vec<usize>,
    part: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreelikeJson {
    nodes: Vec<DagNodeJson>,
    arcs: Vec<(usize, usize)>,
    roots: Vec<usize>,
}

impl TreelikeDecomposition {
    pub fn to_json(&self) -> String {
        let doc = TreelikeJson {
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| DagNodeJson {
                    id,
                    bag: n.bag.as_slice().to_vec(),
                    boundary: n.boundary.as_slice().to_vec(),
                    part: n.part.as_slice().to_vec(),
                })
                .collect(),
            arcs: self.arcs.clone(),
            roots: self.roots.clone(),
        };
        serde_json::to_string_pretty(&doc).unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self, DecompositionError> {
        let doc: TreelikeJson = serde_json::from_str(text)
            .map_err(|e| DecompositionError::Malformed(format!("bad JSON: {e}")))?;
        let n = doc.nodes.len();
        let mut nodes = vec![None; n];
        for nj in doc.nodes {
            if nj.id >= n || nodes[nj.id].is_some() {
                return Err(DecompositionError::Malformed(format!(
                    "node ids must be a permutation of 0..{n}"
                )));
            }
            nodes[nj.id] = Some(DagNode {
                bag: VertexSet::from_iter(nj.bag),
                boundary: VertexSet::from_iter(nj.boundary),
                part: VertexSet::from_iter(nj.part),
            });
        }
        for &(p, c) in &doc.arcs {
            if p >= n || c >= n {
                return Err(DecompositionError::Malformed(format!(
                    "arc ({p},{c}) out of range"
                )));
            }
        }
        for &r in &doc.roots {
            if r >= n {
                return Err(DecompositionError::Malformed(format!("root {r} out of range")));
            }
        }
        Ok(TreelikeDecomposition {
            nodes: nodes.into_iter().map(Option::unwrap).collect(),
            arcs: doc.arcs,
            roots: doc.roots,
        })
    }
}

struct DagBuilder<'a> {
    g: &'a Graph,
    c: &'a TorsoConstraint,
    budget: Budget,
    cfg: &'a OracleConfig,
    limits: TreelikeLimits,
    nodes: Vec<DagNode>,
    index: HashMap<DagNode, usize>,
    arcs: BTreeSet<(usize, usize)>,
    /// entry node ids per expanded part
    memo: HashMap<Part, Vec<usize>>,
}

enum BuildFail {
    NotFound(Part),
    TooLarge,
}

impl DagBuilder<'_> {
    fn intern(&mut self, node: DagNode) -> Result<usize, BuildFail> {
        if let Some(&id) = self.index.get(&node) {
            return Ok(id);
        }
        if self.nodes.len() >= self.limits.max_nodes {
            return Err(BuildFail::TooLarge);
        }
        let id = self.nodes.len();
        self.nodes.push(node.clone());
        self.index.insert(node, id);
        Ok(id)
    }

    fn leaf_ok(&self, part: &Part) -> bool {
        if part.vertices.len() > self.budget.max_bag_size
            || part.boundary.len() > self.budget.max_adhesion
        {
            return false;
        }
        let torso = prospective_torso(self.g, &part.vertices, &part.boundary, &[]);
        torso_passes(&torso, self.c, self.cfg)
    }

    /// Expand a part into its entry nodes (one leaf, or one internal node
    /// per kept separator).
    fn expand(&mut self, part: &Part) -> Result<Vec<usize>, BuildFail> {
        if let Some(ids) = self.memo.get(part) {
            return Ok(ids.clone());
        }
        if self.leaf_ok(part) {
            let id = self.intern(DagNode {
                bag: part.vertices.clone(),
                boundary: part.boundary.clone(),
                part: part.vertices.clone(),
            })?;
            self.memo.insert(part.clone(), vec![id]);
            return Ok(vec![id]);
        }
        let interior = part.vertices.difference(&part.boundary);
        let max_sep = self
            .budget
            .max_bag_size
            .saturating_sub(part.boundary.len())
            .min(interior.len());
        // the kept set: all balanced separators of the minimum size that
        // admits at least one locally valid split
        let mut kept: Vec<(VertexSet, Vec<Part>)> = Vec::new();
        for size in 0..=max_sep {
            for s in balanced_separators_of_size(self.g, part, size) {
                let bag = part.boundary.union(&s);
                if bag.len() > self.budget.max_bag_size {
                    continue;
                }
                let Some(children) = split_part(self.g, part, &bag) else {
                    continue;
                };
                if children
                    .iter()
                    .any(|ch| ch.boundary.len() > self.budget.max_adhesion)
                {
                    continue;
                }
                let child_boundaries: Vec<VertexSet> =
                    children.iter().map(|ch| ch.boundary.clone()).collect();
                let torso = prospective_torso(self.g, &bag, &part.boundary, &child_boundaries);
                if !torso_passes(&torso, self.c, self.cfg) {
                    continue;
                }
                kept.push((s, children));
            }
            if !kept.is_empty() {
                break;
            }
        }
        if kept.is_empty() {
            return Err(BuildFail::NotFound(part.clone()));
        }
        let mut entries = Vec::new();
        for (s, children) in kept {
            let bag = part.boundary.union(&s);
            let id = self.intern(DagNode {
                bag,
                boundary: part.boundary.clone(),
                part: part.vertices.clone(),
            })?;
            entries.push(id);
            for ch in &children {
                for child_entry in self.expand(ch)? {
                    self.arcs.insert((id, child_entry));
                }
            }
        }
        self.memo.insert(part.clone(), entries.clone());
        Ok(entries)
    }
}

fn torso_passes(torso: &Graph, c: &TorsoConstraint, cfg: &OracleConfig) -> bool {
    use crate::decomposition::find_apex_set;
    if let Some(d) = c.degree_bound {
        if find_apex_set(torso, c.apex_budget, d).is_some() {
            return true;
        }
    }
    if let Some(pattern) = &c.excluded_minor {
        if matches!(crate::oracles::find_minor(pattern, torso, cfg), Ok(None)) {
            return true;
        }
    }
    false
}

/// Build an invariant treelike decomposition. Deterministic, and fixed (as a
/// set of nodes and arcs) by every automorphism of `g`.
pub fn invariant_decompose(
    g: &Graph,
    c: &TorsoConstraint,
    budget: Budget,
    cfg: &OracleConfig,
    limits: TreelikeLimits,
) -> Result<TreelikeDecomposition, DecompositionError> {
    if !c.is_wellformed() {
        return Err(DecompositionError::EmptyConstraint);
    }
    if g.n() == 0 {
        return Ok(TreelikeDecomposition {
            nodes: vec![DagNode {
                bag: VertexSet::new(),
                boundary: VertexSet::new(),
                part: VertexSet::new(),
            }],
            arcs: vec![],
            roots: vec![0],
        });
    }
    let mut builder = DagBuilder {
        g,
        c,
        budget,
        cfg,
        limits,
        nodes: Vec::new(),
        index: HashMap::new(),
        arcs: BTreeSet::new(),
        memo: HashMap::new(),
    };
    let mut roots = Vec::new();
    for comp in g.components() {
        let part = Part {
            vertices: comp,
            boundary: VertexSet::new(),
        };
        match builder.expand(&part) {
            Ok(entries) => roots.extend(entries),
            Err(BuildFail::NotFound(p)) => {
                return Err(DecompositionError::NotFound {
                    part: p.vertices,
                    partial_bags: builder.nodes.into_iter().map(|n| n.bag).collect(),
                })
            }
            Err(BuildFail::TooLarge) => {
                return Err(DecompositionError::Malformed(format!(
                    "DAG node ceiling {} exceeded",
                    builder.limits.max_nodes
                )))
            }
        }
    }
    // canonical order: (|bag|, bag, boundary, part)
    let mut order: Vec<usize> = (0..builder.nodes.len()).collect();
    order.sort_by(|&a, &b| {
        let (na, nb) = (&builder.nodes[a], &builder.nodes[b]);
        (na.bag.len(), &na.bag, &na.boundary, &na.part)
            .cmp(&(nb.bag.len(), &nb.bag, &nb.boundary, &nb.part))
    });
    let mut remap = vec![0usize; builder.nodes.len()];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }
    let mut nodes = vec![
        DagNode {
            bag: VertexSet::new(),
            boundary: VertexSet::new(),
            part: VertexSet::new(),
        };
        builder.nodes.len()
    ];
    for (old, node) in builder.nodes.into_iter().enumerate() {
        nodes[remap[old]] = node;
    }
    let mut arcs: Vec<(usize, usize)> = builder
        .arcs
        .into_iter()
        .map(|(p, c)| (remap[p], remap[c]))
        .collect();
    arcs.sort_unstable();
    arcs.dedup();
    let mut roots: Vec<usize> = roots.into_iter().map(|r| remap[r]).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(TreelikeDecomposition { nodes, arcs, roots })
}

fn apply_to_set(set: &VertexSet, sigma: &[usize]) -> VertexSet {
    VertexSet::from_iter(set.iter().map(|v| sigma[v]))
}

/// Check that every automorphism of the host fixes the decomposition: the
/// permuted node set and arc set are exactly the originals.
pub fn verify_invariance(
    g: &Graph,
    d: &TreelikeDecomposition,
    cfg: &OracleConfig,
) -> Result<VerificationReport, OracleError> {
    let auts = automorphisms(g, cfg)?;
    let mut index: HashMap<&DagNode, usize> = HashMap::new();
    for (i, node) in d.nodes.iter().enumerate() {
        index.insert(node, i);
    }
    let arc_set: BTreeSet<(usize, usize)> = d.arcs.iter().copied().collect();
    let root_set: BTreeSet<usize> = d.roots.iter().copied().collect();
    let mut violations = Vec::new();
    'sigma: for sigma in &auts {
        let mut mapped = Vec::with_capacity(d.nodes.len());
        for node in &d.nodes {
            let image = DagNode {
                bag: apply_to_set(&node.bag, sigma),
                boundary: apply_to_set(&node.boundary, sigma),
                part: apply_to_set(&node.part, sigma),
            };
            match index.get(&image) {
                Some(&i) => mapped.push(i),
                None => {
                    violations.push(Violation::Invariance {
                        automorphism: sigma.clone(),
                        bag: node.bag.as_slice().to_vec(),
                    });
                    continue 'sigma;
                }
            }
        }
        for &(p, c) in &d.arcs {
            if !arc_set.contains(&(mapped[p], mapped[c])) {
                violations.push(Violation::Invariance {
                    automorphism: sigma.clone(),
                    bag: d.nodes[p].bag.as_slice().to_vec(),
                });
                continue 'sigma;
            }
        }
        for &r in &d.roots {
            if !root_set.contains(&mapped[r]) {
                violations.push(Violation::Invariance {
                    automorphism: sigma.clone(),
                    bag: d.nodes[r].bag.as_slice().to_vec(),
                });
                continue 'sigma;
            }
        }
    }
    Ok(VerificationReport {
        ok: violations.is_empty(),
        violations,
    })
}

/// Structural checks for a treelike decomposition: acyclicity, coverage,
/// edge coverage, and path-contiguity of each vertex along every
/// root-to-leaf unfolding (truncated at depth |V|).
pub fn verify_treelike_axioms(g: &Graph, d: &TreelikeDecomposition) -> VerificationReport {
    let mut violations = Vec::new();
    // acyclicity via DFS coloring
    let n_nodes = d.nodes.len();
    let mut color = vec![0u8; n_nodes]; // 0 unvisited, 1 on stack, 2 done
    fn dfs_cycle(v: usize, d: &TreelikeDecomposition, color: &mut [u8]) -> bool {
        color[v] = 1;
        for c in d.children(v) {
            if color[c] == 1 {
                return true;
            }
            if color[c] == 0 && dfs_cycle(c, d, color) {
                return true;
            }
        }
        color[v] = 2;
        false
    }
    let mut cyclic = false;
    for v in 0..n_nodes {
        if color[v] == 0 && dfs_cycle(v, d, &mut color) {
            cyclic = true;
            break;
        }
    }
    if cyclic {
        violations.push(Violation::Acyclicity);
        return VerificationReport {
            ok: false,
            violations,
        };
    }
    for v in 0..g.n() {
        if !d.nodes.iter().any(|node| node.bag.contains(v)) {
            violations.push(Violation::Coverage { vertex: v });
        }
    }
    for (u, v) in g.edges() {
        if !d
            .nodes
            .iter()
            .any(|node| node.bag.contains(u) && node.bag.contains(v))
        {
            violations.push(Violation::EdgeCoverage { u, v });
        }
    }
    // path contiguity: on every root-to-leaf path of the unfolding, the
    // nodes containing a vertex must be consecutive
    struct Walk<'a> {
        d: &'a TreelikeDecomposition,
        closed: Vec<bool>,
        bad: Option<usize>,
        visits: usize,
        max_depth: usize,
    }
    impl Walk<'_> {
        fn go(&mut self, node: usize, depth: usize) {
            if self.bad.is_some() || self.visits > 1_000_000 || depth > self.max_depth {
                return;
            }
            self.visits += 1;
            let bag = &self.d.nodes[node].bag;
            let mut reopened = None;
            for v in bag.iter() {
                if self.closed[v] {
                    reopened = Some(v);
                }
            }
            if let Some(v) = reopened {
                self.bad = Some(v);
                return;
            }
            let children = self.d.children(node);
            for c in &children {
                let child_bag = &self.d.nodes[*c].bag;
                let mut newly_closed = Vec::new();
                for v in bag.iter() {
                    if !child_bag.contains(v) {
                        self.closed[v] = true;
                        newly_closed.push(v);
                    }
                }
                self.go(*c, depth + 1);
                for v in newly_closed {
                    self.closed[v] = false;
                }
                if self.bad.is_some() {
                    return;
                }
            }
        }
    }
    let mut walk = Walk {
        d,
        closed: vec![false; g.n()],
        bad: None,
        visits: 0,
        max_depth: g.n() + 1,
    };
    for &r in &d.roots {
        walk.go(r, 0);
    }
    if let Some(v) = walk.bad {
        violations.push(Violation::Connectivity {
            vertex: v,
            nodes: (0..d.nodes.len())
                .filter(|&i| d.nodes[i].bag.contains(v))
                .collect(),
        });
    }
    VerificationReport {
        ok: violations.is_empty(),
        violations,
    }
}
