//! Tree decompositions whose torsos satisfy a disjunctive constraint:
//! an excluded minor, or bounded degree outside a bounded apex set.
//!
//! The decomposer is best-effort within a user budget; honesty comes from
//! `verify_decomposition`, which re-checks the three decomposition axioms
//! and the torso constraint of every node against the exact oracles.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, VertexSet};
use crate::oracles::{self, MinorModel, OracleConfig};

/// Disjunctive torso constraint: the torso must be free of `excluded_minor`
/// as a minor, OR there must be an apex set of at most `apex_budget`
/// vertices whose removal leaves maximum degree `degree_bound`.
#[derive(Debug, Clone)]
pub struct TorsoConstraint {
    pub excluded_minor: Option<Graph>,
    pub apex_budget: usize,
    pub degree_bound: Option<usize>,
}

impl TorsoConstraint {
    pub fn minor_free(pattern: Graph) -> Self {
        TorsoConstraint {
            excluded_minor: Some(pattern),
            apex_budget: 0,
            degree_bound: None,
        }
    }

    pub fn apex_degree(apex_budget: usize, degree_bound: usize) -> Self {
        TorsoConstraint {
            excluded_minor: None,
            apex_budget,
            degree_bound: Some(degree_bound),
        }
    }

    /// At least one arm of the disjunction must be active.
    pub fn is_wellformed(&self) -> bool {
        self.excluded_minor.is_some() || self.degree_bound.is_some()
    }
}

/// Rooted tree decomposition: bag per node, parent pointer per node, root
/// points to itself. Adhesion sets are derived, never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<VertexSet>,
    parent: Vec<usize>,
}

impl TreeDecomposition {
    pub fn new(bags: Vec<VertexSet>, parent: Vec<usize>) -> Result<Self, DecompositionError> {
        if bags.is_empty() {
            return Err(DecompositionError::Malformed("no nodes".into()));
        }
        if bags.len() != parent.len() {
            return Err(DecompositionError::Malformed(
                "bags and parent vectors differ in length".into(),
            ));
        }
        let mut roots = 0;
        for (i, &p) in parent.iter().enumerate() {
            if p >= bags.len() {
                return Err(DecompositionError::Malformed(format!(
                    "parent of node {i} out of range"
                )));
            }
            if p == i {
                roots += 1;
            }
        }
        if roots != 1 {
            return Err(DecompositionError::Malformed(format!(
                "expected exactly one root, found {roots}"
            )));
        }
        // acyclicity: walking up from any node must reach the root
        for start in 0..parent.len() {
            let mut cur = start;
            for _ in 0..=parent.len() {
                if parent[cur] == cur {
                    break;
                }
                cur = parent[cur];
            }
            if parent[cur] != cur {
                return Err(DecompositionError::Malformed(format!(
                    "parent pointers from node {start} do not reach a root"
                )));
            }
        }
        Ok(TreeDecomposition { bags, parent })
    }

    pub fn single_bag(bag: VertexSet) -> Self {
        TreeDecomposition {
            bags: vec![bag],
            parent: vec![0],
        }
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bag(&self, node: usize) -> &VertexSet {
        &self.bags[node]
    }

    pub fn bags(&self) -> &[VertexSet] {
        &self.bags
    }

    pub fn parent(&self, node: usize) -> usize {
        self.parent[node]
    }

    pub fn root(&self) -> usize {
        (0..self.parent.len()).find(|&i| self.parent[i] == i).unwrap()
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&i| self.parent[i] == node && i != node)
            .collect()
    }

    /// Intersection of a node's bag with its parent's bag (empty at the root).
    pub fn adhesion(&self, node: usize) -> VertexSet {
        if self.parent[node] == node {
            VertexSet::new()
        } else {
            self.bags[node].intersection(&self.bags[self.parent[node]])
        }
    }

    pub fn max_bag_size(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(0)
    }
}

// --- JSON wire format: {nodes:[{id, bag:[...], parent}], graph_ref} ---

#[derive(Serialize, Deserialize)]
struct TreeNodeJson {
    id: usize,
    bag: Vec<usize>,
    parent: usize,
}

#[derive(Serialize, Deserialize)]
struct TreeDecompositionJson {
    nodes: Vec<TreeNodeJson>,
    graph_ref: String,
}

impl TreeDecomposition {
    pub fn to_json(&self, graph_ref: &str) -> String {
        let doc = TreeDecompositionJson {
            nodes: (0..self.bags.len())
                .map(|i| TreeNodeJson {
                    id: i,
                    bag: self.bags[i].as_slice().to_vec(),
                    parent: self.parent[i],
                })
                .collect(),
            graph_ref: graph_ref.to_string(),
        };
        serde_json::to_string_pretty(&doc).unwrap()
    }

    /// Parse the JSON wire format; returns the decomposition and graph_ref.
    pub fn from_json(text: &str) -> Result<(Self, String), DecompositionError> {
        let doc: TreeDecompositionJson = serde_json::from_str(text)
            .map_err(|e| DecompositionError::Malformed(format!("bad JSON: {e}")))?;
        let n = doc.nodes.len();
        let mut bags = vec![VertexSet::new(); n];
        let mut parent = vec![usize::MAX; n];
        for node in &doc.nodes {
            if node.id >= n || parent[node.id] != usize::MAX {
                return Err(DecompositionError::Malformed(format!(
                    "node ids must be a permutation of 0..{n}"
                )));
            }
            bags[node.id] = VertexSet::from_iter(node.bag.iter().copied());
            parent[node.id] = node.parent;
        }
        let td = TreeDecomposition::new(bags, parent)?;
        Ok((td, doc.graph_ref))
    }
}

/// One verification failure with an independently re-checkable witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// A host vertex appears in no bag.
    Coverage { vertex: usize },
    /// A host edge has no bag containing both endpoints.
    EdgeCoverage { u: usize, v: usize },
    /// The bags containing `vertex` do not form a connected subtree.
    Connectivity { vertex: usize, nodes: Vec<usize> },
    /// The torso of `node` contains the excluded minor.
    TorsoMinor { node: usize, model: MinorModel },
    /// No apex set within budget leaves the torso of `node` with bounded degree.
    TorsoDegree { node: usize, offending: Vec<usize> },
    /// The torso of `node` is too large for the exact oracle.
    Unverifiable { node: usize, reason: String },
    /// An automorphism of the host does not fix the treelike decomposition;
    /// `bag` is a bag whose image is missing or wrongly connected.
    Invariance {
        automorphism: Vec<usize>,
        bag: Vec<usize>,
    },
    /// The arc relation of a treelike decomposition has a directed cycle.
    Acyclicity,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        VerificationReport {
            ok: violations.is_empty(),
            violations,
        }
    }
}

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("malformed tree decomposition: {0}")]
    Malformed(String),
    #[error("decomposition fails verification ({} violations)", report.violations.len())]
    Invalid { report: VerificationReport },
    #[error("no decomposition found within budget; offending part {part}")]
    NotFound {
        part: VertexSet,
        partial_bags: Vec<VertexSet>,
    },
    #[error("constraint has no active arm (need an excluded minor or a degree bound)")]
    EmptyConstraint,
}

/// Search budget for the decomposer.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_bag_size: usize,
    pub max_adhesion: usize,
}

/// Torso of a node: the bag's induced subgraph plus a clique on every
/// adhesion set incident to the node (toward the parent and each child).
/// Returned relabeled to 0..|bag| in bag order, with the bag as label map.
pub fn torso(
    g: &Graph,
    t: &TreeDecomposition,
    node: usize,
) -> Result<(Graph, Vec<usize>), DecompositionError> {
    let report = verify_axioms(g, t);
    if !report.ok {
        return Err(DecompositionError::Invalid { report });
    }
    Ok(torso_unchecked(g, t, node))
}

fn torso_unchecked(g: &Graph, t: &TreeDecomposition, node: usize) -> (Graph, Vec<usize>) {
    let bag = t.bag(node);
    let labels: Vec<usize> = bag.iter().collect();
    let index = |v: usize| labels.binary_search(&v).unwrap();
    let mut adj = vec![vec![false; labels.len()]; labels.len()];
    for (pos, &u) in labels.iter().enumerate() {
        for &v in g.neighbors(u) {
            if bag.contains(v) {
                adj[pos][index(v)] = true;
            }
        }
    }
    let mut adhesions: Vec<VertexSet> = t
        .children(node)
        .into_iter()
        .map(|c| t.adhesion(c))
        .collect();
    adhesions.push(t.adhesion(node));
    for a in &adhesions {
        let members: Vec<usize> = a.iter().map(index).collect();
        for (k, &x) in members.iter().enumerate() {
            for &y in &members[k + 1..] {
                adj[x][y] = true;
                adj[y][x] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for x in 0..labels.len() {
        for y in x + 1..labels.len() {
            if adj[x][y] {
                edges.push((x, y));
            }
        }
    }
    (Graph::from_edges(labels.len(), edges).unwrap(), labels)
}

/// Check only the three tree-decomposition axioms (coverage, edge coverage,
/// vertex connectivity), with witnesses for each failure.
pub fn verify_axioms(g: &Graph, t: &TreeDecomposition) -> VerificationReport {
    let mut violations = Vec::new();
    let mut holders: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (i, bag) in t.bags().iter().enumerate() {
        for v in bag.iter() {
            if v < g.n() {
                holders[v].push(i);
            }
        }
    }
    for v in 0..g.n() {
        if holders[v].is_empty() {
            violations.push(Violation::Coverage { vertex: v });
        }
    }
    for (u, v) in g.edges() {
        let covered = t.bags().iter().any(|b| b.contains(u) && b.contains(v));
        if !covered {
            violations.push(Violation::EdgeCoverage { u, v });
        }
    }
    // a subset of tree nodes is connected iff exactly one member's parent
    // lies outside the subset (counting the root as its own outside-parent)
    for v in 0..g.n() {
        if holders[v].is_empty() {
            continue;
        }
        let members: VertexSet = VertexSet::from_iter(holders[v].iter().copied());
        let tops = holders[v]
            .iter()
            .filter(|&&x| t.parent(x) == x || !members.contains(t.parent(x)))
            .count();
        if tops != 1 {
            violations.push(Violation::Connectivity {
                vertex: v,
                nodes: holders[v].clone(),
            });
        }
    }
    VerificationReport::from_violations(violations)
}

enum TorsoCheck {
    Pass,
    Fail(Vec<Violation>),
}

/// Does this torso satisfy the disjunctive constraint? `node` only labels
/// the produced violations.
fn check_torso_graph(
    torso: &Graph,
    node: usize,
    c: &TorsoConstraint,
    cfg: &OracleConfig,
) -> TorsoCheck {
    // degree arm first: cheap and oracle-free
    if let Some(d) = c.degree_bound {
        if find_apex_set(torso, c.apex_budget, d).is_some() {
            return TorsoCheck::Pass;
        }
    }
    let mut violations = Vec::new();
    if let Some(pattern) = &c.excluded_minor {
        match oracles::find_minor(pattern, torso, cfg) {
            Ok(None) => return TorsoCheck::Pass,
            Ok(Some(model)) => violations.push(Violation::TorsoMinor { node, model }),
            Err(e) => violations.push(Violation::Unverifiable {
                node,
                reason: e.to_string(),
            }),
        }
    }
    if let Some(d) = c.degree_bound {
        let offending: Vec<usize> = (0..torso.n()).filter(|&v| torso.degree(v) > d).collect();
        violations.push(Violation::TorsoDegree { node, offending });
    }
    TorsoCheck::Fail(violations)
}

/// Smallest apex set (at most `budget` vertices, drawn from the vertices of
/// degree above `d`, smallest subsets first, lexicographic within a size)
/// whose removal leaves maximum degree `d`. None if no such set exists.
pub fn find_apex_set(g: &Graph, budget: usize, d: usize) -> Option<VertexSet> {
    let high: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > d).collect();
    if high.is_empty() {
        return Some(VertexSet::new());
    }
    let budget = budget.min(high.len());
    for size in 1..=budget {
        let mut found = None;
        for_each_combination(&high, size, &mut |apex| {
            if found.is_some() {
                return;
            }
            let a = VertexSet::from_iter(apex.iter().copied());
            let ok = (0..g.n()).filter(|&v| !a.contains(v)).all(|v| {
                g.neighbors(v).iter().filter(|&&w| !a.contains(w)).count() <= d
            });
            if ok {
                found = Some(a);
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Calls `f` for every `size`-subset of `items`, in lexicographic order.
fn for_each_combination(items: &[usize], size: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], start: usize, size: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if acc.len() == size {
            f(acc);
            return;
        }
        let needed = size - acc.len();
        for i in start..=items.len().saturating_sub(needed) {
            acc.push(items[i]);
            rec(items, i + 1, size, acc, f);
            acc.pop();
        }
    }
    if size > items.len() {
        return;
    }
    let mut acc = Vec::with_capacity(size);
    rec(items, 0, size, &mut acc, f);
}

/// Verify the three axioms and then the torso constraint of every node.
pub fn verify_decomposition(
    g: &Graph,
    t: &TreeDecomposition,
    c: &TorsoConstraint,
    cfg: &OracleConfig,
) -> VerificationReport {
    let mut violations = verify_axioms(g, t).violations;
    if !c.is_wellformed() {
        // no active arm: nothing to check beyond axioms
        return VerificationReport::from_violations(violations);
    }
    for node in 0..t.len() {
        let (tg, _) = torso_unchecked(g, t, node);
        if let TorsoCheck::Fail(vs) = check_torso_graph(&tg, node, c, cfg) {
            violations.extend(vs);
        }
    }
    VerificationReport::from_violations(violations)
}

/// Smallest balanced separator: a set S with |S| <= max_size such that every
/// component of g - S contains at most half of the vertices of w.
/// Deterministic: lexicographically least among the minimum-size candidates.
pub fn find_separator(g: &Graph, w: &VertexSet, max_size: usize) -> Option<VertexSet> {
    let all = VertexSet::from_iter(0..g.n());
    let vertices: Vec<usize> = (0..g.n()).collect();
    for size in 0..=max_size.min(g.n()) {
        let mut found = None;
        for_each_combination(&vertices, size, &mut |sep| {
            if found.is_some() {
                return;
            }
            let s = VertexSet::from_iter(sep.iter().copied());
            if separator_is_balanced(g, &all, &s, w) {
                found = Some(s);
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Every component of (g restricted to `within`) minus `removed` meets at
/// most half of `w`.
pub fn separator_is_balanced(g: &Graph, within: &VertexSet, removed: &VertexSet, w: &VertexSet) -> bool {
    let limit = w.len() / 2;
    g.components_within(within, removed)
        .iter()
        .all(|comp| comp.iter().filter(|&v| w.contains(v)).count() <= limit)
}

/// A "part" of the recursive decomposition: vertex set P with boundary
/// B ⊆ P toward the already-built side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Part {
    pub vertices: VertexSet,
    pub boundary: VertexSet,
}

/// All balanced separators of a given size for a part, lexicographic order.
/// S is drawn from P \ B; balance is measured against w = P after removing
/// B ∪ S.
pub(crate) fn balanced_separators_of_size(g: &Graph, part: &Part, size: usize) -> Vec<VertexSet> {
    let interior: Vec<usize> = part.vertices.difference(&part.boundary).iter().collect();
    let mut out = Vec::new();
    for_each_combination(&interior, size, &mut |sep| {
        let s = VertexSet::from_iter(sep.iter().copied());
        let removed = part.boundary.union(&s);
        if separator_is_balanced(g, &part.vertices, &removed, &part.vertices) {
            out.push(s);
        }
    });
    out
}

/// Children of a part once `bag` = B ∪ S has been fixed: one part per
/// component of P - bag, with the component's neighborhood as boundary.
/// Returns None if some child makes no progress (part not strictly smaller).
pub(crate) fn split_part(g: &Graph, part: &Part, bag: &VertexSet) -> Option<Vec<Part>> {
    let comps = g.components_within(&part.vertices, bag);
    if comps.is_empty() {
        return None;
    }
    let mut children = Vec::new();
    for comp in comps {
        let mut boundary = VertexSet::new();
        for v in comp.iter() {
            for &u in g.neighbors(v) {
                if bag.contains(u) {
                    boundary.insert(u);
                }
            }
        }
        let vertices = comp.union(&boundary);
        if vertices.len() >= part.vertices.len() {
            return None;
        }
        children.push(Part { vertices, boundary });
    }
    Some(children)
}

/// The torso a node will have once its children are fixed: induced subgraph
/// of the bag plus cliques on the parent boundary and each child boundary.
pub(crate) fn prospective_torso(
    g: &Graph,
    bag: &VertexSet,
    parent_boundary: &VertexSet,
    child_boundaries: &[VertexSet],
) -> Graph {
    let labels: Vec<usize> = bag.iter().collect();
    let index = |v: usize| labels.binary_search(&v).unwrap();
    let mut adj = vec![vec![false; labels.len()]; labels.len()];
    for (pos, &u) in labels.iter().enumerate() {
        for &v in g.neighbors(u) {
            if bag.contains(v) {
                adj[pos][index(v)] = true;
            }
        }
    }
    for a in std::iter::once(parent_boundary).chain(child_boundaries.iter()) {
        let members: Vec<usize> = a.iter().map(index).collect();
        for (k, &x) in members.iter().enumerate() {
            for &y in &members[k + 1..] {
                adj[x][y] = true;
                adj[y][x] = true;
            }
        }
    }
    let mut edges = Vec::new();
    for x in 0..labels.len() {
        for y in x + 1..labels.len() {
            if adj[x][y] {
                edges.push((x, y));
            }
        }
    }
    Graph::from_edges(labels.len(), edges).unwrap()
}

/// Whether a part can stand as a single leaf bag under the budget and
/// constraint, given its boundary clique.
fn leaf_ok(g: &Graph, part: &Part, c: &TorsoConstraint, budget: &Budget, cfg: &OracleConfig) -> bool {
    if part.vertices.len() > budget.max_bag_size || part.boundary.len() > budget.max_adhesion {
        return false;
    }
    let torso = prospective_torso(g, &part.vertices, &part.boundary, &[]);
    matches!(check_torso_graph(&torso, 0, c, cfg), TorsoCheck::Pass)
}

struct TreeBuilder<'a> {
    g: &'a Graph,
    c: &'a TorsoConstraint,
    budget: Budget,
    cfg: &'a OracleConfig,
    bags: Vec<VertexSet>,
    parent: Vec<usize>,
}

impl TreeBuilder<'_> {
    fn push(&mut self, bag: VertexSet, parent: Option<usize>) -> usize {
        let id = self.bags.len();
        self.bags.push(bag);
        self.parent.push(parent.unwrap_or(id));
        id
    }

    /// Build the subtree for `part`; returns the new node id or the
    /// offending part on failure.
    fn build(&mut self, part: &Part, parent: Option<usize>) -> Result<usize, Part> {
        if leaf_ok(self.g, part, self.c, &self.budget, self.cfg) {
            return Ok(self.push(part.vertices.clone(), parent));
        }
        let interior = part.vertices.difference(&part.boundary);
        let max_sep = self
            .budget
            .max_bag_size
            .saturating_sub(part.boundary.len())
            .min(interior.len());
        for size in 0..=max_sep {
            'sep: for s in balanced_separators_of_size(self.g, part, size) {
                let bag = part.boundary.union(&s);
                if bag.len() > self.budget.max_bag_size {
                    continue;
                }
                let Some(children) = split_part(self.g, part, &bag) else {
                    continue;
                };
                if children.iter().any(|ch| ch.boundary.len() > self.budget.max_adhesion) {
                    continue;
                }
                let child_boundaries: Vec<VertexSet> =
                    children.iter().map(|ch| ch.boundary.clone()).collect();
                let torso = prospective_torso(self.g, &bag, &part.boundary, &child_boundaries);
                if !matches!(check_torso_graph(&torso, 0, self.c, self.cfg), TorsoCheck::Pass) {
                    continue;
                }
                let checkpoint = self.bags.len();
                let node = self.push(bag.clone(), parent);
                for ch in &children {
                    if self.build(ch, Some(node)).is_err() {
                        self.bags.truncate(checkpoint);
                        self.parent.truncate(checkpoint);
                        continue 'sep;
                    }
                }
                return Ok(node);
            }
        }
        Err(part.clone())
    }
}

/// Compute a tree decomposition of `g` whose every torso satisfies `c`,
/// within the bag/adhesion budget. Self-certifying: the result always
/// passes `verify_decomposition`.
pub fn decompose(
    g: &Graph,
    c: &TorsoConstraint,
    budget: Budget,
    cfg: &OracleConfig,
) -> Result<TreeDecomposition, DecompositionError> {
    if !c.is_wellformed() {
        return Err(DecompositionError::EmptyConstraint);
    }
    if g.n() == 0 {
        return Ok(TreeDecomposition::single_bag(VertexSet::new()));
    }
    let comps = g.components();
    let mut builder = TreeBuilder {
        g,
        c,
        budget,
        cfg: cfg,
        bags: Vec::new(),
        parent: Vec::new(),
    };
    let fail = |builder: TreeBuilder, part: Part| DecompositionError::NotFound {
        part: part.vertices,
        partial_bags: builder.bags,
    };
    if comps.len() == 1 {
        let part = Part {
            vertices: comps.into_iter().next().unwrap(),
            boundary: VertexSet::new(),
        };
        match builder.build(&part, None) {
            Ok(_) => {}
            Err(p) => return Err(fail(builder, p)),
        }
    } else {
        // synthetic empty root joining the components
        let root = builder.push(VertexSet::new(), None);
        for comp in comps {
            let part = Part {
                vertices: comp,
                boundary: VertexSet::new(),
            };
            match builder.build(&part, Some(root)) {
                Ok(_) => {}
                Err(p) => return Err(fail(builder, p)),
            }
        }
    }
    TreeDecomposition::new(builder.bags, builder.parent)
}
