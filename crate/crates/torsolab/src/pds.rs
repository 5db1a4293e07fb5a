//! Partial Dominating Set: find a minimum-size vertex set whose closed
//! neighborhood covers at least `target` vertices. A brute-force oracle and
//! a dynamic program over a tree decomposition, certified against each other.

use std::collections::HashMap;

use thiserror::Error;

use crate::decomposition::{verify_axioms, TreeDecomposition, VerificationReport};
use crate::graph::{Graph, VertexSet};

#[derive(Debug, Clone)]
pub struct PdsInstance {
    pub graph: Graph,
    pub target: usize,
}

impl PdsInstance {
    pub fn new(graph: Graph, target: usize) -> Result<Self, PdsError> {
        if target > graph.n() {
            return Err(PdsError::TargetTooLarge {
                target,
                n: graph.n(),
            });
        }
        Ok(PdsInstance { graph, target })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdsSolution {
    pub chosen: VertexSet,
    pub dominated_count: usize,
}

#[derive(Debug, Error)]
pub enum PdsError {
    #[error("target {target} exceeds vertex count {n}")]
    TargetTooLarge { target: usize, n: usize },
    #[error("graph with {n} vertices exceeds the brute-force ceiling {ceiling}")]
    TooLarge { n: usize, ceiling: usize },
    #[error("decomposition fails verification ({} violations)", report.violations.len())]
    InvalidDecomposition { report: VerificationReport },
}

/// |N[chosen]|, recomputed from scratch.
pub fn dominated_count(g: &Graph, chosen: &VertexSet) -> usize {
    let mut hit = vec![false; g.n()];
    for v in chosen.iter() {
        hit[v] = true;
        for &w in g.neighbors(v) {
            hit[w] = true;
        }
    }
    hit.iter().filter(|&&h| h).count()
}

const BRUTE_CEILING: usize = 16;

/// Exact oracle: subsets by size, lexicographically within a size; the
/// first feasible subset is the answer.
pub fn solve_pds_brute(inst: &PdsInstance) -> Result<PdsSolution, PdsError> {
    let n = inst.graph.n();
    if n > BRUTE_CEILING {
        return Err(PdsError::TooLarge {
            n,
            ceiling: BRUTE_CEILING,
        });
    }
    let masks = if n == 0 {
        Vec::new()
    } else {
        inst.graph.neighbor_masks()
    };
    for size in 0..=n {
        let mut found: Option<Vec<usize>> = None;
        let mut current = Vec::with_capacity(size);
        // combinations in lexicographic order
        fn combos(
            start: usize,
            size: usize,
            n: usize,
            current: &mut Vec<usize>,
            check: &mut dyn FnMut(&[usize]) -> bool,
        ) -> bool {
            if current.len() == size {
                return check(current);
            }
            for v in start..n {
                if n - v < size - current.len() {
                    break;
                }
                current.push(v);
                if combos(v + 1, size, n, current, check) {
                    return true;
                }
                current.pop();
            }
            false
        }
        combos(0, size, n, &mut current, &mut |set| {
            let mut hit = 0u64;
            for &v in set {
                hit |= masks[v] | (1 << v);
            }
            if hit.count_ones() as usize >= inst.target {
                found = Some(set.to_vec());
                true
            } else {
                false
            }
        });
        if let Some(set) = found {
            let chosen = VertexSet::from_iter(set);
            let dominated = dominated_count(&inst.graph, &chosen);
            return Ok(PdsSolution {
                chosen,
                dominated_count: dominated,
            });
        }
    }
    unreachable!("choosing every vertex dominates all of them");
}

// --- DP over a tree decomposition ---
//
// Per-vertex states within the current bag; `k` counts forgotten vertices
// that were chosen or dominated when forgotten, capped at the target.
const UND: u8 = 0;
const DOM: u8 = 1;
const CHO: u8 = 2;

type Key = (Vec<u8>, usize);
type Val = (usize, u64); // (#chosen so far, chosen mask)

fn upsert(tbl: &mut HashMap<Key, Val>, key: Key, val: Val) {
    match tbl.get_mut(&key) {
        None => {
            tbl.insert(key, val);
        }
        Some(old) => {
            if val.0 < old.0 || (val.0 == old.0 && mask_lex_less(val.1, old.1)) {
                *old = val;
            }
        }
    }
}

/// Lexicographic order on equal-size vertex sets encoded as bitmasks: the
/// set owning the lowest differing vertex comes first.
fn mask_lex_less(a: u64, b: u64) -> bool {
    let d = a ^ b;
    if d == 0 {
        return false;
    }
    a >> d.trailing_zeros() & 1 == 1
}

struct Dp<'a> {
    g: &'a Graph,
    t: &'a TreeDecomposition,
    target: usize,
}

impl Dp<'_> {
    fn introduce(&self, bag: &mut Vec<usize>, tbl: HashMap<Key, Val>, v: usize) -> HashMap<Key, Val> {
        let pos = bag.binary_search(&v).unwrap_err();
        bag.insert(pos, v);
        let adjacent: Vec<bool> = bag.iter().map(|&u| self.g.has_edge(u, v)).collect();
        let mut out = HashMap::with_capacity(tbl.len() * 2);
        for ((mut s, k), (cost, mask)) in tbl {
            s.insert(pos, UND);
            // v not chosen: dominated iff some chosen bag neighbor
            let mut plain = s.clone();
            plain[pos] = if s
                .iter()
                .enumerate()
                .any(|(i, &st)| st == CHO && adjacent[i])
            {
                DOM
            } else {
                UND
            };
            upsert(&mut out, (plain, k), (cost, mask));
            // v chosen: undominated bag neighbors become dominated
            let mut picked = s;
            picked[pos] = CHO;
            for (i, st) in picked.iter_mut().enumerate() {
                if *st == UND && adjacent[i] {
                    *st = DOM;
                }
            }
            upsert(&mut out, (picked, k), (cost + 1, mask | 1 << v));
        }
        out
    }

    fn forget(&self, bag: &mut Vec<usize>, tbl: HashMap<Key, Val>, v: usize) -> HashMap<Key, Val> {
        let pos = bag.binary_search(&v).unwrap();
        bag.remove(pos);
        let mut out = HashMap::with_capacity(tbl.len());
        for ((mut s, k), val) in tbl {
            let st = s.remove(pos);
            let k = (k + usize::from(st != UND)).min(self.target);
            upsert(&mut out, (s, k), val);
        }
        out
    }

    fn join(&self, a: HashMap<Key, Val>, b: HashMap<Key, Val>) -> HashMap<Key, Val> {
        // group the right table by chosen-flag pattern
        let mut by_chosen: HashMap<Vec<bool>, Vec<(Key, Val)>> = HashMap::new();
        for (key, val) in b {
            let flags: Vec<bool> = key.0.iter().map(|&st| st == CHO).collect();
            by_chosen.entry(flags).or_default().push((key, val));
        }
        let mut out = HashMap::new();
        for ((s1, k1), (c1, m1)) in a {
            let flags: Vec<bool> = s1.iter().map(|&st| st == CHO).collect();
            let bag_chosen = flags.iter().filter(|&&f| f).count();
            let Some(partners) = by_chosen.get(&flags) else {
                continue;
            };
            for ((s2, k2), (c2, m2)) in partners {
                let s: Vec<u8> = s1
                    .iter()
                    .zip(s2)
                    .map(|(&x, &y)| x.max(y))
                    .collect();
                let k = (k1 + k2).min(self.target);
                let cost = c1 + c2 - bag_chosen;
                upsert(&mut out, (s, k), (cost, m1 | m2));
            }
        }
        out
    }

    /// DP table for `node`'s bag, built by morphing and joining child tables.
    fn run(&self, node: usize) -> (Vec<usize>, HashMap<Key, Val>) {
        let bag: Vec<usize> = self.t.bag(node).as_slice().to_vec();
        let mut acc: Option<HashMap<Key, Val>> = None;
        for child in self.t.children(node) {
            let (mut cbag, mut ctbl) = self.run(child);
            for v in cbag.clone() {
                if !bag.contains(&v) {
                    ctbl = self.forget(&mut cbag, ctbl, v);
                }
            }
            for &v in &bag {
                if !cbag.contains(&v) {
                    ctbl = self.introduce(&mut cbag, ctbl, v);
                }
            }
            debug_assert_eq!(cbag, bag);
            acc = Some(match acc {
                None => ctbl,
                Some(prev) => self.join(prev, ctbl),
            });
        }
        let tbl = match acc {
            Some(tbl) => tbl,
            None => {
                let mut b = Vec::new();
                let mut tbl = HashMap::new();
                tbl.insert((Vec::new(), 0), (0, 0u64));
                for &v in &bag {
                    tbl = self.introduce(&mut b, tbl, v);
                }
                tbl
            }
        };
        (bag, tbl)
    }
}

/// DP over a verified tree decomposition; same optimum size as the brute
/// oracle, exponential only in the maximum bag size.
pub fn solve_pds_dp(inst: &PdsInstance, t: &TreeDecomposition) -> Result<PdsSolution, PdsError> {
    let n = inst.graph.n();
    assert!(n <= 64, "witness masks require n <= 64");
    let report = verify_axioms(&inst.graph, t);
    if !report.ok {
        return Err(PdsError::InvalidDecomposition { report });
    }
    let dp = Dp {
        g: &inst.graph,
        t,
        target: inst.target,
    };
    let (mut bag, mut tbl) = dp.run(t.root());
    for v in bag.clone() {
        tbl = dp.forget(&mut bag, tbl, v);
    }
    let mut best: Option<Val> = None;
    for ((_, k), val) in tbl {
        if k >= inst.target {
            best = Some(match best {
                None => val,
                Some(b) if val.0 < b.0 || (val.0 == b.0 && mask_lex_less(val.1, b.1)) => val,
                Some(b) => b,
            });
        }
    }
    let (_, mask) = best.expect("choosing every vertex is always feasible");
    let chosen = VertexSet::from_iter((0..n).filter(|&v| mask >> v & 1 == 1));
    let dominated = dominated_count(&inst.graph, &chosen);
    debug_assert!(dominated >= inst.target);
    Ok(PdsSolution {
        chosen,
        dominated_count: dominated,
    })
}

/// Tree decomposition from an elimination order (fill-in clique tree);
/// useful for exercising the DP on nontrivial decompositions.
pub fn elimination_decomposition(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.n();
    assert_eq!(order.len(), n);
    let mut pos = vec![0usize; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    // fill graph: eliminate in order, connecting higher neighbors
    let mut adj: Vec<std::collections::BTreeSet<usize>> = (0..n)
        .map(|v| g.neighbors(v).iter().copied().collect())
        .collect();
    let mut bags: Vec<VertexSet> = Vec::with_capacity(n + 1);
    for &v in order {
        let higher: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        for (i, &a) in higher.iter().enumerate() {
            for &b in &higher[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut bag = VertexSet::from_iter(higher);
        bag.insert(v);
        bags.push(bag);
    }
    // parent of bag i: bag of the earliest-eliminated later vertex in it;
    // bags with no later vertex hang off a synthetic empty root
    let root = n;
    bags.push(VertexSet::new());
    let mut parent = vec![root; n + 1];
    for (i, &v) in order.iter().enumerate() {
        if let Some(p) = bags[i]
            .iter()
            .filter(|&u| u != v)
            .map(|u| pos[u])
            .min()
        {
            parent[i] = p;
        }
    }
    TreeDecomposition::new(bags, parent).expect("clique tree construction is well formed")
}
