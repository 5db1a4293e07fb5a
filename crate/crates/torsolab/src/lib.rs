//! Graph structure toolkit: tree decompositions with constrained torsos,
//! automorphism-invariant treelike decompositions, canonical forms lifted
//! from torsos, and a partial dominating set solver, all certified against
//! exact brute-force oracles at small scale.

pub mod canon;
pub mod decomposition;
pub mod graph;
pub mod oracles;
pub mod pds;
pub mod treelike;
