//! Path-enumeration form of the coarse-graining weights.
//!
//! The propagator defines a directed graph on the index set: node `i` draws
//! from node `j` whenever `T[i][j]` is structurally nonzero. The fine error
//! at step `k` is a sum over walks that end at the node of interest and pass
//! exclusively through fine nodes, each walk weighted by the product of its
//! `T` entries. Exhaustive depth-first enumeration of those walks is an
//! independent ground truth for the matrix-form memory weights on tiny
//! instances: the accumulated weight of coarse origin `j` at lag `l` must
//! equal `((Q^d T Q)^l Q^d T P)[i][j]` entrywise.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, Scalar, Vector, ZERO};
use crate::splitting::CFSplit;
use std::collections::HashMap;

/// Enumeration budget; exhaustive search is intentionally confined to sizes
/// where it is trivially correct and fast.
pub const MAX_NODES: usize = 12;
pub const MAX_DEPTH: usize = 6;

/// Propagator adjacency with a coarse/fine split.
#[derive(Clone, Debug)]
pub struct PropagationGraph {
    split: CFSplit,
    /// `neighbors[i]` lists `(j, T[i][j])` over the structural nonzeros.
    neighbors: Vec<Vec<(usize, Scalar)>>,
    /// Coarse node -> position within the coarse ordering.
    coarse_pos: HashMap<usize, usize>,
}

impl PropagationGraph {
    pub fn new(t: &DenseMatrix, split: &CFSplit) -> Result<Self> {
        let n = split.n();
        if t.rows() != n || t.cols() != n {
            return Err(Error::DimensionMismatch {
                op: "propagation graph",
                left_rows: n,
                left_cols: n,
                right_rows: t.rows(),
                right_cols: t.cols(),
            });
        }
        let neighbors = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| t[(i, j)] != ZERO)
                    .map(|j| (j, t[(i, j)]))
                    .collect()
            })
            .collect();
        let coarse_pos = split
            .coarse()
            .iter()
            .enumerate()
            .map(|(pos, &node)| (node, pos))
            .collect();
        Ok(PropagationGraph {
            split: split.clone(),
            neighbors,
            coarse_pos,
        })
    }

    pub fn split(&self) -> &CFSplit {
        &self.split
    }

    pub fn is_coarse(&self, node: usize) -> bool {
        self.coarse_pos.contains_key(&node)
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, Scalar)] {
        &self.neighbors[node]
    }
}

/// Accumulated walk weights ending at one fine node.
#[derive(Clone, Debug, Default)]
pub struct PathWeights {
    /// `(origin node, lag l)` -> total weight of walks with `l` fine-fine
    /// steps followed by one step from the coarse origin.
    pub coarse: HashMap<(usize, usize), Scalar>,
    /// Fine origin -> total weight of walks with exactly `k` fine-fine steps.
    pub fine_at_depth: HashMap<usize, Scalar>,
}

/// Enumerate every fine-only walk of length up to `k` ending at fine node
/// `i`, exhaustively and without pruning.
pub fn enumerate_fine_paths(graph: &PropagationGraph, i: usize, k: usize) -> Result<PathWeights> {
    let n = graph.split.n();
    if n > MAX_NODES || k > MAX_DEPTH {
        return Err(Error::EnumerationBudget {
            n,
            max_n: MAX_NODES,
            k,
            max_k: MAX_DEPTH,
        });
    }
    if graph.is_coarse(i) {
        return Err(Error::InvalidSplit {
            reason: format!("node {i} is coarse; enumeration targets fine nodes"),
        });
    }
    let mut weights = PathWeights::default();
    let one = Scalar::new(1.0, 0.0);
    walk(graph, i, one, 0, k, &mut weights);
    Ok(weights)
}

fn walk(
    graph: &PropagationGraph,
    node: usize,
    weight: Scalar,
    fine_steps: usize,
    k: usize,
    out: &mut PathWeights,
) {
    for &(j, t_ij) in graph.neighbors(node) {
        let w = weight * t_ij;
        if graph.is_coarse(j) {
            if fine_steps < k {
                *out.coarse.entry((j, fine_steps)).or_insert(ZERO) += w;
            }
        } else if fine_steps + 1 == k {
            *out.fine_at_depth.entry(j).or_insert(ZERO) += w;
        } else if fine_steps + 1 < k {
            walk(graph, j, w, fine_steps + 1, k, out);
        }
    }
}

/// Memory interpolation evaluated per component from enumerated walks:
/// the estimate at fine node `i` is
/// `sum_{l=0}^{k-1} sum_j What[i][j]^(l) eps_sigma^(k-l-1)[j]`.
///
/// `coarse_history[l]` supplies `eps_sigma^(l)` (indexed by coarse position)
/// for `l = 0..k-1`. Agrees entrywise with the matrix-form interpolation.
pub fn componentwise_interpolation(
    graph: &PropagationGraph,
    coarse_history: &[Vector],
    k: usize,
) -> Result<Vector> {
    if coarse_history.len() != k {
        return Err(Error::SeriesLength {
            expected: k,
            got: coarse_history.len(),
        });
    }
    let nc = graph.split.n_coarse();
    for (l, e) in coarse_history.iter().enumerate() {
        if e.len() != nc {
            return Err(Error::SeriesLength {
                expected: nc,
                got: coarse_history[l].len(),
            });
        }
    }
    let mut estimate = Vector::zeros(graph.split.n_fine());
    for (fi, &node) in graph.split.fine().iter().enumerate() {
        let weights = enumerate_fine_paths(graph, node, k)?;
        let mut acc = ZERO;
        for (&(origin, lag), &w) in &weights.coarse {
            let pos = graph.coarse_pos[&origin];
            acc += w * coarse_history[k - lag - 1][pos];
        }
        estimate[fi] = acc;
    }
    Ok(estimate)
}
