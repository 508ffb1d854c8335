use nalgebra::DMatrix;
use serde::Serialize;

use super::{eigh_from, laplacian, MatrixSource, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::graph::Graph;

const ARGMAX_TIE: f64 = 1e-9;

/// Structural embeddings and query/key projections whose attention scores
/// reproduce the identity (node pair) and `-L` (adjacency pair).
#[derive(Debug, Clone, PartialEq)]
pub struct IdentifyingTargets {
    pub p_node: DMatrix<f64>,
    pub p_adj: DMatrix<f64>,
    pub w_q_node: DMatrix<f64>,
    pub w_k_node: DMatrix<f64>,
    pub w_q_adj: DMatrix<f64>,
    pub w_k_adj: DMatrix<f64>,
    pub decomposition: SpectralDecomposition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifyTarget {
    Node,
    Adjacency,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentifyingCheck {
    pub pass: bool,
    /// Smallest gap between a row maximum and the best entry that should
    /// not be a maximum; infinite if no row has such an entry.
    pub margin: f64,
    pub rows_failed: Vec<usize>,
}

pub fn identifying_targets(g: &Graph, normalized: bool) -> Result<IdentifyingTargets> {
    let n = g.num_nodes();
    let source = if normalized { MatrixSource::NormalizedLaplacian } else { MatrixSource::Laplacian };
    let dec = eigh_from(&laplacian(g, normalized), source)?;
    let v = &dec.eigenvectors;
    let sqrt_lambda: Vec<f64> = dec.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let mut p_adj = DMatrix::from_fn(n, n, |i, j| v[(i, j)] * sqrt_lambda[j]);
    if normalized {
        for i in 0..n {
            p_adj.row_mut(i).scale_mut((g.degree(i) as f64).sqrt());
        }
    }
    let root_dk = (n as f64).sqrt();
    let eye = DMatrix::<f64>::identity(n, n);
    Ok(IdentifyingTargets {
        p_node: v.clone(),
        p_adj,
        w_q_node: &eye * root_dk,
        w_k_node: eye.clone(),
        w_q_adj: &eye * -root_dk,
        w_k_adj: eye,
        decomposition: dec,
    })
}

/// `(1/sqrt(d_k)) (P W_q)(P W_k)ᵀ` with `d_k` the projection width.
pub fn attention_scores(p: &DMatrix<f64>, w_q: &DMatrix<f64>, w_k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if w_q.nrows() != p.ncols() || w_k.nrows() != p.ncols() || w_q.ncols() != w_k.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "P is {}x{}, W_q is {}x{}, W_k is {}x{}",
            p.nrows(),
            p.ncols(),
            w_q.nrows(),
            w_q.ncols(),
            w_k.nrows(),
            w_k.ncols()
        )));
    }
    let d_k = w_q.ncols().max(1) as f64;
    Ok((p * w_q) * (p * w_k).transpose() / d_k.sqrt())
}

/// Checks that every row's maxima sit exactly on the graph neighbors
/// (adjacency) or on the diagonal (node).
pub fn check_identifying(
    p: &DMatrix<f64>,
    w_q: &DMatrix<f64>,
    w_k: &DMatrix<f64>,
    g: &Graph,
    target: IdentifyTarget,
) -> Result<IdentifyingCheck> {
    let n = g.num_nodes();
    if p.nrows() != n {
        return Err(Error::ShapeMismatch(format!("P has {} rows for {n} nodes", p.nrows())));
    }
    let scores = attention_scores(p, w_q, w_k)?;
    let mut margin = f64::INFINITY;
    let mut rows_failed = Vec::new();
    for i in 0..n {
        let row = scores.row(i);
        let max = row.max();
        let wanted = |j: usize| match target {
            IdentifyTarget::Node => i == j,
            IdentifyTarget::Adjacency => g.adjacent(i, j),
        };
        let ok = (0..n).all(|j| (row[j] >= max - ARGMAX_TIE) == wanted(j));
        if !ok {
            rows_failed.push(i);
        }
        let best_other = (0..n).filter(|&j| !wanted(j)).map(|j| row[j]).fold(f64::NEG_INFINITY, f64::max);
        margin = margin.min(max - best_other);
    }
    Ok(IdentifyingCheck { pass: rows_failed.is_empty(), margin, rows_failed })
}
