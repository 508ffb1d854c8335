//! Laplacians, a Jacobi eigensolver, spectral positional encodings, and the
//! node-/adjacency-identifying embeddings built from them.

mod eigh;
mod encoders;
mod identifying;

use nalgebra::DMatrix;

pub use eigh::{
    canonicalize_sign, eigh, eigh_from, flip_signs, max_asymmetry, sign_flip, sign_flip_with, MatrixSource,
    SpectralDecomposition,
};
pub use encoders::{lpe, lpe_with, spe, spe_tensor, spe_with, EncoderParams, DEFAULT_HIDDEN};
pub use identifying::{
    attention_scores, check_identifying, identifying_targets, IdentifyTarget, IdentifyingCheck, IdentifyingTargets,
};

use crate::error::Result;
use crate::graph::Graph;

pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    DMatrix::from_fn(n, n, |i, j| if g.adjacent(i, j) { 1.0 } else { 0.0 })
}

/// `L = D - A`, or `D^{-1/2} L D^{-1/2}` when `normalized`.
pub fn laplacian(g: &Graph, normalized: bool) -> DMatrix<f64> {
    let n = g.num_nodes();
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        let entry = if i == j {
            g.degree(i) as f64
        } else if g.adjacent(i, j) {
            -1.0
        } else {
            0.0
        };
        if normalized {
            if i == j {
                1.0
            } else {
                entry * inv_sqrt[i] * inv_sqrt[j]
            }
        } else {
            entry
        }
    })
}

pub fn laplacian_decomposition(g: &Graph, normalized: bool) -> Result<SpectralDecomposition> {
    let source = if normalized { MatrixSource::NormalizedLaplacian } else { MatrixSource::Laplacian };
    eigh_from(&laplacian(g, normalized), source)
}

pub fn adjacency_decomposition(g: &Graph) -> Result<SpectralDecomposition> {
    eigh_from(&adjacency(g), MatrixSource::Adjacency)
}
