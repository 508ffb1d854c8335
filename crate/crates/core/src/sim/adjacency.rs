use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::wl::{enumerate_tuples, TupleSpace};

/// Largest tuple space for which a dense square matrix is built.
pub const DENSE_TUPLE_LIMIT: usize = 8192;

/// `A^(k,j,γ)` over the full k-tuple space; `j` is the 0-based component.
pub fn generalized_adjacency(g: &Graph, k: usize, j: usize, gamma: i8) -> Result<DMatrix<u8>> {
    let space = enumerate_tuples(g, k, k)?;
    generalized_adjacency_in(g, &space, j, gamma)
}

/// `A^(k,j,γ)` restricted to the tuples of `space`: entry `(i, l)` is 1 iff
/// tuple `l` is tuple `i` with component `j` replaced by some `w` that is
/// adjacent to (`γ = +1`) or not adjacent to (`γ = -1`) the replaced node.
pub fn generalized_adjacency_in(g: &Graph, space: &TupleSpace, j: usize, gamma: i8) -> Result<DMatrix<u8>> {
    if j >= space.k() {
        return Err(Error::InvalidArgument(format!("component {j} out of range for k = {}", space.k())));
    }
    if gamma != 1 && gamma != -1 {
        return Err(Error::InvalidArgument(format!("gamma must be +1 or -1, got {gamma}")));
    }
    let len = space.len();
    if len > DENSE_TUPLE_LIMIT {
        return Err(Error::MemoryLimit { got: len, cap: DENSE_TUPLE_LIMIT });
    }
    let mut out = DMatrix::zeros(len, len);
    for i in 0..len {
        let vj = space.tuple(i)[j];
        for w in 0..g.num_nodes() {
            if g.adjacent(vj, w) == (gamma == 1) {
                if let Some(l) = space.replace(i, j, w) {
                    out[(i, l)] = 1;
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedIndicator {
    pub matrix: DMatrix<f64>,
    /// Rows without any 1, returned as all-zero.
    pub zero_rows: Vec<usize>,
}

/// Divides each row by its sum.
pub fn weighted_indicator(b: &DMatrix<u8>) -> WeightedIndicator {
    let mut matrix = DMatrix::zeros(b.nrows(), b.ncols());
    let mut zero_rows = Vec::new();
    for i in 0..b.nrows() {
        let sum: u32 = b.row(i).iter().map(|&x| x as u32).sum();
        if sum == 0 {
            zero_rows.push(i);
            continue;
        }
        for l in 0..b.ncols() {
            matrix[(i, l)] = b[(i, l)] as f64 / sum as f64;
        }
    }
    WeightedIndicator { matrix, zero_rows }
}
