use std::cmp::Ordering;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
const TIE_TOL: f64 = 1e-9;
const SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixSource {
    Laplacian,
    NormalizedLaplacian,
    Adjacency,
    Other,
}

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub source: MatrixSource,
    /// Max-norm of `M V - V diag(λ)`.
    pub residual: f64,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |VᵀV - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.transpose() * v;
        let n = gram.nrows();
        (gram - DMatrix::identity(n, n)).amax()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let v = &self.eigenvectors;
        let scaled = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        scaled * v.transpose()
    }

    /// Reorders eigenpairs; `order[i]` is the old index placed at `i`.
    /// The result no longer needs to be ascending.
    pub fn reordered(&self, order: &[usize]) -> SpectralDecomposition {
        let v = &self.eigenvectors;
        SpectralDecomposition {
            eigenvalues: order.iter().map(|&j| self.eigenvalues[j]).collect(),
            eigenvectors: DMatrix::from_fn(v.nrows(), order.len(), |i, c| v[(i, order[c])]),
            source: self.source,
            residual: self.residual,
        }
    }
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn eigh(m: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    eigh_from(m, MatrixSource::Other)
}

pub fn eigh_from(m: &DMatrix<f64>, source: MatrixSource) -> Result<SpectralDecomposition> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    let asym = max_asymmetry(m);
    if asym.is_nan() || asym > SYMMETRY_TOL {
        return Err(Error::NonSymmetric(asym));
    }
    let n = m.nrows();
    let mut a = (m + m.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = OFF_DIAGONAL_TOL * m.norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= tol {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<f64> = v.column(j).iter().copied().collect();
            canonicalize_sign(&mut col);
            (a[(j, j)], col)
        })
        .collect();
    sort_eigenpairs(&mut pairs);

    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |i, j| pairs[j].1[i]);
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&eigenvalues));
    let residual = (m * &eigenvectors - &eigenvectors * lambda).amax();
    Ok(SpectralDecomposition { eigenvalues, eigenvectors, source, residual })
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Zeroes `a[p][q]` with a Givens rotation, accumulating it into `v`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.nrows();
    for r in 0..n {
        let (arp, arq) = (a[(r, p)], a[(r, q)]);
        a[(r, p)] = c * arp - s * arq;
        a[(r, q)] = s * arp + c * arq;
    }
    for r in 0..n {
        let (apr, aqr) = (a[(p, r)], a[(q, r)]);
        a[(p, r)] = c * apr - s * aqr;
        a[(q, r)] = s * apr + c * aqr;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for r in 0..n {
        let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
        v[(r, p)] = c * vrp - s * vrq;
        v[(r, q)] = s * vrp + c * vrq;
    }
}

/// Makes the first entry with magnitude above the tolerance positive.
pub fn canonicalize_sign(col: &mut [f64]) {
    if let Some(&x) = col.iter().find(|x| x.abs() > SIGN_TOL) {
        if x < 0.0 {
            col.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

fn rounded(col: &[f64]) -> Vec<i64> {
    col.iter().map(|x| (x / TIE_TOL).round() as i64).collect()
}

/// Ascending eigenvalue; eigenvalues within the tie tolerance of their
/// predecessor form a group ordered by rounded eigenvector entries.
fn sort_eigenpairs(pairs: &mut [(f64, Vec<f64>)]) {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= TIE_TOL {
            end += 1;
        }
        pairs[start..end].sort_by_key(|a| rounded(&a.1));
        start = end;
    }
}

/// Multiplies each eigenvector by an independent uniform sign.
pub fn sign_flip(dec: &SpectralDecomposition, seed: u64) -> SpectralDecomposition {
    sign_flip_with(dec, &flip_signs(dec.len(), seed))
}

pub fn sign_flip_with(dec: &SpectralDecomposition, signs: &[f64]) -> SpectralDecomposition {
    let mut out = dec.clone();
    for (j, &s) in signs.iter().enumerate() {
        out.eigenvectors.column_mut(j).scale_mut(s);
    }
    out
}

/// The signs [`sign_flip`] draws for `seed`.
pub fn flip_signs(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect()
}
