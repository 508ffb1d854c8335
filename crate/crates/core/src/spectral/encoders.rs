//! Seeded, untrained LPE and SPE encoders.

use nalgebra::DMatrix;

use super::SpectralDecomposition;
use crate::error::{Error, Result};
use crate::nn::{block_rng, Mlp};

/// Parameters of both encoders, drawn deterministically from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub seed: u64,
    /// Number of eigenpairs used.
    pub eig_count: usize,
    pub out_dim: usize,
    pub hidden: usize,
    /// Added to the eigenvalues fed to the LPE; zero unless set.
    pub epsilon: Vec<f64>,
    /// LPE: `(eigenvector entry, eigenvalue) -> hidden`.
    pub lpe_phi: Mlp,
    /// LPE: `hidden -> out_dim`.
    pub lpe_rho: Mlp,
    /// SPE: scalar eigenvalue map, `1 -> hidden` channels.
    pub spe_phi: Mlp,
    /// SPE: `hidden -> out_dim`.
    pub spe_rho: Mlp,
}

pub const DEFAULT_HIDDEN: usize = 16;

impl EncoderParams {
    pub fn new(seed: u64, eig_count: usize, out_dim: usize) -> Self {
        Self::with_hidden(seed, eig_count, out_dim, DEFAULT_HIDDEN)
    }

    pub fn with_hidden(seed: u64, eig_count: usize, out_dim: usize, hidden: usize) -> Self {
        EncoderParams {
            seed,
            eig_count,
            out_dim,
            hidden,
            epsilon: vec![0.0; eig_count],
            lpe_phi: Mlp::random(&[2, hidden, hidden], &mut block_rng(seed, "lpe.phi")),
            lpe_rho: Mlp::random(&[hidden, hidden, out_dim], &mut block_rng(seed, "lpe.rho")),
            spe_phi: Mlp::random(&[1, hidden, hidden], &mut block_rng(seed, "spe.phi")),
            spe_rho: Mlp::random(&[hidden, hidden, out_dim], &mut block_rng(seed, "spe.rho")),
        }
    }
}

fn check_count(dec: &SpectralDecomposition, count: usize) -> Result<()> {
    if count > dec.len() {
        Err(Error::ShapeMismatch(format!("{count} eigenpairs requested, {} available", dec.len())))
    } else {
        Ok(())
    }
}

/// DeepSet over eigenpairs: row `v` is `rho(Σ_j phi(V[v, j], λ_j + ε_j))`.
pub fn lpe(dec: &SpectralDecomposition, params: &EncoderParams) -> Result<DMatrix<f64>> {
    check_count(dec, params.eig_count)?;
    if params.epsilon.len() != params.eig_count {
        return Err(Error::LengthMismatch { what: "epsilon", got: params.epsilon.len(), expected: params.eig_count });
    }
    lpe_with(
        dec,
        params.eig_count,
        &params.epsilon,
        |x, lambda| params.lpe_phi.apply_slice(&[x, lambda]),
        |h| params.lpe_rho.apply_slice(h),
    )
}

/// [`lpe`] with caller-supplied `phi` and `rho`.
pub fn lpe_with<Phi, Rho>(
    dec: &SpectralDecomposition,
    eig_count: usize,
    epsilon: &[f64],
    phi: Phi,
    rho: Rho,
) -> Result<DMatrix<f64>>
where
    Phi: Fn(f64, f64) -> Vec<f64>,
    Rho: Fn(&[f64]) -> Vec<f64>,
{
    check_count(dec, eig_count)?;
    let n = dec.eigenvectors.nrows();
    let mut rows = Vec::with_capacity(n);
    for v in 0..n {
        let mut acc: Vec<f64> = Vec::new();
        for j in 0..eig_count {
            let eps = epsilon.get(j).copied().unwrap_or(0.0);
            let h = phi(dec.eigenvectors[(v, j)], dec.eigenvalues[j] + eps);
            if acc.is_empty() {
                acc = vec![0.0; h.len()];
            }
            acc.iter_mut().zip(&h).for_each(|(a, b)| *a += b);
        }
        rows.push(rho(&acc));
    }
    rows_to_matrix(rows)
}

/// Sign- and basis-invariant encoding from `V diag(phi_l(λ)) Vᵀ`, using the
/// `rank_m` smallest eigenpairs.
pub fn spe(dec: &SpectralDecomposition, params: &EncoderParams, rank_m: usize) -> Result<DMatrix<f64>> {
    spe_with(dec, rank_m, |lambda| params.spe_phi.apply_slice(&[lambda]), |h| params.spe_rho.apply_slice(h))
}

/// [`spe`] with a caller-supplied channel map `phi` (applied to each
/// eigenvalue independently) and row map `rho`.
pub fn spe_with<Phi, Rho>(dec: &SpectralDecomposition, rank_m: usize, phi: Phi, rho: Rho) -> Result<DMatrix<f64>>
where
    Phi: Fn(f64) -> Vec<f64>,
    Rho: Fn(&[f64]) -> Vec<f64>,
{
    if rank_m > dec.len() {
        return Err(Error::RankOutOfRange { rank: rank_m, n: dec.len() });
    }
    let n = dec.eigenvectors.nrows();
    let channels: Vec<Vec<f64>> = dec.eigenvalues[..rank_m].iter().map(|&l| phi(l)).collect();
    let width = channels.first().map_or(0, Vec::len);
    let v = &dec.eigenvectors;
    // Column sums of V over the first axis: Σ_u V[u, i].
    let col_sums: Vec<f64> = (0..rank_m).map(|i| v.column(i).sum()).collect();

    let mut rows = Vec::with_capacity(n);
    for row in 0..n {
        // Σ_u Q_l[row, u] = Σ_i V[row, i] phi_l(λ_i) Σ_u V[u, i].
        let mut pooled = vec![0.0; width];
        for i in 0..rank_m {
            let w = v[(row, i)] * col_sums[i];
            pooled.iter_mut().zip(&channels[i]).for_each(|(p, c)| *p += w * c);
        }
        rows.push(rho(&pooled));
    }
    rows_to_matrix(rows)
}

/// The full tensor `Q[l] = V_m diag(phi_l(λ_m)) V_mᵀ`, one matrix per channel.
pub fn spe_tensor<Phi>(dec: &SpectralDecomposition, rank_m: usize, phi: Phi) -> Result<Vec<DMatrix<f64>>>
where
    Phi: Fn(f64) -> Vec<f64>,
{
    if rank_m > dec.len() {
        return Err(Error::RankOutOfRange { rank: rank_m, n: dec.len() });
    }
    let n = dec.eigenvectors.nrows();
    let channels: Vec<Vec<f64>> = dec.eigenvalues[..rank_m].iter().map(|&l| phi(l)).collect();
    let width = channels.first().map_or(0, Vec::len);
    let vm = dec.eigenvectors.columns(0, rank_m);
    Ok((0..width)
        .map(|l| {
            let scaled = DMatrix::from_fn(n, rank_m, |r, i| vm[(r, i)] * channels[i][l]);
            scaled * vm.transpose()
        })
        .collect())
}

fn rows_to_matrix(rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::ShapeMismatch("encoder rows have different widths".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}
