//! Token matrices for nodes and for (k,s)-tuples.
//!
//! Node token: `X(v) = F(label v) + FFN(emb_deg(deg v) + emb_pe(v))`.
//! Tuple token: `[X(v_1) | ... | X(v_k)] W + emb_atp(v)`.
//! Every embedding table is a seeded, untrained stand-in for a learned one.

use std::hash::Hash;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{atomic_type_unchecked, Graph};
use crate::nn::{block_rng, gaussian_matrix, rows_distinct, Mlp, SeededTable};
use crate::spectral::{adjacency_decomposition, laplacian_decomposition, lpe, spe, EncoderParams};
use crate::wl::{enumerate_tuples, TupleSpace};

/// Eigenvalues below this magnitude count as zero when splitting `A`.
const ZERO_EIGENVALUE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeKind {
    Lpe,
    Spe,
    /// The identifying targets themselves, projected to width `dim`.
    RawTargets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtpMode {
    /// One embedding per atomic-type matrix.
    Matrix,
    /// Concatenated per-pair edge embeddings, projected.
    Edges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub k: usize,
    pub s: usize,
    pub dim: usize,
    pub pe_kind: PeKind,
    pub seed: u64,
    /// Eigenpairs fed to LPE/SPE; `None` uses all of them.
    pub eig_count: Option<usize>,
    pub normalized_laplacian: bool,
    /// When false the structural term `P(v)` is left out.
    pub structural: bool,
    pub atp_mode: AtpMode,
}

impl TokenizerConfig {
    pub fn new(k: usize, s: usize, dim: usize) -> Self {
        TokenizerConfig {
            k,
            s,
            dim,
            pe_kind: PeKind::Lpe,
            seed: 0,
            eig_count: None,
            normalized_laplacian: false,
            structural: true,
            atp_mode: AtpMode::Matrix,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_pe(mut self, pe_kind: PeKind) -> Self {
        self.pe_kind = pe_kind;
        self
    }

    pub fn without_structure(mut self) -> Self {
        self.structural = false;
        self
    }

    pub fn with_atp_mode(mut self, mode: AtpMode) -> Self {
        self.atp_mode = mode;
        self
    }

    fn table(&self, name: &str) -> SeededTable {
        SeededTable::new(self.seed, name, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TokenMatrix {
    pub k: usize,
    pub s: usize,
    pub dim: usize,
    pub pe_kind: PeKind,
    pub seed: u64,
    /// One row per tuple, in tuple-space order.
    pub rows: DMatrix<f64>,
}

#[derive(Serialize)]
struct TokenMatrixDoc<'a> {
    k: usize,
    s: usize,
    dim: usize,
    rows: &'a [Vec<f64>],
}

impl TokenMatrix {
    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn row_vec(&self, i: usize) -> Vec<f64> {
        self.rows.row(i).iter().copied().collect()
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<f64>> = (0..self.len()).map(|i| self.row_vec(i)).collect();
        serde_json::to_string(&TokenMatrixDoc { k: self.k, s: self.s, dim: self.dim, rows: &rows })
            .expect("token matrix serializes")
    }

    /// Ids of equal rows, by first occurrence (bitwise comparison).
    pub fn equal_row_partition(&self) -> Vec<u32> {
        let mut relabel = crate::wl::Relabeler::new();
        (0..self.len())
            .map(|i| relabel.id(self.rows.row(i).iter().map(|x| x.to_bits()).collect::<Vec<u64>>()))
            .collect()
    }
}

/// Table re-drawn until rows for `keys` are pairwise distinct.
fn injective_table<K: Hash>(base: SeededTable, keys: &[K]) -> SeededTable {
    let mut table = base.clone();
    let mut salt = 0;
    while !rows_distinct(&table, keys) {
        salt += 1;
        table = base.reseeded(salt);
    }
    table
}

fn distinct<T: Ord + Clone>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = items.into_iter().collect();
    v.sort();
    v.dedup();
    v
}

/// `A = P₊P₊ᵀ - P₋P₋ᵀ` from the adjacency spectrum, each factor `n x n`
/// with zero columns where the eigenvalue has the other sign.
pub fn signed_adjacency_factors(g: &Graph) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dec = adjacency_decomposition(g)?;
    let n = g.num_nodes();
    let v = &dec.eigenvectors;
    let lam = &dec.eigenvalues;
    let pos = DMatrix::from_fn(n, n, |i, j| if lam[j] > ZERO_EIGENVALUE { v[(i, j)] * lam[j].sqrt() } else { 0.0 });
    let neg = DMatrix::from_fn(n, n, |i, j| if lam[j] < -ZERO_EIGENVALUE { v[(i, j)] * (-lam[j]).sqrt() } else { 0.0 });
    Ok((pos, neg))
}

/// Per-node `[Laplacian eigenvector row | P₊ row | P₋ row]`, `n x 3n`.
pub fn raw_targets(g: &Graph, normalized: bool) -> Result<DMatrix<f64>> {
    let n = g.num_nodes();
    let v = laplacian_decomposition(g, normalized)?.eigenvectors;
    let (pos, neg) = signed_adjacency_factors(g)?;
    let mut out = DMatrix::zeros(n, 3 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&v);
    out.view_mut((0, n), (n, n)).copy_from(&pos);
    out.view_mut((0, 2 * n), (n, n)).copy_from(&neg);
    Ok(out)
}

fn positional_rows(g: &Graph, cfg: &TokenizerConfig) -> Result<DMatrix<f64>> {
    let n = g.num_nodes();
    match cfg.pe_kind {
        PeKind::Lpe | PeKind::Spe => {
            let dec = laplacian_decomposition(g, cfg.normalized_laplacian)?;
            let count = cfg.eig_count.unwrap_or(n).min(n);
            let params = EncoderParams::new(cfg.seed, count, cfg.dim);
            if cfg.pe_kind == PeKind::Lpe {
                lpe(&dec, &params)
            } else {
                spe(&dec, &params, count)
            }
        }
        PeKind::RawTargets => {
            let raw = raw_targets(g, cfg.normalized_laplacian)?;
            let proj = gaussian_matrix(3 * n, cfg.dim, &mut block_rng(cfg.seed, &format!("raw.proj.{n}")));
            Ok(raw * proj)
        }
    }
}

/// Node-level token rows (`n x dim`), usable for any `cfg.k`.
fn node_rows(g: &Graph, cfg: &TokenizerConfig) -> Result<DMatrix<f64>> {
    let n = g.num_nodes();
    let d = cfg.dim;
    let labels = distinct(g.labels().iter().copied());
    let features = injective_table(cfg.table("feature"), &labels);
    let feature = |label: u32| features.row(&label);
    if !cfg.structural {
        return Ok(compose_node_rows(
            g,
            feature,
            None::<(fn(usize) -> DVector<f64>, _, fn(&DVector<f64>) -> DVector<f64>)>,
        ));
    }
    let degrees = distinct((0..n).map(|v| g.degree(v)));
    let degree_table = injective_table(cfg.table("degree"), &degrees);
    let pe = positional_rows(g, cfg)?;
    let ffn = Mlp::random(&[d, d, d], &mut block_rng(cfg.seed, "structural.ffn"));
    Ok(compose_node_rows(g, feature, Some((|deg: usize| degree_table.row(&deg), &pe, |x: &DVector<f64>| ffn.apply(x)))))
}

/// `X(v) = feature(label v) + ffn(degree(deg v) + pe[v])`, the structural
/// term omitted when `structure` is `None`.
pub fn compose_node_rows<F, D, N>(g: &Graph, feature: F, structure: Option<(D, &DMatrix<f64>, N)>) -> DMatrix<f64>
where
    F: Fn(u32) -> DVector<f64>,
    D: Fn(usize) -> DVector<f64>,
    N: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = g.num_nodes();
    let rows: Vec<DVector<f64>> = (0..n)
        .map(|v| {
            let mut x = feature(g.label(v));
            if let Some((degree, pe, ffn)) = &structure {
                x += ffn(&(degree(g.degree(v)) + pe.row(v).transpose()));
            }
            x
        })
        .collect();
    let d = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, d, |i, j| rows[i][j])
}

pub fn node_tokens(g: &Graph, cfg: &TokenizerConfig) -> Result<TokenMatrix> {
    if cfg.k != 1 || cfg.s != 1 {
        return Err(Error::InvalidArgument(format!("node tokens need k = s = 1, got k = {}, s = {}", cfg.k, cfg.s)));
    }
    Ok(TokenMatrix { k: 1, s: 1, dim: cfg.dim, pe_kind: cfg.pe_kind, seed: cfg.seed, rows: node_rows(g, cfg)? })
}

fn atp_key(g: &Graph, t: &[usize]) -> Vec<u8> {
    atomic_type_unchecked(g, t).entries().to_vec()
}

/// Pre-projection edge blocks `E(v_i, v_j)` for `i > j`, concatenated:
/// the self vector when `v_i = v_j`, zero for non-edges, otherwise the
/// edge-label embedding.
pub fn atp_edge_blocks(g: &Graph, tuple: &[usize], cfg: &TokenizerConfig) -> Result<DVector<f64>> {
    for &v in tuple {
        g.check_node(v)?;
    }
    let d = cfg.dim;
    let self_vec = cfg.table("atp.self").row(&0u8);
    let edge_table = edge_label_table(g, cfg);
    let k = tuple.len();
    let mut out = DVector::zeros(d * k * (k.saturating_sub(1)) / 2);
    let mut block = 0;
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (tuple[i], tuple[j]);
            let e =
                if a == b { Some(self_vec.clone()) } else { g.edge_label(a, b).map(|label| edge_table.row(&label)) };
            if let Some(e) = e {
                out.rows_mut(block * d, d).copy_from(&e);
            }
            block += 1;
        }
    }
    Ok(out)
}

fn edge_label_table(g: &Graph, cfg: &TokenizerConfig) -> SeededTable {
    let labels = distinct(g.edges().iter().map(|&(u, v)| g.edge_label(u, v).unwrap_or(0)));
    injective_table(cfg.table("atp.edge"), &labels)
}

fn edge_projection(cfg: &TokenizerConfig, k: usize) -> DMatrix<f64> {
    let width = cfg.dim * k * (k - 1) / 2;
    gaussian_matrix(width, cfg.dim, &mut block_rng(cfg.seed, &format!("atp.edge.proj.{k}")))
}

/// Edge-based atomic-type embedding of one tuple, projected to `dim`.
pub fn atp_embedding_from_edges(g: &Graph, tuple: &[usize], cfg: &TokenizerConfig) -> Result<DVector<f64>> {
    let k = tuple.len();
    if k < 2 {
        return Ok(DVector::zeros(cfg.dim));
    }
    let blocks = atp_edge_blocks(g, tuple, cfg)?;
    Ok(edge_projection(cfg, k).transpose() * blocks)
}

pub fn tuple_tokens(g: &Graph, cfg: &TokenizerConfig) -> Result<TokenMatrix> {
    let space = enumerate_tuples(g, cfg.k, cfg.s)?;
    tuple_tokens_in(g, &space, cfg)
}

pub fn tuple_tokens_in(g: &Graph, space: &TupleSpace, cfg: &TokenizerConfig) -> Result<TokenMatrix> {
    let k = cfg.k;
    if k < 2 {
        return Err(Error::InvalidArgument("tuple tokens need k >= 2".into()));
    }
    if space.k() != k || space.s() != cfg.s {
        return Err(Error::SpaceMismatch);
    }
    let d = cfg.dim;
    let x = node_rows(g, cfg)?;
    let w = gaussian_matrix(d * k, d, &mut block_rng(cfg.seed, &format!("tuple.proj.{k}")));
    let wt = w.transpose();

    let atp_table = match cfg.atp_mode {
        AtpMode::Matrix => {
            let keys = distinct(space.iter().map(|t| atp_key(g, t)));
            Some(injective_table(cfg.table("atp"), &keys))
        }
        AtpMode::Edges => None,
    };
    let edge_proj_t = (cfg.atp_mode == AtpMode::Edges).then(|| edge_projection(cfg, k).transpose());

    let mut rows = DMatrix::zeros(space.len(), d);
    let mut concat = DVector::zeros(d * k);
    for (i, t) in space.iter().enumerate() {
        for (o, &v) in t.iter().enumerate() {
            concat.rows_mut(o * d, d).copy_from(&x.row(v).transpose());
        }
        let atp = match (&atp_table, &edge_proj_t) {
            (Some(table), _) => table.row(&atp_key(g, t)),
            (None, Some(proj)) => proj * atp_edge_blocks(g, t, cfg)?,
            (None, None) => unreachable!("one atomic-type mode is always active"),
        };
        let row = &wt * &concat + atp;
        rows.row_mut(i).copy_from(&row.transpose());
    }
    Ok(TokenMatrix { k, s: cfg.s, dim: d, pe_kind: cfg.pe_kind, seed: cfg.seed, rows })
}

/// Number of tokens of the (k,s) tokenization.
pub fn token_count(g: &Graph, k: usize, s: usize) -> Result<usize> {
    Ok(enumerate_tuples(g, k, s)?.len())
}

/// Whether one layer stack can consume both tokenizations unchanged.
pub fn order_transfer_compat(low: &TokenizerConfig, high: &TokenizerConfig) -> bool {
    low.dim == high.dim
}
