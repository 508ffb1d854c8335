//! Seeded, untrained feed-forward blocks and embedding tables.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Deterministic RNG for a named parameter block.
pub fn block_rng(seed: u64, block: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stable_hash(&(seed, block)))
}

/// Hash that does not depend on the process (SipHash with fixed keys).
pub fn stable_hash<T: Hash + ?Sized>(value: &T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

/// Gaussian matrix scaled by `1/sqrt(cols)`.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    let scale = 1.0 / (cols.max(1) as f64).sqrt();
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal) * scale)
}

pub fn gaussian_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Dense {
    pub fn random<R: Rng + ?Sized>(input: usize, output: usize, rng: &mut R) -> Self {
        Dense { weight: gaussian_matrix(output, input, rng), bias: gaussian_vector(output, rng) * 0.1 }
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.weight * x + &self.bias
    }
}

/// Dense layers with ReLU between them (none after the last).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// `widths = [input, hidden..., output]`.
    pub fn random<R: Rng + ?Sized>(widths: &[usize], rng: &mut R) -> Self {
        let layers = widths.windows(2).map(|w| Dense::random(w[0], w[1], rng)).collect();
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").weight.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut h = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            h = layer.apply(&h);
            if i + 1 < self.layers.len() {
                h.apply(|v| *v = v.max(0.0));
            }
        }
        h
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        self.apply(&DVector::from_column_slice(x)).as_slice().to_vec()
    }
}

/// Embedding table whose rows are drawn lazily from `(seed, table, key)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeededTable {
    seed: u64,
    name: String,
    dim: usize,
}

impl SeededTable {
    pub fn new(seed: u64, name: &str, dim: usize) -> Self {
        SeededTable { seed, name: name.to_string(), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row<K: Hash + ?Sized>(&self, key: &K) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(stable_hash(&(self.seed, &self.name, stable_hash(key))));
        gaussian_vector(self.dim, &mut rng)
    }

    /// Same table under a different salt; used to re-draw after a collision.
    pub fn reseeded(&self, salt: u64) -> Self {
        SeededTable { seed: stable_hash(&(self.seed, salt)), name: self.name.clone(), dim: self.dim }
    }
}

/// True iff the rows for `keys` are pairwise distinct.
pub fn rows_distinct<K: Hash>(table: &SeededTable, keys: &[K]) -> bool {
    let mut rows: Vec<Vec<u64>> = keys.iter().map(|k| table.row(k).iter().map(|x| x.to_bits()).collect()).collect();
    rows.sort();
    rows.windows(2).all(|w| w[0] != w[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_are_deterministic() {
        let t = SeededTable::new(7, "labels", 4);
        assert_eq!(t.row(&3u32), t.row(&3u32));
        assert_ne!(t.row(&3u32), t.row(&4u32));
        assert_ne!(t.row(&3u32), SeededTable::new(8, "labels", 4).row(&3u32));
        assert_ne!(t.row(&3u32), t.reseeded(1).row(&3u32));
        assert!(rows_distinct(&t, &[0u32, 1, 2, 3]));
    }

    #[test]
    fn mlp_shapes() {
        let mut rng = block_rng(0, "mlp");
        let mlp = Mlp::random(&[3, 5, 2], &mut rng);
        assert_eq!((mlp.input_dim(), mlp.output_dim()), (3, 2));
        assert_eq!(mlp.apply_slice(&[1.0, 0.0, -1.0]).len(), 2);
        let again = Mlp::random(&[3, 5, 2], &mut block_rng(0, "mlp"));
        assert_eq!(mlp, again);
    }
}
