use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default cap on the number of tuples a space may hold.
pub const DEFAULT_TUPLE_CAP: usize = 2_000_000;

/// Ordered k-tuples of nodes, optionally restricted to tuples whose induced
/// subgraph has at most `s` connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleSpace {
    k: usize,
    s: usize,
    n: usize,
    /// Row-major flattened tuples.
    flat: Vec<usize>,
    /// Only populated for restricted spaces; full spaces index arithmetically.
    sparse_index: Option<HashMap<Vec<usize>, usize>>,
}

pub fn enumerate_tuples(g: &Graph, k: usize, s: usize) -> Result<TupleSpace> {
    enumerate_tuples_with_cap(g, k, s, DEFAULT_TUPLE_CAP)
}

pub fn enumerate_tuples_with_cap(g: &Graph, k: usize, s: usize, cap: usize) -> Result<TupleSpace> {
    if k == 0 || s == 0 || s > k {
        return Err(Error::InvalidOrder { k, s });
    }
    let n = g.num_nodes();
    let full = n.checked_pow(k as u32).ok_or(Error::MemoryLimit { got: usize::MAX, cap })?;
    // A restricted space is found by scanning every tuple, so the scan itself
    // is bounded too.
    let scan_cap = if s == k { cap } else { cap.saturating_mul(32) };
    if full > scan_cap {
        return Err(Error::MemoryLimit { got: full, cap: scan_cap });
    }

    let mut flat = Vec::with_capacity(if s == k { full * k } else { 0 });
    let mut tuple = vec![0usize; k];
    let mut count = 0usize;
    for _ in 0..full {
        if s == k || g.induced_components(&tuple) <= s {
            flat.extend_from_slice(&tuple);
            count += 1;
            if count > cap {
                return Err(Error::MemoryLimit { got: count, cap });
            }
        }
        for pos in (0..k).rev() {
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
        }
    }

    let sparse_index = (s < k).then(|| flat.chunks(k).enumerate().map(|(i, t)| (t.to_vec(), i)).collect());
    Ok(TupleSpace { k, s, n, flat, sparse_index })
}

impl TupleSpace {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn is_restricted(&self) -> bool {
        self.s < self.k
    }

    pub fn tuple(&self, i: usize) -> &[usize] {
        &self.flat[i * self.k..(i + 1) * self.k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.flat.chunks(self.k)
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        if tuple.len() != self.k || tuple.iter().any(|&v| v >= self.n) {
            return None;
        }
        match &self.sparse_index {
            Some(map) => map.get(tuple).copied(),
            None => Some(tuple.iter().fold(0, |acc, &v| acc * self.n + v)),
        }
    }

    /// Index of the tuple obtained from tuple `i` by putting `w` in slot `j`,
    /// or `None` if that tuple is not in the space.
    #[inline]
    pub fn replace(&self, i: usize, j: usize, w: usize) -> Option<usize> {
        match &self.sparse_index {
            None => {
                let stride = self.n.pow((self.k - 1 - j) as u32);
                let old = self.flat[i * self.k + j];
                Some(i + w * stride - old * stride)
            }
            Some(map) => {
                let mut t = self.tuple(i).to_vec();
                t[j] = w;
                map.get(&t).copied()
            }
        }
    }
}
