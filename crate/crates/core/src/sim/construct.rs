//! Hand-built attention weights and the exact feed-forward map that make a
//! standard transformer layer perform one WL refinement round.
//!
//! Token layout, one row per tuple:
//!
//! ```text
//! [ color one-hot (p) | head block 1 (p) ... head block H (p)
//!   | (d+, d-) per component (2k)
//!   | per component: [ Laplacian eigvec row (n) | P+ row (n) | P- row (n) ] ]
//! ```
//!
//! `p` is the palette width, `A = P+ P+ᵀ - P- P-ᵀ`, and `d+`/`d-` count the
//! adjacent/non-adjacent replacements of that component that stay in the
//! tuple space.

use nalgebra::DMatrix;

use super::layer::{Head, LayerWeights};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tokenizer::raw_targets;
use crate::wl::{Coloring, Relabeler, TupleSpace, Variant};

/// Default outer softmax temperature.
pub const DEFAULT_TEMPERATURE: f64 = 60.0;
/// Largest tolerated distance of a recovered count from an integer.
pub const MAX_ROUNDING_SLACK: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenLayout {
    pub n: usize,
    pub k: usize,
    pub palette: usize,
    pub heads: usize,
}

impl TokenLayout {
    pub fn head_start(&self, h: usize) -> usize {
        self.palette * (1 + h)
    }

    fn degree_start(&self) -> usize {
        self.palette * (1 + self.heads)
    }

    /// Column of `d+` (`adjacent = true`) or `d-` of component `o`.
    pub fn degree_col(&self, o: usize, adjacent: bool) -> usize {
        self.degree_start() + 2 * o + usize::from(!adjacent)
    }

    /// First column of part `part` (0 eigvec, 1 P+, 2 P-) of component `o`.
    pub fn structural_start(&self, o: usize, part: usize) -> usize {
        self.degree_start() + 2 * self.k + o * 3 * self.n + part * self.n
    }

    pub fn width(&self) -> usize {
        self.degree_start() + 2 * self.k + 3 * self.n * self.k
    }

    /// Query/key width: one slot per structural column.
    pub fn d_k(&self) -> usize {
        3 * self.n * self.k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedWeights {
    pub layout: TokenLayout,
    pub variant: Variant,
    /// `(component, γ)` targeted by each head, in head order.
    pub head_targets: Vec<(usize, i8)>,
    pub layer: LayerWeights,
    pub layers: usize,
    /// Outer softmax temperature.
    pub temperature: f64,
    /// Weight of a matching component relative to the adjacency term.
    pub match_scale: f64,
    /// Output scale of the adjacent-count heads.
    pub alpha: f64,
    /// Output scale of the non-adjacent-count heads.
    pub beta: f64,
}

impl ConstructedWeights {
    pub fn head_count(&self) -> usize {
        self.head_targets.len()
    }

    fn single_head(&self) -> bool {
        self.layout.k == 1 && self.head_targets.len() == 1
    }
}

/// Weights for simulating color refinement on `g` with one head per layer.
pub fn construct_1wl_weights(g: &Graph, t_layers: usize, b: f64) -> Result<ConstructedWeights> {
    construct_weights(g.num_nodes(), 1, g.num_nodes(), Variant::Kwl, t_layers, b)
}

/// Weights for simulating k-WL, δ-k-WL or δ-k-LWL on the full tuple space.
pub fn construct_kgt_weights(
    g: &Graph,
    k: usize,
    variant: Variant,
    t_layers: usize,
    b: f64,
) -> Result<ConstructedWeights> {
    if variant == Variant::KsLwl {
        return Err(Error::InvalidArgument("use a (k,s) simulation for ks_lwl".into()));
    }
    let palette = g.num_nodes().checked_pow(k as u32).ok_or(Error::MemoryLimit { got: usize::MAX, cap: usize::MAX })?;
    construct_weights(g.num_nodes(), k, palette, variant, t_layers, b)
}

/// Weights for `n`-node graphs with tuples of order `k` and `palette`
/// distinct colors.
pub fn construct_weights(
    n: usize,
    k: usize,
    palette: usize,
    variant: Variant,
    layers: usize,
    temperature: f64,
) -> Result<ConstructedWeights> {
    if k == 0 {
        return Err(Error::InvalidOrder { k, s: 0 });
    }
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {temperature}")));
    }
    let local = matches!(variant, Variant::DeltaKlwl | Variant::KsLwl);
    let (alpha, beta) = match variant {
        Variant::Kwl if k == 1 => (1.0, 0.0),
        Variant::Kwl => (1.0, 1.0),
        Variant::DeltaKwl => (1.0, (n + 1) as f64),
        _ => (1.0, 0.0),
    };
    // Non-adjacent heads are always present for k ≥ 2 (scaled by zero for
    // the local variants); for k = 1 only when they carry information.
    let with_minus = k >= 2 || (beta != 0.0 && !local);
    let head_targets: Vec<(usize, i8)> =
        (0..k).flat_map(|j| std::iter::once((j, 1)).chain(with_minus.then_some((j, -1)))).collect();

    let layout = TokenLayout { n, k, palette, heads: head_targets.len() };
    let width = layout.width();
    let d_k = layout.d_k();
    let root_dk = (d_k as f64).sqrt();
    let match_scale = (2 * n + 2) as f64;
    let c_match = (temperature * match_scale * root_dk).sqrt();
    let c_adj = (temperature * root_dk).sqrt();

    let heads = head_targets
        .iter()
        .map(|&(j, gamma)| {
            let mut w_q = DMatrix::zeros(width, d_k);
            let mut w_k = DMatrix::zeros(width, d_k);
            let slot = |col: usize| col - layout.structural_start(0, 0);
            for o in 0..k {
                if o == j {
                    for i in 0..n {
                        let pos = layout.structural_start(o, 1) + i;
                        let neg = layout.structural_start(o, 2) + i;
                        w_q[(pos, slot(pos))] = gamma as f64 * c_adj;
                        w_k[(pos, slot(pos))] = c_adj;
                        w_q[(neg, slot(neg))] = -(gamma as f64) * c_adj;
                        w_k[(neg, slot(neg))] = c_adj;
                    }
                } else {
                    for i in 0..n {
                        let col = layout.structural_start(o, 0) + i;
                        w_q[(col, slot(col))] = c_match;
                        w_k[(col, slot(col))] = c_match;
                    }
                }
            }
            let mut w_v = DMatrix::zeros(width, palette);
            for c in 0..palette {
                w_v[(c, c)] = 1.0;
            }
            Head { w_q, w_k, w_v }
        })
        .collect();

    let mut w_o = DMatrix::zeros(palette * head_targets.len(), width);
    for (h, &(_, gamma)) in head_targets.iter().enumerate() {
        let scale = if gamma == 1 { alpha } else { beta };
        for c in 0..palette {
            w_o[(h * palette + c, layout.head_start(h) + c)] = scale;
        }
    }

    Ok(ConstructedWeights {
        layout,
        variant,
        head_targets,
        layer: LayerWeights { heads, w_o },
        layers,
        temperature,
        match_scale,
        alpha,
        beta,
    })
}

/// Initial token matrix: color one-hot, zero head blocks, replacement
/// counts, and the structural rows of every component.
pub fn initial_tokens(g: &Graph, space: &TupleSpace, colors: &Coloring, layout: &TokenLayout) -> Result<DMatrix<f64>> {
    let n = g.num_nodes();
    if n != layout.n || space.k() != layout.k || colors.len() != space.len() {
        return Err(Error::ShapeMismatch("tokens do not match the constructed layout".into()));
    }
    let structure = raw_targets(g, false)?;
    let mut x = DMatrix::zeros(space.len(), layout.width());
    for (i, tuple) in space.iter().enumerate() {
        let c = colors.color(i) as usize;
        if c >= layout.palette {
            return Err(Error::ShapeMismatch(format!("color {c} outside palette {}", layout.palette)));
        }
        x[(i, c)] = 1.0;
        for (o, &v) in tuple.iter().enumerate() {
            let (mut plus, mut minus) = (0.0, 0.0);
            for w in 0..n {
                if space.replace(i, o, w).is_some() {
                    if g.adjacent(v, w) {
                        plus += 1.0;
                    } else {
                        minus += 1.0;
                    }
                }
            }
            x[(i, layout.degree_col(o, true))] = plus;
            x[(i, layout.degree_col(o, false))] = minus;
            let start = layout.structural_start(o, 0);
            for col in 0..3 * n {
                x[(i, start + col)] = structure[(v, col)];
            }
        }
    }
    Ok(x)
}

/// Colors read back from the one-hot block.
pub fn token_colors(x: &DMatrix<f64>, layout: &TokenLayout) -> Vec<u32> {
    (0..x.nrows())
        .map(|i| {
            let row = x.view((i, 0), (1, layout.palette));
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (c, &v)| if v > best.1 { (c, v) } else { best })
                .0 as u32
        })
        .collect()
}

fn round_checked(value: f64, slack: &mut f64) -> Result<u32> {
    let r = value.round();
    let s = (value - r).abs();
    *slack = slack.max(s);
    if s.is_nan() || s >= MAX_ROUNDING_SLACK || r < 0.0 {
        return Err(Error::RoundingSlack { value, slack: s });
    }
    Ok(r as u32)
}

/// The designed feed-forward map: recover integer neighbor-color counts by
/// undoing the degree normalization, combine them with the own color, and
/// relabel into a fresh one-hot.
pub struct DesignedFfn<'a> {
    weights: &'a ConstructedWeights,
    relabel: Relabeler<Vec<u32>>,
    /// Largest rounding distance seen so far.
    pub max_slack: f64,
}

impl<'a> DesignedFfn<'a> {
    pub fn new(weights: &'a ConstructedWeights) -> Self {
        DesignedFfn { weights, relabel: Relabeler::new(), max_slack: 0.0 }
    }

    /// Starts a new layer: keys from different layers never share ids.
    pub fn next_layer(&mut self) {
        self.relabel = Relabeler::new();
    }

    pub fn apply(&mut self, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let w = self.weights;
        let lay = &w.layout;
        let p = lay.palette;
        let mut out = y.clone();
        for r in 0..y.nrows() {
            let own: Vec<u32> = (0..p).map(|c| round_checked(y[(r, c)], &mut self.max_slack)).collect::<Result<_>>()?;
            let key = if w.single_head() {
                // F + 2 · (deg · normalized counts)
                let deg = y[(r, lay.degree_col(0, true))];
                let mut key = own;
                for (c, entry) in key.iter_mut().enumerate() {
                    let count = deg * y[(r, lay.head_start(0) + c)] / w.alpha;
                    *entry += 2 * round_checked(count, &mut self.max_slack)?;
                }
                key
            } else {
                let mut key = own;
                for j in 0..lay.k {
                    let mut combined = vec![0.0; p];
                    for (h, &(hj, gamma)) in w.head_targets.iter().enumerate() {
                        if hj != j {
                            continue;
                        }
                        let deg = y[(r, lay.degree_col(j, gamma == 1))];
                        for (c, slot) in combined.iter_mut().enumerate() {
                            *slot += deg * y[(r, lay.head_start(h) + c)];
                        }
                    }
                    for value in combined {
                        key.push(round_checked(value, &mut self.max_slack)?);
                    }
                }
                key
            };
            let id = self.relabel.id(key) as usize;
            if id >= p {
                return Err(Error::ShapeMismatch(format!("palette of {p} colors exhausted")));
            }
            for c in 0..lay.degree_col(0, true) {
                out[(r, c)] = 0.0;
            }
            out[(r, id)] = 1.0;
        }
        Ok(out)
    }
}
