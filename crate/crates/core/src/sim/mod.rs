//! Runs the constructed transformer next to WL refinement and the digit-code
//! GNN, layer by layer, and compares the induced partitions.

mod adjacency;
mod construct;
mod gnn;
mod layer;

pub use adjacency::{
    generalized_adjacency, generalized_adjacency_in, weighted_indicator, WeightedIndicator, DENSE_TUPLE_LIMIT,
};
pub use construct::{
    construct_1wl_weights, construct_kgt_weights, construct_weights, initial_tokens, token_colors, ConstructedWeights,
    DesignedFfn, TokenLayout, DEFAULT_TEMPERATURE, MAX_ROUNDING_SLACK,
};
pub use gnn::{gnn_features, gnn_reference_step};
pub use layer::{attention, softmax_rows, transformer_layer, Head, LayerOutput, LayerWeights};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::wl::{
    canonical_partition, enumerate_tuples, histogram, initial_coloring, initial_coloring_shared,
    refine_space_to_stable, refine_step, refine_step_shared, Coloring, TupleSpace, Variant, Verdict, DEFAULT_MAX_ITER,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub k: usize,
    pub s: usize,
    pub variant: Variant,
    /// Number of layers; `None` runs until the WL coloring is stable.
    pub layers: Option<usize>,
    /// Softmax temperature of the constructed heads.
    pub b: f64,
}

impl SimConfig {
    pub fn new(k: usize, s: usize, variant: Variant) -> Self {
        SimConfig { k, s, variant, layers: None, b: DEFAULT_TEMPERATURE }
    }

    pub fn with_layers(mut self, layers: usize) -> Self {
        self.layers = Some(layers);
        self
    }

    pub fn with_temperature(mut self, b: f64) -> Self {
        self.b = b;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub k: usize,
    pub s: usize,
    pub variant: Variant,
    pub layers: usize,
    /// Index 0 compares the initial coloring.
    pub partition_equal_per_layer: Vec<bool>,
    pub max_attention_error: f64,
    pub rounding_slack_max: f64,
    pub attention_error_per_layer: Vec<f64>,
    pub num_colors_per_layer: Vec<usize>,
    #[serde(skip)]
    pub transformer_colors: Vec<Vec<u32>>,
    #[serde(skip)]
    pub wl_colors: Vec<Vec<u32>>,
    #[serde(skip)]
    pub gnn_colors: Vec<Vec<u32>>,
}

impl SimReport {
    pub fn all_equal(&self) -> bool {
        self.partition_equal_per_layer.iter().all(|&e| e)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSimReport {
    pub k: usize,
    pub s: usize,
    pub variant: Variant,
    pub layers: usize,
    pub wl: Verdict,
    pub transformer: Verdict,
    /// Joint partitions of both graphs, index 0 the initial coloring.
    pub partition_equal_per_layer: Vec<bool>,
    pub max_attention_error: f64,
    pub rounding_slack_max: f64,
}

impl PairSimReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

struct TransformerRun {
    /// Per graph, per layer (0 = initial) colors.
    colors: Vec<Vec<Vec<u32>>>,
    attention_errors: Vec<f64>,
    max_slack: f64,
}

/// Frobenius distance over the rows where the target is defined.
fn attention_error(att: &DMatrix<f64>, target: &WeightedIndicator) -> f64 {
    let mut skip = target.zero_rows.iter().peekable();
    let mut sum = 0.0;
    for i in 0..att.nrows() {
        if skip.peek() == Some(&&i) {
            skip.next();
            continue;
        }
        sum += (att.row(i) - target.matrix.row(i)).norm_squared();
    }
    sum.sqrt()
}

fn run_transformer(
    inputs: &[(&Graph, &TupleSpace, &Coloring)],
    weights: &ConstructedWeights,
) -> Result<TransformerRun> {
    let mut targets = Vec::with_capacity(inputs.len());
    let mut tokens = Vec::with_capacity(inputs.len());
    let mut colors = Vec::with_capacity(inputs.len());
    for (g, space, c) in inputs {
        let per_head = weights
            .head_targets
            .iter()
            .map(|&(j, gamma)| Ok(weighted_indicator(&generalized_adjacency_in(g, space, j, gamma)?)))
            .collect::<Result<Vec<_>>>()?;
        targets.push(per_head);
        let x = initial_tokens(g, space, c, &weights.layout)?;
        colors.push(vec![token_colors(&x, &weights.layout)]);
        tokens.push(x);
    }

    let mut ffn = DesignedFfn::new(weights);
    let mut attention_errors = Vec::with_capacity(weights.layers);
    for _ in 0..weights.layers {
        ffn.next_layer();
        let mut worst: f64 = 0.0;
        for (gi, x) in tokens.iter_mut().enumerate() {
            let out = transformer_layer(x, &weights.layer, |y| ffn.apply(y))?;
            for (att, target) in out.attention.iter().zip(&targets[gi]) {
                worst = worst.max(attention_error(att, target));
            }
            *x = out.x;
            colors[gi].push(token_colors(x, &weights.layout));
        }
        attention_errors.push(worst);
    }
    Ok(TransformerRun { colors, attention_errors, max_slack: ffn.max_slack })
}

fn checked_space(g: &Graph, k: usize, s: usize, variant: Variant) -> Result<TupleSpace> {
    variant.check_space(k, s)?;
    let space = enumerate_tuples(g, k, s)?;
    if space.len() > DENSE_TUPLE_LIMIT {
        return Err(Error::MemoryLimit { got: space.len(), cap: DENSE_TUPLE_LIMIT });
    }
    Ok(space)
}

/// Simulates `cfg.layers` refinement rounds on `g` with the constructed
/// transformer and compares every layer against WL and the reference GNN.
pub fn simulate_and_compare(g: &Graph, cfg: &SimConfig) -> Result<SimReport> {
    let space = checked_space(g, cfg.k, cfg.s, cfg.variant)?;
    let c0 = initial_coloring(g, &space);
    let layers = match cfg.layers {
        Some(t) => t,
        None => refine_space_to_stable(g, &space, cfg.variant, DEFAULT_MAX_ITER)?.len(),
    };
    let weights = construct_weights(g.num_nodes(), cfg.k, space.len(), cfg.variant, layers, cfg.b)?;

    let mut wl = vec![c0.clone()];
    let mut gnn = vec![c0.clone()];
    for _ in 0..layers {
        wl.push(refine_step(g, &space, wl.last().expect("nonempty"), cfg.variant)?);
        gnn.push(gnn_reference_step(gnn.last().expect("nonempty"), g, &space, cfg.variant)?);
    }
    let run = run_transformer(&[(g, &space, &c0)], &weights)?;
    let transformer_colors = run.colors.into_iter().next().expect("one graph");

    let partition_equal_per_layer = (0..=layers)
        .map(|t| {
            let p = canonical_partition(&transformer_colors[t]);
            p == wl[t].canonical_partition() && p == gnn[t].canonical_partition()
        })
        .collect();
    Ok(SimReport {
        k: cfg.k,
        s: cfg.s,
        variant: cfg.variant,
        layers,
        partition_equal_per_layer,
        max_attention_error: run.attention_errors.iter().copied().fold(0.0, f64::max),
        rounding_slack_max: run.max_slack,
        attention_error_per_layer: run.attention_errors,
        num_colors_per_layer: wl.iter().map(Coloring::num_colors).collect(),
        transformer_colors,
        wl_colors: wl.iter().map(|c| c.colors().to_vec()).collect(),
        gnn_colors: gnn.iter().map(|c| c.colors().to_vec()).collect(),
    })
}

fn joint(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().chain(b).copied().collect()
}

fn first_difference(histories: (&[Vec<u32>], &[Vec<u32>])) -> Verdict {
    let at = histories.0.iter().zip(histories.1).position(|(a, b)| {
        let (mut ha, mut hb) = (histogram(a), histogram(b));
        let len = ha.len().max(hb.len());
        ha.resize(len, 0);
        hb.resize(len, 0);
        ha != hb
    });
    Verdict { distinguished: at.is_some(), at_iteration: at }
}

/// Runs the constructed transformer on two graphs of equal order with one
/// shared relabel table per layer, mirroring joint WL refinement.
pub fn simulate_pair(g: &Graph, h: &Graph, cfg: &SimConfig) -> Result<PairSimReport> {
    if g.num_nodes() != h.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "pair simulation needs equal orders, got {} and {}",
            g.num_nodes(),
            h.num_nodes()
        )));
    }
    let sg = checked_space(g, cfg.k, cfg.s, cfg.variant)?;
    let sh = checked_space(h, cfg.k, cfg.s, cfg.variant)?;
    let init = initial_coloring_shared(&[(g, &sg), (h, &sh)]);

    let joint_count = |cs: &[Coloring]| {
        let mut all = joint(cs[0].colors(), cs[1].colors());
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    let mut wl = vec![init.clone()];
    loop {
        let current = wl.last().expect("nonempty");
        if cfg.layers.is_some_and(|t| wl.len() > t) {
            break;
        }
        let next = refine_step_shared(&[(g, &sg, &current[0]), (h, &sh, &current[1])], cfg.variant)?;
        let stable = joint_count(&next) == joint_count(current);
        wl.push(next);
        if cfg.layers.is_none() && stable {
            break;
        }
        if wl.len() > DEFAULT_MAX_ITER + 1 {
            return Err(Error::IterationCap(DEFAULT_MAX_ITER));
        }
    }
    let layers = wl.len() - 1;

    let weights = construct_weights(g.num_nodes(), cfg.k, sg.len() + sh.len(), cfg.variant, layers, cfg.b)?;
    let run = run_transformer(&[(g, &sg, &init[0]), (h, &sh, &init[1])], &weights)?;
    let (tg, th) = (&run.colors[0], &run.colors[1]);

    let wl_g: Vec<Vec<u32>> = wl.iter().map(|c| c[0].colors().to_vec()).collect();
    let wl_h: Vec<Vec<u32>> = wl.iter().map(|c| c[1].colors().to_vec()).collect();
    let partition_equal_per_layer = (0..=layers)
        .map(|t| canonical_partition(&joint(&tg[t], &th[t])) == canonical_partition(&joint(&wl_g[t], &wl_h[t])))
        .collect();
    Ok(PairSimReport {
        k: cfg.k,
        s: cfg.s,
        variant: cfg.variant,
        layers,
        wl: first_difference((&wl_g, &wl_h)),
        transformer: first_difference((tg, th)),
        partition_equal_per_layer,
        max_attention_error: run.attention_errors.iter().copied().fold(0.0, f64::max),
        rounding_slack_max: run.max_slack,
    })
}
