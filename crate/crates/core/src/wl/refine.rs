use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::Serialize;

use super::tuples::{enumerate_tuples, TupleSpace};
use crate::error::{Error, Result};
use crate::graph::{atomic_type_unchecked, Graph};

/// Default bound on refinement rounds before giving up.
pub const DEFAULT_MAX_ITER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Plain k-WL; for k = 1 this is color refinement.
    Kwl,
    /// δ-k-WL: neighbor colors paired with an adjacency flag.
    DeltaKwl,
    /// δ-k-LWL: only graph neighbors of the replaced node.
    DeltaKlwl,
    /// (k,s)-LWL: the local rule on a component-bounded tuple space.
    KsLwl,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Kwl, Variant::DeltaKwl, Variant::DeltaKlwl, Variant::KsLwl];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Kwl => "kwl",
            Variant::DeltaKwl => "delta_kwl",
            Variant::DeltaKlwl => "delta_klwl",
            Variant::KsLwl => "ks_lwl",
        }
    }

    /// Name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Variant::Kwl => "kwl",
            Variant::DeltaKwl => "delta",
            Variant::DeltaKlwl => "delta-local",
            Variant::KsLwl => "ks-local",
        }
    }

    fn is_local(self) -> bool {
        matches!(self, Variant::DeltaKlwl | Variant::KsLwl)
    }

    pub fn check_space(self, k: usize, s: usize) -> Result<()> {
        if k == 0 || s == 0 || s > k {
            return Err(Error::InvalidOrder { k, s });
        }
        if s < k && self != Variant::KsLwl {
            return Err(Error::VariantSpaceMismatch { variant: self.name(), k, s });
        }
        Ok(())
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kwl" => Ok(Variant::Kwl),
            "delta" | "delta_kwl" | "delta-kwl" => Ok(Variant::DeltaKwl),
            "delta-local" | "delta_klwl" | "delta-klwl" => Ok(Variant::DeltaKlwl),
            "ks-local" | "ks_lwl" | "ks-lwl" => Ok(Variant::KsLwl),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

/// Hash-consing of keys into dense ids, assigned by first occurrence.
#[derive(Debug, Clone)]
pub struct Relabeler<K> {
    ids: HashMap<K, u32>,
}

impl<K: Hash + Eq> Default for Relabeler<K> {
    fn default() -> Self {
        Relabeler { ids: HashMap::new() }
    }
}

impl<K: Hash + Eq> Relabeler<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn id(&mut self, key: K) -> u32 {
        let next = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(next)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Color of every tuple of a space at one refinement round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    k: usize,
    s: usize,
    colors: Vec<u32>,
    iteration: usize,
}

impl Coloring {
    pub fn new(k: usize, s: usize, colors: Vec<u32>, iteration: usize) -> Self {
        Coloring { k, s, colors, iteration }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn color(&self, i: usize) -> u32 {
        self.colors[i]
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn num_colors(&self) -> usize {
        let mut seen: Vec<u32> = self.colors.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Count per color id, indexed by id.
    pub fn histogram(&self) -> Vec<usize> {
        histogram(&self.colors)
    }

    /// Same partition, ids renumbered by first occurrence.
    pub fn canonical_partition(&self) -> Vec<u32> {
        canonical_partition(&self.colors)
    }

    pub fn same_partition(&self, other: &Coloring) -> bool {
        self.len() == other.len() && self.canonical_partition() == other.canonical_partition()
    }

    fn compatible(&self, other: &Coloring) -> Result<()> {
        if self.k != other.k || self.s != other.s || self.len() != other.len() {
            Err(Error::SpaceMismatch)
        } else {
            Ok(())
        }
    }
}

pub fn histogram(colors: &[u32]) -> Vec<usize> {
    let len = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut h = vec![0; len];
    for &c in colors {
        h[c as usize] += 1;
    }
    h
}

pub fn canonical_partition(colors: &[u32]) -> Vec<u32> {
    let mut relabel = Relabeler::new();
    colors.iter().map(|&c| relabel.id(c)).collect()
}

/// True iff every color class of `a` lies inside a color class of `b`.
pub fn refines(a: &Coloring, b: &Coloring) -> Result<bool> {
    a.compatible(b)?;
    let mut image: HashMap<u32, u32> = HashMap::new();
    for (&ca, &cb) in a.colors.iter().zip(&b.colors) {
        if *image.entry(ca).or_insert(cb) != cb {
            return Ok(false);
        }
    }
    Ok(true)
}

fn initial_key(g: &Graph, tuple: &[usize]) -> Vec<u32> {
    let mut key: Vec<u32> = tuple.iter().map(|&v| g.label(v)).collect();
    if tuple.len() > 1 {
        key.extend(atomic_type_unchecked(g, tuple).entries().iter().map(|&e| e as u32));
    }
    key
}

/// Initial colors for several graphs through one relabel table.
pub fn initial_coloring_shared(inputs: &[(&Graph, &TupleSpace)]) -> Vec<Coloring> {
    let mut relabel = Relabeler::new();
    inputs
        .iter()
        .map(|(g, space)| {
            let colors = space.iter().map(|t| relabel.id(initial_key(g, t))).collect();
            Coloring::new(space.k(), space.s(), colors, 0)
        })
        .collect()
}

/// Tuples with equal label sequence and atomic type share a color.
pub fn initial_coloring(g: &Graph, space: &TupleSpace) -> Coloring {
    initial_coloring_shared(&[(g, space)]).pop().expect("one input")
}

/// Injective summary of the neighborhood of tuple `i`, prefixed by its
/// current color.
pub(crate) fn refinement_key(g: &Graph, space: &TupleSpace, colors: &[u32], i: usize, variant: Variant) -> Vec<u32> {
    let k = space.k();
    let n = g.num_nodes();
    let tuple = space.tuple(i);
    let mut key = vec![colors[i]];
    let mut items: Vec<u32> = Vec::with_capacity(n);
    for (j, &vj) in tuple.iter().enumerate() {
        items.clear();
        // Color refinement proper looks at graph neighbors even for plain k-WL.
        let local = variant.is_local() || (k == 1 && variant == Variant::Kwl);
        let candidates: Box<dyn Iterator<Item = usize>> =
            if local { Box::new(g.neighbors(vj).iter().copied()) } else { Box::new(0..n) };
        for w in candidates {
            let Some(l) = space.replace(i, j, w) else { continue };
            let c = colors[l];
            items.push(match variant {
                Variant::DeltaKwl => 2 * c + g.adjacent(vj, w) as u32,
                _ => c,
            });
        }
        items.sort_unstable();
        key.push(items.len() as u32);
        key.extend_from_slice(&items);
    }
    key
}

/// One refinement round for several graphs through one relabel table.
pub fn refine_step_shared(inputs: &[(&Graph, &TupleSpace, &Coloring)], variant: Variant) -> Result<Vec<Coloring>> {
    let mut relabel = Relabeler::new();
    let mut out = Vec::with_capacity(inputs.len());
    for (g, space, c) in inputs {
        variant.check_space(space.k(), space.s())?;
        if c.len() != space.len() || c.k() != space.k() || c.s() != space.s() {
            return Err(Error::SpaceMismatch);
        }
        let colors = (0..space.len()).map(|i| relabel.id(refinement_key(g, space, c.colors(), i, variant))).collect();
        out.push(Coloring::new(space.k(), space.s(), colors, c.iteration() + 1));
    }
    Ok(out)
}

pub fn refine_step(g: &Graph, space: &TupleSpace, c: &Coloring, variant: Variant) -> Result<Coloring> {
    Ok(refine_step_shared(&[(g, space, c)], variant)?.pop().expect("one input"))
}

/// Colorings from iteration 0 up to the first stable one, inclusive.
pub fn refine_to_stable(g: &Graph, k: usize, s: usize, variant: Variant) -> Result<Vec<Coloring>> {
    refine_to_stable_with(g, k, s, variant, DEFAULT_MAX_ITER)
}

pub fn refine_to_stable_with(
    g: &Graph,
    k: usize,
    s: usize,
    variant: Variant,
    max_iter: usize,
) -> Result<Vec<Coloring>> {
    variant.check_space(k, s)?;
    let space = enumerate_tuples(g, k, s)?;
    refine_space_to_stable(g, &space, variant, max_iter)
}

pub fn refine_space_to_stable(
    g: &Graph,
    space: &TupleSpace,
    variant: Variant,
    max_iter: usize,
) -> Result<Vec<Coloring>> {
    variant.check_space(space.k(), space.s())?;
    let mut history = vec![initial_coloring(g, space)];
    loop {
        let current = history.last().expect("nonempty");
        let next = refine_step(g, space, current, variant)?;
        // The key contains the old color, so the new partition refines the
        // old one and equal class counts mean equal partitions.
        if next.num_colors() == current.num_colors() {
            return Ok(history);
        }
        if next.iteration() > max_iter {
            return Err(Error::IterationCap(max_iter));
        }
        history.push(next);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub distinguished: bool,
    pub at_iteration: Option<usize>,
}

fn joint_histograms_differ(a: &Coloring, b: &Coloring) -> bool {
    let (mut ha, mut hb) = (a.histogram(), b.histogram());
    let len = ha.len().max(hb.len());
    ha.resize(len, 0);
    hb.resize(len, 0);
    ha != hb
}

fn joint_color_count(cs: &[Coloring]) -> usize {
    let mut all: Vec<u32> = cs.iter().flat_map(|c| c.colors().iter().copied()).collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

/// Refines both graphs side by side with one relabel table per round and
/// reports the first round whose color histograms differ.
pub fn distinguish(g: &Graph, h: &Graph, variant: Variant, k: usize, s: usize) -> Result<Verdict> {
    distinguish_with(g, h, variant, k, s, DEFAULT_MAX_ITER)
}

pub fn distinguish_with(
    g: &Graph,
    h: &Graph,
    variant: Variant,
    k: usize,
    s: usize,
    max_iter: usize,
) -> Result<Verdict> {
    variant.check_space(k, s)?;
    let sg = enumerate_tuples(g, k, s)?;
    let sh = enumerate_tuples(h, k, s)?;
    let mut current = initial_coloring_shared(&[(g, &sg), (h, &sh)]);
    let mut t = 0;
    loop {
        if joint_histograms_differ(&current[0], &current[1]) {
            return Ok(Verdict { distinguished: true, at_iteration: Some(t) });
        }
        let next = refine_step_shared(&[(g, &sg, &current[0]), (h, &sh, &current[1])], variant)?;
        if joint_color_count(&next) == joint_color_count(&current) {
            return Ok(Verdict { distinguished: false, at_iteration: None });
        }
        t += 1;
        if t > max_iter {
            return Err(Error::IterationCap(max_iter));
        }
        current = next;
    }
}

/// Wire format of a refinement run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ColoringReport {
    pub k: usize,
    pub s: usize,
    pub variant: Variant,
    pub iterations: usize,
    pub colors_per_iteration: Vec<Vec<u32>>,
    pub histograms: Vec<Vec<usize>>,
}

impl ColoringReport {
    pub fn from_history(variant: Variant, history: &[Coloring]) -> Self {
        let last = history.last().expect("history is never empty");
        ColoringReport {
            k: last.k(),
            s: last.s(),
            variant,
            iterations: last.iteration(),
            colors_per_iteration: history.iter().map(|c| c.colors().to_vec()).collect(),
            histograms: history.iter().map(Coloring::histogram).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
