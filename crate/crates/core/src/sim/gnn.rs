//! Exact digit-code GNN update: each tuple's new feature is its own color
//! code plus, per component, the shifted sum of its neighbors' codes.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::multiset::{code_of, shift, DigitVector};
use crate::wl::{Coloring, Relabeler, TupleSpace, Variant};

/// One update of the digit-code GNN followed by relabeling.
///
/// Colors are coded at positions `color + 1` in blocks of width
/// `N = |space|`. Component `j` (1-based) contributes block `j`, or blocks
/// `2j - 1` (adjacent replacements) and `2j` (non-adjacent) for δ-k-WL.
/// The base `n + 1` exceeds every multiplicity.
pub fn gnn_reference_step(colors: &Coloring, g: &Graph, space: &TupleSpace, variant: Variant) -> Result<Coloring> {
    variant.check_space(space.k(), space.s())?;
    if colors.len() != space.len() {
        return Err(Error::SpaceMismatch);
    }
    let features = gnn_features(colors, g, space, variant)?;
    let mut relabel = Relabeler::new();
    let ids = features.into_iter().map(|f| relabel.id(f)).collect();
    Ok(Coloring::new(space.k(), space.s(), ids, colors.iteration() + 1))
}

pub fn gnn_features(colors: &Coloring, g: &Graph, space: &TupleSpace, variant: Variant) -> Result<Vec<DigitVector>> {
    let n = g.num_nodes();
    let k = space.k();
    let width = space.len();
    let base = (n + 1) as u32;
    if let Some(&c) = colors.colors().iter().max() {
        if c as usize >= width {
            return Err(Error::InvalidArgument(format!("color {c} exceeds block width {width}")));
        }
    }
    let code = |i: usize| code_of(colors.color(i) as usize + 1, base);
    let local = matches!(variant, Variant::DeltaKlwl | Variant::KsLwl) || (k == 1 && variant == Variant::Kwl);

    let mut out = Vec::with_capacity(space.len());
    for i in 0..space.len() {
        let tuple = space.tuple(i);
        let mut feature = code(i);
        for (j, &vj) in tuple.iter().enumerate() {
            let mut adjacent_sum = DigitVector::zero(base);
            let mut other_sum = DigitVector::zero(base);
            for w in 0..n {
                let adj = g.adjacent(vj, w);
                if local && !adj {
                    continue;
                }
                let Some(l) = space.replace(i, j, w) else { continue };
                if variant == Variant::DeltaKwl && !adj {
                    other_sum.add_assign(&code(l))?;
                } else {
                    adjacent_sum.add_assign(&code(l))?;
                }
            }
            let block = j + 1;
            if variant == Variant::DeltaKwl {
                feature.add_assign(&shift(&adjacent_sum, width * (2 * block - 1)))?;
                feature.add_assign(&shift(&other_sum, width * 2 * block))?;
            } else {
                feature.add_assign(&shift(&adjacent_sum, width * block))?;
            }
        }
        out.push(feature);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, path, random_graph};
    use crate::wl::{enumerate_tuples, initial_coloring, refine_step};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn agrees_with_refinement(g: &Graph, k: usize, s: usize, variant: Variant, rounds: usize) {
        let space = enumerate_tuples(g, k, s).unwrap();
        let mut c = initial_coloring(g, &space);
        for _ in 0..rounds {
            let wl = refine_step(g, &space, &c, variant).unwrap();
            let gnn = gnn_reference_step(&c, g, &space, variant).unwrap();
            assert!(wl.same_partition(&gnn), "{variant} k={k}");
            assert_eq!(wl.colors(), gnn.colors());
            c = wl;
        }
    }

    #[test]
    fn matches_small_examples() {
        agrees_with_refinement(&path(3), 1, 1, Variant::Kwl, 3);
        agrees_with_refinement(&complete(3), 2, 2, Variant::Kwl, 3);
        agrees_with_refinement(&cycle(5), 2, 2, Variant::DeltaKwl, 3);
    }

    #[test]
    fn matches_every_variant_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..5 {
            let g = random_graph(5, 0.4, &mut rng);
            for (variant, k, s) in [
                (Variant::Kwl, 1, 1),
                (Variant::DeltaKwl, 1, 1),
                (Variant::Kwl, 2, 2),
                (Variant::DeltaKwl, 2, 2),
                (Variant::DeltaKlwl, 2, 2),
                (Variant::KsLwl, 2, 1),
                (Variant::KsLwl, 3, 2),
            ] {
                agrees_with_refinement(&g, k, s, variant, 3);
            }
        }
    }

    #[test]
    fn stable_input_keeps_partition() {
        let g = cycle(6);
        let space = enumerate_tuples(&g, 1, 1).unwrap();
        let c = initial_coloring(&g, &space);
        assert!(gnn_reference_step(&c, &g, &space, Variant::Kwl).unwrap().same_partition(&c));
    }
}
