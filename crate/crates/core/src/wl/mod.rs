//! Color refinement over nodes, k-tuples and component-bounded k-tuples.

mod refine;
mod tuples;

pub use refine::{
    canonical_partition, distinguish, distinguish_with, histogram, initial_coloring, initial_coloring_shared,
    refine_space_to_stable, refine_step, refine_step_shared, refine_to_stable, refine_to_stable_with, refines,
    Coloring, ColoringReport, Relabeler, Variant, Verdict, DEFAULT_MAX_ITER,
};
pub use tuples::{enumerate_tuples, enumerate_tuples_with_cap, TupleSpace, DEFAULT_TUPLE_CAP};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{builtin_pair, complete, cycle, path, random_graph, Graph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_colors() {
        let c6 = cycle(6);
        let sp = enumerate_tuples(&c6, 1, 1).unwrap();
        assert_eq!(initial_coloring(&c6, &sp).num_colors(), 1);

        let k3 = complete(3);
        let sp = enumerate_tuples(&k3, 2, 2).unwrap();
        assert_eq!(initial_coloring(&k3, &sp).num_colors(), 2);

        let p3 = path(3);
        let sp = enumerate_tuples(&p3, 2, 2).unwrap();
        assert_eq!(initial_coloring(&p3, &sp).num_colors(), 3);
    }

    #[test]
    fn initial_colors_use_labels() {
        let g = Graph::new(3, &[(0, 1), (1, 2)], Some(vec![1, 1, 2]), None).unwrap();
        let sp = enumerate_tuples(&g, 1, 1).unwrap();
        assert_eq!(initial_coloring(&g, &sp).colors(), &[0, 0, 1]);
    }

    #[test]
    fn one_step_examples() {
        let c6 = cycle(6);
        let sp = enumerate_tuples(&c6, 1, 1).unwrap();
        let c0 = initial_coloring(&c6, &sp);
        assert_eq!(refine_step(&c6, &sp, &c0, Variant::Kwl).unwrap().num_colors(), 1);

        let p3 = path(3);
        let sp = enumerate_tuples(&p3, 1, 1).unwrap();
        let c0 = initial_coloring(&p3, &sp);
        let c1 = refine_step(&p3, &sp, &c0, Variant::Kwl).unwrap();
        assert_eq!(c1.colors(), &[0, 1, 0]);
        let c2 = refine_step(&p3, &sp, &c1, Variant::Kwl).unwrap();
        assert!(c2.same_partition(&c1));
    }

    #[test]
    fn stable_runs() {
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let h = refine_to_stable(&edge, 1, 1, Variant::Kwl).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].num_colors(), 1);

        let h = refine_to_stable(&path(3), 1, 1, Variant::Kwl).unwrap();
        assert_eq!(h.last().unwrap().iteration(), 1);
        assert_eq!(h.last().unwrap().num_colors(), 2);
    }

    #[test]
    fn variant_space_checks() {
        let g = cycle(4);
        let err = refine_to_stable(&g, 2, 1, Variant::Kwl).unwrap_err();
        assert_eq!(err.code(), "VARIANT_SPACE_MISMATCH");
        assert!(refine_to_stable(&g, 2, 1, Variant::KsLwl).is_ok());
        assert!(refine_to_stable(&g, 2, 2, Variant::KsLwl).is_ok());
        let a = Coloring::new(1, 1, vec![0, 0], 0);
        let b = Coloring::new(1, 1, vec![0, 0, 0], 0);
        assert_eq!(refines(&a, &b).unwrap_err().code(), "SPACE_MISMATCH");
    }

    #[test]
    fn refines_examples() {
        let g = path(4);
        let sp = enumerate_tuples(&g, 2, 2).unwrap();
        let c0 = initial_coloring(&g, &sp);
        let c1 = refine_step(&g, &sp, &c0, Variant::Kwl).unwrap();
        assert!(refines(&c0, &c0).unwrap());
        assert!(refines(&c1, &c0).unwrap());
        assert!(!refines(&c0, &c1).unwrap() || c0.same_partition(&c1));
    }

    /// 2-WL written directly over pairs, without the tuple-space machinery:
    /// color(a, b) ← (color, {{color(w, b)}}, {{color(a, w)}}).
    fn brute_pair_refinement_distinguishes(g: &Graph, h: &Graph) -> bool {
        let n = g.num_nodes();
        let init = |x: &Graph, a: usize, b: usize| -> u64 {
            if a == b {
                0
            } else if x.adjacent(a, b) {
                1
            } else {
                2
            }
        };
        let mut cg: Vec<u64> = (0..n * n).map(|i| init(g, i / n, i % n)).collect();
        let mut ch: Vec<u64> = (0..n * n).map(|i| init(h, i / n, i % n)).collect();
        for _ in 0..n * n {
            let mut table: Vec<Vec<u64>> = Vec::new();
            let mut step = |c: &[u64]| -> Vec<u64> {
                (0..n * n)
                    .map(|i| {
                        let (a, b) = (i / n, i % n);
                        let mut left: Vec<u64> = (0..n).map(|w| c[w * n + b]).collect();
                        let mut right: Vec<u64> = (0..n).map(|w| c[a * n + w]).collect();
                        left.sort();
                        right.sort();
                        let mut key = vec![c[i]];
                        key.extend(left);
                        key.push(u64::MAX);
                        key.extend(right);
                        match table.iter().position(|t| *t == key) {
                            Some(p) => p as u64,
                            None => {
                                table.push(key);
                                (table.len() - 1) as u64
                            }
                        }
                    })
                    .collect()
            };
            cg = step(&cg);
            ch = step(&ch);
            let (mut sg, mut sh) = (cg.clone(), ch.clone());
            sg.sort();
            sh.sort();
            if sg != sh {
                return true;
            }
        }
        false
    }

    #[test]
    fn hierarchy_witness_on_cycles() {
        let (c6, two_c3) = builtin_pair("c6_vs_2c3").unwrap();
        let v1 = distinguish(&c6, &two_c3, Variant::Kwl, 1, 1).unwrap();
        assert_eq!(v1, Verdict { distinguished: false, at_iteration: None });
        // Plain 2-WL has the power of 1-WL; the direct pair oracle agrees.
        let v2 = distinguish(&c6, &two_c3, Variant::Kwl, 2, 2).unwrap();
        assert_eq!(v2.distinguished, brute_pair_refinement_distinguishes(&c6, &two_c3));
        assert!(!v2.distinguished);
        for (variant, k, s) in [(Variant::DeltaKwl, 2, 2), (Variant::KsLwl, 2, 1), (Variant::Kwl, 3, 3)] {
            assert!(distinguish(&c6, &two_c3, variant, k, s).unwrap().distinguished, "{variant} k={k}");
        }
    }

    #[test]
    fn permuted_graph_is_never_distinguished() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let g = random_graph(6, 0.4, &mut rng);
            let perm = crate::graph::random_permutation(6, &mut rng);
            let h = crate::graph::apply_permutation(&g, &perm).unwrap();
            for (variant, k, s) in [
                (Variant::Kwl, 1, 1),
                (Variant::Kwl, 2, 2),
                (Variant::DeltaKwl, 2, 2),
                (Variant::DeltaKlwl, 2, 2),
                (Variant::KsLwl, 2, 1),
            ] {
                assert!(!distinguish(&g, &h, variant, k, s).unwrap().distinguished);
            }
        }
    }

    #[test]
    fn delta_refines_plain_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let g = random_graph(5, 0.5, &mut rng);
            let sp = enumerate_tuples(&g, 2, 2).unwrap();
            let mut plain = initial_coloring(&g, &sp);
            let mut delta = plain.clone();
            for _ in 0..4 {
                plain = refine_step(&g, &sp, &plain, Variant::Kwl).unwrap();
                delta = refine_step(&g, &sp, &delta, Variant::DeltaKwl).unwrap();
                assert!(refines(&delta, &plain).unwrap());
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let g = cycle(6);
        let a = ColoringReport::from_history(Variant::Kwl, &refine_to_stable(&g, 2, 2, Variant::Kwl).unwrap());
        let b = ColoringReport::from_history(Variant::Kwl, &refine_to_stable(&g, 2, 2, Variant::Kwl).unwrap());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let err = refine_to_stable_with(&path(8), 1, 1, Variant::Kwl, 1).unwrap_err();
        assert_eq!(err, crate::error::Error::IterationCap(1));
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.cli_name().parse::<Variant>().unwrap(), v);
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("folklore".parse::<Variant>().is_err());
    }
}
