use std::ops::ControlFlow;

use aon_core::canon::canonical_form;
use aon_core::embed::{count_copies_in, count_copies_in_complete, enumerate_copies, for_each_copy};
use aon_core::graph::Graph;
use aon_core::numeric::rational_to_f64;
use aon_core::thresholds::{alpha_q, psi_q};
use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random graph on `v` vertices from a bitmask over its pairs.
fn graph_from_bits(v: usize, bits: u64) -> Graph {
    let mut edges = Vec::new();
    let mut i = 0;
    for a in 0..v {
        for b in a + 1..v {
            if bits >> i & 1 == 1 {
                edges.push((a, b));
            }
            i += 1;
        }
    }
    Graph::new(v, edges).unwrap()
}

fn small_graph(max_v: usize) -> impl Strategy<Value = Graph> {
    (2..=max_v, any::<u64>()).prop_map(|(v, bits)| graph_from_bits(v, bits))
}

fn pattern(max_v: usize) -> impl Strategy<Value = Graph> {
    small_graph(max_v)
        .prop_map(|g| g.without_isolated())
        .prop_filter("needs an edge", |g| g.edge_count() > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonical_form_ignores_labels(g in small_graph(8), seed in any::<u64>()) {
        let base = canonical_form(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..g.vertex_count()).collect();
        for _ in 0..100 {
            perm.shuffle(&mut rng);
            prop_assert_eq!(&canonical_form(&g.relabel(&perm)).unwrap(), &base);
        }
    }

    #[test]
    fn copy_count_matches_enumeration(h in pattern(5), extra in 0usize..3) {
        let n = (h.vertex_count() + extra).min(8);
        let kn = Graph::complete(n);
        let listed = enumerate_copies(&h, &kn).unwrap();
        let mut sorted = listed.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), listed.len());
        let formula = count_copies_in_complete(&h, &BigUint::from(n)).unwrap();
        prop_assert_eq!(BigUint::from(listed.len()), formula.clone());
        prop_assert_eq!(count_copies_in(&h, &kn).unwrap(), formula);
    }

    #[test]
    fn double_count_identity(h in pattern(5), mask in any::<u64>(), extra in 0usize..2) {
        // J: a nonempty edge subset of H
        let chosen: Vec<(u32, u32)> = h
            .edges()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        prop_assume!(!chosen.is_empty());
        let j = Graph::spanned_by(&chosen).without_isolated();
        let n = h.vertex_count() + extra;
        let kn = Graph::complete(n);
        let nn = BigUint::from(n);
        let m_h = count_copies_in_complete(&h, &nn).unwrap();
        let m_j = count_copies_in_complete(&j, &nn).unwrap();
        let m_jh = count_copies_in(&j, &h).unwrap();
        let fixed = enumerate_copies(&j, &kn).unwrap().swap_remove(0);
        let mut extensions = 0u64;
        for_each_copy(&h, &kn, |c| {
            if fixed.iter().all(|e| c.binary_search(e).is_ok()) {
                extensions += 1;
            }
            ControlFlow::Continue(())
        })
        .unwrap();
        prop_assert_eq!(m_h * m_jh, m_j * BigUint::from(extensions));
    }

    #[test]
    fn psi_is_monotone_and_above_alpha_bound(h in pattern(6), n_extra in 0usize..30) {
        let n = h.vertex_count() + n_extra;
        let nn = BigUint::from(n);
        let grid: Vec<BigRational> = (0..=4).map(|i| BigRational::new(i.into(), 4.into())).collect();
        let mut last = f64::INFINITY;
        for q in &grid {
            let w = psi_q(&h, &nn, q).unwrap();
            prop_assert!(w.psi <= last * (1.0 + 1e-12));
            last = w.psi;
            let a = rational_to_f64(&alpha_q(&h, q).unwrap().alpha);
            prop_assert!(w.psi >= (n as f64).powf(-a) * (1.0 - 1e-12));
        }
    }
}
