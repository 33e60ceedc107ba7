//! Derived-value checks: every structural operation is compared against an
//! independent brute-force oracle on seeded random graphs.

mod common;

use common::{random_graph, supra_distances};
use firmml_core::bitset::BitSet;
use firmml_core::distance;
use firmml_core::firmcore::{
    firm_fixpoint, firmcore_decomposition, maximal_firmcore, property_support, NodeProperty,
};
use firmml_core::firmtruss::{
    firmtruss_decomposition, index_maximal_firmtruss, layer_supports, maximal_firmtruss,
    TrussState,
};
use firmml_core::graph::NodeId;
use firmml_core::oracle::{
    brute_firm_subgraph, enumerate_firm_subgraph, oracle_skyline, OracleBudget,
};
use firmml_core::skyline::IndexPair;
use firmml_core::{FirmError, Structure};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ml_distance_matches_supra_oracle() {
    for seed in 0..12 {
        let g = random_graph(seed, 10, 3, 0.3);
        let all = g.full_subset();
        let view = g.induced(&all);
        let oracle = supra_distances(&g, view);
        for s in 0..g.node_count() as NodeId {
            for t in 0..g.node_count() as NodeId {
                let got = distance::ml_distance(&g, view, s, t).unwrap();
                let want = oracle[s as usize][t as usize];
                assert_eq!(got, (want != u32::MAX).then_some(want), "seed {seed} {s}->{t}");
            }
        }
    }
}

#[test]
fn distances_respect_subsets() {
    for seed in 20..26 {
        let g = random_graph(seed, 9, 2, 0.35);
        let mut sub = g.full_subset();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 0..g.node_count() as NodeId {
            if rng.gen_bool(0.3) && sub.len() > 2 {
                sub.remove(v);
            }
        }
        let view = g.induced(&sub);
        let oracle = supra_distances(&g, view);
        for s in sub.iter() {
            for t in sub.iter() {
                let got = distance::ml_distance(&g, view, s, t).unwrap();
                let want = oracle[s as usize][t as usize];
                assert_eq!(got, (want != u32::MAX).then_some(want));
            }
        }
    }
}

#[test]
fn query_distance_and_diameter_match_oracle() {
    for seed in 0..10 {
        let g = random_graph(seed + 100, 9, 3, 0.3);
        let all = g.full_subset();
        let view = g.induced(&all);
        let oracle = supra_distances(&g, view);
        let n = g.node_count();
        let query = vec![0 as NodeId, (n as u32 / 2) as NodeId];
        let qd = distance::query_distance_of(&g, view, &all, &query).unwrap();
        let mut want = Some(0u32);
        for u in 0..n {
            for &q in &query {
                let d = oracle[u][q as usize];
                want = match (want, d) {
                    (Some(w), d) if d != u32::MAX => Some(w.max(d)),
                    _ => None,
                };
            }
        }
        assert_eq!(qd, want, "seed {seed}");

        let diam = distance::diameter(&g, view).unwrap();
        let mut want = Some(0u32);
        for u in 0..n {
            for v in 0..n {
                want = match (want, oracle[u][v]) {
                    (Some(w), d) if d != u32::MAX => Some(w.max(d)),
                    _ => None,
                };
            }
        }
        assert_eq!(diam, want, "seed {seed}");
    }
}

#[test]
fn multilayer_distance_shape() {
    // Symmetry always holds; the supra-level distance is a true shortest-path
    // metric; the flattened node distance obeys the switch-penalty-corrected
    // triangle inequality, and the exact one on single-layer graphs.
    for seed in 0..8 {
        for layers in [1usize, 3] {
            let g = random_graph(seed + 40, 8, layers, 0.35);
            let all = g.full_subset();
            let view = g.induced(&all);
            let d = supra_distances(&g, view);
            let n = g.node_count();
            for u in 0..n {
                for v in 0..n {
                    assert_eq!(d[u][v], d[v][u], "symmetry seed {seed}");
                    for w in 0..n {
                        let (a, b, c) = (d[u][w], d[u][v], d[v][w]);
                        if b != u32::MAX && c != u32::MAX {
                            let slack = if layers == 1 { 0 } else { 1 };
                            assert!(
                                a as u64 <= b as u64 + c as u64 + slack,
                                "triangle seed {seed} u={u} v={v} w={w}"
                            );
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn query_distance_diameter_sandwich() {
    // qd(S, Q) <= diam(S) always; diam(S) <= 2 qd(S, Q) on single-layer
    // graphs, and <= 2 qd + 1 with layer-switch penalties.
    for seed in 0..10 {
        for layers in [1usize, 3] {
            let g = random_graph(seed + 60, 9, layers, 0.4);
            let all = g.full_subset();
            let view = g.induced(&all);
            let query = vec![0 as NodeId];
            let (Some(qd), Some(diam)) = (
                distance::query_distance_of(&g, view, &all, &query).unwrap(),
                distance::diameter(&g, view).unwrap(),
            ) else {
                continue;
            };
            assert!(qd <= diam);
            let slack = if layers == 1 { 0 } else { 1 };
            assert!(diam <= 2 * qd + slack, "seed {seed} layers {layers}");
        }
    }
}

#[test]
fn degree_vector_matches_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..8 {
        let g = random_graph(seed + 200, 8, 3, 0.4);
        let mut sub = g.full_subset();
        for v in 0..8u32 {
            if rng.gen_bool(0.25) && sub.len() > 1 {
                sub.remove(v);
            }
        }
        for v in sub.iter() {
            let got = g.degree_vector(&sub, v).unwrap();
            for l in 0..g.layer_count() {
                let mut count = 0;
                for w in sub.iter() {
                    if w != v && g.layer(l as u16).neighbors(v).contains(&w) {
                        count += 1;
                    }
                }
                assert_eq!(got[l], count);
            }
        }
    }
}

#[test]
fn degree_vector_is_node_monotone() {
    for seed in 0..8 {
        let g = random_graph(seed + 300, 9, 3, 0.4);
        let b = g.full_subset();
        let mut a = b.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in 0..9u32 {
            if rng.gen_bool(0.4) && a.len() > 1 {
                a.remove(v);
            }
        }
        for v in a.iter() {
            let da = g.degree_vector(&a, v).unwrap();
            let db = g.degree_vector(&b, v).unwrap();
            for l in 0..da.len() {
                assert!(da[l] <= db[l]);
            }
        }
    }
}

#[test]
fn property_support_matches_per_layer_recount() {
    for seed in 0..8 {
        let g = random_graph(seed + 400, 9, 3, 0.4);
        let all = g.full_subset();
        for k in 1..4u32 {
            let p = NodeProperty::degree_at_least(k);
            for v in 0..g.node_count() as NodeId {
                let got = property_support(&g, &all, &p, v).unwrap();
                let deg = g.degree_vector(&all, v).unwrap();
                let want = deg.iter().filter(|&&d| d >= k).count() as u32;
                assert_eq!(got, want);
            }
        }
    }
}

#[test]
fn firm_fixpoint_is_order_independent_and_maximal() {
    for seed in 0..6 {
        let g = random_graph(seed + 500, 8, 2, 0.45);
        let fix = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(2), 2)]);
        // Any random removal order converges to the same set.
        for order_seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
            let mut sub = g.full_subset();
            loop {
                let p = NodeProperty::degree_at_least(2);
                let mut violators: Vec<NodeId> = sub
                    .iter()
                    .filter(|&v| property_support(&g, &sub, &p, v).unwrap() < 2)
                    .collect();
                if violators.is_empty() {
                    break;
                }
                violators.shuffle(&mut rng);
                sub.remove(violators[0]);
            }
            assert_eq!(sub, fix, "seed {seed} order {order_seed}");
        }
        // Union of all satisfying subsets (n <= 8) equals the fixpoint.
        let n = g.node_count();
        let mut union = BitSet::empty(n);
        for mask in 1u32..(1 << n) {
            let sub = BitSet::from_iter(n, (0..n as u32).filter(|v| mask >> v & 1 == 1));
            let p = NodeProperty::degree_at_least(2);
            if sub
                .iter()
                .all(|v| property_support(&g, &sub, &p, v).unwrap() >= 2)
            {
                union = union.union(&sub);
            }
        }
        assert_eq!(union, fix, "subset-maximality seed {seed}");
    }
}

#[test]
fn maximal_firmcore_matches_fixpoint_oracle() {
    for seed in 0..10 {
        let g = random_graph(seed + 600, 10, 3, 0.4);
        for k in 1..4u32 {
            for lambda in 1..=3u16 {
                let fix = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k), lambda)]);
                match maximal_firmcore(&g, k, lambda, &[0]) {
                    Ok((core, _)) => {
                        let comp =
                            distance::connected_component(&g, g.induced(&fix), &[0]).unwrap();
                        assert_eq!(core, comp, "seed {seed} k {k} λ {lambda}");
                    }
                    Err(FirmError::NoCommunity) => {
                        assert!(
                            !fix.contains(0),
                            "oracle keeps query but extraction refused: seed {seed} k {k} λ {lambda}"
                        );
                    }
                    Err(e) => panic!("unexpected error {e:?}"),
                }
            }
        }
    }
}

#[test]
fn layer_supports_match_all_triples_oracle() {
    for seed in 0..10 {
        let g = random_graph(seed + 700, 12, 3, 0.4);
        let all = g.full_subset();
        let sup = layer_supports(&g, &all);
        let n = g.node_count() as NodeId;
        for s in 0..g.schema_count() as u32 {
            let (u, v) = g.schema_endpoints(s);
            for l in 0..g.layer_count() {
                let csr = g.layer(l as u16);
                let present = csr.neighbors(u).contains(&v);
                let mut count = 0;
                if present {
                    for w in 0..n {
                        if w != u
                            && w != v
                            && csr.neighbors(u).contains(&w)
                            && csr.neighbors(v).contains(&w)
                        {
                            count += 1;
                        }
                    }
                }
                assert_eq!(sup[s as usize][l], count, "seed {seed} schema {s} layer {l}");
            }
        }
    }
}

#[test]
fn maximal_firmtruss_matches_random_order_fixpoint() {
    let budget = OracleBudget::default();
    for seed in 0..10 {
        let g = random_graph(seed + 800, 10, 3, 0.4);
        for (k, lambda) in [(3u32, 1u16), (3, 2), (4, 1), (4, 2), (3, 3)] {
            let (nodes, schemas) =
                match brute_firm_subgraph(&g, k, lambda, Structure::FirmTruss, seed, &budget) {
                    Ok(x) => x,
                    Err(e) => panic!("oracle failed: {e:?}"),
                };
            let schemas = schemas.unwrap();
            // Uniqueness across shuffled peel orders.
            for order in 0..5 {
                let (n2, s2) = brute_firm_subgraph(
                    &g,
                    k,
                    lambda,
                    Structure::FirmTruss,
                    seed * 1000 + order,
                    &budget,
                )
                .unwrap();
                assert_eq!(n2, nodes);
                assert_eq!(s2.unwrap(), schemas);
            }
            // Production peeling agrees on the whole-graph fixpoint.
            let state = TrussState::new(&g, k, lambda, &g.full_subset(), None).unwrap();
            assert_eq!(state.alive_schemas(), &schemas, "seed {seed} k {k} λ {lambda}");
            assert_eq!(state.vertices(), &nodes);
        }
    }
}

#[test]
fn enumeration_cross_checks_fixpoint() {
    let budget = OracleBudget::default();
    for seed in 0..6 {
        let g = random_graph(seed + 900, 7, 2, 0.4);
        for (k, lambda) in [(1u32, 1u16), (2, 1), (2, 2)] {
            let (a, _) =
                brute_firm_subgraph(&g, k, lambda, Structure::FirmCore, seed, &budget).unwrap();
            let (b, _) =
                enumerate_firm_subgraph(&g, k, lambda, Structure::FirmCore, &budget).unwrap();
            assert_eq!(a, b, "firmcore seed {seed} k {k} λ {lambda}");
        }
        if g.schema_count() <= 16 {
            for (k, lambda) in [(3u32, 1u16), (3, 2)] {
                let (_, a) =
                    brute_firm_subgraph(&g, k, lambda, Structure::FirmTruss, seed, &budget)
                        .unwrap();
                let (_, b) =
                    enumerate_firm_subgraph(&g, k, lambda, Structure::FirmTruss, &budget)
                        .unwrap();
                assert_eq!(a.unwrap(), b.unwrap(), "firmtruss seed {seed} k {k} λ {lambda}");
            }
        }
    }
}

#[test]
fn maintain_matches_recompute_from_scratch() {
    for seed in 0..10 {
        let g = random_graph(seed + 1000, 10, 3, 0.45);
        let mut state = TrussState::new(&g, 3, 2, &g.full_subset(), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let victims: Vec<NodeId> = (0..g.node_count() as u32)
            .filter(|_| rng.gen_bool(0.3))
            .collect();
        state.delete_vertices(&victims);

        let mut reduced = g.full_subset();
        for &v in &victims {
            reduced.remove(v);
        }
        let fresh = TrussState::new(&g, 3, 2, &reduced, None).unwrap();
        assert_eq!(state.alive_schemas(), fresh.alive_schemas(), "seed {seed}");
        assert_eq!(state.vertices(), fresh.vertices(), "seed {seed}");
    }
}

#[test]
fn hierarchy_and_containment() {
    for seed in 0..10 {
        let g = random_graph(seed + 1100, 10, 3, 0.45);
        let full = g.full_subset();
        for lambda in 1..=3u16 {
            for k in 2..6u32 {
                let t = TrussState::new(&g, k, lambda, &full, None).unwrap();
                let t_k = TrussState::new(&g, k + 1, lambda, &full, None).unwrap();
                assert!(t_k.alive_schemas().is_subset_of(t.alive_schemas()));
                if (lambda as usize) < g.layer_count() {
                    let t_l = TrussState::new(&g, k, lambda + 1, &full, None).unwrap();
                    assert!(t_l.alive_schemas().is_subset_of(t.alive_schemas()));
                }
                // Every (k, λ)-FirmTruss is inside the (k−1, λ)-FirmCore.
                let core = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k - 1), lambda)]);
                assert!(t.vertices().is_subset_of(&core), "seed {seed} k {k} λ {lambda}");

                // Surviving structures satisfy the definitional conditions.
                let sup = firmml_core::oracle::naive_supports(&g, t.vertices(), t.alive_schemas());
                for s in t.alive_schemas().iter() {
                    let base = g.schema_slot_base(s);
                    let qualifying = g
                        .schema_layer_ids(s)
                        .iter()
                        .enumerate()
                        .filter(|(slot, _)| sup[base + slot] + 2 >= k)
                        .count();
                    assert!(qualifying >= lambda as usize);
                }
                for v in t.vertices().iter() {
                    let deg = g.degree_vector(t.vertices(), v).unwrap();
                    let qualifying = deg.iter().filter(|&&d| d + 1 >= k).count();
                    assert!(qualifying >= lambda as usize, "min-degree property");
                }
            }
        }
        for lambda in 1..=3u16 {
            for k in 1..5u32 {
                let c = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k), lambda)]);
                let c_k = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k + 1), lambda)]);
                assert!(c_k.is_subset_of(&c));
                if (lambda as usize) < g.layer_count() {
                    let c_l =
                        firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k), lambda + 1)]);
                    assert!(c_l.is_subset_of(&c));
                }
            }
        }
    }
}

#[test]
fn decompositions_match_grid_oracle() {
    // Acceptance #4 runs the full 50-seed version; this is the narrower
    // integration check across graph shapes.
    for seed in 0..8 {
        let g = random_graph(seed + 1200, 9, 3, 0.4);
        let full = g.full_subset();

        let index = firmtruss_decomposition(&g);
        for s in 0..g.schema_count() as u32 {
            let mut memberships: Vec<IndexPair> = Vec::new();
            for lambda in 1..=g.layer_count() as u16 {
                let mut best: Option<u32> = None;
                for k in 2..12u32 {
                    let st = TrussState::new(&g, k, lambda, &full, None).unwrap();
                    if st.alive_schemas().contains(s) {
                        best = Some(k);
                    } else {
                        break;
                    }
                }
                if let Some(k) = best {
                    memberships.push(IndexPair::new(k, lambda));
                }
            }
            assert_eq!(
                index.per_schema[s as usize],
                oracle_skyline(&memberships),
                "seed {seed} schema {s}"
            );
        }

        let coreness = firmcore_decomposition(&g);
        for v in 0..g.node_count() as u32 {
            let mut memberships: Vec<IndexPair> = Vec::new();
            for lambda in 1..=g.layer_count() as u16 {
                let mut best: Option<u32> = None;
                for k in 0..12u32 {
                    let fix = firm_fixpoint(&g, &[(NodeProperty::degree_at_least(k), lambda)]);
                    if fix.contains(v) {
                        best = Some(k);
                    } else {
                        break;
                    }
                }
                if let Some(k) = best {
                    memberships.push(IndexPair::new(k, lambda));
                }
            }
            assert_eq!(
                coreness.per_node[v as usize],
                oracle_skyline(&memberships),
                "seed {seed} node {v}"
            );
        }
    }
}

#[test]
fn index_lookup_equals_online_extraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..10 {
        let g = random_graph(seed + 1300, 10, 3, 0.4);
        let index = firmtruss_decomposition(&g);
        for _ in 0..10 {
            let k = rng.gen_range(2..6u32);
            let lambda = rng.gen_range(1..=3u16);
            let q = rng.gen_range(0..g.node_count() as u32);
            let online = maximal_firmtruss(&g, k, lambda, &[q]).map(|(n, s, _)| (n, s));
            let indexed = index_maximal_firmtruss(&g, &index, k, lambda, &[q]);
            match (online, indexed) {
                (Ok((n1, s1)), Ok((n2, s2))) => {
                    assert_eq!(n1, n2, "seed {seed} k {k} λ {lambda} q {q}");
                    assert_eq!(s1, s2);
                }
                (Err(FirmError::NoCommunity), Err(FirmError::NoCommunity)) => {}
                (a, b) => panic!("mismatch: {a:?} vs {b:?}"),
            }
        }
    }
}
