//! Synthetic multilayer graphs with a planted dense community, for tests and
//! benchmarks. Deterministic per seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FirmError, Result};
use crate::graph::MultilayerGraph;

#[derive(Debug, Clone, Copy)]
pub struct PlantedParams {
    pub k: u32,
    pub lambda: u16,
    pub size: usize,
}

/// A generated instance: edge-list triples, the graph built from them, and
/// the planted ground-truth community (node labels).
pub struct SyntheticGraph {
    pub triples: Vec<(String, String, String)>,
    pub graph: MultilayerGraph,
    pub ground_truth: Vec<String>,
}

/// Plants a (k, λ)-satisfying community (a clique overlaid on λ layers)
/// inside a noise graph. `noise` is the per-layer edge probability; the
/// number of noise edges is fixed at round(noise · C(n,2)) so large sparse
/// graphs generate quickly. noise = 0 yields exactly the plant.
pub fn generate_synthetic(
    n: usize,
    layers: usize,
    planted: PlantedParams,
    noise: f64,
    seed: u64,
) -> Result<SyntheticGraph> {
    if planted.size < planted.k as usize + 1 {
        return Err(FirmError::Validation(format!(
            "planted size {} must be at least k+1 = {}",
            planted.size,
            planted.k + 1
        )));
    }
    if planted.size > n {
        return Err(FirmError::Validation(format!(
            "planted size {} exceeds node count {n}",
            planted.size
        )));
    }
    if planted.lambda == 0 || planted.lambda as usize > layers {
        return Err(FirmError::Validation(format!(
            "planted lambda {} out of range 1..={layers}",
            planted.lambda
        )));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(FirmError::Validation("noise must be in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng);
    let mut members = nodes[..planted.size].to_vec();
    members.sort_unstable();

    let mut layer_ids: Vec<usize> = (0..layers).collect();
    layer_ids.shuffle(&mut rng);
    let mut planted_layers = layer_ids[..planted.lambda as usize].to_vec();
    planted_layers.sort_unstable();

    let label = |v: usize| format!("n{v}");
    let mut triples: Vec<(String, String, String)> = Vec::new();
    let mut present: std::collections::HashSet<(usize, usize, usize)> =
        std::collections::HashSet::new();
    for &l in &planted_layers {
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                present.insert((l, members[i], members[j]));
                triples.push((l.to_string(), label(members[i]), label(members[j])));
            }
        }
    }

    let pair_count = n as u64 * (n as u64 - 1) / 2;
    let per_layer = (noise * pair_count as f64).round() as u64;
    for l in 0..layers {
        let mut placed = 0u64;
        let mut attempts = 0u64;
        while placed < per_layer && attempts < per_layer * 20 {
            attempts += 1;
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let key = (l, u.min(v), u.max(v));
            if present.insert(key) {
                triples.push((l.to_string(), label(u.min(v)), label(u.max(v))));
                placed += 1;
            }
        }
    }

    // Deterministic file order regardless of hash-set iteration.
    triples.sort();
    let graph = MultilayerGraph::from_triples(&triples);
    Ok(SyntheticGraph {
        triples,
        graph,
        ground_truth: members.iter().map(|&v| label(v)).collect(),
    })
}

impl SyntheticGraph {
    /// Renders the edge list in the loader's format.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for (l, u, v) in &self.triples {
            out.push_str(l);
            out.push(' ');
            out.push_str(u);
            out.push(' ');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firmtruss::maximal_firmtruss;

    #[test]
    fn deterministic_per_seed() {
        let p = PlantedParams {
            k: 4,
            lambda: 2,
            size: 6,
        };
        let a = generate_synthetic(30, 3, p, 0.1, 7).unwrap();
        let b = generate_synthetic(30, 3, p, 0.1, 7).unwrap();
        assert_eq!(a.edge_list(), b.edge_list());
        let c = generate_synthetic(30, 3, p, 0.1, 8).unwrap();
        assert_ne!(a.edge_list(), c.edge_list());
    }

    #[test]
    fn zero_noise_is_exactly_the_plant() {
        let p = PlantedParams {
            k: 4,
            lambda: 2,
            size: 6,
        };
        let s = generate_synthetic(30, 3, p, 0.0, 3).unwrap();
        assert_eq!(s.graph.node_count(), 6);
        assert_eq!(s.graph.edge_instance_count(), 2 * 15);
    }

    #[test]
    fn planted_community_is_recovered() {
        let p = PlantedParams {
            k: 4,
            lambda: 2,
            size: 6,
        };
        let s = generate_synthetic(40, 3, p, 0.05, 11).unwrap();
        let q = s.graph.node_id(&s.ground_truth[0]).unwrap();
        let (nodes, _, _) = maximal_firmtruss(&s.graph, 4, 2, &[q]).unwrap();
        for label in &s.ground_truth {
            assert!(nodes.contains(s.graph.node_id(label).unwrap()));
        }
    }

    #[test]
    fn infeasible_plant_rejected() {
        let p = PlantedParams {
            k: 4,
            lambda: 2,
            size: 4,
        };
        assert!(generate_synthetic(30, 3, p, 0.0, 1).is_err());
        let p = PlantedParams {
            k: 4,
            lambda: 4,
            size: 6,
        };
        assert!(generate_synthetic(30, 3, p, 0.0, 1).is_err());
    }
}
