//! Shared helpers for the integration suites: seeded random multilayer
//! graphs and an explicit supra-graph BFS distance oracle that shares no code
//! with the library's distance engine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use firmml_core::graph::{MultilayerGraph, NodeId, SubgraphView};

/// Erdős–Rényi multilayer graph: every pair independently present in every
/// layer with probability `p`. Node `i` is labeled `v{i}` and gets id `i`.
pub fn random_graph(seed: u64, n: usize, layers: usize, p: f64) -> MultilayerGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triples = Vec::new();
    for l in 0..layers {
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    triples.push((format!("l{l}"), format!("v{i}"), format!("v{j}")));
                }
            }
        }
    }
    let node_labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let node_refs: Vec<&str> = node_labels.iter().map(|s| s.as_str()).collect();
    let layer_labels: Vec<String> = (0..layers).map(|l| format!("l{l}")).collect();
    let layer_refs: Vec<&str> = layer_labels.iter().map(|s| s.as_str()).collect();
    MultilayerGraph::from_triples_with(&triples, &node_refs, &layer_refs)
}

/// All-pairs multilayer distances by BFS over an explicitly materialized
/// supra graph: one replica per (node, layer), intra-layer edges within a
/// replica level, inter-layer edges between replicas of the same node.
/// Entry [s][t] is the flattened node distance; u32::MAX means unreachable.
pub fn supra_distances(graph: &MultilayerGraph, view: SubgraphView<'_>) -> Vec<Vec<u32>> {
    let n = graph.node_count();
    let lc = graph.layer_count().max(1);
    let idx = |v: usize, l: usize| v * lc + l;

    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n * lc];
    for l in 0..graph.layer_count() {
        let csr = graph.layer(l as u16);
        for v in 0..n as NodeId {
            if !view.admits_node(v) {
                continue;
            }
            for i in csr.range(v) {
                let w = csr.nbrs[i];
                if view.admits_edge(w, csr.schema[i]) {
                    adj[idx(v as usize, l)].push(idx(w as usize, l));
                }
            }
        }
    }
    for v in 0..n {
        if !view.admits_node(v as NodeId) {
            continue;
        }
        for l1 in 0..lc {
            for l2 in 0..lc {
                if l1 != l2 {
                    adj[idx(v, l1)].push(idx(v, l2));
                }
            }
        }
    }

    let mut out = vec![vec![u32::MAX; n]; n];
    for s in 0..n {
        if !view.admits_node(s as NodeId) {
            continue;
        }
        let mut dist = vec![u32::MAX; n * lc];
        let mut queue = std::collections::VecDeque::new();
        for l in 0..lc {
            dist[idx(s, l)] = 0;
            queue.push_back(idx(s, l));
        }
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if dist[y] == u32::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        for t in 0..n {
            if view.admits_node(t as NodeId) {
                out[s][t] = (0..lc).map(|l| dist[idx(t, l)]).min().unwrap();
            }
        }
    }
    out
}

/// Deterministic pseudo-random attribute table over `dim` dimensions.
#[allow(dead_code)]
pub fn random_attributes(
    seed: u64,
    graph: &MultilayerGraph,
    dim: usize,
) -> firmml_core::AttributeTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa77);
    let mut table = firmml_core::AttributeTable::new(dim, graph.node_count());
    for v in 0..graph.node_count() as NodeId {
        let row: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        table.set(v, row).unwrap();
    }
    table
}
