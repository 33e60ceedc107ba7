//! Multilayer shortest paths on the supra graph: each node is replicated per
//! layer, intra-layer hops cost 1, and switching layer at a fixed node costs 1
//! (the penalty for changing edge types). A distance query seeds the source in
//! every layer replica at cost 0 and accepts the target in any replica.

use std::collections::VecDeque;

use crate::bitset::BitSet;
use crate::error::{FirmError, Result};
use crate::graph::{MultilayerGraph, NodeId, SubgraphView, VertexSubset};

pub const INF: u32 = u32::MAX;

/// Per-node shortest multilayer distance from `src` inside `view`.
/// Unreachable nodes (and nodes outside the view) read `INF`.
pub fn distances_from(graph: &MultilayerGraph, view: SubgraphView<'_>, src: NodeId) -> Vec<u32> {
    let n = graph.node_count();
    let lc = graph.layer_count().max(1);
    let mut dist = vec![INF; n * lc];
    let mut best = vec![INF; n];
    if !view.admits_node(src) {
        return best;
    }
    let mut queue = VecDeque::new();
    for l in 0..lc {
        dist[src as usize * lc + l] = 0;
        queue.push_back((src, l as u16));
    }
    best[src as usize] = 0;
    while let Some((v, l)) = queue.pop_front() {
        let d = dist[v as usize * lc + l as usize];
        // Intra-layer hops.
        if (l as usize) < graph.layer_count() {
            let csr = graph.layer(l);
            let r = csr.range(v);
            for i in r {
                let w = csr.nbrs[i];
                if view.admits_edge(w, csr.schema[i]) {
                    let slot = w as usize * lc + l as usize;
                    if dist[slot] == INF {
                        dist[slot] = d + 1;
                        if d + 1 < best[w as usize] {
                            best[w as usize] = d + 1;
                        }
                        queue.push_back((w, l));
                    }
                }
            }
        }
        // Layer switch at the same node.
        for l2 in 0..lc as u16 {
            if l2 != l {
                let slot = v as usize * lc + l2 as usize;
                if dist[slot] == INF {
                    dist[slot] = d + 1;
                    queue.push_back((v, l2));
                }
            }
        }
    }
    best
}

/// Shortest multilayer distance between two nodes inside `view`; `None` = ∞.
pub fn ml_distance(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    src: NodeId,
    dst: NodeId,
) -> Result<Option<u32>> {
    for v in [src, dst] {
        if !view.admits_node(v) {
            return Err(FirmError::Domain(format!(
                "node {} not in subset",
                graph.node_label(v)
            )));
        }
    }
    if src == dst {
        return Ok(Some(0));
    }
    let d = distances_from(graph, view, src)[dst as usize];
    Ok(if d == INF { None } else { Some(d) })
}

/// Per-node query distance `max_{q in query} dist(v, q)` inside `view`.
pub fn query_distances(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    query: &[NodeId],
) -> Vec<u32> {
    let n = graph.node_count();
    let mut out = vec![0u32; n];
    for &q in query {
        let d = distances_from(graph, view, q);
        for v in 0..n {
            out[v] = out[v].max(d[v]);
        }
    }
    out
}

/// Query distance of a vertex set: `max_{u in set, q in query} dist(u, q)`.
/// `None` = some pair unreachable.
pub fn query_distance_of(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    set: &VertexSubset,
    query: &[NodeId],
) -> Result<Option<u32>> {
    if query.is_empty() {
        return Err(FirmError::Domain("empty query set".into()));
    }
    for &q in query {
        if !set.contains(q) {
            return Err(FirmError::Domain(format!(
                "query node {} outside the set",
                graph.node_label(q)
            )));
        }
    }
    let dq = query_distances(graph, view, query);
    let mut worst = 0u32;
    for v in set.iter() {
        let d = dq[v as usize];
        if d == INF {
            return Ok(None);
        }
        worst = worst.max(d);
    }
    Ok(Some(worst))
}

/// Exact diameter of the view's vertex set; `None` = disconnected.
pub fn diameter(graph: &MultilayerGraph, view: SubgraphView<'_>) -> Result<Option<u32>> {
    if view.nodes.is_empty() {
        return Err(FirmError::Domain("diameter of empty subset".into()));
    }
    let mut worst = 0u32;
    for v in view.nodes.iter() {
        let d = distances_from(graph, view, v);
        for u in view.nodes.iter() {
            if d[u as usize] == INF {
                return Ok(None);
            }
            worst = worst.max(d[u as usize]);
        }
    }
    Ok(Some(worst))
}

/// Connected components of the view's union graph (an edge connects two nodes
/// when any layer hosts it). Returns the component containing every query
/// vertex; distinct components for different query vertices are a query split.
pub fn connected_component(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    query: &[NodeId],
) -> Result<VertexSubset> {
    if query.is_empty() {
        return Err(FirmError::Domain("empty query set".into()));
    }
    for &q in query {
        if !view.admits_node(q) {
            return Err(FirmError::NoCommunity);
        }
    }
    let comp = component_of(graph, view, query[0]);
    for &q in &query[1..] {
        if !comp.contains(q) {
            return Err(FirmError::QuerySplit);
        }
    }
    Ok(comp)
}

/// Union-graph component containing `start`.
pub fn component_of(graph: &MultilayerGraph, view: SubgraphView<'_>, start: NodeId) -> VertexSubset {
    let mut comp = BitSet::empty(graph.node_count());
    if !view.admits_node(start) {
        return comp;
    }
    let mut stack = vec![start];
    comp.insert(start);
    while let Some(v) = stack.pop() {
        for &(w, sid) in graph.union_neighbors(v) {
            if view.admits_edge(w, sid) && comp.insert(w) {
                stack.push(w);
            }
        }
    }
    comp
}

/// True when all of the view's vertices lie in one union-graph component.
pub fn is_connected(graph: &MultilayerGraph, view: SubgraphView<'_>) -> bool {
    let Some(start) = view.nodes.iter().next() else {
        return true;
    };
    component_of(graph, view, start).len() == view.nodes.len()
}
