//! FirmCore extraction, FirmCore skyline decomposition, and the generic
//! node-property-support fixpoint engine.
//!
//! A (k, λ)-FirmCore is the maximal subgraph in which every node has degree at
//! least k in at least λ layers, i.e. Top-λ degree ≥ k. Extraction peels with
//! a bucket queue on the Top-λ degree; the Top-λ value of a neighbor is
//! re-evaluated only when the removed edge's layer attains it.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::distance::connected_component;
use crate::error::{FirmError, Result};
use crate::graph::{LayerId, MultilayerGraph, NodeId, SubgraphView, VertexSubset};
use crate::skyline::{skyline_from_per_lambda, IndexPair};

/// Boolean node-monotone function evaluated per (subset, node, layer).
pub struct NodeProperty<'a> {
    pub monotone: bool,
    eval: Box<dyn Fn(&MultilayerGraph, &VertexSubset, NodeId, LayerId) -> bool + Sync + 'a>,
}

impl<'a> NodeProperty<'a> {
    pub fn new<F>(monotone: bool, eval: F) -> Self
    where
        F: Fn(&MultilayerGraph, &VertexSubset, NodeId, LayerId) -> bool + Sync + 'a,
    {
        NodeProperty {
            monotone,
            eval: Box::new(eval),
        }
    }

    /// The property `deg_l(v) >= k` within the subset.
    pub fn degree_at_least(k: u32) -> Self {
        NodeProperty::new(true, move |g, subset, v, l| {
            let csr = g.layer(l);
            let mut count = 0;
            for &w in csr.neighbors(v) {
                if subset.contains(w) {
                    count += 1;
                    if count >= k {
                        return true;
                    }
                }
            }
            k == 0
        })
    }

    pub fn evaluate(
        &self,
        graph: &MultilayerGraph,
        subset: &VertexSubset,
        v: NodeId,
        l: LayerId,
    ) -> bool {
        (self.eval)(graph, subset, v, l)
    }
}

/// Number of layers where the property holds for `v` within `subset`.
pub fn property_support(
    graph: &MultilayerGraph,
    subset: &VertexSubset,
    property: &NodeProperty<'_>,
    v: NodeId,
) -> Result<u32> {
    if !subset.contains(v) {
        return Err(FirmError::Domain(format!(
            "node {} not in subset",
            graph.node_label(v)
        )));
    }
    let mut count = 0;
    for l in 0..graph.layer_count() as LayerId {
        if property.evaluate(graph, subset, v, l) {
            count += 1;
        }
    }
    Ok(count)
}

/// The unique maximal subset in which every node has property support at
/// least λ_i for every listed property, found by iterative removal.
pub fn firm_fixpoint(
    graph: &MultilayerGraph,
    properties: &[(NodeProperty<'_>, u16)],
) -> VertexSubset {
    let mut subset = graph.full_subset();
    loop {
        let violators: Vec<NodeId> = subset
            .iter()
            .filter(|&v| {
                properties.iter().any(|(p, lambda)| {
                    property_support(graph, &subset, p, v).unwrap() < *lambda as u32
                })
            })
            .collect();
        if violators.is_empty() {
            return subset;
        }
        for v in violators {
            subset.remove(v);
        }
    }
}

/// Mutable FirmCore peeling state: current vertex set plus per-node per-layer
/// degrees, cascaded on deletion.
#[derive(Clone)]
pub struct CoreState<'g> {
    pub graph: &'g MultilayerGraph,
    pub k: u32,
    pub lambda: u16,
    vertices: VertexSubset,
    deg: Vec<u32>, // node-major, layer-minor
    top: Vec<u32>, // cached Top-λ degree per node
}

impl<'g> CoreState<'g> {
    /// Peels `start` down to the maximal (k, λ)-FirmCore inside it.
    pub fn new(
        graph: &'g MultilayerGraph,
        k: u32,
        lambda: u16,
        start: &VertexSubset,
    ) -> Result<Self> {
        if lambda == 0 || lambda as usize > graph.layer_count().max(1) {
            return Err(FirmError::Domain(format!(
                "lambda {} out of range 1..={}",
                lambda,
                graph.layer_count()
            )));
        }
        let n = graph.node_count();
        let lc = graph.layer_count();
        let mut deg = vec![0u32; n * lc];
        for v in start.iter() {
            for l in 0..lc {
                deg[v as usize * lc + l] = graph
                    .layer(l as LayerId)
                    .neighbors(v)
                    .iter()
                    .filter(|&&w| start.contains(w))
                    .count() as u32;
            }
        }
        let mut state = CoreState {
            graph,
            k,
            lambda,
            vertices: start.clone(),
            top: vec![0; n],
            deg,
        };
        for v in start.iter() {
            state.top[v as usize] = state.recompute_top(v);
        }
        let seeds: Vec<NodeId> = start
            .iter()
            .filter(|&v| state.top[v as usize] < k)
            .collect();
        state.cascade(seeds);
        Ok(state)
    }

    fn recompute_top(&self, v: NodeId) -> u32 {
        let lc = self.graph.layer_count();
        if lc == 0 {
            return 0;
        }
        let mut local: Vec<u32> = self.deg[v as usize * lc..(v as usize + 1) * lc].to_vec();
        let idx = self.lambda as usize - 1;
        let (_, nth, _) = local.select_nth_unstable_by(idx, |a, b| b.cmp(a));
        *nth
    }

    pub fn vertices(&self) -> &VertexSubset {
        &self.vertices
    }

    pub fn view(&self) -> SubgraphView<'_> {
        SubgraphView {
            nodes: &self.vertices,
            schemas: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Deletes the given vertices and re-peels to the fixpoint.
    pub fn delete_vertices(&mut self, victims: &[NodeId]) {
        self.cascade(victims.to_vec());
    }

    fn cascade(&mut self, mut queue: Vec<NodeId>) {
        let lc = self.graph.layer_count();
        queue.retain(|&v| self.vertices.contains(v));
        while let Some(v) = queue.pop() {
            if !self.vertices.remove(v) {
                continue;
            }
            for l in 0..lc {
                let csr = self.graph.layer(l as LayerId);
                for &w in csr.neighbors(v) {
                    if !self.vertices.contains(w) {
                        continue;
                    }
                    let slot = w as usize * lc + l;
                    let old = self.deg[slot];
                    self.deg[slot] = old - 1;
                    // Removing v only matters when this layer attains w's
                    // Top-λ degree.
                    if old == self.top[w as usize] {
                        let t = self.recompute_top(w);
                        self.top[w as usize] = t;
                        if t < self.k {
                            queue.push(w);
                        }
                    }
                }
            }
        }
    }

    /// Restricts the state to the union-graph component containing `query`.
    /// A missing or split query is reported as `NoCommunity`.
    pub fn restrict_to_component(&mut self, query: &[NodeId]) -> Result<()> {
        match connected_component(self.graph, self.view(), query) {
            Ok(comp) => {
                self.vertices = comp;
                Ok(())
            }
            Err(FirmError::QuerySplit) | Err(FirmError::NoCommunity) => {
                Err(FirmError::NoCommunity)
            }
            Err(e) => Err(e),
        }
    }
}

/// Maximal (k, λ)-FirmCore component containing the query. With k = 0 this
/// degenerates to the connected component of the query.
pub fn maximal_firmcore<'g>(
    graph: &'g MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<(VertexSubset, CoreState<'g>)> {
    let mut state = CoreState::new(graph, k, lambda, &graph.full_subset())?;
    state.restrict_to_component(query)?;
    Ok((state.vertices.clone(), state))
}

/// Skyline FirmCoreness for every node: the dominance-maximal (k, λ) pairs,
/// λ ascending. Exported as JSON `{node: [[k, λ], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkylineCoreness {
    pub per_node: Vec<Vec<IndexPair>>,
}

impl SkylineCoreness {
    pub fn to_json(&self, graph: &MultilayerGraph) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (v, pairs) in self.per_node.iter().enumerate() {
            let arr: Vec<serde_json::Value> = pairs
                .iter()
                .map(|p| serde_json::json!([p.k, p.lambda]))
                .collect();
            map.insert(graph.node_label(v as NodeId).to_owned(), arr.into());
        }
        map.into()
    }

    /// Nodes whose skyline admits (k, λ), i.e. the (k, λ)-FirmCore vertex set.
    pub fn members(&self, k: u32, lambda: u16) -> VertexSubset {
        let mut set = BitSet::empty(self.per_node.len());
        for (v, pairs) in self.per_node.iter().enumerate() {
            if crate::skyline::skyline_admits(pairs, IndexPair::new(k, lambda)) {
                set.insert(v as u32);
            }
        }
        set
    }
}

/// Full FirmCore decomposition: for every node and λ the maximal k such that
/// the node is in the (k, λ)-FirmCore, reduced to skyline pairs.
pub fn firmcore_decomposition(graph: &MultilayerGraph) -> SkylineCoreness {
    let n = graph.node_count();
    let lc = graph.layer_count();
    let mut per_lambda: Vec<Vec<Option<u32>>> = vec![vec![None; lc]; n];

    let mut base_deg = vec![0u32; n * lc];
    for v in 0..n as NodeId {
        for l in 0..lc {
            base_deg[v as usize * lc + l] = graph.layer(l as LayerId).neighbors(v).len() as u32;
        }
    }

    for lambda in 1..=lc as u16 {
        let mut deg = base_deg.clone();
        let mut alive = BitSet::full(n);
        let mut core = vec![0u32; n];
        let top = |deg: &[u32], v: NodeId| -> u32 {
            let mut local: Vec<u32> = deg[v as usize * lc..(v as usize + 1) * lc].to_vec();
            let idx = lambda as usize - 1;
            let (_, nth, _) = local.select_nth_unstable_by(idx, |a, b| b.cmp(a));
            *nth
        };
        // cur = Top-λ degree; bucket position is cur floored at the round k
        // being processed.
        let mut cur = vec![0u32; n];
        let mut bucket_of = vec![0u32; n];
        let mut max_b = 0u32;
        for v in 0..n as NodeId {
            cur[v as usize] = top(&deg, v);
            bucket_of[v as usize] = cur[v as usize];
            max_b = max_b.max(cur[v as usize]);
        }
        let mut buckets: Vec<Vec<NodeId>> = vec![Vec::new(); max_b as usize + 1];
        for v in 0..n as NodeId {
            buckets[bucket_of[v as usize] as usize].push(v);
        }
        for k in 0..=max_b {
            // Entries can be stale; re-check on pop.
            while let Some(v) = buckets[k as usize].pop() {
                if !alive.contains(v) || bucket_of[v as usize] != k {
                    continue;
                }
                alive.remove(v);
                core[v as usize] = k;
                for l in 0..lc {
                    let csr = graph.layer(l as LayerId);
                    for &w in csr.neighbors(v) {
                        if !alive.contains(w) {
                            continue;
                        }
                        let slot = w as usize * lc + l;
                        let old = deg[slot];
                        deg[slot] = old - 1;
                        // The Top-λ value moves only when this layer attained it.
                        if old == cur[w as usize] {
                            cur[w as usize] = top(&deg, w);
                            let b = cur[w as usize].max(k);
                            if b != bucket_of[w as usize] {
                                bucket_of[w as usize] = b;
                                buckets[b as usize].push(w);
                            }
                        }
                    }
                }
            }
        }
        for v in 0..n {
            per_lambda[v][lambda as usize - 1] = Some(core[v]);
        }
    }

    SkylineCoreness {
        per_node: per_lambda
            .into_iter()
            .map(|p| skyline_from_per_lambda(&p))
            .collect(),
    }
}

/// Index-backed maximal (k, λ)-FirmCore component containing the query:
/// BFS from the query over nodes whose skyline dominates (k, λ).
pub fn index_maximal_firmcore(
    graph: &MultilayerGraph,
    coreness: &SkylineCoreness,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<VertexSubset> {
    if coreness.per_node.len() != graph.node_count() {
        return Err(FirmError::IndexMismatch(
            "coreness table size differs from graph".into(),
        ));
    }
    let members = coreness.members(k, lambda);
    for &q in query {
        if !members.contains(q) {
            return Err(FirmError::NoCommunity);
        }
    }
    let view = graph.induced(&members);
    match connected_component(graph, view, query) {
        Ok(comp) => Ok(comp),
        Err(FirmError::QuerySplit) => Err(FirmError::QuerySplit),
        Err(e) => Err(e),
    }
}

/// Serializable wrapper tying a coreness table to its graph.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorenessIndexFile {
    pub version: u32,
    pub node_count: u32,
    pub layer_count: u32,
    pub edge_instances: u64,
    pub graph_hash: u64,
    pub skyline: HashMap<String, Vec<(u32, u16)>>,
}

impl CorenessIndexFile {
    pub fn build(graph: &MultilayerGraph, coreness: &SkylineCoreness) -> Self {
        let mut skyline = HashMap::new();
        for (v, pairs) in coreness.per_node.iter().enumerate() {
            skyline.insert(
                graph.node_label(v as NodeId).to_owned(),
                pairs.iter().map(|p| (p.k, p.lambda)).collect(),
            );
        }
        CorenessIndexFile {
            version: 1,
            node_count: graph.node_count() as u32,
            layer_count: graph.layer_count() as u32,
            edge_instances: graph.edge_instance_count(),
            graph_hash: graph.content_hash(),
            skyline,
        }
    }

    pub fn into_coreness(self, graph: &MultilayerGraph) -> Result<SkylineCoreness> {
        if self.node_count as usize != graph.node_count()
            || self.layer_count as usize != graph.layer_count()
            || self.edge_instances != graph.edge_instance_count()
            || self.graph_hash != graph.content_hash()
        {
            return Err(FirmError::IndexMismatch(
                "coreness index fingerprint does not match the graph".into(),
            ));
        }
        let mut per_node = vec![Vec::new(); graph.node_count()];
        for (label, pairs) in self.skyline {
            let v = graph
                .node_id(&label)
                .ok_or_else(|| FirmError::IndexMismatch(format!("unknown node `{label}`")))?;
            per_node[v as usize] = pairs
                .into_iter()
                .map(|(k, lambda)| IndexPair::new(k, lambda))
                .collect();
        }
        Ok(SkylineCoreness { per_node })
    }
}
