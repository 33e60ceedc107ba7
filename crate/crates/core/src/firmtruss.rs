//! Triangle support, maximal FirmTruss extraction, FirmTruss decomposition,
//! the skyline index with binary persistence, and index-backed lookup.
//!
//! An edge schema belongs to a (k, λ)-FirmTruss when at least λ layers host it
//! with at least k−2 triangles each, counted inside the subgraph. A FirmTruss
//! is a subgraph, not necessarily induced: extraction peels edge schemas, and
//! a removed schema loses its instances in all layers at once.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::distance::connected_component;
use crate::error::{FirmError, Result};
use crate::firmcore::CoreState;
use crate::graph::{LayerId, MultilayerGraph, NodeId, SchemaId, SubgraphView, VertexSubset};
use crate::skyline::{skyline_from_per_lambda, Fnv64, IndexPair};

/// Sentinel index value for schemas that qualify at no k (hosted in fewer
/// than λ layers, or filtered out).
const NO_INDEX: u32 = 0;

/// Per-layer triangle counts for every edge schema within `subset`, expanded
/// to |L|-dimensional vectors (absent layers read 0).
pub fn layer_supports(graph: &MultilayerGraph, subset: &VertexSubset) -> Vec<Vec<u32>> {
    let alive = alive_from(graph, subset, None);
    let sup = compute_supports(graph, subset, &alive);
    let mut out = vec![vec![0u32; graph.layer_count()]; graph.schema_count()];
    for s in 0..graph.schema_count() {
        let base = graph.schema_slot_base(s as SchemaId);
        for (slot, &l) in graph.schema_layer_ids(s as SchemaId).iter().enumerate() {
            out[s][l as usize] = sup[base + slot];
        }
    }
    out
}

fn alive_from(graph: &MultilayerGraph, subset: &VertexSubset, allowed: Option<&BitSet>) -> BitSet {
    let mut alive = BitSet::empty(graph.schema_count());
    for s in 0..graph.schema_count() as SchemaId {
        let (u, v) = graph.schema_endpoints(s);
        if subset.contains(u)
            && subset.contains(v)
            && allowed.map_or(true, |a| a.contains(s))
        {
            alive.insert(s);
        }
    }
    alive
}

/// Exact per-instance triangle counts among alive schemas, flat slot layout.
/// Layers are counted independently (and merged deterministically), each via
/// degree-ordered forward adjacency so every triangle is found once.
fn compute_supports(graph: &MultilayerGraph, subset: &VertexSubset, alive: &BitSet) -> Vec<u32> {
    let lc = graph.layer_count();
    let per_layer: Vec<Vec<(usize, u32)>> = (0..lc)
        .into_par_iter()
        .map(|l| layer_triangles(graph, subset, alive, l as LayerId))
        .collect();
    let mut sup = vec![0u32; graph.total_slots()];
    for counts in per_layer {
        for (slot, c) in counts {
            sup[slot] += c;
        }
    }
    sup
}

/// Triangle counts of one layer as (flat_slot, count) pairs.
fn layer_triangles(
    graph: &MultilayerGraph,
    subset: &VertexSubset,
    alive: &BitSet,
    l: LayerId,
) -> Vec<(usize, u32)> {
    let csr = graph.layer(l);
    // Filtered degree, used to orient edges from low to high degree.
    let mut deg: Vec<u32> = vec![0; graph.node_count()];
    for u in subset.iter() {
        let mut d = 0;
        for i in csr.range(u) {
            if subset.contains(csr.nbrs[i]) && alive.contains(csr.schema[i]) {
                d += 1;
            }
        }
        deg[u as usize] = d;
    }
    let rank = |v: NodeId| (deg[v as usize], v);
    // Forward lists: (neighbor, flat slot of this instance), ascending by id.
    let mut fwd: Vec<Vec<(NodeId, u32)>> = vec![Vec::new(); graph.node_count()];
    for u in subset.iter() {
        for i in csr.range(u) {
            let w = csr.nbrs[i];
            if subset.contains(w) && alive.contains(csr.schema[i]) && rank(w) > rank(u) {
                let slot = graph.schema_slot_base(csr.schema[i]) + csr.slot[i] as usize;
                fwd[u as usize].push((w, slot as u32));
            }
        }
    }
    let mut counts: Vec<(usize, u32)> = Vec::new();
    let mut add = |slot: u32| counts.push((slot as usize, 1));
    for u in subset.iter() {
        let fu = &fwd[u as usize];
        for &(v, slot_uv) in fu {
            let fv = &fwd[v as usize];
            let (mut i, mut j) = (0, 0);
            while i < fu.len() && j < fv.len() {
                match fu[i].0.cmp(&fv[j].0) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        add(slot_uv);
                        add(fu[i].1);
                        add(fv[j].1);
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    counts
}

/// Mutable FirmTruss peeling state: surviving vertices and edge schemas plus
/// per-instance supports, cascaded on deletions.
#[derive(Clone)]
pub struct TrussState<'g> {
    pub graph: &'g MultilayerGraph,
    pub k: u32,
    pub lambda: u16,
    vertices: VertexSubset,
    alive: BitSet,
    sup: Vec<u32>,
    /// Current index value Top-λ(support over hosted layers) + 2 per schema;
    /// `NO_INDEX` for schemas hosted in fewer than λ layers.
    idx: Vec<u32>,
}

impl<'g> TrussState<'g> {
    /// Peels down to the maximal (k, λ)-FirmTruss inside `start`, optionally
    /// restricted to an allowed schema set. Isolated vertices are dropped.
    pub fn new(
        graph: &'g MultilayerGraph,
        k: u32,
        lambda: u16,
        start: &VertexSubset,
        allowed: Option<&BitSet>,
    ) -> Result<Self> {
        if k < 2 {
            return Err(FirmError::Domain(format!("firmtruss requires k >= 2, got {k}")));
        }
        if lambda == 0 || lambda as usize > graph.layer_count().max(1) {
            return Err(FirmError::Domain(format!(
                "lambda {} out of range 1..={}",
                lambda,
                graph.layer_count()
            )));
        }
        // A (k, λ)-FirmTruss sits inside the (k−1, λ)-FirmCore: prefilter
        // vertices by Top-λ degree before counting any triangle.
        let core = CoreState::new(graph, k - 1, lambda, start)?;
        let vertices = core.vertices().clone();
        let alive = alive_from(graph, &vertices, allowed);
        let sup = compute_supports(graph, &vertices, &alive);
        let mut state = TrussState {
            graph,
            k,
            lambda,
            vertices,
            alive,
            sup,
            idx: vec![NO_INDEX; graph.schema_count()],
        };
        let mut queue: Vec<SchemaId> = Vec::new();
        for s in state.alive.iter() {
            state.idx[s as usize] = state.recompute_idx(s);
            if state.idx[s as usize] < state.k {
                queue.push(s);
            }
        }
        state.cascade(queue);
        state.prune_isolated();
        Ok(state)
    }

    /// Top-λ support over hosted layers + 2, or `NO_INDEX` when the schema is
    /// hosted in fewer than λ layers.
    fn recompute_idx(&self, s: SchemaId) -> u32 {
        let layers = self.graph.schema_layer_ids(s);
        if layers.len() < self.lambda as usize {
            return NO_INDEX;
        }
        let base = self.graph.schema_slot_base(s);
        let mut local: Vec<u32> = self.sup[base..base + layers.len()].to_vec();
        let idx = self.lambda as usize - 1;
        let (_, nth, _) = local.select_nth_unstable_by(idx, |a, b| b.cmp(a));
        *nth + 2
    }

    pub fn vertices(&self) -> &VertexSubset {
        &self.vertices
    }

    pub fn alive_schemas(&self) -> &BitSet {
        &self.alive
    }

    pub fn view(&self) -> SubgraphView<'_> {
        SubgraphView {
            nodes: &self.vertices,
            schemas: Some(&self.alive),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Support of schema `s` in layer slot `slot` (position in its layer list).
    pub fn support_at(&self, s: SchemaId, slot: usize) -> u32 {
        self.sup[self.graph.schema_slot_base(s) + slot]
    }

    /// Cascade peel after vertex deletions; supports are decremented through
    /// dying triangles rather than recomputed.
    pub fn delete_vertices(&mut self, victims: &[NodeId]) {
        let mut queue: Vec<SchemaId> = Vec::new();
        for &v in victims {
            if !self.vertices.remove(v) {
                continue;
            }
            for &(_, sid) in self.graph.union_neighbors(v) {
                if self.alive.contains(sid) {
                    queue.push(sid);
                }
            }
        }
        self.cascade(queue);
        self.prune_isolated();
    }

    fn cascade(&mut self, mut queue: Vec<SchemaId>) {
        while let Some(s) = queue.pop() {
            if !self.alive.remove(s) {
                continue;
            }
            let (u, v) = self.graph.schema_endpoints(s);
            for (slot, &l) in self.graph.schema_layer_ids(s).iter().enumerate() {
                let _ = slot;
                let csr = self.graph.layer(l);
                // Merge-walk the layer adjacencies of u and v over alive
                // instances; each common neighbor w closes a dying triangle.
                let (ru, rv) = (csr.range(u), csr.range(v));
                let (mut i, mut j) = (ru.start, rv.start);
                while i < ru.end && j < rv.end {
                    match csr.nbrs[i].cmp(&csr.nbrs[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            let w = csr.nbrs[i];
                            if self.vertices.contains(w)
                                && self.alive.contains(csr.schema[i])
                                && self.alive.contains(csr.schema[j])
                            {
                                for pos in [i, j] {
                                    let sid = csr.schema[pos];
                                    let flat =
                                        self.graph.schema_slot_base(sid) + csr.slot[pos] as usize;
                                    let old = self.sup[flat];
                                    self.sup[flat] = old - 1;
                                    // Top-λ moves only when this layer attained it.
                                    if self.idx[sid as usize] != NO_INDEX
                                        && old + 2 == self.idx[sid as usize]
                                    {
                                        let ni = self.recompute_idx(sid);
                                        self.idx[sid as usize] = ni;
                                        if ni < self.k {
                                            queue.push(sid);
                                        }
                                    }
                                }
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        }
    }

    fn prune_isolated(&mut self) {
        let drop: Vec<NodeId> = self
            .vertices
            .iter()
            .filter(|&v| {
                !self
                    .graph
                    .union_neighbors(v)
                    .iter()
                    .any(|&(w, sid)| self.alive.contains(sid) && self.vertices.contains(w))
            })
            .collect();
        for v in drop {
            self.vertices.remove(v);
        }
    }

    /// Restricts the state to the union-graph component containing the query;
    /// schemas in other components are discarded without cascading (their
    /// triangles never touch the kept component). A missing or split query is
    /// `NoCommunity`.
    pub fn restrict_to_component(&mut self, query: &[NodeId]) -> Result<()> {
        let comp = match connected_component(self.graph, self.view(), query) {
            Ok(c) => c,
            Err(FirmError::QuerySplit) | Err(FirmError::NoCommunity) => {
                return Err(FirmError::NoCommunity)
            }
            Err(e) => return Err(e),
        };
        let dead: Vec<SchemaId> = self
            .alive
            .iter()
            .filter(|&s| {
                let (u, v) = self.graph.schema_endpoints(s);
                !comp.contains(u) || !comp.contains(v)
            })
            .collect();
        for s in dead {
            self.alive.remove(s);
        }
        self.vertices = comp;
        Ok(())
    }
}

/// Maximal connected (k, λ)-FirmTruss containing the query: the vertex set and
/// the surviving edge-schema set.
pub fn maximal_firmtruss<'g>(
    graph: &'g MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<(VertexSubset, BitSet, TrussState<'g>)> {
    let mut state = TrussState::new(graph, k, lambda, &graph.full_subset(), None)?;
    state.restrict_to_component(query)?;
    Ok((state.vertices.clone(), state.alive.clone(), state))
}

/// Skyline FirmTrussness of every edge schema plus the graph fingerprint the
/// index was built from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkylineIndex {
    pub per_schema: Vec<Vec<IndexPair>>,
    pub node_count: u32,
    pub layer_count: u32,
    pub edge_instances: u64,
    pub graph_hash: u64,
}

impl SkylineIndex {
    pub fn matches(&self, graph: &MultilayerGraph) -> bool {
        self.node_count as usize == graph.node_count()
            && self.layer_count as usize == graph.layer_count()
            && self.edge_instances == graph.edge_instance_count()
            && self.graph_hash == graph.content_hash()
            && self.per_schema.len() == graph.schema_count()
    }

    /// JSON inspection export `{ "u,v": [[k, λ], ...] }` keyed by node labels.
    pub fn to_json(&self, graph: &MultilayerGraph) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (s, pairs) in self.per_schema.iter().enumerate() {
            let (u, v) = graph.schema_endpoints(s as SchemaId);
            let key = format!("{},{}", graph.node_label(u), graph.node_label(v));
            let arr: Vec<serde_json::Value> = pairs
                .iter()
                .map(|p| serde_json::json!([p.k, p.lambda]))
                .collect();
            map.insert(key, arr.into());
        }
        map.into()
    }
}

/// Full FirmTruss decomposition: one peeling pass per λ reusing a single
/// support-computation pass, reduced to skyline pairs at the end.
pub fn firmtruss_decomposition(graph: &MultilayerGraph) -> SkylineIndex {
    let sc = graph.schema_count();
    let lc = graph.layer_count();
    let all = graph.full_subset();
    let all_schemas = graph.all_schemas();
    let base_sup = compute_supports(graph, &all, &all_schemas);

    let mut per_lambda: Vec<Vec<Option<u32>>> = vec![vec![None; lc]; sc];

    for lambda in 1..=lc as u16 {
        let mut sup = base_sup.clone();
        let mut alive = all_schemas.clone();
        let mut idx = vec![NO_INDEX; sc];

        let recompute = |sup: &[u32], s: SchemaId| -> u32 {
            let layers = graph.schema_layer_ids(s);
            if layers.len() < lambda as usize {
                return NO_INDEX;
            }
            let base = graph.schema_slot_base(s);
            let mut local: Vec<u32> = sup[base..base + layers.len()].to_vec();
            let i = lambda as usize - 1;
            let (_, nth, _) = local.select_nth_unstable_by(i, |a, b| b.cmp(a));
            *nth + 2
        };

        // Kill a schema: decrement supports of surviving triangle partners.
        // `floor` keeps bucket indices from sliding below the current round.
        // Returns schemas whose index dropped (bucket moves happen outside).
        let kill = |sup: &mut Vec<u32>,
                    alive: &mut BitSet,
                    idx: &mut Vec<u32>,
                    s: SchemaId,
                    floor: u32,
                    touched: &mut Vec<SchemaId>| {
            if !alive.remove(s) {
                return;
            }
            let (u, v) = graph.schema_endpoints(s);
            for &l in graph.schema_layer_ids(s) {
                let csr = graph.layer(l);
                let (ru, rv) = (csr.range(u), csr.range(v));
                let (mut i, mut j) = (ru.start, rv.start);
                while i < ru.end && j < rv.end {
                    match csr.nbrs[i].cmp(&csr.nbrs[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            if alive.contains(csr.schema[i]) && alive.contains(csr.schema[j]) {
                                for pos in [i, j] {
                                    let sid = csr.schema[pos];
                                    let flat =
                                        graph.schema_slot_base(sid) + csr.slot[pos] as usize;
                                    let old = sup[flat];
                                    sup[flat] = old - 1;
                                    if idx[sid as usize] != NO_INDEX
                                        && old + 2 == idx[sid as usize]
                                    {
                                        let ni = recompute(sup, sid).max(floor);
                                        if ni != idx[sid as usize] {
                                            idx[sid as usize] = ni;
                                            touched.push(sid);
                                        }
                                    }
                                }
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        };

        // Schemas hosted in fewer than λ layers belong to no (·, λ)-FirmTruss;
        // remove them first so survivors' supports are counted without them.
        let mut sink = Vec::new();
        for s in 0..sc as SchemaId {
            if (graph.schema_layer_ids(s).len() as u16) < lambda {
                kill(&mut sup, &mut alive, &mut idx, s, 0, &mut sink);
            }
        }
        sink.clear();

        let mut max_idx = 2u32;
        for s in alive.iter() {
            idx[s as usize] = recompute(&sup, s);
            max_idx = max_idx.max(idx[s as usize]);
        }
        let mut buckets: Vec<Vec<SchemaId>> = vec![Vec::new(); max_idx as usize + 1];
        for s in alive.iter() {
            buckets[idx[s as usize] as usize].push(s);
        }

        for k in 2..=max_idx {
            while let Some(s) = buckets[k as usize].pop() {
                if !alive.contains(s) || idx[s as usize] != k {
                    continue;
                }
                per_lambda[s as usize][lambda as usize - 1] = Some(k);
                let mut touched = Vec::new();
                kill(&mut sup, &mut alive, &mut idx, s, k, &mut touched);
                for t in touched {
                    buckets[idx[t as usize] as usize].push(t);
                }
            }
        }
    }

    SkylineIndex {
        per_schema: per_lambda
            .into_iter()
            .map(|p| skyline_from_per_lambda(&p))
            .collect(),
        node_count: graph.node_count() as u32,
        layer_count: graph.layer_count() as u32,
        edge_instances: graph.edge_instance_count(),
        graph_hash: graph.content_hash(),
    }
}

/// Index-backed maximal (k, λ)-FirmTruss: BFS from the query keeping edges
/// whose skyline dominates (k, λ). Set-equal to the online extraction.
pub fn index_maximal_firmtruss(
    graph: &MultilayerGraph,
    index: &SkylineIndex,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<(VertexSubset, BitSet)> {
    if !index.matches(graph) {
        return Err(FirmError::IndexMismatch(
            "index fingerprint does not match the graph".into(),
        ));
    }
    let probe = IndexPair::new(k, lambda);
    let mut qualified = BitSet::empty(graph.schema_count());
    for (s, pairs) in index.per_schema.iter().enumerate() {
        if crate::skyline::skyline_admits(pairs, probe) {
            qualified.insert(s as SchemaId);
        }
    }
    // Vertices covered by a qualifying edge.
    let mut covered = BitSet::empty(graph.node_count());
    for s in qualified.iter() {
        let (u, v) = graph.schema_endpoints(s);
        covered.insert(u);
        covered.insert(v);
    }
    let view = SubgraphView {
        nodes: &covered,
        schemas: Some(&qualified),
    };
    let comp = match connected_component(graph, view, query) {
        Ok(c) => c,
        Err(FirmError::QuerySplit) | Err(FirmError::NoCommunity) => {
            return Err(FirmError::NoCommunity)
        }
        Err(e) => return Err(e),
    };
    let mut schemas = BitSet::empty(graph.schema_count());
    for s in qualified.iter() {
        let (u, v) = graph.schema_endpoints(s);
        if comp.contains(u) && comp.contains(v) {
            schemas.insert(s);
        }
    }
    Ok((comp, schemas))
}

const INDEX_MAGIC: &[u8; 4] = b"FTSI";
const INDEX_VERSION: u32 = 1;

/// Writes the skyline index: magic `FTSI`, u32 version, little-endian counts
/// and graph fingerprint, per-schema entries, trailing 8-byte content hash.
pub fn index_write(index: &SkylineIndex, graph: &MultilayerGraph, path: &Path) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(INDEX_MAGIC);
    buf.extend_from_slice(&INDEX_VERSION.to_le_bytes());
    buf.extend_from_slice(&index.node_count.to_le_bytes());
    buf.extend_from_slice(&index.layer_count.to_le_bytes());
    buf.extend_from_slice(&(index.per_schema.len() as u32).to_le_bytes());
    buf.extend_from_slice(&index.edge_instances.to_le_bytes());
    buf.extend_from_slice(&index.graph_hash.to_le_bytes());
    for (s, pairs) in index.per_schema.iter().enumerate() {
        let (u, v) = graph.schema_endpoints(s as SchemaId);
        buf.extend_from_slice(&u.to_le_bytes());
        buf.extend_from_slice(&v.to_le_bytes());
        buf.extend_from_slice(&(pairs.len() as u16).to_le_bytes());
        for p in pairs {
            buf.extend_from_slice(&p.k.to_le_bytes());
            buf.extend_from_slice(&p.lambda.to_le_bytes());
        }
    }
    let mut h = Fnv64::new();
    h.write_bytes(&buf);
    buf.extend_from_slice(&h.finish().to_le_bytes());
    let mut file = std::fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

/// Reads a skyline index, verifying magic, version and the trailing hash.
pub fn index_read(path: &Path) -> Result<SkylineIndex> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    let corrupt = |msg: &str| FirmError::CorruptIndex(msg.to_owned());
    if buf.len() < 4 + 4 + 4 + 4 + 4 + 8 + 8 + 8 {
        return Err(corrupt("file too short"));
    }
    let (body, tail) = buf.split_at(buf.len() - 8);
    let mut h = Fnv64::new();
    h.write_bytes(body);
    if h.finish().to_le_bytes() != tail {
        return Err(corrupt("content hash mismatch"));
    }
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > body.len() {
            return Err(FirmError::CorruptIndex("truncated record".into()));
        }
        let s = &body[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != INDEX_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let read_u32 =
        |pos: &mut usize| -> Result<u32> { Ok(u32::from_le_bytes(take(pos, 4)?.try_into().unwrap())) };
    let read_u16 =
        |pos: &mut usize| -> Result<u16> { Ok(u16::from_le_bytes(take(pos, 2)?.try_into().unwrap())) };
    let read_u64 =
        |pos: &mut usize| -> Result<u64> { Ok(u64::from_le_bytes(take(pos, 8)?.try_into().unwrap())) };
    let version = read_u32(&mut pos)?;
    if version != INDEX_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let node_count = read_u32(&mut pos)?;
    let layer_count = read_u32(&mut pos)?;
    let schema_count = read_u32(&mut pos)? as usize;
    let edge_instances = read_u64(&mut pos)?;
    let graph_hash = read_u64(&mut pos)?;
    let mut per_schema = Vec::with_capacity(schema_count);
    for _ in 0..schema_count {
        let _u = read_u32(&mut pos)?;
        let _v = read_u32(&mut pos)?;
        let count = read_u16(&mut pos)?;
        let mut pairs = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let k = read_u32(&mut pos)?;
            let lambda = read_u16(&mut pos)?;
            pairs.push(IndexPair::new(k, lambda));
        }
        per_schema.push(pairs);
    }
    if pos != body.len() {
        return Err(corrupt("trailing bytes"));
    }
    Ok(SkylineIndex {
        per_schema,
        node_count,
        layer_count,
        edge_instances,
        graph_hash,
    })
}
