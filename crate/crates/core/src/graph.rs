//! Multilayer graph data model: node/layer label interning, per-layer
//! adjacency, the edge-schema table, attribute tables, and induced views.
//!
//! A graph is immutable after loading and safe to share across threads.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::bitset::BitSet;
use crate::error::{FirmError, Result};

pub type NodeId = u32;
pub type LayerId = u16;
pub type SchemaId = u32;

/// Subset of a graph's nodes.
pub type VertexSubset = BitSet;

/// Compressed adjacency of one layer. `nbrs[offsets[v]..offsets[v+1]]` are the
/// neighbors of `v` in this layer, ascending; `schema` and `slot` carry, per
/// entry, the edge-schema id and the position of this layer inside that
/// schema's layer list.
#[derive(Debug, Clone)]
pub struct LayerCsr {
    pub offsets: Vec<u32>,
    pub nbrs: Vec<NodeId>,
    pub schema: Vec<SchemaId>,
    pub slot: Vec<u16>,
}

impl LayerCsr {
    #[inline]
    pub fn range(&self, v: NodeId) -> std::ops::Range<usize> {
        self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.nbrs[self.range(v)]
    }
}

/// Immutable multilayer graph.
#[derive(Debug, Clone)]
pub struct MultilayerGraph {
    node_labels: Vec<String>,
    node_index: HashMap<String, NodeId>,
    layer_labels: Vec<String>,
    layer_index: HashMap<String, LayerId>,
    /// Edge schemas sorted by (u, v) with u < v.
    schema_endpoints: Vec<(NodeId, NodeId)>,
    /// Flattened sorted layer lists per schema; schema `s` owns
    /// `schema_layers[schema_layer_off[s]..schema_layer_off[s+1]]`.
    schema_layer_off: Vec<u32>,
    schema_layers: Vec<LayerId>,
    /// Union adjacency over all layers: per node, ascending (neighbor, schema).
    adj: Vec<Vec<(NodeId, SchemaId)>>,
    layers: Vec<LayerCsr>,
    edge_instances: u64,
    self_loops_dropped: u64,
    duplicates_dropped: u64,
    content_hash: u64,
}

impl MultilayerGraph {
    /// Builds a graph from `(layer, src, dst)` label triples. Self-loops are
    /// dropped, duplicate instances merged; node and layer ids follow first
    /// appearance order.
    pub fn from_triples<S: AsRef<str>>(triples: &[(S, S, S)]) -> Self {
        Self::from_triples_with(triples, &[], &[])
    }

    /// Like [`from_triples`](Self::from_triples) but interning the given node
    /// and layer labels first, so isolated nodes and empty layers can exist.
    pub fn from_triples_with<S: AsRef<str>>(
        triples: &[(S, S, S)],
        seed_nodes: &[&str],
        seed_layers: &[&str],
    ) -> Self {
        let mut node_labels: Vec<String> = Vec::new();
        let mut node_index: HashMap<String, NodeId> = HashMap::new();
        let mut layer_labels: Vec<String> = Vec::new();
        let mut layer_index: HashMap<String, LayerId> = HashMap::new();
        let mut self_loops = 0u64;
        let mut duplicates = 0u64;

        let intern_node = |label: &str,
                           labels: &mut Vec<String>,
                           index: &mut HashMap<String, NodeId>|
         -> NodeId {
            if let Some(&id) = index.get(label) {
                id
            } else {
                let id = labels.len() as NodeId;
                labels.push(label.to_owned());
                index.insert(label.to_owned(), id);
                id
            }
        };

        for label in seed_nodes {
            intern_node(label, &mut node_labels, &mut node_index);
        }
        for label in seed_layers {
            if !layer_index.contains_key(*label) {
                let id = layer_labels.len() as LayerId;
                layer_labels.push((*label).to_owned());
                layer_index.insert((*label).to_owned(), id);
            }
        }

        let mut instances: HashMap<(NodeId, NodeId), Vec<LayerId>> = HashMap::new();
        for (layer, src, dst) in triples {
            let layer = layer.as_ref();
            let lid = if let Some(&id) = layer_index.get(layer) {
                id
            } else {
                let id = layer_labels.len() as LayerId;
                layer_labels.push(layer.to_owned());
                layer_index.insert(layer.to_owned(), id);
                id
            };
            let u = intern_node(src.as_ref(), &mut node_labels, &mut node_index);
            let v = intern_node(dst.as_ref(), &mut node_labels, &mut node_index);
            if u == v {
                self_loops += 1;
                continue;
            }
            let key = (u.min(v), u.max(v));
            let layers = instances.entry(key).or_default();
            if layers.contains(&lid) {
                duplicates += 1;
            } else {
                layers.push(lid);
            }
        }

        let mut pairs: Vec<(NodeId, NodeId)> = instances.keys().copied().collect();
        pairs.sort_unstable();

        let n = node_labels.len();
        let layer_count = layer_labels.len();
        let mut schema_endpoints = Vec::with_capacity(pairs.len());
        let mut schema_layer_off = Vec::with_capacity(pairs.len() + 1);
        let mut schema_layers = Vec::new();
        schema_layer_off.push(0u32);
        let mut edge_instances = 0u64;
        for &(u, v) in &pairs {
            let mut layers = instances.remove(&(u, v)).unwrap();
            layers.sort_unstable();
            edge_instances += layers.len() as u64;
            schema_endpoints.push((u, v));
            schema_layers.extend_from_slice(&layers);
            schema_layer_off.push(schema_layers.len() as u32);
        }

        let mut adj: Vec<Vec<(NodeId, SchemaId)>> = vec![Vec::new(); n];
        for (sid, &(u, v)) in schema_endpoints.iter().enumerate() {
            adj[u as usize].push((v, sid as SchemaId));
            adj[v as usize].push((u, sid as SchemaId));
        }
        for list in &mut adj {
            list.sort_unstable();
        }

        // Per-layer CSR.
        let mut deg = vec![vec![0u32; n]; layer_count];
        for (sid, &(u, v)) in schema_endpoints.iter().enumerate() {
            let s = schema_layer_off[sid] as usize..schema_layer_off[sid + 1] as usize;
            for &l in &schema_layers[s] {
                deg[l as usize][u as usize] += 1;
                deg[l as usize][v as usize] += 1;
            }
        }
        let mut layers_csr = Vec::with_capacity(layer_count);
        for l in 0..layer_count {
            let mut offsets = Vec::with_capacity(n + 1);
            offsets.push(0u32);
            let mut acc = 0u32;
            for v in 0..n {
                acc += deg[l][v];
                offsets.push(acc);
            }
            layers_csr.push(LayerCsr {
                offsets,
                nbrs: vec![0; acc as usize],
                schema: vec![0; acc as usize],
                slot: vec![0; acc as usize],
            });
        }
        let mut cursor = vec![vec![0u32; n]; layer_count];
        // Schemas are visited in ascending (u, v) order, so each per-layer
        // neighbor list comes out sorted for the lower endpoint; for the upper
        // endpoint insertion order is ascending in the neighbor as well.
        for (sid, &(u, v)) in schema_endpoints.iter().enumerate() {
            let range = schema_layer_off[sid] as usize..schema_layer_off[sid + 1] as usize;
            for (slot, &l) in schema_layers[range].iter().enumerate() {
                let csr = &mut layers_csr[l as usize];
                for (a, b) in [(u, v), (v, u)] {
                    let pos = (csr.offsets[a as usize] + cursor[l as usize][a as usize]) as usize;
                    csr.nbrs[pos] = b;
                    csr.schema[pos] = sid as SchemaId;
                    csr.slot[pos] = slot as u16;
                    cursor[l as usize][a as usize] += 1;
                }
            }
        }
        for csr in &mut layers_csr {
            // Insertion above is ordered by schema id = (u, v); for a node's
            // list that is ascending only in the other endpoint when this node
            // is the smaller one. Sort each node's slice to guarantee order.
            for v in 0..n {
                let r = csr.range(v as NodeId);
                let mut entries: Vec<(NodeId, SchemaId, u16)> = r
                    .clone()
                    .map(|i| (csr.nbrs[i], csr.schema[i], csr.slot[i]))
                    .collect();
                entries.sort_unstable();
                for (j, (nb, sid, slot)) in entries.into_iter().enumerate() {
                    let i = r.start + j;
                    csr.nbrs[i] = nb;
                    csr.schema[i] = sid;
                    csr.slot[i] = slot;
                }
            }
        }

        let mut g = MultilayerGraph {
            node_labels,
            node_index,
            layer_labels,
            layer_index,
            schema_endpoints,
            schema_layer_off,
            schema_layers,
            adj,
            layers: layers_csr,
            edge_instances,
            self_loops_dropped: self_loops,
            duplicates_dropped: duplicates,
            content_hash: 0,
        };
        g.content_hash = g.compute_hash();
        g
    }

    fn compute_hash(&self) -> u64 {
        let mut h = crate::skyline::Fnv64::new();
        h.write_u64(self.node_labels.len() as u64);
        h.write_u64(self.layer_labels.len() as u64);
        for label in &self.node_labels {
            h.write_bytes(label.as_bytes());
            h.write_bytes(&[0xff]);
        }
        for label in &self.layer_labels {
            h.write_bytes(label.as_bytes());
            h.write_bytes(&[0xfe]);
        }
        for (sid, &(u, v)) in self.schema_endpoints.iter().enumerate() {
            h.write_u64(((u as u64) << 32) | v as u64);
            for &l in self.schema_layer_ids(sid as SchemaId) {
                h.write_u64(l as u64 + 1);
            }
            h.write_u64(u64::MAX);
        }
        h.finish()
    }

    pub fn node_count(&self) -> usize {
        self.node_labels.len()
    }

    pub fn layer_count(&self) -> usize {
        self.layer_labels.len()
    }

    pub fn schema_count(&self) -> usize {
        self.schema_endpoints.len()
    }

    pub fn edge_instance_count(&self) -> u64 {
        self.edge_instances
    }

    pub fn self_loops_dropped(&self) -> u64 {
        self.self_loops_dropped
    }

    pub fn duplicates_dropped(&self) -> u64 {
        self.duplicates_dropped
    }

    /// Structural fingerprint used to tie persisted indices to a graph.
    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }

    pub fn node_label(&self, v: NodeId) -> &str {
        &self.node_labels[v as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.node_index.get(label).copied()
    }

    pub fn layer_label(&self, l: LayerId) -> &str {
        &self.layer_labels[l as usize]
    }

    pub fn layer_id(&self, label: &str) -> Option<LayerId> {
        self.layer_index.get(label).copied()
    }

    pub fn schema_endpoints(&self, s: SchemaId) -> (NodeId, NodeId) {
        self.schema_endpoints[s as usize]
    }

    /// Sorted layer ids hosting this schema.
    pub fn schema_layer_ids(&self, s: SchemaId) -> &[LayerId] {
        let r = self.schema_layer_off[s as usize] as usize
            ..self.schema_layer_off[s as usize + 1] as usize;
        &self.schema_layers[r]
    }

    /// Offset of schema `s`'s slots inside flat per-instance arrays.
    pub fn schema_slot_base(&self, s: SchemaId) -> usize {
        self.schema_layer_off[s as usize] as usize
    }

    pub fn total_slots(&self) -> usize {
        self.schema_layers.len()
    }

    pub fn slot_layer(&self, flat_slot: usize) -> LayerId {
        self.schema_layers[flat_slot]
    }

    /// Union adjacency (any layer), ascending by neighbor id.
    pub fn union_neighbors(&self, v: NodeId) -> &[(NodeId, SchemaId)] {
        &self.adj[v as usize]
    }

    pub fn layer(&self, l: LayerId) -> &LayerCsr {
        &self.layers[l as usize]
    }

    pub fn schema_id(&self, u: NodeId, v: NodeId) -> Option<SchemaId> {
        let list = &self.adj[u as usize];
        list.binary_search_by_key(&v, |&(nb, _)| nb)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn full_subset(&self) -> VertexSubset {
        BitSet::full(self.node_count())
    }

    pub fn all_schemas(&self) -> BitSet {
        BitSet::full(self.schema_count())
    }

    /// Per-layer degree of `v` counting only neighbors inside `subset`.
    /// `v` itself must be in `subset`.
    pub fn degree_vector(&self, subset: &VertexSubset, v: NodeId) -> Result<Vec<u32>> {
        if !subset.contains(v) {
            return Err(FirmError::Domain(format!(
                "node {} not in subset",
                self.node_label(v)
            )));
        }
        let mut deg = vec![0u32; self.layer_count()];
        for (l, csr) in self.layers.iter().enumerate() {
            deg[l] = csr.neighbors(v).iter().filter(|&&w| subset.contains(w)).count() as u32;
        }
        Ok(deg)
    }

    /// Restriction of the graph to `nodes` (all edges among them, all layers).
    pub fn induced<'a>(&self, nodes: &'a VertexSubset) -> SubgraphView<'a> {
        SubgraphView {
            nodes,
            schemas: None,
        }
    }

    /// Restriction to `nodes` keeping only the listed edge schemas.
    pub fn restricted<'a>(&self, nodes: &'a VertexSubset, schemas: &'a BitSet) -> SubgraphView<'a> {
        SubgraphView {
            nodes,
            schemas: Some(schemas),
        }
    }
}

/// Lazy view of a graph restricted to a vertex subset and, optionally, a set
/// of surviving edge schemas. Holds no copy of the base graph.
#[derive(Clone, Copy, Debug)]
pub struct SubgraphView<'a> {
    pub nodes: &'a VertexSubset,
    pub schemas: Option<&'a BitSet>,
}

impl<'a> SubgraphView<'a> {
    #[inline]
    pub fn admits_node(&self, v: NodeId) -> bool {
        self.nodes.contains(v)
    }

    #[inline]
    pub fn admits_edge(&self, w: NodeId, sid: SchemaId) -> bool {
        self.nodes.contains(w) && self.schemas.map_or(true, |s| s.contains(sid))
    }
}

/// λ-th largest entry of an integer vector, ties counted with multiplicity.
pub fn top_lambda(values: &[u32], lambda: u16) -> Result<u32> {
    if lambda == 0 || lambda as usize > values.len() {
        return Err(FirmError::Domain(format!(
            "lambda {} out of range 1..={}",
            lambda,
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    Ok(sorted[lambda as usize - 1])
}

/// Loads an edge list: UTF-8 lines `layer src dst`, whitespace separated,
/// `#` starts a comment. An empty file yields an empty graph.
pub fn load_graph(path: &Path) -> Result<MultilayerGraph> {
    let file = std::fs::File::open(path)?;
    parse_edge_list(BufReader::new(file))
}

pub fn parse_edge_list<R: Read>(reader: R) -> Result<MultilayerGraph> {
    let mut triples: Vec<(String, String, String)> = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.len() {
            0 => continue,
            3 => triples.push((
                tokens[0].to_owned(),
                tokens[1].to_owned(),
                tokens[2].to_owned(),
            )),
            n => {
                return Err(FirmError::Parse {
                    line: idx + 1,
                    msg: format!("expected `layer src dst`, found {n} tokens"),
                })
            }
        }
    }
    Ok(MultilayerGraph::from_triples(&triples))
}

/// Per-node d-dimensional non-negative attribute vectors. Nodes without an
/// explicit row read as the zero vector.
#[derive(Debug, Clone)]
pub struct AttributeTable {
    dim: usize,
    rows: Vec<Vec<f64>>,
}

impl AttributeTable {
    pub fn new(dim: usize, node_count: usize) -> Self {
        AttributeTable {
            dim,
            rows: vec![vec![0.0; dim]; node_count],
        }
    }

    pub fn set(&mut self, v: NodeId, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dim {
            return Err(FirmError::Validation(format!(
                "attribute dimension {} does not match table dimension {}",
                values.len(),
                self.dim
            )));
        }
        if values.iter().any(|x| *x < 0.0 || !x.is_finite()) {
            return Err(FirmError::Validation(
                "attribute entries must be finite and non-negative".into(),
            ));
        }
        self.rows[v as usize] = values;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, v: NodeId) -> &[f64] {
        &self.rows[v as usize]
    }
}

/// Loads attributes: lines `node f1 .. fd`, consistent `d`, labels must exist
/// in the graph, entries non-negative.
pub fn load_attributes(path: &Path, graph: &MultilayerGraph) -> Result<AttributeTable> {
    let file = std::fs::File::open(path)?;
    parse_attributes(BufReader::new(file), graph)
}

pub fn parse_attributes<R: Read>(reader: R, graph: &MultilayerGraph) -> Result<AttributeTable> {
    let mut parsed: Vec<(NodeId, Vec<f64>)> = Vec::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let node = graph.node_id(label).ok_or_else(|| FirmError::Validation(
            format!("attribute line {}: unknown node label `{label}`", idx + 1),
        ))?;
        let values: Vec<f64> = tokens
            .map(|t| {
                t.parse::<f64>().map_err(|_| FirmError::Parse {
                    line: idx + 1,
                    msg: format!("bad number `{t}`"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(values.len()),
            Some(d) if d != values.len() => {
                return Err(FirmError::Validation(format!(
                    "attribute line {}: dimension {} differs from {}",
                    idx + 1,
                    values.len(),
                    d
                )))
            }
            _ => {}
        }
        parsed.push((node, values));
    }
    let mut table = AttributeTable::new(dim.unwrap_or(0), graph.node_count());
    for (node, values) in parsed {
        table.set(node, values)?;
    }
    Ok(table)
}

/// Loads ground-truth communities: one community per line, space-separated
/// node labels. Unknown labels are skipped.
pub fn load_ground_truth(path: &Path, graph: &MultilayerGraph) -> Result<Vec<Vec<NodeId>>> {
    let file = std::fs::File::open(path)?;
    let mut communities = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let members: Vec<NodeId> = content
            .split_whitespace()
            .filter_map(|label| graph.node_id(label))
            .collect();
        if !members.is_empty() {
            communities.push(members);
        }
    }
    Ok(communities)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_of(lines: &str) -> MultilayerGraph {
        parse_edge_list(lines.as_bytes()).unwrap()
    }

    #[test]
    fn loads_counts_and_schemas() {
        let g = graph_of("1 a b\n1 b c\n2 a b\n");
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.layer_count(), 2);
        assert_eq!(g.edge_instance_count(), 3);
        assert_eq!(g.schema_count(), 2);
    }

    #[test]
    fn duplicate_edges_merge() {
        let g = graph_of("1 a b\n1 a b\n");
        assert_eq!(g.edge_instance_count(), 1);
        assert_eq!(g.duplicates_dropped(), 1);
    }

    #[test]
    fn self_loops_dropped_with_counter() {
        let g = graph_of("1 a a\n1 a b\n");
        assert_eq!(g.self_loops_dropped(), 1);
        assert_eq!(g.edge_instance_count(), 1);
    }

    #[test]
    fn empty_file_is_empty_graph() {
        let g = graph_of("");
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.schema_count(), 0);
    }

    #[test]
    fn malformed_line_reports_number() {
        let err = parse_edge_list("1 a b\n1 a\n".as_bytes()).unwrap_err();
        match err {
            FirmError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let g = graph_of("# header\n\n1 a b # trailing\n");
        assert_eq!(g.edge_instance_count(), 1);
    }

    #[test]
    fn first_appearance_ids() {
        let g = graph_of("1 b a\n2 c a\n");
        assert_eq!(g.node_label(0), "b");
        assert_eq!(g.node_label(1), "a");
        assert_eq!(g.node_label(2), "c");
        assert_eq!(g.layer_label(0), "1");
    }

    #[test]
    fn degree_vector_triangle() {
        let g = graph_of("0 a b\n0 b c\n0 a c\n");
        let all = g.full_subset();
        for v in 0..3 {
            assert_eq!(g.degree_vector(&all, v).unwrap(), vec![2]);
        }
        let mut sub = all.clone();
        sub.remove(g.node_id("c").unwrap());
        assert_eq!(g.degree_vector(&sub, g.node_id("a").unwrap()).unwrap(), vec![1]);
        assert!(g.degree_vector(&sub, g.node_id("c").unwrap()).is_err());
    }

    #[test]
    fn top_lambda_examples() {
        assert_eq!(top_lambda(&[3, 1, 0, 2], 2).unwrap(), 2);
        assert_eq!(top_lambda(&[5, 5], 2).unwrap(), 5);
        assert_eq!(top_lambda(&[0], 1).unwrap(), 0);
        assert!(top_lambda(&[1, 2], 3).is_err());
        assert!(top_lambda(&[1, 2], 0).is_err());
    }

    #[test]
    fn attributes_parse_and_default() {
        let g = graph_of("1 a b\n1 b c\n");
        let t = parse_attributes("a 1 0\nb 0 1\n".as_bytes(), &g).unwrap();
        assert_eq!(t.dim(), 2);
        assert_eq!(t.get(g.node_id("a").unwrap()), &[1.0, 0.0]);
        // c has no row: zero vector.
        assert_eq!(t.get(g.node_id("c").unwrap()), &[0.0, 0.0]);
    }

    #[test]
    fn attributes_reject_negative_and_ragged() {
        let g = graph_of("1 a b\n");
        assert!(parse_attributes("a 1 -1\n".as_bytes(), &g).is_err());
        assert!(parse_attributes("a 1 2\nb 1\n".as_bytes(), &g).is_err());
        assert!(parse_attributes("z 1 2\n".as_bytes(), &g).is_err());
    }

    #[test]
    fn layer_adjacency_sorted() {
        let g = graph_of("1 d a\n1 d c\n1 d b\n1 a c\n");
        let d = g.node_id("d").unwrap();
        let nbrs = g.layer(0).neighbors(d);
        let mut sorted = nbrs.to_vec();
        sorted.sort_unstable();
        assert_eq!(nbrs, &sorted[..]);
    }
}
