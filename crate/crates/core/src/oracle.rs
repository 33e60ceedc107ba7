//! Brute-force reference implementations for desk-scale verification.
//!
//! Everything here is deliberately naive and recomputes from scratch: no
//! bucket queues, no incremental support updates, no shared peeling code with
//! the production modules. These are the oracles the property and acceptance
//! suites compare against.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitset::BitSet;
use crate::distance;
use crate::error::{FirmError, Result};
use crate::graph::{MultilayerGraph, NodeId, SchemaId, SubgraphView, VertexSubset};
use crate::metrics::PValue;
use crate::search::Structure;
use crate::skyline::IndexPair;

/// Enumeration limits; exceeding them aborts cleanly.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_nodes: usize,
    pub max_layers: usize,
    pub timeout: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 12,
            max_layers: 3,
            timeout: Duration::from_secs(60),
        }
    }
}

impl OracleBudget {
    fn admit(&self, graph: &MultilayerGraph) -> Result<()> {
        if graph.node_count() > self.max_nodes {
            return Err(FirmError::BudgetExceeded(format!(
                "{} nodes exceeds budget {}",
                graph.node_count(),
                self.max_nodes
            )));
        }
        if graph.layer_count() > self.max_layers {
            return Err(FirmError::BudgetExceeded(format!(
                "{} layers exceeds budget {}",
                graph.layer_count(),
                self.max_layers
            )));
        }
        Ok(())
    }

    fn check_clock(&self, started: Instant) -> Result<()> {
        if started.elapsed() > self.timeout {
            return Err(FirmError::BudgetExceeded("timeout".into()));
        }
        Ok(())
    }
}

/// Per-instance triangle counts recomputed from scratch by scanning, for each
/// alive instance, the full neighbor lists of both endpoints.
pub fn naive_supports(graph: &MultilayerGraph, nodes: &VertexSubset, alive: &BitSet) -> Vec<u32> {
    let mut sup = vec![0u32; graph.total_slots()];
    for s in alive.iter() {
        let (u, v) = graph.schema_endpoints(s);
        if !nodes.contains(u) || !nodes.contains(v) {
            continue;
        }
        let base = graph.schema_slot_base(s);
        for (slot, &l) in graph.schema_layer_ids(s).iter().enumerate() {
            let csr = graph.layer(l);
            let mut count = 0;
            for i in csr.range(u) {
                let w = csr.nbrs[i];
                if !nodes.contains(w) || !alive.contains(csr.schema[i]) {
                    continue;
                }
                // Is (v, w) an alive instance in this layer?
                for j in csr.range(v) {
                    if csr.nbrs[j] == w && alive.contains(csr.schema[j]) {
                        count += 1;
                        break;
                    }
                }
            }
            sup[base + slot] = count;
        }
    }
    sup
}

/// Number of layers hosting schema `s` with support at least k−2, given flat
/// naive supports.
fn qualifying_layers(graph: &MultilayerGraph, sup: &[u32], s: SchemaId, k: u32) -> usize {
    let base = graph.schema_slot_base(s);
    graph
        .schema_layer_ids(s)
        .iter()
        .enumerate()
        .filter(|(slot, _)| sup[base + slot] + 2 >= k)
        .count()
}

/// Definitional fixpoint for the maximal (k, λ) structure, deleting one
/// random violator at a time (seeded), recomputing everything each round.
/// Returns the surviving vertices and, for FirmTruss, the surviving schemas.
pub fn brute_firm_subgraph(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    structure: Structure,
    order_seed: u64,
    budget: &OracleBudget,
) -> Result<(VertexSubset, Option<BitSet>)> {
    budget.admit(graph)?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(order_seed);
    match structure {
        Structure::FirmCore => {
            let mut nodes = graph.full_subset();
            loop {
                budget.check_clock(started)?;
                let mut violators: Vec<NodeId> = nodes
                    .iter()
                    .filter(|&v| {
                        let deg = graph.degree_vector(&nodes, v).unwrap();
                        let mut qualified = deg.iter().filter(|&&d| d >= k).count();
                        if k == 0 {
                            qualified = graph.layer_count().max(lambda as usize);
                        }
                        qualified < lambda as usize
                    })
                    .collect();
                if violators.is_empty() {
                    return Ok((nodes, None));
                }
                violators.shuffle(&mut rng);
                nodes.remove(violators[0]);
            }
        }
        Structure::FirmTruss => {
            let nodes = graph.full_subset();
            let mut alive = graph.all_schemas();
            loop {
                budget.check_clock(started)?;
                let sup = naive_supports(graph, &nodes, &alive);
                let mut violators: Vec<SchemaId> = alive
                    .iter()
                    .filter(|&s| qualifying_layers(graph, &sup, s, k) < lambda as usize)
                    .collect();
                if violators.is_empty() {
                    let mut covered = BitSet::empty(graph.node_count());
                    for s in alive.iter() {
                        let (u, v) = graph.schema_endpoints(s);
                        covered.insert(u);
                        covered.insert(v);
                    }
                    return Ok((covered, Some(alive)));
                }
                violators.shuffle(&mut rng);
                alive.remove(violators[0]);
            }
        }
    }
}

/// Second, fully independent route for the maximal structure: enumerate every
/// candidate set, keep the ones satisfying the definition directly, and take
/// their union. FirmCore enumerates vertex subsets; FirmTruss enumerates
/// edge-schema subsets (membership is an edge property).
pub fn enumerate_firm_subgraph(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    structure: Structure,
    budget: &OracleBudget,
) -> Result<(VertexSubset, Option<BitSet>)> {
    budget.admit(graph)?;
    let started = Instant::now();
    match structure {
        Structure::FirmCore => {
            let n = graph.node_count();
            if n > 8 {
                return Err(FirmError::BudgetExceeded(format!(
                    "{n} nodes exceeds subset-enumeration limit 8"
                )));
            }
            let mut union = BitSet::empty(n);
            for mask in 1u32..(1 << n) {
                budget.check_clock(started)?;
                let subset = BitSet::from_iter(n, (0..n as u32).filter(|v| mask >> v & 1 == 1));
                let ok = subset.iter().all(|v| {
                    let deg = graph.degree_vector(&subset, v).unwrap();
                    let qualified = deg.iter().filter(|&&d| d >= k).count();
                    k == 0 || qualified >= lambda as usize
                });
                if ok {
                    union = union.union(&subset);
                }
            }
            Ok((union, None))
        }
        Structure::FirmTruss => {
            let sc = graph.schema_count();
            if sc > 16 {
                return Err(FirmError::BudgetExceeded(format!(
                    "{sc} schemas exceeds subset-enumeration limit 16"
                )));
            }
            let nodes = graph.full_subset();
            let mut union = BitSet::empty(sc);
            for mask in 1u32..(1 << sc) {
                budget.check_clock(started)?;
                let alive =
                    BitSet::from_iter(sc, (0..sc as u32).filter(|s| mask >> s & 1 == 1));
                let sup = naive_supports(graph, &nodes, &alive);
                let ok = alive
                    .iter()
                    .all(|s| qualifying_layers(graph, &sup, s, k) >= lambda as usize);
                if ok {
                    union = union.union(&alive);
                }
            }
            let mut covered = BitSet::empty(graph.node_count());
            for s in union.iter() {
                let (u, v) = graph.schema_endpoints(s);
                covered.insert(u);
                covered.insert(v);
            }
            Ok((covered, Some(union)))
        }
    }
}

/// Skyline reduced by a quadratic dominance filter, independent of the
/// production reduction.
pub fn oracle_skyline(memberships: &[IndexPair]) -> Vec<IndexPair> {
    let mut out: Vec<IndexPair> = Vec::new();
    for &p in memberships {
        let dominated = memberships
            .iter()
            .any(|&q| q != p && q.k >= p.k && q.lambda >= p.lambda);
        if !dominated && !out.contains(&p) {
            out.push(p);
        }
    }
    out.sort_by_key(|p| p.lambda);
    out
}

/// A feasible candidate for the community problems: vertex set `nodes`,
/// FirmTruss edges `schemas` (None for FirmCore), and its exact diameter.
#[derive(Debug, Clone)]
pub struct OracleCandidate {
    pub nodes: VertexSubset,
    pub schemas: Option<BitSet>,
    pub diameter: u32,
}

/// All minimum-diameter communities by exhaustive enumeration over vertex
/// subsets containing the query, ascending size. `None` when nothing
/// satisfies the structure and connectivity constraints.
pub fn brute_min_diameter_community(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    structure: Structure,
    budget: &OracleBudget,
) -> Result<Option<Vec<OracleCandidate>>> {
    budget.admit(graph)?;
    let started = Instant::now();
    let n = graph.node_count();
    let mut best: Option<u32> = None;
    let mut optima: Vec<OracleCandidate> = Vec::new();
    for mask in subsets_containing(n, query) {
        budget.check_clock(started)?;
        let subset = BitSet::from_iter(n, (0..n as u32).filter(|v| mask >> v & 1 == 1));
        let Some(candidate) = feasible_candidate(graph, k, lambda, query, structure, &subset)
        else {
            continue;
        };
        match best {
            Some(b) if candidate.diameter > b => {}
            Some(b) if candidate.diameter == b => optima.push(candidate),
            _ => {
                best = Some(candidate.diameter);
                optima = vec![candidate];
            }
        }
    }
    Ok(best.map(|_| optima))
}

/// Masks over n bits containing all query bits, ascending by size then value.
fn subsets_containing(n: usize, query: &[NodeId]) -> Vec<u64> {
    let qmask: u64 = query.iter().fold(0, |m, &q| m | 1 << q);
    let mut masks: Vec<u64> = (1..1u64 << n).filter(|m| m & qmask == qmask).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

/// Checks whether `subset` carries a connected structure covering exactly its
/// vertices, and computes the diameter of that structure.
fn feasible_candidate(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    structure: Structure,
    subset: &VertexSubset,
) -> Option<OracleCandidate> {
    match structure {
        Structure::FirmCore => {
            let ok = subset.iter().all(|v| {
                let deg = graph.degree_vector(subset, v).unwrap();
                let qualified = deg.iter().filter(|&&d| d >= k).count();
                k == 0 || qualified >= lambda as usize
            });
            if !ok {
                return None;
            }
            let view = graph.induced(subset);
            if !distance::is_connected(graph, view) {
                return None;
            }
            let diameter = distance::diameter(graph, view).ok()??;
            Some(OracleCandidate {
                nodes: subset.clone(),
                schemas: None,
                diameter,
            })
        }
        Structure::FirmTruss => {
            let (schemas, covered) = truss_fixpoint_within(graph, k, lambda, subset);
            // The structure must cover every chosen vertex; otherwise this
            // vertex set holds no FirmTruss spanning exactly it.
            if covered != *subset {
                return None;
            }
            if query.iter().any(|&q| !covered.contains(q)) {
                return None;
            }
            let view = graph.restricted(subset, &schemas);
            if !distance::is_connected(graph, view) {
                return None;
            }
            let diameter = distance::diameter(graph, view).ok()??;
            Some(OracleCandidate {
                nodes: subset.clone(),
                schemas: Some(schemas),
                diameter,
            })
        }
    }
}

/// Naive FirmTruss fixpoint inside a fixed vertex set: delete all violating
/// schemas each round, recomputing supports from scratch.
fn truss_fixpoint_within(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    subset: &VertexSubset,
) -> (BitSet, VertexSubset) {
    let mut alive = BitSet::empty(graph.schema_count());
    for s in 0..graph.schema_count() as SchemaId {
        let (u, v) = graph.schema_endpoints(s);
        if subset.contains(u) && subset.contains(v) {
            alive.insert(s);
        }
    }
    loop {
        let sup = naive_supports(graph, subset, &alive);
        let violators: Vec<SchemaId> = alive
            .iter()
            .filter(|&s| qualifying_layers(graph, &sup, s, k) < lambda as usize)
            .collect();
        if violators.is_empty() {
            break;
        }
        for s in violators {
            alive.remove(s);
        }
    }
    let mut covered = BitSet::empty(graph.node_count());
    for s in alive.iter() {
        let (u, v) = graph.schema_endpoints(s);
        covered.insert(u);
        covered.insert(v);
    }
    (alive, covered)
}

/// Homophily score recomputed from scratch (independent of the incremental
/// bookkeeping in the attributed module).
pub fn gamma_scratch(members: &[NodeId], sim: &dyn Fn(NodeId, NodeId) -> f64, p: PValue) -> f64 {
    let aggregates: Vec<f64> = members
        .iter()
        .map(|&v| {
            members
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| sim(v, u))
                .sum::<f64>()
        })
        .collect();
    match p {
        PValue::PosInf => aggregates.iter().cloned().fold(0.0, f64::max),
        PValue::NegInf => aggregates.iter().cloned().fold(f64::INFINITY, f64::min),
        PValue::Finite(p) if p == 0.0 => {
            if aggregates.iter().any(|&h| h <= 0.0) {
                0.0
            } else {
                let log_mean =
                    aggregates.iter().map(|h| h.ln()).sum::<f64>() / aggregates.len() as f64;
                log_mean.exp()
            }
        }
        PValue::Finite(p) => {
            if p < 0.0 && aggregates.iter().any(|&h| h == 0.0) {
                return 0.0;
            }
            let mean =
                aggregates.iter().map(|h| h.powf(p)).sum::<f64>() / aggregates.len() as f64;
            mean.powf(1.0 / p)
        }
    }
}

/// The feasible community with maximal homophily score by exhaustive
/// enumeration; ties resolved toward larger then lexicographically earlier
/// vertex sets.
pub fn brute_max_homophily(
    graph: &MultilayerGraph,
    sim: &dyn Fn(NodeId, NodeId) -> f64,
    p: PValue,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    budget: &OracleBudget,
) -> Result<Option<(f64, OracleCandidate)>> {
    budget.admit(graph)?;
    let started = Instant::now();
    let n = graph.node_count();
    let mut best: Option<(f64, OracleCandidate)> = None;
    for mask in subsets_containing(n, query) {
        budget.check_clock(started)?;
        let subset = BitSet::from_iter(n, (0..n as u32).filter(|v| mask >> v & 1 == 1));
        let Some(candidate) =
            feasible_candidate(graph, k, lambda, query, Structure::FirmTruss, &subset)
        else {
            continue;
        };
        let members: Vec<NodeId> = subset.iter().collect();
        let score = gamma_scratch(&members, sim, p);
        let better = match &best {
            None => true,
            Some((b, cand)) => {
                score > *b + 1e-12
                    || (score > *b - 1e-12 && subset.len() > cand.nodes.len())
            }
        };
        if better {
            best = Some((score, candidate));
        }
    }
    Ok(best)
}

/// Minimum number of intra-layer edge deletions that disconnect the view's
/// union multigraph (parallel instances across layers count separately),
/// via max-flow from a fixed node to every other node.
pub fn min_intra_layer_cut(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    budget: &OracleBudget,
) -> Result<u32> {
    budget.admit(graph)?;
    let members: Vec<NodeId> = view.nodes.iter().collect();
    if members.len() < 2 {
        return Err(FirmError::Domain(
            "edge cut needs at least two vertices".into(),
        ));
    }
    let n = members.len();
    let pos = |v: NodeId| members.binary_search(&v).unwrap();
    // Capacity matrix: number of alive instances between each pair.
    let mut cap = vec![vec![0u32; n]; n];
    for (i, &u) in members.iter().enumerate() {
        for &(w, sid) in graph.union_neighbors(u) {
            if w > u && view.admits_edge(w, sid) {
                let j = pos(w);
                let c = graph
                    .schema_layer_ids(sid)
                    .len()
                    .min(graph.layer_count()) as u32;
                cap[i][j] = c;
                cap[j][i] = c;
            }
        }
    }
    let mut best = u32::MAX;
    for t in 1..n {
        best = best.min(max_flow(&cap, 0, t));
        if best == 0 {
            break;
        }
    }
    Ok(best)
}

/// Edmonds–Karp on an undirected capacity matrix.
fn max_flow(cap: &[Vec<u32>], s: usize, t: usize) -> u32 {
    let n = cap.len();
    let mut residual: Vec<Vec<i64>> = cap
        .iter()
        .map(|row| row.iter().map(|&c| c as i64).collect())
        .collect();
    let mut flow = 0i64;
    loop {
        let mut parent = vec![usize::MAX; n];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for w in 0..n {
                if parent[w] == usize::MAX && residual[v][w] > 0 {
                    parent[w] = v;
                    queue.push_back(w);
                }
            }
        }
        if parent[t] == usize::MAX {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = t;
        while v != s {
            let p = parent[v];
            bottleneck = bottleneck.min(residual[p][v]);
            v = p;
        }
        let mut v = t;
        while v != s {
            let p = parent[v];
            residual[p][v] -= bottleneck;
            residual[v][p] += bottleneck;
            v = p;
        }
        flow += bottleneck;
    }
    flow as u32
}
