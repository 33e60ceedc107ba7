//! Community search drivers: FTCS and FCCS, each with a top-down Global
//! search (binary search on query distance over a shrinking candidate) and a
//! bottom-up Local search (doubling then binary search over a growing ball),
//! optionally accelerated by a skyline index.

use std::time::Instant;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::distance::{self, query_distance_of, query_distances, INF};
use crate::error::{FirmError, Result};
use crate::firmcore::{CoreState, SkylineCoreness};
use crate::firmtruss::{SkylineIndex, TrussState};
use crate::graph::{top_lambda, MultilayerGraph, NodeId, SubgraphView, VertexSubset};
use crate::metrics::PValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    FirmTruss,
    FirmCore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Global,
    Local,
}

/// How the reported diameter is obtained: exact all-pairs, or the
/// 2·query-distance bound once the community exceeds `node_cap`.
#[derive(Debug, Clone, Copy)]
pub enum DiameterMode {
    Exact,
    Bound { node_cap: usize },
}

impl Default for DiameterMode {
    fn default() -> Self {
        DiameterMode::Bound { node_cap: 2000 }
    }
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub k: u32,
    pub lambda: u16,
    pub query: Vec<NodeId>,
    pub structure: Structure,
    pub strategy: Strategy,
    pub use_index: bool,
    pub diameter_mode: DiameterMode,
}

impl SearchParams {
    pub fn new(
        structure: Structure,
        strategy: Strategy,
        k: u32,
        lambda: u16,
        query: Vec<NodeId>,
    ) -> Self {
        SearchParams {
            k,
            lambda,
            query,
            structure,
            strategy,
            use_index: false,
            diameter_mode: DiameterMode::Exact,
        }
    }

    pub fn algorithm_name(&self) -> String {
        let family = match self.structure {
            Structure::FirmTruss => "ftcs",
            Structure::FirmCore => "fccs",
        };
        let strategy = match (self.strategy, self.use_index) {
            (Strategy::Global, false) => "global",
            (Strategy::Global, true) => "iglobal",
            (Strategy::Local, false) => "local",
            (Strategy::Local, true) => "ilocal",
        };
        format!("{family}-{strategy}")
    }

    fn validate(&self, graph: &MultilayerGraph) -> Result<()> {
        if self.query.is_empty() {
            return Err(FirmError::Domain("empty query set".into()));
        }
        for &q in &self.query {
            if q as usize >= graph.node_count() {
                return Err(FirmError::Domain(format!("query node id {q} out of range")));
            }
        }
        if self.structure == Structure::FirmTruss && self.k < 2 {
            return Err(FirmError::Domain("firmtruss requires k >= 2".into()));
        }
        if self.lambda == 0 || self.lambda as usize > graph.layer_count().max(1) {
            return Err(FirmError::Domain(format!(
                "lambda {} out of range 1..={}",
                self.lambda,
                graph.layer_count()
            )));
        }
        Ok(())
    }
}

/// One probe of a driver's search on query distance.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub d_min: u32,
    pub d_max: Option<u32>,
    pub probe: u32,
    pub accepted: bool,
    pub size: u32,
}

#[derive(Debug, Clone)]
pub struct HomophilyReport {
    pub p: PValue,
    pub score: f64,
    pub removed_free_riders: Vec<NodeId>,
}

/// A found community: connected vertex subset, its surviving edge schemas
/// (FirmTruss only), and provenance.
#[derive(Debug, Clone)]
pub struct Community {
    pub algorithm: String,
    pub structure: Structure,
    pub k: u32,
    pub lambda: u16,
    pub query: Vec<NodeId>,
    pub nodes: VertexSubset,
    pub schemas: Option<BitSet>,
    pub query_distance: u32,
    pub diameter: u32,
    pub diameter_exact: bool,
    pub iterations: u32,
    pub trace: Vec<TraceStep>,
    pub elapsed_ms: f64,
    pub homophily: Option<HomophilyReport>,
}

impl Community {
    /// View of the community inside its graph: surviving schemas for a
    /// FirmTruss, induced subgraph for a FirmCore.
    pub fn view(&self) -> SubgraphView<'_> {
        SubgraphView {
            nodes: &self.nodes,
            schemas: self.schemas.as_ref(),
        }
    }

    /// Independent definitional check: query containment, connectivity, and
    /// the per-schema support (FirmTruss) or per-node degree (FirmCore)
    /// condition, all recomputed from scratch inside the community.
    pub fn validate(&self, graph: &MultilayerGraph) -> Result<()> {
        for &q in &self.query {
            if !self.nodes.contains(q) {
                return Err(FirmError::Validation(format!(
                    "query node {} missing from community",
                    graph.node_label(q)
                )));
            }
        }
        if !distance::is_connected(graph, self.view()) {
            return Err(FirmError::Validation("community is disconnected".into()));
        }
        match self.structure {
            Structure::FirmCore => {
                for v in self.nodes.iter() {
                    let deg = graph.degree_vector(&self.nodes, v)?;
                    let top = top_lambda(&deg, self.lambda)?;
                    if top < self.k {
                        return Err(FirmError::Validation(format!(
                            "node {} has Top-λ degree {} < {}",
                            graph.node_label(v),
                            top,
                            self.k
                        )));
                    }
                }
            }
            Structure::FirmTruss => {
                let schemas = self.schemas.as_ref().ok_or_else(|| {
                    FirmError::Validation("firmtruss community lacks schema set".into())
                })?;
                let supports = crate::oracle::naive_supports(graph, &self.nodes, schemas);
                for s in schemas.iter() {
                    let hosted = graph.schema_layer_ids(s);
                    let base = graph.schema_slot_base(s);
                    let qualifying = hosted
                        .iter()
                        .enumerate()
                        .filter(|(slot, _)| supports[base + slot] + 2 >= self.k)
                        .count();
                    if qualifying < self.lambda as usize {
                        let (u, v) = graph.schema_endpoints(s);
                        return Err(FirmError::Validation(format!(
                            "edge schema ({}, {}) qualifies in {} < {} layers",
                            graph.node_label(u),
                            graph.node_label(v),
                            qualifying,
                            self.lambda
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Result JSON per the CLI interface; `elapsed_ms` varies run to run.
    pub fn to_json(&self, graph: &MultilayerGraph) -> serde_json::Value {
        let labels: Vec<&str> = self.nodes.iter().map(|v| graph.node_label(v)).collect();
        let query: Vec<&str> = self.query.iter().map(|&v| graph.node_label(v)).collect();
        let mut value = serde_json::json!({
            "algorithm": self.algorithm,
            "k": self.k,
            "lambda": self.lambda,
            "query": query,
            "nodes": labels,
            "query_distance": self.query_distance,
            "diameter": self.diameter,
            "diameter_exact": self.diameter_exact,
            "elapsed_ms": self.elapsed_ms,
            "iterations": self.iterations,
        });
        if let Some(h) = &self.homophily {
            let obj = value.as_object_mut().unwrap();
            obj.insert("p".into(), serde_json::json!(h.p.to_string()));
            obj.insert("homophily_score".into(), serde_json::json!(h.score));
            let removed: Vec<&str> = h
                .removed_free_riders
                .iter()
                .map(|&v| graph.node_label(v))
                .collect();
            obj.insert("removed_as_free_riders".into(), serde_json::json!(removed));
        }
        value
    }
}

/// Optional skyline index handed to a driver.
#[derive(Clone, Copy)]
pub enum SearchIndex<'a> {
    None,
    Truss(&'a SkylineIndex),
    Core(&'a SkylineCoreness),
}

/// Peelable candidate structure shared by the drivers.
#[derive(Clone)]
enum AnyState<'g> {
    Truss(TrussState<'g>),
    Core(CoreState<'g>),
}

impl<'g> AnyState<'g> {
    fn new(
        graph: &'g MultilayerGraph,
        structure: Structure,
        k: u32,
        lambda: u16,
        start: &VertexSubset,
        allowed: Option<&BitSet>,
    ) -> Result<Self> {
        Ok(match structure {
            Structure::FirmTruss => {
                AnyState::Truss(TrussState::new(graph, k, lambda, start, allowed)?)
            }
            Structure::FirmCore => AnyState::Core(CoreState::new(graph, k, lambda, start)?),
        })
    }

    fn vertices(&self) -> &VertexSubset {
        match self {
            AnyState::Truss(s) => s.vertices(),
            AnyState::Core(s) => s.vertices(),
        }
    }

    fn view(&self) -> SubgraphView<'_> {
        match self {
            AnyState::Truss(s) => s.view(),
            AnyState::Core(s) => s.view(),
        }
    }

    fn schemas(&self) -> Option<BitSet> {
        match self {
            AnyState::Truss(s) => Some(s.alive_schemas().clone()),
            AnyState::Core(_) => None,
        }
    }

    fn delete_vertices(&mut self, victims: &[NodeId]) {
        match self {
            AnyState::Truss(s) => s.delete_vertices(victims),
            AnyState::Core(s) => s.delete_vertices(victims),
        }
    }

    fn restrict_to_component(&mut self, query: &[NodeId]) -> Result<()> {
        match self {
            AnyState::Truss(s) => s.restrict_to_component(query),
            AnyState::Core(s) => s.restrict_to_component(query),
        }
    }

    fn is_empty(&self) -> bool {
        self.vertices().is_empty()
    }
}

/// Node/schema restriction derived from a skyline index: exactly the members
/// of the maximal (k, λ) structure, so index-backed and online searches see
/// the same candidate space.
struct Restriction {
    nodes: VertexSubset,
    schemas: Option<BitSet>,
}

fn build_restriction(
    graph: &MultilayerGraph,
    params: &SearchParams,
    index: SearchIndex<'_>,
) -> Result<Restriction> {
    match (params.use_index, index, params.structure) {
        (false, _, _) => Ok(Restriction {
            nodes: graph.full_subset(),
            schemas: None,
        }),
        (true, SearchIndex::Truss(idx), Structure::FirmTruss) => {
            if !idx.matches(graph) {
                return Err(FirmError::IndexMismatch(
                    "index fingerprint does not match the graph".into(),
                ));
            }
            let probe = crate::skyline::IndexPair::new(params.k, params.lambda);
            let mut schemas = BitSet::empty(graph.schema_count());
            let mut nodes = BitSet::empty(graph.node_count());
            for (s, pairs) in idx.per_schema.iter().enumerate() {
                if crate::skyline::skyline_admits(pairs, probe) {
                    schemas.insert(s as u32);
                    let (u, v) = graph.schema_endpoints(s as u32);
                    nodes.insert(u);
                    nodes.insert(v);
                }
            }
            Ok(Restriction {
                nodes,
                schemas: Some(schemas),
            })
        }
        (true, SearchIndex::Core(idx), Structure::FirmCore) => {
            if idx.per_node.len() != graph.node_count() {
                return Err(FirmError::IndexMismatch(
                    "coreness table size differs from graph".into(),
                ));
            }
            Ok(Restriction {
                nodes: idx.members(params.k, params.lambda),
                schemas: None,
            })
        }
        (true, SearchIndex::None, _) => Err(FirmError::Validation(
            "use_index set but no index supplied".into(),
        )),
        (true, _, _) => Err(FirmError::Validation(
            "index type does not match the requested structure".into(),
        )),
    }
}

/// Entry point shared by the FTCS/FCCS × Global/Local drivers.
pub fn community_search(
    graph: &MultilayerGraph,
    params: &SearchParams,
    index: SearchIndex<'_>,
) -> Result<Community> {
    params.validate(graph)?;
    let start = Instant::now();
    let restriction = build_restriction(graph, params, index)?;
    let (state, trace) = match params.strategy {
        Strategy::Global => global_drive(graph, params, &restriction)?,
        Strategy::Local => local_drive(graph, params, &restriction)?,
    };
    finish(graph, params, state, trace, start)
}

pub fn ftcs_global(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<Community> {
    let params = SearchParams::new(Structure::FirmTruss, Strategy::Global, k, lambda, query.to_vec());
    community_search(graph, &params, SearchIndex::None)
}

pub fn ftcs_local(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<Community> {
    let params = SearchParams::new(Structure::FirmTruss, Strategy::Local, k, lambda, query.to_vec());
    community_search(graph, &params, SearchIndex::None)
}

pub fn fccs_global(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<Community> {
    let params = SearchParams::new(Structure::FirmCore, Strategy::Global, k, lambda, query.to_vec());
    community_search(graph, &params, SearchIndex::None)
}

pub fn fccs_local(
    graph: &MultilayerGraph,
    k: u32,
    lambda: u16,
    query: &[NodeId],
) -> Result<Community> {
    let params = SearchParams::new(Structure::FirmCore, Strategy::Local, k, lambda, query.to_vec());
    community_search(graph, &params, SearchIndex::None)
}

fn finish(
    graph: &MultilayerGraph,
    params: &SearchParams,
    state: AnyState<'_>,
    trace: Vec<TraceStep>,
    started: Instant,
) -> Result<Community> {
    let nodes = state.vertices().clone();
    let schemas = state.schemas();
    let qd = query_distance_of(graph, state.view(), &nodes, &params.query)?
        .ok_or(FirmError::NoCommunity)?;
    let (diameter, exact) = report_diameter(graph, state.view(), qd, params.diameter_mode)?;
    let community = Community {
        algorithm: params.algorithm_name(),
        structure: params.structure,
        k: params.k,
        lambda: params.lambda,
        query: params.query.clone(),
        nodes,
        schemas,
        query_distance: qd,
        diameter,
        diameter_exact: exact,
        iterations: trace.len() as u32,
        trace,
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        homophily: None,
    };
    community.validate(graph)?;
    Ok(community)
}

pub(crate) fn report_diameter(
    graph: &MultilayerGraph,
    view: SubgraphView<'_>,
    qd: u32,
    mode: DiameterMode,
) -> Result<(u32, bool)> {
    let cap = match mode {
        DiameterMode::Exact => usize::MAX,
        DiameterMode::Bound { node_cap } => node_cap,
    };
    if view.nodes.len() <= cap {
        let d = distance::diameter(graph, view)?.ok_or(FirmError::NoCommunity)?;
        Ok((d, true))
    } else {
        Ok((2 * qd, false))
    }
}

/// Top-down search: start from the maximal structure containing the query and
/// binary-search the query distance. A probe at radius d keeps the maximal
/// substructure whose vertices all sit within d of the query, shrinking the
/// kept candidate monotonically.
fn global_drive<'g>(
    graph: &'g MultilayerGraph,
    params: &SearchParams,
    restriction: &Restriction,
) -> Result<(AnyState<'g>, Vec<TraceStep>)> {
    let mut best = AnyState::new(
        graph,
        params.structure,
        params.k,
        params.lambda,
        &restriction.nodes,
        restriction.schemas.as_ref(),
    )?;
    best.restrict_to_component(&params.query)?;
    if best.is_empty() {
        return Err(FirmError::NoCommunity);
    }
    let mut d_max = query_distance_of(graph, best.view(), best.vertices(), &params.query)?
        .ok_or(FirmError::NoCommunity)?;
    let mut d_min = 1u32;
    let mut trace = Vec::new();
    while d_min < d_max {
        let d_avg = (d_min + d_max) / 2;
        match radius_fixpoint(graph, params, best.clone(), d_avg)? {
            Some(cand) => {
                let dist =
                    query_distance_of(graph, cand.view(), cand.vertices(), &params.query)?
                        .ok_or(FirmError::NoCommunity)?;
                trace.push(TraceStep {
                    d_min,
                    d_max: Some(d_max),
                    probe: d_avg,
                    accepted: true,
                    size: cand.vertices().len() as u32,
                });
                d_max = dist;
                best = cand;
            }
            None => {
                trace.push(TraceStep {
                    d_min,
                    d_max: Some(d_max),
                    probe: d_avg,
                    accepted: false,
                    size: 0,
                });
                d_min = d_avg + 1;
            }
        }
    }
    Ok((best, trace))
}

/// Shrinks a candidate to the maximal substructure whose vertices all lie
/// within `radius` of the query, alternating far-vertex deletion with
/// structure maintenance until stable. `None` when the query does not
/// survive.
fn radius_fixpoint<'g>(
    graph: &'g MultilayerGraph,
    params: &SearchParams,
    mut state: AnyState<'g>,
    radius: u32,
) -> Result<Option<AnyState<'g>>> {
    match state.restrict_to_component(&params.query) {
        Ok(()) => {}
        Err(FirmError::NoCommunity) => return Ok(None),
        Err(e) => return Err(e),
    }
    loop {
        if state.is_empty() {
            return Ok(None);
        }
        let dq = query_distances(graph, state.view(), &params.query);
        if params.query.iter().any(|&q| dq[q as usize] > radius) {
            return Ok(None);
        }
        let victims: Vec<NodeId> = state
            .vertices()
            .iter()
            .filter(|&u| dq[u as usize] > radius)
            .collect();
        if victims.is_empty() {
            return Ok(Some(state));
        }
        state.delete_vertices(&victims);
        if params.query.iter().any(|&q| !state.vertices().contains(q)) {
            return Ok(None);
        }
    }
}

/// Bottom-up search: grow a distance ball around the query (doubling the
/// radius until a structure survives), then binary-search the radius.
fn local_drive<'g>(
    graph: &'g MultilayerGraph,
    params: &SearchParams,
    restriction: &Restriction,
) -> Result<(AnyState<'g>, Vec<TraceStep>)> {
    let base_view = SubgraphView {
        nodes: &restriction.nodes,
        schemas: restriction.schemas.as_ref(),
    };
    let base_dq = query_distances(graph, base_view, &params.query);
    for &q in &params.query {
        if base_dq[q as usize] == INF {
            return Err(FirmError::NoCommunity);
        }
    }
    let d_reach = restriction
        .nodes
        .iter()
        .map(|v| base_dq[v as usize])
        .filter(|&d| d != INF)
        .max()
        .unwrap_or(0);

    let mut d_min = 1u32;
    let mut d_mid = 1u32;
    let mut d_max: Option<u32> = None;
    let mut out: Option<AnyState<'g>> = None;
    let mut trace = Vec::new();

    loop {
        if let Some(dm) = d_max {
            if d_min >= dm {
                break;
            }
        }
        let mut ball = BitSet::empty(graph.node_count());
        for v in restriction.nodes.iter() {
            if base_dq[v as usize] <= d_mid {
                ball.insert(v);
            }
        }
        for &q in &params.query {
            ball.insert(q);
        }
        let attempt = probe_ball(graph, params, restriction, &ball, d_mid)?;
        trace.push(TraceStep {
            d_min,
            d_max,
            probe: d_mid,
            accepted: attempt.is_some(),
            size: attempt.as_ref().map_or(0, |s| s.vertices().len()) as u32,
        });
        match attempt {
            Some(state) => {
                d_max = Some(d_mid);
                out = Some(state);
                if d_min >= d_mid {
                    break;
                }
                d_mid = (d_min + d_mid) / 2;
            }
            None => {
                // Once the ball covers everything reachable, growing further
                // cannot help.
                if out.is_none() && d_mid >= d_reach {
                    return Err(FirmError::NoCommunity);
                }
                d_min = d_mid + 1;
                d_mid *= 2;
                if let Some(dm) = d_max {
                    if d_min >= dm {
                        break;
                    }
                }
            }
        }
    }
    out.map(|s| (s, trace)).ok_or(FirmError::NoCommunity)
}

/// One probe of the local driver: the maximal structure inside the ball,
/// iteratively cleared of vertices farther than the probe radius.
fn probe_ball<'g>(
    graph: &'g MultilayerGraph,
    params: &SearchParams,
    restriction: &Restriction,
    ball: &VertexSubset,
    d_mid: u32,
) -> Result<Option<AnyState<'g>>> {
    let state = AnyState::new(
        graph,
        params.structure,
        params.k,
        params.lambda,
        ball,
        restriction.schemas.as_ref(),
    )?;
    radius_fixpoint(graph, params, state, d_mid)
}
