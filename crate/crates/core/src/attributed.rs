//! Homophily scoring over attributed graphs and the AFTCS search family:
//! a greedy peeling approximation for finite p and exact algorithms for
//! p = ±∞.
//!
//! The homophily score of a community S is the generalized p-mean of the
//! per-node aggregate similarities h_S(v) = Σ_{u∈S, u≠v} h(v, u).

use std::time::Instant;

use crate::bitset::BitSet;
use crate::distance::query_distance_of;
use crate::error::{FirmError, Result};
use crate::firmtruss::{maximal_firmtruss, TrussState};
use crate::graph::{AttributeTable, MultilayerGraph, NodeId, VertexSubset};
use crate::metrics::PValue;
use crate::search::{
    report_diameter, Community, DiameterMode, HomophilyReport, Structure, TraceStep,
};

/// Symmetric non-negative pairwise similarity between nodes.
pub trait Similarity: Sync {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64;
}

/// Cosine of two attribute vectors; zero vectors have similarity 0.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(FirmError::Domain(format!(
            "attribute dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (na * nb)).clamp(0.0, 1.0))
}

/// The default similarity: cosine over an attribute table.
pub struct CosineSimilarity<'a> {
    table: &'a AttributeTable,
}

impl<'a> CosineSimilarity<'a> {
    pub fn new(table: &'a AttributeTable) -> Self {
        CosineSimilarity { table }
    }
}

impl Similarity for CosineSimilarity<'_> {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        cosine_similarity(self.table.get(u), self.table.get(v)).unwrap_or(0.0)
    }
}

/// Explicit pairwise similarity table (tests and worked examples).
pub struct TableSimilarity {
    values: std::collections::HashMap<(NodeId, NodeId), f64>,
}

impl TableSimilarity {
    pub fn new(pairs: &[(NodeId, NodeId, f64)]) -> Self {
        let mut values = std::collections::HashMap::new();
        for &(u, v, h) in pairs {
            values.insert((u.min(v), u.max(v)), h);
        }
        TableSimilarity { values }
    }
}

impl Similarity for TableSimilarity {
    fn similarity(&self, u: NodeId, v: NodeId) -> f64 {
        if u == v {
            return 0.0;
        }
        *self.values.get(&(u.min(v), u.max(v))).unwrap_or(&0.0)
    }
}

/// Similarity cache and running aggregates for one search: pairwise values
/// are materialized only for the nodes of the starting FirmTruss, never for
/// the whole graph.
pub struct HomophilyContext {
    pub p: PValue,
    members: Vec<NodeId>,
    position: std::collections::HashMap<NodeId, usize>,
    sims: Vec<f64>,
    aggregate: Vec<f64>,
    in_s: Vec<bool>,
    size: usize,
}

impl HomophilyContext {
    pub fn new(p: PValue, members: &VertexSubset, sim: &dyn Similarity) -> Self {
        let members: Vec<NodeId> = members.iter().collect();
        let m = members.len();
        let position = members
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect::<std::collections::HashMap<_, _>>();
        let mut sims = vec![0.0; m * (m - 1) / 2];
        for i in 0..m {
            for j in i + 1..m {
                sims[tri_index(i, j)] = sim.similarity(members[i], members[j]).max(0.0);
            }
        }
        let mut aggregate = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                if j != i {
                    aggregate[i] += sims[tri_index(i.min(j), i.max(j))];
                }
            }
        }
        HomophilyContext {
            p,
            members,
            position,
            sims,
            aggregate,
            in_s: vec![true; m],
            size: m,
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.position.get(&v).map_or(false, |&i| self.in_s[i])
    }

    pub fn pair(&self, u: NodeId, v: NodeId) -> f64 {
        if u == v {
            return 0.0;
        }
        let (i, j) = (self.position[&u], self.position[&v]);
        self.sims[tri_index(i.min(j), i.max(j))]
    }

    /// Running aggregate h_S(v) for the current S.
    pub fn aggregate_of(&self, v: NodeId) -> f64 {
        self.aggregate[self.position[&v]].max(0.0)
    }

    pub fn current_members(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter(|(i, _)| self.in_s[*i])
            .map(|(_, &v)| v)
    }

    /// Removes `v` from S, updating the remaining aggregates.
    pub fn remove(&mut self, v: NodeId) {
        let i = self.position[&v];
        if !self.in_s[i] {
            return;
        }
        self.in_s[i] = false;
        self.size -= 1;
        for j in 0..self.members.len() {
            if j != i && self.in_s[j] {
                self.aggregate[j] -= self.sims[tri_index(i.min(j), i.max(j))];
            }
        }
    }

    /// Γ_p of the current S from the running aggregates. Zero aggregates give
    /// 0 for p ≤ 0 by the limit convention.
    pub fn score_current(&self) -> f64 {
        let aggs: Vec<f64> = (0..self.members.len())
            .filter(|&i| self.in_s[i])
            .map(|i| self.aggregate[i].max(0.0))
            .collect();
        gamma_of(&aggs, self.p)
    }

    /// Γ_p of an arbitrary subset of the cached members, from scratch.
    pub fn score_of(&self, members: &[NodeId]) -> f64 {
        let aggs: Vec<f64> = members
            .iter()
            .map(|&v| {
                members
                    .iter()
                    .filter(|&&u| u != v)
                    .map(|&u| self.pair(v, u))
                    .sum::<f64>()
            })
            .collect();
        gamma_of(&aggs, self.p)
    }

    /// Δ_u(S): the exact drop of |S|·Γ_p^p(S) caused by removing `u`.
    /// Only defined for finite p; aggregates of 0 are extremal under p < 0.
    pub fn delta(&self, u: NodeId) -> Result<f64> {
        let PValue::Finite(p) = self.p else {
            return Err(FirmError::Domain(
                "delta is defined for finite p only".into(),
            ));
        };
        if !self.contains(u) {
            return Err(FirmError::Domain("node not in the current subset".into()));
        }
        let iu = self.position[&u];
        let hu = self.aggregate[iu].max(0.0);
        let mut acc = pow_aggregate(hu, p);
        for j in 0..self.members.len() {
            if j == iu || !self.in_s[j] {
                continue;
            }
            let s = self.sims[tri_index(iu.min(j), iu.max(j))];
            if s <= 0.0 {
                continue;
            }
            let hv = self.aggregate[j].max(0.0);
            let reduced = (hv - s).max(0.0);
            acc += pow_aggregate(hv, p) - pow_aggregate(reduced, p);
        }
        Ok(acc)
    }
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// x^p with the conventions used throughout: 0^p = +∞ for p < 0, 0^0 = 1.
fn pow_aggregate(x: f64, p: f64) -> f64 {
    if x == 0.0 && p < 0.0 {
        f64::INFINITY
    } else {
        x.powf(p)
    }
}

/// Γ_p over a list of aggregates, honoring the limit conventions:
/// p = ±∞ → max/min, p = 0 → geometric mean, any zero aggregate with p ≤ 0 → 0.
pub fn gamma_of(aggregates: &[f64], p: PValue) -> f64 {
    if aggregates.is_empty() {
        return 0.0;
    }
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

/// Γ_p of a vertex subset under a similarity measure (convenience wrapper).
pub fn homophily_score(sim: &dyn Similarity, members: &[NodeId], p: PValue) -> f64 {
    let aggs: Vec<f64> = members
        .iter()
        .map(|&v| {
            members
                .iter()
                .filter(|&&u| u != v)
                .map(|&u| sim.similarity(v, u).max(0.0))
                .sum::<f64>()
        })
        .collect();
    gamma_of(&aggs, p)
}

enum GreedyRule {
    /// argmin Δ (p > 0) or argmax Δ (p < 0).
    Delta,
    /// argmin h_S (the p = −∞ exact rule).
    MinAggregate,
}

/// Greedy peeling over the maximal FirmTruss containing the query, scoring
/// every query-containing intermediate and returning the best one.
fn peel_by_homophily(
    graph: &MultilayerGraph,
    sim: &dyn Similarity,
    p: PValue,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    rule: GreedyRule,
    algorithm: &str,
    diameter_mode: DiameterMode,
) -> Result<Community> {
    if query.is_empty() {
        return Err(FirmError::Domain("empty query set".into()));
    }
    let started = Instant::now();
    let (g0_nodes, g0_schemas, mut state) = maximal_firmtruss(graph, k, lambda, query)?;
    let mut ctx = HomophilyContext::new(p, &g0_nodes, sim);

    let mut best_score = f64::NEG_INFINITY;
    let mut best: Option<(VertexSubset, BitSet)> = None;
    let mut iterations = 0u32;

    loop {
        let score = ctx.score_current();
        if score > best_score {
            best_score = score;
            best = Some((state.vertices().clone(), state.alive_schemas().clone()));
        }
        let victim = match rule {
            GreedyRule::Delta => {
                let maximize = matches!(p, PValue::Finite(x) if x < 0.0);
                select_by_delta(&ctx, state.vertices(), maximize)?
            }
            GreedyRule::MinAggregate => select_min_aggregate(&ctx, state.vertices()),
        };
        let Some(victim) = victim else { break };
        if query.contains(&victim) {
            break;
        }
        let before = state.vertices().clone();
        state.delete_vertices(&[victim]);
        if query.iter().any(|&q| !state.vertices().contains(q)) {
            break;
        }
        if state.restrict_to_component(query).is_err() {
            break;
        }
        for v in before.iter() {
            if !state.vertices().contains(v) {
                ctx.remove(v);
            }
        }
        iterations += 1;
        if state.is_empty() {
            break;
        }
    }

    let (nodes, schemas) = best.ok_or(FirmError::NoCommunity)?;
    let removed: Vec<NodeId> = g0_nodes.iter().filter(|&v| !nodes.contains(v)).collect();
    let view = graph.restricted(&nodes, &schemas);
    let qd = query_distance_of(graph, view, &nodes, query)?.ok_or(FirmError::NoCommunity)?;
    let (diameter, exact) = report_diameter(graph, view, qd, diameter_mode)?;
    let _ = g0_schemas;
    let community = Community {
        algorithm: algorithm.to_owned(),
        structure: Structure::FirmTruss,
        k,
        lambda,
        query: query.to_vec(),
        nodes,
        schemas: Some(schemas),
        query_distance: qd,
        diameter,
        diameter_exact: exact,
        iterations,
        trace: Vec::<TraceStep>::new(),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        homophily: Some(HomophilyReport {
            p,
            score: best_score,
            removed_free_riders: removed,
        }),
    };
    community.validate(graph)?;
    Ok(community)
}

fn select_by_delta(
    ctx: &HomophilyContext,
    vertices: &VertexSubset,
    maximize: bool,
) -> Result<Option<NodeId>> {
    let mut best: Option<(f64, NodeId)> = None;
    for v in vertices.iter() {
        let d = ctx.delta(v)?;
        let better = match best {
            None => true,
            Some((b, _)) => {
                if maximize {
                    d > b
                } else {
                    d < b
                }
            }
        };
        if better {
            best = Some((d, v));
        }
    }
    Ok(best.map(|(_, v)| v))
}

fn select_min_aggregate(ctx: &HomophilyContext, vertices: &VertexSubset) -> Option<NodeId> {
    let mut best: Option<(f64, NodeId)> = None;
    for v in vertices.iter() {
        let h = ctx.aggregate_of(v);
        if best.map_or(true, |(b, _)| h < b) {
            best = Some((h, v));
        }
    }
    best.map(|(_, v)| v)
}

/// AFTCS-Approx: greedy Δ-peeling for finite p ≠ 0. For p ≥ 1 the returned
/// score is within (p+1)^{1/p} of the optimum.
pub fn aftcs_approx(
    graph: &MultilayerGraph,
    sim: &dyn Similarity,
    p: PValue,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    diameter_mode: DiameterMode,
) -> Result<Community> {
    match p {
        PValue::Finite(x) if x != 0.0 => {}
        PValue::Finite(_) => {
            return Err(FirmError::Unsupported(
                "aftcs-approx requires finite nonzero p (p = 0 is scoring-only)".into(),
            ))
        }
        _ => {
            return Err(FirmError::Unsupported(
                "aftcs-approx requires finite p; use the exact ±inf algorithms".into(),
            ))
        }
    }
    peel_by_homophily(
        graph,
        sim,
        p,
        k,
        lambda,
        query,
        GreedyRule::Delta,
        "aftcs-approx",
        diameter_mode,
    )
}

/// Exact solution for p = −∞: repeatedly remove a vertex of minimum aggregate
/// similarity, keeping the FirmTruss property.
pub fn exact_maxmin(
    graph: &MultilayerGraph,
    sim: &dyn Similarity,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    diameter_mode: DiameterMode,
) -> Result<Community> {
    peel_by_homophily(
        graph,
        sim,
        PValue::NegInf,
        k,
        lambda,
        query,
        GreedyRule::MinAggregate,
        "exact-maxmin",
        diameter_mode,
    )
}

/// Exact solution for p = +∞: the maximal connected FirmTruss containing the
/// query already maximizes the largest aggregate.
pub fn exact_maxinf(
    graph: &MultilayerGraph,
    sim: &dyn Similarity,
    k: u32,
    lambda: u16,
    query: &[NodeId],
    diameter_mode: DiameterMode,
) -> Result<Community> {
    let started = Instant::now();
    let (nodes, schemas, _) = maximal_firmtruss(graph, k, lambda, query)?;
    let ctx = HomophilyContext::new(PValue::PosInf, &nodes, sim);
    let score = ctx.score_current();
    let view = graph.restricted(&nodes, &schemas);
    let qd = query_distance_of(graph, view, &nodes, query)?.ok_or(FirmError::NoCommunity)?;
    let (diameter, exact) = report_diameter(graph, view, qd, diameter_mode)?;
    let community = Community {
        algorithm: "exact-maxinf".to_owned(),
        structure: Structure::FirmTruss,
        k,
        lambda,
        query: query.to_vec(),
        nodes,
        schemas: Some(schemas),
        query_distance: qd,
        diameter,
        diameter_exact: exact,
        iterations: 0,
        trace: Vec::new(),
        elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        homophily: Some(HomophilyReport {
            p: PValue::PosInf,
            score,
            removed_free_riders: Vec::new(),
        }),
    };
    community.validate(graph)?;
    Ok(community)
}

/// The state handle for maintain-style deletions exposed to callers that
/// drive their own peeling.
pub type AftcsState<'g> = TrussState<'g>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;

    fn graph_of(lines: &str) -> MultilayerGraph {
        parse_edge_list(lines.as_bytes()).unwrap()
    }

    fn clique(layer: &str, names: &[&str]) -> String {
        let mut out = String::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                out.push_str(&format!("{layer} {} {}\n", names[i], names[j]));
            }
        }
        out
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[2.0, 1.0], &[2.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(cosine_similarity(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn worked_homophily_scores() {
        // Four nodes with a fixed similarity table; Γ_1 of the sets used in
        // the non-submodularity walk-through.
        let sim = TableSimilarity::new(&[
            (0, 1, 0.3), // u1,u2
            (0, 2, 0.2), // u1,v1
            (0, 3, 0.1), // u1,v2
            (1, 2, 0.1), // u2,v1
            (1, 3, 0.5), // u2,v2
            (2, 3, 0.0), // v1,v2
        ]);
        let p = PValue::Finite(1.0);
        let g1 = homophily_score(&sim, &[0, 1], p);
        assert!((g1 - 0.3).abs() < 1e-12);
        let g2 = homophily_score(&sim, &[0, 1, 2], p);
        assert!((g2 - 0.4).abs() < 1e-12);
        let g3 = homophily_score(&sim, &[0, 2], p);
        assert!((g3 - 0.2).abs() < 1e-12);
        let g4 = homophily_score(&sim, &[0, 3], p);
        assert!((g4 - 0.1).abs() < 1e-12);
        // Singleton: empty-sum convention.
        assert_eq!(homophily_score(&sim, &[0], p), 0.0);
    }

    #[test]
    fn delta_telescopes_at_p_one() {
        // Dyadic similarities keep f64 arithmetic exact.
        let sim = TableSimilarity::new(&[(0, 1, 0.25), (0, 2, 0.5), (1, 2, 0.125)]);
        let members = BitSet::from_iter(3, [0, 1, 2]);
        let ctx = HomophilyContext::new(PValue::Finite(1.0), &members, &sim);
        for v in 0..3u32 {
            assert_eq!(ctx.delta(v).unwrap(), 2.0 * ctx.aggregate_of(v));
        }
    }

    #[test]
    fn delta_zero_similarity_node() {
        let sim = TableSimilarity::new(&[(0, 1, 0.5)]);
        let members = BitSet::from_iter(3, [0, 1, 2]);
        let ctx = HomophilyContext::new(PValue::Finite(1.0), &members, &sim);
        assert_eq!(ctx.delta(2).unwrap(), 0.0);
        // Under p < 0 a zero-aggregate node is the extreme pick.
        let ctx = HomophilyContext::new(PValue::Finite(-1.0), &members, &sim);
        assert_eq!(ctx.delta(2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn uniform_attributes_return_g0() {
        let names = ["a", "b", "c", "d", "e"];
        let mut s = clique("0", &names);
        s.push_str(&clique("1", &names));
        let g = graph_of(&s);
        let mut pairs = Vec::new();
        for i in 0..5u32 {
            for j in i + 1..5 {
                pairs.push((i, j, 0.5));
            }
        }
        let sim = TableSimilarity::new(&pairs);
        let c = aftcs_approx(&g, &sim, PValue::Finite(1.0), 4, 2, &[0], DiameterMode::Exact)
            .unwrap();
        assert_eq!(c.nodes.len(), 5);
        let h = c.homophily.unwrap();
        assert!((h.score - 2.0).abs() < 1e-12);
        assert!(h.removed_free_riders.is_empty());
    }

    #[test]
    fn maxmin_removes_dissimilar_node_first() {
        // 6-clique in one layer; node f similar to nobody. Exact-MaxMin must
        // drop it before anything else.
        let names = ["a", "b", "c", "d", "e", "f"];
        let g = graph_of(&clique("0", &names));
        let mut pairs = Vec::new();
        for i in 0..5u32 {
            for j in i + 1..5 {
                pairs.push((i, j, 0.4));
            }
        }
        let sim = TableSimilarity::new(&pairs);
        let c = exact_maxmin(&g, &sim, 3, 1, &[0], DiameterMode::Exact).unwrap();
        assert!(!c.nodes.contains(5));
        assert_eq!(c.nodes.len(), 5);
    }

    #[test]
    fn maxinf_is_maximal_firmtruss() {
        let names = ["a", "b", "c", "d"];
        let g = graph_of(&clique("0", &names));
        let sim = TableSimilarity::new(&[(0, 1, 0.9)]);
        let c = exact_maxinf(&g, &sim, 3, 1, &[0], DiameterMode::Exact).unwrap();
        let (nodes, _, _) = maximal_firmtruss(&g, 3, 1, &[0]).unwrap();
        assert_eq!(c.nodes, nodes);
    }

    #[test]
    fn p_zero_search_rejected() {
        let g = graph_of(&clique("0", &["a", "b", "c"]));
        let sim = TableSimilarity::new(&[]);
        assert!(matches!(
            aftcs_approx(&g, &sim, PValue::Finite(0.0), 3, 1, &[0], DiameterMode::Exact),
            Err(FirmError::Unsupported(_))
        ));
        assert!(matches!(
            aftcs_approx(&g, &sim, PValue::PosInf, 3, 1, &[0], DiameterMode::Exact),
            Err(FirmError::Unsupported(_))
        ));
    }

    #[test]
    fn incremental_matches_scratch_after_removals() {
        let names = ["a", "b", "c", "d", "e", "f"];
        let g = graph_of(&clique("0", &names));
        let mut pairs = Vec::new();
        let mut x: f64 = 0.13;
        for i in 0..6u32 {
            for j in i + 1..6 {
                pairs.push((i, j, x));
                x = (x * 7.3).fract();
            }
        }
        let sim = TableSimilarity::new(&pairs);
        let all = g.full_subset();
        let mut ctx = HomophilyContext::new(PValue::Finite(2.0), &all, &sim);
        ctx.remove(3);
        ctx.remove(5);
        let members: Vec<NodeId> = ctx.current_members().collect();
        let scratch = ctx.score_of(&members);
        let incremental = ctx.score_current();
        assert!((scratch - incremental).abs() <= 1e-9 * scratch.abs().max(1.0));
    }
}
