//! Quality metrics and the closed-form structural bounds used by reports and
//! the property-test suite. Pure functions, thread-safe.

use crate::error::{FirmError, Result};
use crate::graph::{LayerId, MultilayerGraph, SubgraphView};

/// Multilayer density: the best trade-off, over nonempty layer subsets, of the
/// weakest chosen layer's edge density against |L̂|^β. Computed by sorting
/// per-layer densities descending and maximizing (j-th largest)·j^β.
pub fn density(graph: &MultilayerGraph, view: SubgraphView<'_>, beta: f64) -> Result<f64> {
    if view.nodes.is_empty() {
        return Err(FirmError::Domain("density of empty subset".into()));
    }
    if beta < 0.0 {
        return Err(FirmError::Domain("beta must be non-negative".into()));
    }
    let size = view.nodes.len() as f64;
    let mut per_layer: Vec<f64> = (0..graph.layer_count())
        .map(|l| {
            let csr = graph.layer(l as LayerId);
            let mut edges = 0u64;
            for u in view.nodes.iter() {
                for i in csr.range(u) {
                    if csr.nbrs[i] > u && view.admits_edge(csr.nbrs[i], csr.schema[i]) {
                        edges += 1;
                    }
                }
            }
            edges as f64 / size
        })
        .collect();
    per_layer.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut best = 0.0f64;
    for (j, d) in per_layer.iter().enumerate() {
        best = best.max(d * ((j + 1) as f64).powf(beta));
    }
    Ok(best)
}

/// Density guaranteed for any (k, λ)-FirmTruss:
/// ((k−1)/(2|L|)) · max_{0 ≤ ξ < λ} (λ−ξ)(ξ+1)^β.
pub fn density_lower_bound(k: u32, lambda: u16, layer_count: usize, beta: f64) -> Result<f64> {
    if lambda == 0 || lambda as usize > layer_count {
        return Err(FirmError::Domain(format!(
            "lambda {lambda} out of range 1..={layer_count}"
        )));
    }
    let mut best = 0.0f64;
    for xi in 0..lambda as u32 {
        let term = (lambda as u32 - xi) as f64 * ((xi + 1) as f64).powf(beta);
        best = best.max(term);
    }
    Ok((k as f64 - 1.0) / (2.0 * layer_count as f64) * best)
}

/// Diameter guaranteed for any connected (k, λ)-FirmTruss on n vertices:
/// ⌊T · ⌊(2n−2)/k⌋⌋ with T = 1 + 1/⌊|L|/(|L|−λ)⌋, and T = 1 when λ = |L|.
pub fn diameter_upper_bound(k: u32, lambda: u16, layer_count: usize, n: u64) -> Result<u64> {
    if lambda == 0 || lambda as usize > layer_count {
        return Err(FirmError::Domain(format!(
            "lambda {lambda} out of range 1..={layer_count}"
        )));
    }
    if k < 2 {
        return Err(FirmError::Domain("k must be at least 2".into()));
    }
    if n < 2 {
        return Ok(0);
    }
    let m = (2 * n - 2) / k as u64;
    if lambda as usize == layer_count {
        return Ok(m);
    }
    let t = layer_count as u64 / (layer_count as u64 - lambda as u64);
    Ok((t + 1) * m / t)
}

/// Minimum number of intra-layer edge removals that can disconnect a
/// connected (k, λ)-FirmTruss: λ(k−1).
pub fn edge_connectivity_bound(k: u32, lambda: u16) -> u64 {
    lambda as u64 * (k as u64 - 1)
}

/// Parameter of a generalized mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PValue {
    Finite(f64),
    PosInf,
    NegInf,
}

impl PValue {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inf" | "+inf" | "infinity" => Ok(PValue::PosInf),
            "-inf" | "-infinity" => Ok(PValue::NegInf),
            _ => s
                .parse::<f64>()
                .map(PValue::Finite)
                .map_err(|_| FirmError::Validation(format!("bad p value `{s}`"))),
        }
    }
}

impl std::fmt::Display for PValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PValue::Finite(p) => write!(f, "{p}"),
            PValue::PosInf => write!(f, "inf"),
            PValue::NegInf => write!(f, "-inf"),
        }
    }
}

/// Generalized p-mean of a finite set of values. Finite p ≤ 0 requires
/// strictly positive input.
pub fn generalized_mean(values: &[f64], p: PValue) -> Result<f64> {
    if values.is_empty() {
        return Err(FirmError::Domain("mean of empty set".into()));
    }
    match p {
        PValue::PosInf => Ok(values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        PValue::NegInf => Ok(values.iter().cloned().fold(f64::INFINITY, f64::min)),
        PValue::Finite(p) if p == 0.0 => {
            if values.iter().any(|v| *v <= 0.0) {
                return Err(FirmError::Domain(
                    "geometric mean requires positive values".into(),
                ));
            }
            let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
            Ok(log_mean.exp())
        }
        PValue::Finite(p) => {
            if p < 0.0 && values.iter().any(|v| *v <= 0.0) {
                return Err(FirmError::Domain(
                    "negative-p mean requires positive values".into(),
                ));
            }
            let mean = values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64;
            Ok(mean.powf(1.0 / p))
        }
    }
}

/// F1 alignment of a found community with a ground-truth community.
/// Empty or disjoint overlap gives 0 by convention.
pub fn f1_score<T: Eq + std::hash::Hash + Clone>(found: &[T], truth: &[T]) -> Result<f64> {
    if truth.is_empty() {
        return Err(FirmError::Domain("empty ground-truth community".into()));
    }
    if found.is_empty() {
        return Ok(0.0);
    }
    let truth_set: std::collections::HashSet<&T> = truth.iter().collect();
    let overlap = found.iter().filter(|x| truth_set.contains(x)).count() as f64;
    if overlap == 0.0 {
        return Ok(0.0);
    }
    let pre = overlap / found.len() as f64;
    let rec = overlap / truth.len() as f64;
    Ok(2.0 * pre * rec / (pre + rec))
}
