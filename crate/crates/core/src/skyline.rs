//! Dominance order on (k, λ) index pairs and skyline reduction, shared by the
//! FirmTruss and FirmCore decompositions.

use serde::{Deserialize, Serialize};

/// One (k, λ) membership index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexPair {
    pub k: u32,
    pub lambda: u16,
}

impl IndexPair {
    pub fn new(k: u32, lambda: u16) -> Self {
        IndexPair { k, lambda }
    }
}

/// `a` dominates `b` when `a.k >= b.k` and `a.lambda >= b.lambda`.
pub fn dominates(a: IndexPair, b: IndexPair) -> bool {
    a.k >= b.k && a.lambda >= b.lambda
}

/// Reduces per-λ maxima to the skyline: pairwise non-dominated pairs, sorted
/// by λ ascending (k strictly descending). `per_lambda[i]` is the maximal k at
/// λ = i + 1, or `None` when no membership exists at that λ.
pub fn skyline_from_per_lambda(per_lambda: &[Option<u32>]) -> Vec<IndexPair> {
    let mut out: Vec<IndexPair> = Vec::new();
    let mut best_k: Option<u32> = None;
    for (i, k) in per_lambda.iter().enumerate().rev() {
        let Some(k) = *k else { continue };
        if best_k.map_or(true, |b| k > b) {
            out.push(IndexPair::new(k, (i + 1) as u16));
            best_k = Some(k);
        }
    }
    out.reverse();
    out
}

/// True when some pair in `skyline` dominates `probe`.
pub fn skyline_admits(skyline: &[IndexPair], probe: IndexPair) -> bool {
    skyline.iter().any(|&p| dominates(p, probe))
}

/// FNV-1a 64-bit hash, used for graph fingerprints and index file integrity.
pub struct Fnv64(u64);

impl Fnv64 {
    pub fn new() -> Self {
        Fnv64(0xcbf29ce484222325)
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x100000001b3);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}
