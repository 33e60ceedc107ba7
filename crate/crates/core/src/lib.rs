//! Dense-structure extraction and community search over multilayer networks.
//!
//! A multilayer network keeps one node set and several edge layers. This crate
//! implements the FirmTruss and FirmCore structures (per-edge-schema triangle
//! support, per-node degree, both judged through their λ-th best layer), the
//! skyline decomposition indices built on them, minimum-diameter community
//! search with global/local/index-accelerated drivers, homophily-driven
//! community search on attributed graphs, the quality metrics and closed-form
//! structural bounds used to validate results, and deliberately naive
//! brute-force oracles for desk-scale verification.

#![forbid(unsafe_code)]

pub mod attributed;
pub mod bitset;
pub mod distance;
pub mod error;
pub mod firmcore;
pub mod firmtruss;
pub mod graph;
pub mod metrics;
pub mod oracle;
pub mod search;
pub mod skyline;
pub mod synth;

pub use bitset::BitSet;
pub use error::FirmError;
pub use graph::{AttributeTable, MultilayerGraph, VertexSubset};
pub use search::{Community, SearchParams, Strategy, Structure};

