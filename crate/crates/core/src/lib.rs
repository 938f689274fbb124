//! Forensics toolkit for blockchain transaction ordering.
//!
//! Reconstructs the fee-rate prioritization norm, quantifies per-block and
//! per-miner ordering deviations (PPE/SPPE), statistically tests miners for
//! differential acceleration or deceleration of transaction cohorts,
//! classifies private-relay bundles, measures mempool congestion, and
//! generates deterministic synthetic ground-truth chains for validating
//! detection power.

pub mod bundles;
pub mod cohorts;
pub mod congestion;
pub mod io;
pub mod model;
pub mod norms;
pub mod position;
pub mod stats;
pub mod synth;

pub use model::{
    validate_dataset, Block, Dataset, FeeRate, MempoolSnapshot, MinerId, Transaction, Txid,
};
