//! Private-relay bundle analysis: effective bundle priority fee and the
//! size-2 / size-3 public-transaction-capture heuristics.
//!
//! Amounts are wei (u128); gas in gas units. The effective fee is total
//! miner reward per unit gas: (sum of gas_i * tip_i + sum of coinbase
//! transfers) / total gas, as an exact rational in wei per gas.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io::{read_jsonl, IngestError};

pub const WEI_PER_GWEI: u128 = 1_000_000_000;

/// One transaction inside a bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleTx {
    pub tx_hash: String,
    pub issuer: String,
    pub gas_used: u64,
    pub max_priority_fee_per_gas: u128,
    pub coinbase_transfer: u128,
    /// 1-based position within the bundle.
    pub position_in_bundle: usize,
}

/// Relay-assigned bundle category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BundleCategory {
    Flashbots,
    Rogue,
    MinerPayout,
    Unknown,
}

impl BundleCategory {
    /// Case-insensitive ingest; canonical lowercase out.
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flashbots" => Some(BundleCategory::Flashbots),
            "rogue" => Some(BundleCategory::Rogue),
            "miner-payout" | "miner payout" | "miner_payout" => Some(BundleCategory::MinerPayout),
            "unknown" => Some(BundleCategory::Unknown),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BundleCategory::Flashbots => "flashbots",
            BundleCategory::Rogue => "rogue",
            BundleCategory::MinerPayout => "miner-payout",
            BundleCategory::Unknown => "unknown",
        }
    }
}

impl fmt::Display for BundleCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered private-relay transaction group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleRecord {
    pub block_number: u64,
    pub bundle_index: u64,
    pub txs: Vec<BundleTx>,
    pub category: BundleCategory,
}

impl BundleRecord {
    pub fn size(&self) -> usize {
        self.txs.len()
    }

    pub fn total_gas(&self) -> u128 {
        self.txs.iter().map(|t| t.gas_used as u128).sum()
    }
}

/// Heuristic classification outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BundlePattern {
    /// Size-2: a public transaction captured by a private payer.
    PublicCapture2,
    /// Size-3: sandwich shape around a public victim.
    Sandwich3,
    None,
}

impl BundlePattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            BundlePattern::PublicCapture2 => "public-capture-2",
            BundlePattern::Sandwich3 => "sandwich-3",
            BundlePattern::None => "none",
        }
    }
}

impl fmt::Display for BundlePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleClassification {
    pub pattern: BundlePattern,
    /// 1-based positions of the members inferred to be public transactions.
    pub public_tx_positions: Vec<usize>,
}

impl BundleClassification {
    fn none() -> Self {
        BundleClassification { pattern: BundlePattern::None, public_tx_positions: vec![] }
    }
}

/// Total miner reward per unit gas for a bundle, wei per gas:
/// (sum gas_i * tip_i + sum transfers) / sum gas_i.
pub fn bundle_effective_priority_fee(b: &BundleRecord) -> Ratio<u128> {
    let gas = b.total_gas();
    assert!(gas >= 1, "bundle without gas");
    let reward: u128 = b
        .txs
        .iter()
        .map(|t| t.gas_used as u128 * t.max_priority_fee_per_gas + t.coinbase_transfer)
        .sum();
    Ratio::new(reward, gas)
}

/// Size-2 heuristic: issuers differ, the first transaction offers a non-zero
/// max-priority fee with no coinbase transfer, and the second offers a zero
/// max-priority fee with a non-zero coinbase transfer. The first transaction
/// is the captured public one.
pub fn classify_bundle2(b: &BundleRecord) -> BundleClassification {
    if b.size() != 2 {
        return BundleClassification::none();
    }
    let (t1, t2) = (&b.txs[0], &b.txs[1]);
    let matches = t1.issuer != t2.issuer
        && t1.max_priority_fee_per_gas != 0
        && t1.coinbase_transfer == 0
        && t2.max_priority_fee_per_gas == 0
        && t2.coinbase_transfer != 0;
    if matches {
        BundleClassification {
            pattern: BundlePattern::PublicCapture2,
            public_tx_positions: vec![1],
        }
    } else {
        BundleClassification::none()
    }
}

/// Size-3 sandwich heuristic: first and last transactions share an issuer
/// distinct from the middle one, the outer pair offers zero max-priority
/// fees, the middle offers a non-zero max-priority fee, and the third pays
/// the miner through a non-zero coinbase transfer. The middle transaction is
/// the public one.
pub fn classify_bundle3(b: &BundleRecord) -> BundleClassification {
    if b.size() != 3 {
        return BundleClassification::none();
    }
    let (t1, t2, t3) = (&b.txs[0], &b.txs[1], &b.txs[2]);
    let matches = t1.issuer == t3.issuer
        && t1.issuer != t2.issuer
        && t1.max_priority_fee_per_gas == 0
        && t3.max_priority_fee_per_gas == 0
        && t2.max_priority_fee_per_gas != 0
        && t3.coinbase_transfer != 0;
    if matches {
        BundleClassification { pattern: BundlePattern::Sandwich3, public_tx_positions: vec![2] }
    } else {
        BundleClassification::none()
    }
}

/// Runs the size-appropriate heuristic.
pub fn classify_bundle(b: &BundleRecord) -> BundleClassification {
    match b.size() {
        2 => classify_bundle2(b),
        3 => classify_bundle3(b),
        _ => BundleClassification::none(),
    }
}

/// Deterministic corpus aggregates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleStats {
    pub total_bundles: u64,
    pub total_txs: u64,
    pub by_category: BTreeMap<BundleCategory, u64>,
    pub size_min: u64,
    pub size_max: u64,
    pub mean_size: Ratio<u64>,
    pub size2_bundles: u64,
    pub size2_matched: u64,
    pub size3_bundles: u64,
    pub size3_matched: u64,
    pub bundles_per_block: BTreeMap<u64, u64>,
}

impl BundleStats {
    pub fn size2_matched_fraction(&self) -> Ratio<u64> {
        fraction(self.size2_matched, self.size2_bundles)
    }

    pub fn size3_matched_fraction(&self) -> Ratio<u64> {
        fraction(self.size3_matched, self.size3_bundles)
    }
}

fn fraction(num: u64, den: u64) -> Ratio<u64> {
    if den == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(num, den)
    }
}

/// Summarises a bundle corpus: per-category counts, size distribution,
/// heuristic match rates, per-block bundle counts.
pub fn bundle_stats(bundles: &[BundleRecord]) -> BundleStats {
    let mut by_category = BTreeMap::new();
    let mut bundles_per_block = BTreeMap::new();
    let mut total_txs = 0u64;
    let mut size_min = u64::MAX;
    let mut size_max = 0u64;
    let (mut s2, mut s2m, mut s3, mut s3m) = (0u64, 0u64, 0u64, 0u64);
    for b in bundles {
        let size = b.size() as u64;
        total_txs += size;
        size_min = size_min.min(size);
        size_max = size_max.max(size);
        *by_category.entry(b.category).or_insert(0) += 1;
        *bundles_per_block.entry(b.block_number).or_insert(0) += 1;
        match b.size() {
            2 => {
                s2 += 1;
                if classify_bundle2(b).pattern == BundlePattern::PublicCapture2 {
                    s2m += 1;
                }
            }
            3 => {
                s3 += 1;
                if classify_bundle3(b).pattern == BundlePattern::Sandwich3 {
                    s3m += 1;
                }
            }
            _ => {}
        }
    }
    BundleStats {
        total_bundles: bundles.len() as u64,
        total_txs,
        by_category,
        size_min: if bundles.is_empty() { 0 } else { size_min },
        size_max,
        mean_size: fraction(total_txs, bundles.len() as u64),
        size2_bundles: s2,
        size2_matched: s2m,
        size3_bundles: s3,
        size3_matched: s3m,
        bundles_per_block,
    }
}

/// Wire row of the bundle ingest file: one transaction per line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleTxRow {
    pub block_number: u64,
    pub bundle_index: u64,
    pub position_in_bundle: usize,
    pub tx_hash: String,
    pub issuer: String,
    pub gas_used: u64,
    pub max_priority_fee_per_gas_wei: u128,
    pub coinbase_transfer_wei: u128,
    pub category: String,
}

#[derive(Debug, Error)]
pub enum BundleIngestError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("bundle {block}/{index}: {message}")]
    Malformed { block: u64, index: u64, message: String },
}

/// Loads a bundle JSONL file and groups rows into ordered bundle records.
/// Positions must be contiguous from 1 and gas must be positive.
pub fn read_bundles(path: &Path) -> Result<Vec<BundleRecord>, BundleIngestError> {
    let rows: Vec<BundleTxRow> = read_jsonl(path)?;
    group_bundles(rows)
}

pub fn group_bundles(rows: Vec<BundleTxRow>) -> Result<Vec<BundleRecord>, BundleIngestError> {
    let mut grouped: BTreeMap<(u64, u64), Vec<BundleTxRow>> = BTreeMap::new();
    for row in rows {
        grouped.entry((row.block_number, row.bundle_index)).or_default().push(row);
    }
    let mut bundles = Vec::with_capacity(grouped.len());
    for ((block, index), mut rows) in grouped {
        rows.sort_by_key(|r| r.position_in_bundle);
        let malformed = |message: String| BundleIngestError::Malformed { block, index, message };
        let category = BundleCategory::parse(&rows[0].category)
            .ok_or_else(|| malformed(format!("unrecognised category {:?}", rows[0].category)))?;
        let mut txs = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.position_in_bundle != i + 1 {
                return Err(malformed(format!(
                    "positions not contiguous: expected {} found {}",
                    i + 1,
                    row.position_in_bundle
                )));
            }
            if row.gas_used == 0 {
                return Err(malformed(format!("tx {} has zero gas", row.tx_hash)));
            }
            txs.push(BundleTx {
                tx_hash: row.tx_hash,
                issuer: row.issuer,
                gas_used: row.gas_used,
                max_priority_fee_per_gas: row.max_priority_fee_per_gas_wei,
                coinbase_transfer: row.coinbase_transfer_wei,
                position_in_bundle: row.position_in_bundle,
            });
        }
        bundles.push(BundleRecord { block_number: block, bundle_index: index, txs, category });
    }
    Ok(bundles)
}
