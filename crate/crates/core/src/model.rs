//! Canonical data model: transactions, blocks, mempool snapshots, and the
//! dataset container shared by every analysis pass.
//!
//! Fees and output values are integers in satoshi; fee rates are exact
//! rationals (satoshi per virtual byte) so that ordering decisions never
//! depend on floating-point rounding.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use num_rational::Ratio;
use rustc_hash::{FxBuildHasher, FxHashMap};
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Transaction identifier, hex-encoded. Treated as an opaque key; shared
/// storage keeps the many cross-index clones cheap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Txid(Arc<str>);

impl Txid {
    pub fn new(id: impl AsRef<str>) -> Self {
        Txid(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Serialize for Txid {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Txid {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Txid(Arc::from(s.as_str())))
    }
}

impl fmt::Display for Txid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Txid {
    fn from(s: &str) -> Self {
        Txid(Arc::from(s))
    }
}

/// Mining-pool label. Blocks whose owner could not be attributed carry the
/// literal label `Unknown`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MinerId(String);

pub const UNKNOWN_MINER: &str = "Unknown";

impl MinerId {
    pub fn new(id: impl Into<String>) -> Self {
        MinerId(id.into())
    }

    pub fn unknown() -> Self {
        MinerId(UNKNOWN_MINER.to_owned())
    }

    pub fn is_unknown(&self) -> bool {
        self.0 == UNKNOWN_MINER
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MinerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MinerId {
    fn from(s: &str) -> Self {
        MinerId(s.to_owned())
    }
}

/// Wallet address; opaque string.
pub type Address = String;

/// Reference to a previous transaction output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OutPoint {
    pub txid: Txid,
    pub vout: u32,
}

// On the wire an outpoint is the two-element array `[txid, vout]`.
impl Serialize for OutPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.txid, self.vout).serialize(s)
    }
}

impl<'de> Deserialize<'de> for OutPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (txid, vout) = <(Txid, u32)>::deserialize(d)?;
        Ok(OutPoint { txid, vout })
    }
}

/// Transaction output: `(address, value in satoshi)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxOutput {
    pub address: Address,
    pub value: u64,
}

impl Serialize for TxOutput {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (&self.address, self.value).serialize(s)
    }
}

impl<'de> Deserialize<'de> for TxOutput {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (address, value) = <(Address, u64)>::deserialize(d)?;
        Ok(TxOutput { address, value })
    }
}

/// A fee-bearing transaction. `vsize` is in virtual bytes and must be >= 1
/// for all ordering math; datasets violating that are caught by
/// [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: Txid,
    pub vsize: u64,
    pub fee: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival_time: Option<i64>,
    #[serde(default)]
    pub inputs: Vec<OutPoint>,
    #[serde(default)]
    pub outputs: Vec<TxOutput>,
}

impl Transaction {
    /// Fee rate in satoshi per virtual byte, as an exact rational.
    ///
    /// Panics if `vsize` is zero; zero-vsize records are rejected by dataset
    /// validation before any metric runs.
    pub fn fee_rate(&self) -> FeeRate {
        FeeRate::new(self.fee, self.vsize)
    }
}

/// Exact rational fee rate in satoshi per virtual byte.
///
/// Comparison cross-multiplies in 128-bit, so `2/4` and `1/2` compare (and
/// hash via reduction) as equal without any rounding. The recommended
/// network minimum of 1 sat/vB equals 10^-5 BTC/kB.
#[derive(Debug, Clone, Copy)]
pub struct FeeRate {
    fee: u64,
    vsize: u64,
}

impl FeeRate {
    pub fn new(fee: u64, vsize: u64) -> Self {
        assert!(vsize >= 1, "fee rate requires vsize >= 1");
        FeeRate { fee, vsize }
    }

    pub fn from_sat_per_vb(rate: u64) -> Self {
        FeeRate { fee: rate, vsize: 1 }
    }

    /// Exact value as a reduced rational.
    pub fn as_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.fee, self.vsize)
    }

    pub fn as_f64(&self) -> f64 {
        self.fee as f64 / self.vsize as f64
    }

    pub fn fee(&self) -> u64 {
        self.fee
    }

    pub fn vsize(&self) -> u64 {
        self.vsize
    }
}

impl PartialEq for FeeRate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FeeRate {}

impl PartialOrd for FeeRate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FeeRate {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.fee as u128 * other.vsize as u128;
        let rhs = other.fee as u128 * self.vsize as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for FeeRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.as_ratio();
        if r.is_integer() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

/// Virtual size from BIP-141 weight units: one vbyte corresponds to four
/// weight units, rounded up.
pub fn vsize_from_weight(weight: u64) -> u64 {
    assert!(weight >= 1, "weight must be >= 1");
    weight.div_ceil(4)
}

pub const DEFAULT_MAX_BLOCK_VSIZE: u64 = 1_000_000;

fn default_max_vsize() -> u64 {
    DEFAULT_MAX_BLOCK_VSIZE
}

/// A mined block. `tx_order` lists issued transactions in their committed
/// order and never contains the coinbase; the coinbase reward addresses are
/// kept separately and feed miner-wallet extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub height: u64,
    pub block_hash: String,
    pub miner_id: MinerId,
    pub timestamp: i64,
    pub tx_order: Vec<Txid>,
    #[serde(default)]
    pub coinbase_addresses: Vec<Address>,
    #[serde(default = "default_max_vsize")]
    pub max_vsize: u64,
}

/// Timestamped set of unconfirmed transactions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MempoolSnapshot {
    pub timestamp: i64,
    pub txids: BTreeSet<Txid>,
}

/// Where a transaction was committed: block height plus 0-based position in
/// that block's `tx_order`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitRef {
    pub height: u64,
    pub position: usize,
}

/// Immutable dataset: txid-indexed transactions, height-ordered blocks,
/// time-ordered snapshots, plus derived lookup indices.
#[derive(Debug, Clone)]
pub struct Dataset {
    transactions: IndexMap<Txid, Transaction, FxBuildHasher>,
    blocks: Vec<Block>,
    snapshots: Vec<MempoolSnapshot>,
    commit_index: FxHashMap<Txid, CommitRef>,
    duplicate_txids: Vec<Txid>,
}

fn transactions_hint(blocks: &[Block]) -> usize {
    blocks.iter().map(|b| b.tx_order.len()).sum()
}

impl Dataset {
    /// Builds a dataset from raw parts. Blocks are ordered by height and
    /// snapshots by timestamp (both stably); duplicate transaction records
    /// keep their first occurrence and are remembered for validation.
    pub fn new(
        transactions: Vec<Transaction>,
        mut blocks: Vec<Block>,
        mut snapshots: Vec<MempoolSnapshot>,
    ) -> Self {
        let mut table =
            IndexMap::with_capacity_and_hasher(transactions.len(), FxBuildHasher);
        let mut duplicate_txids = Vec::new();
        for tx in transactions {
            if table.contains_key(&tx.txid) {
                duplicate_txids.push(tx.txid.clone());
            } else {
                table.insert(tx.txid.clone(), tx);
            }
        }
        blocks.sort_by_key(|b| b.height);
        snapshots.sort_by_key(|s| s.timestamp);

        let mut commit_index =
            FxHashMap::with_capacity_and_hasher(transactions_hint(&blocks), FxBuildHasher);
        for block in &blocks {
            for (position, txid) in block.tx_order.iter().enumerate() {
                commit_index.entry(txid.clone()).or_insert(CommitRef {
                    height: block.height,
                    position,
                });
            }
        }

        Dataset {
            transactions: table,
            blocks,
            snapshots,
            commit_index,
            duplicate_txids,
        }
    }

    pub fn tx(&self, txid: &Txid) -> Option<&Transaction> {
        self.transactions.get(txid)
    }

    pub fn transactions(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions.values()
    }

    pub fn tx_count(&self) -> usize {
        self.transactions.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block_at_height(&self, height: u64) -> Option<&Block> {
        self.blocks
            .binary_search_by_key(&height, |b| b.height)
            .ok()
            .map(|i| &self.blocks[i])
    }

    pub fn snapshots(&self) -> &[MempoolSnapshot] {
        &self.snapshots
    }

    /// Committing block of a transaction, if any.
    pub fn commit(&self, txid: &Txid) -> Option<CommitRef> {
        self.commit_index.get(txid).copied()
    }

    /// Resolves an input reference against intra-dataset output records.
    pub fn output(&self, outpoint: &OutPoint) -> Option<&TxOutput> {
        self.transactions
            .get(&outpoint.txid)
            .and_then(|tx| tx.outputs.get(outpoint.vout as usize))
    }

    pub fn duplicate_txids(&self) -> &[Txid] {
        &self.duplicate_txids
    }

    /// Decomposes the dataset for structural edits (blocks in height order,
    /// snapshots in time order); rebuild with [`Dataset::new`].
    pub fn into_parts(self) -> (Vec<Transaction>, Vec<Block>, Vec<MempoolSnapshot>) {
        (self.transactions.into_values().collect(), self.blocks, self.snapshots)
    }

    /// Transactions never committed in any block, in table order.
    pub fn pending(&self) -> impl Iterator<Item = &Transaction> {
        self.transactions
            .values()
            .filter(move |tx| !self.commit_index.contains_key(&tx.txid))
    }
}

/// Violation classes reported by [`validate_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    /// Block `tx_order` or an input reference names a txid absent from the dataset.
    DanglingTxid,
    /// Snapshot member absent from the dataset.
    SnapshotDanglingTxid,
    /// Two transaction records share a txid.
    DuplicateTxid,
    /// A txid appears twice inside one block's `tx_order`.
    DuplicateInBlock,
    /// A txid is committed by more than one block.
    MultipleCommit,
    /// Transaction with `vsize == 0`.
    ZeroVsize,
    /// Sum of member vsizes exceeds the block's `max_vsize`.
    BlockOverflow,
    /// Two blocks share a height.
    DuplicateHeight,
    /// Block timestamps decrease with height.
    NonMonotonicTimestamp,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::DanglingTxid => "dangling-txid",
            ViolationKind::SnapshotDanglingTxid => "snapshot-dangling-txid",
            ViolationKind::DuplicateTxid => "duplicate-txid",
            ViolationKind::DuplicateInBlock => "duplicate-in-block",
            ViolationKind::MultipleCommit => "multiple-commit",
            ViolationKind::ZeroVsize => "zero-vsize",
            ViolationKind::BlockOverflow => "block-overflow",
            ViolationKind::DuplicateHeight => "duplicate-height",
            ViolationKind::NonMonotonicTimestamp => "non-monotonic-timestamp",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub kind: ViolationKind,
    pub identifier: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.identifier)
    }
}

/// Deterministic validation report, ordered by `(kind, identifier)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every type invariant and referential-integrity rule; returns an
/// empty report iff the dataset is well-formed. Running it twice yields an
/// identical report.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut violations = Vec::new();

    for txid in ds.duplicate_txids() {
        violations.push(Violation {
            kind: ViolationKind::DuplicateTxid,
            identifier: txid.to_string(),
        });
    }

    for tx in ds.transactions() {
        if tx.vsize == 0 {
            violations.push(Violation {
                kind: ViolationKind::ZeroVsize,
                identifier: tx.txid.to_string(),
            });
        }
    }

    let mut committed: HashMap<&Txid, u64> = HashMap::new();
    for (i, block) in ds.blocks().iter().enumerate() {
        let mut seen = BTreeSet::new();
        let mut member_vsize: u128 = 0;
        for txid in &block.tx_order {
            if !seen.insert(txid) {
                violations.push(Violation {
                    kind: ViolationKind::DuplicateInBlock,
                    identifier: format!("block {} tx {}", block.height, txid),
                });
                continue;
            }
            match ds.tx(txid) {
                Some(tx) => member_vsize += tx.vsize as u128,
                None => violations.push(Violation {
                    kind: ViolationKind::DanglingTxid,
                    identifier: format!("block {} tx {}", block.height, txid),
                }),
            }
            match committed.get(txid) {
                Some(first) => violations.push(Violation {
                    kind: ViolationKind::MultipleCommit,
                    identifier: format!("tx {} in blocks {} and {}", txid, first, block.height),
                }),
                None => {
                    committed.insert(txid, block.height);
                }
            }
        }
        if member_vsize > block.max_vsize as u128 {
            violations.push(Violation {
                kind: ViolationKind::BlockOverflow,
                identifier: format!("block {}", block.height),
            });
        }
        if i > 0 {
            let prev = &ds.blocks()[i - 1];
            if prev.height == block.height {
                violations.push(Violation {
                    kind: ViolationKind::DuplicateHeight,
                    identifier: format!("height {}", block.height),
                });
            }
            if block.timestamp < prev.timestamp {
                violations.push(Violation {
                    kind: ViolationKind::NonMonotonicTimestamp,
                    identifier: format!("block {}", block.height),
                });
            }
        }
    }

    for snap in ds.snapshots() {
        for txid in &snap.txids {
            if ds.tx(txid).is_none() {
                violations.push(Violation {
                    kind: ViolationKind::SnapshotDanglingTxid,
                    identifier: format!("snapshot {} tx {}", snap.timestamp, txid),
                });
            }
        }
    }

    violations.sort();
    violations.dedup();
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tx(id: &str, vsize: u64, fee: u64) -> Transaction {
        Transaction {
            txid: Txid::from(id),
            vsize,
            fee,
            arrival_time: None,
            inputs: vec![],
            outputs: vec![],
        }
    }

    fn block(height: u64, txids: &[&str]) -> Block {
        Block {
            height,
            block_hash: format!("h{height}"),
            miner_id: MinerId::from("M"),
            timestamp: 1000 + height as i64,
            tx_order: txids.iter().map(|t| Txid::from(*t)).collect(),
            coinbase_addresses: vec![],
            max_vsize: DEFAULT_MAX_BLOCK_VSIZE,
        }
    }

    #[test]
    fn fee_rate_zero_fee() {
        assert_eq!(tx("a", 110, 0).fee_rate().as_ratio(), Ratio::new(0, 1));
    }

    #[test]
    fn fee_rate_recommended_minimum() {
        // 1 sat/vB is the recommended 10^-5 BTC/kB minimum.
        let r = tx("a", 110, 110).fee_rate();
        assert_eq!(r, FeeRate::from_sat_per_vb(1));
        // 1 sat/vB * 1000 vB/kB / 1e8 sat/BTC == 1e-5 BTC/kB.
        let btc_per_kb = r.as_ratio() * Ratio::new(1000u64, 100_000_000u64);
        assert_eq!(btc_per_kb, Ratio::new(1, 100_000));
    }

    #[test]
    fn fee_rate_exact_rational() {
        let r = tx("a", 225, 337).fee_rate();
        assert_eq!(r.as_ratio(), Ratio::new(337, 225));
        // Cross-multiplication oracle: 337/225 > 1 and < 2.
        assert!(r > FeeRate::from_sat_per_vb(1));
        assert!(r < FeeRate::from_sat_per_vb(2));
    }

    #[test]
    fn fee_rate_identity_holds() {
        // fee_rate * vsize == fee, exactly.
        for (fee, vsize) in [(0u64, 1u64), (337, 225), (110, 110), (7, 3), (u32::MAX as u64, 13)] {
            let r = FeeRate::new(fee, vsize).as_ratio();
            assert_eq!(r * Ratio::from_integer(vsize), Ratio::from_integer(fee));
        }
    }

    #[test]
    fn fee_rate_cross_denominator_equality() {
        assert_eq!(FeeRate::new(2, 4), FeeRate::new(1, 2));
        assert!(FeeRate::new(3, 4) > FeeRate::new(5, 8));
    }

    #[test]
    fn vsize_from_weight_examples() {
        assert_eq!(vsize_from_weight(4), 1);
        assert_eq!(vsize_from_weight(400), 100);
        assert_eq!(vsize_from_weight(401), 101);
    }

    #[test]
    #[allow(clippy::manual_div_ceil)] // the oracle must not share the impl's code path
    fn vsize_from_weight_matches_ceiling_oracle() {
        for w in 1..=1000u64 {
            let ceil = (w + 3) / 4;
            assert_eq!(vsize_from_weight(w), ceil, "weight {w}");
        }
    }

    #[test]
    fn validate_well_formed_dataset_is_clean() {
        let ds = Dataset::new(
            vec![tx("a", 100, 50), tx("b", 100, 10), tx("c", 150, 5)],
            vec![block(1, &["a"]), block(2, &["b", "c"])],
            vec![],
        );
        assert!(validate_dataset(&ds).is_empty());
    }

    #[test]
    fn validate_reports_dangling_txid() {
        let ds = Dataset::new(vec![tx("a", 100, 50)], vec![block(1, &["a", "ghost"])], vec![]);
        let report = validate_dataset(&ds);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::DanglingTxid);
        assert!(report.violations[0].identifier.contains("ghost"));
    }

    #[test]
    fn validate_reports_duplicate_txid() {
        let ds = Dataset::new(vec![tx("a", 100, 50), tx("a", 90, 40)], vec![], vec![]);
        let report = validate_dataset(&ds);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::DuplicateTxid);
    }

    #[test]
    fn validate_is_idempotent() {
        let ds = Dataset::new(
            vec![tx("a", 0, 50), tx("a", 3, 1)],
            vec![block(2, &["a", "a", "x"]), block(1, &["a"])],
            vec![MempoolSnapshot { timestamp: 0, txids: [Txid::from("y")].into() }],
        );
        let first = validate_dataset(&ds);
        let second = validate_dataset(&ds);
        assert_eq!(first, second);
        assert!(!first.is_empty());
    }

    #[test]
    fn blocks_sorted_and_commit_index_built() {
        let ds = Dataset::new(
            vec![tx("a", 100, 50), tx("b", 100, 10)],
            vec![block(7, &["b"]), block(3, &["a"])],
            vec![],
        );
        assert_eq!(ds.blocks()[0].height, 3);
        assert_eq!(ds.commit(&Txid::from("b")).unwrap().height, 7);
        assert_eq!(ds.commit(&Txid::from("a")).unwrap().position, 0);
        assert!(ds.commit(&Txid::from("z")).is_none());
    }
}
