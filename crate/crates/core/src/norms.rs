//! The three prioritization norms and their audit primitives: fee-rate
//! selection, fee-rate in-block ordering, minimum fee-rate filtering, plus
//! CPFP detection and mempool-level violation-pair discovery.

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rustc_hash::FxHashSet;

use crate::model::{Block, Dataset, FeeRate, MempoolSnapshot, Transaction, Txid};

/// Fee-rate-predicted ordering of a block's eligible members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictedOrdering {
    pub block_height: u64,
    /// Non-CPFP members ranked by fee rate descending; equal fee rates keep
    /// their observed relative order.
    pub ranked_txids: Vec<Txid>,
    pub excluded_cpfp: BTreeSet<Txid>,
}

/// Transactions spending an output of another transaction committed in the
/// same block. Membership-based, so the result does not depend on the order
/// of `tx_order`. Every link of a transitive chain is flagged individually.
pub fn detect_cpfp(block: &Block, ds: &Dataset) -> BTreeSet<Txid> {
    let mut cpfp = BTreeSet::new();
    let mut members: Option<FxHashSet<&Txid>> = None;
    for txid in &block.tx_order {
        let Some(tx) = ds.tx(txid) else { continue };
        if tx.inputs.is_empty() {
            continue;
        }
        let members =
            members.get_or_insert_with(|| block.tx_order.iter().collect::<FxHashSet<_>>());
        if tx.inputs.iter().any(|i| members.contains(&i.txid)) {
            cpfp.insert(txid.clone());
        }
    }
    cpfp
}

/// Predicted in-block order under the fee-rate norm: CPFP transactions are
/// excluded, the rest sort by fee rate descending with ties broken by
/// observed position. A block already in norm order predicts as itself.
pub fn predicted_order(block: &Block, ds: &Dataset) -> PredictedOrdering {
    let excluded_cpfp = detect_cpfp(block, ds);
    let mut ranked: Vec<(Option<FeeRate>, &Txid)> = block
        .tx_order
        .iter()
        .filter(|t| !excluded_cpfp.contains(*t))
        .map(|t| (ds.tx(t).map(Transaction::fee_rate), t))
        .collect();
    // Stable sort keeps observed order among equal fee rates.
    ranked.sort_by_key(|(rate, _)| std::cmp::Reverse(*rate));
    PredictedOrdering {
        block_height: block.height,
        ranked_txids: ranked.into_iter().map(|(_, t)| t.clone()).collect(),
        excluded_cpfp,
    }
}

/// Splits transactions into (accepted, rejected) around a minimum fee-rate
/// threshold. The boundary is inclusive: a transaction at exactly the
/// threshold is accepted, matching the default relay policy.
pub fn min_feerate_filter<'a, I>(
    txs: I,
    threshold: FeeRate,
) -> (Vec<&'a Transaction>, Vec<&'a Transaction>)
where
    I: IntoIterator<Item = &'a Transaction>,
{
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for tx in txs {
        if tx.fee_rate() >= threshold {
            accepted.push(tx);
        } else {
            rejected.push(tx);
        }
    }
    (accepted, rejected)
}

/// One selection-norm violation: `earlier` arrived at least `epsilon`
/// seconds before `later` and offers the higher fee rate, yet was committed
/// in a later block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationPair {
    pub earlier_txid: Txid,
    pub later_txid: Txid,
    pub earlier_feerate: FeeRate,
    pub later_feerate: FeeRate,
    pub earlier_block: u64,
    pub later_block: u64,
}

/// Per-snapshot violation-pair scan result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationScan {
    pub snapshot_timestamp: i64,
    pub epsilon_s: u64,
    pub pairs: Vec<ViolationPair>,
    /// Ordered candidate pairs meeting the time-and-fee precondition.
    pub candidate_pairs: u64,
    /// Snapshot members skipped because they never committed or carry no
    /// arrival time.
    pub skipped: u64,
}

impl ViolationScan {
    /// Violating pairs over candidate pairs; zero when there are no
    /// candidates.
    pub fn violating_fraction(&self) -> Ratio<u64> {
        if self.candidate_pairs == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.pairs.len() as u64, self.candidate_pairs)
        }
    }
}

/// Finds all ordered pairs `(i, j)` among committed snapshot members with
/// `t_i + epsilon < t_j` and `f_i > f_j` but `b_i > b_j`. The candidate
/// count (denominator of the violating fraction) includes every ordered pair
/// meeting the time-and-fee precondition regardless of block order. With
/// `exclude_cpfp`, members that are CPFP relative to their committing blocks
/// are dropped before pairing.
pub fn find_violation_pairs(
    snapshot: &MempoolSnapshot,
    ds: &Dataset,
    epsilon_s: u64,
    exclude_cpfp: bool,
) -> ViolationScan {
    let mut cpfp_cache: HashMap<u64, BTreeSet<Txid>> = HashMap::new();
    let mut members: Vec<(i64, FeeRate, u64, &Txid)> = Vec::new();
    let mut skipped = 0u64;

    for txid in &snapshot.txids {
        let (Some(tx), Some(commit)) = (ds.tx(txid), ds.commit(txid)) else {
            skipped += 1;
            continue;
        };
        let Some(arrival) = tx.arrival_time else {
            skipped += 1;
            continue;
        };
        if exclude_cpfp {
            let block_cpfp = cpfp_cache.entry(commit.height).or_insert_with(|| {
                ds.block_at_height(commit.height)
                    .map(|b| detect_cpfp(b, ds))
                    .unwrap_or_default()
            });
            if block_cpfp.contains(txid) {
                continue;
            }
        }
        members.push((arrival, tx.fee_rate(), commit.height, txid));
    }

    members.sort_by(|a, b| (a.0, a.3).cmp(&(b.0, b.3)));

    let mut pairs = Vec::new();
    let mut candidate_pairs = 0u64;
    for (later_idx, later) in members.iter().enumerate() {
        for earlier in &members[..later_idx] {
            // Sorted by arrival, so the time precondition can only hold with
            // `earlier` in the prefix; equal arrivals never qualify.
            if (earlier.0 as i128) + (epsilon_s as i128) >= later.0 as i128 {
                continue;
            }
            if earlier.1 <= later.1 {
                continue;
            }
            candidate_pairs += 1;
            if earlier.2 > later.2 {
                pairs.push(ViolationPair {
                    earlier_txid: earlier.3.clone(),
                    later_txid: later.3.clone(),
                    earlier_feerate: earlier.1,
                    later_feerate: later.1,
                    earlier_block: earlier.2,
                    later_block: later.2,
                });
            }
        }
    }

    ViolationScan {
        snapshot_timestamp: snapshot.timestamp,
        epsilon_s,
        pairs,
        candidate_pairs,
        skipped,
    }
}
