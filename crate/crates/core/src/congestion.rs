//! Mempool congestion series, congestion-level binning, commit delays, and
//! miner fee-revenue share.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use thiserror::Error;

use crate::model::{Block, Dataset, FeeRate, Transaction};

/// Congestion levels, partitioning total unconfirmed vbytes into
/// right-closed intervals: <= 1 MB, (1, 2] MB, (2, 4] MB, > 4 MB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CongestionBin {
    None,
    Low,
    Medium,
    High,
}

impl CongestionBin {
    pub fn as_str(&self) -> &'static str {
        match self {
            CongestionBin::None => "none",
            CongestionBin::Low => "low",
            CongestionBin::Medium => "medium",
            CongestionBin::High => "high",
        }
    }

    pub const ALL: [CongestionBin; 4] =
        [CongestionBin::None, CongestionBin::Low, CongestionBin::Medium, CongestionBin::High];
}

impl fmt::Display for CongestionBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const MB: u64 = 1_000_000;

/// Maps a total mempool size in vbytes to its congestion bin. Boundaries
/// belong to the lower bin: exactly 1 MB is still "none", 2 MB "low",
/// 4 MB "medium".
pub fn congestion_bin(total_vbytes: u64) -> CongestionBin {
    if total_vbytes <= MB {
        CongestionBin::None
    } else if total_vbytes <= 2 * MB {
        CongestionBin::Low
    } else if total_vbytes <= 4 * MB {
        CongestionBin::Medium
    } else {
        CongestionBin::High
    }
}

/// One point of the mempool size series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotSize {
    pub timestamp: i64,
    pub total_vbytes: u64,
    pub tx_count: u64,
}

/// Per-snapshot sum of member vsizes and counts, time-ordered. Snapshot
/// members that do not resolve are ignored here (dataset validation reports
/// them).
pub fn mempool_size_series(ds: &Dataset) -> Vec<SnapshotSize> {
    ds.snapshots()
        .iter()
        .map(|snap| {
            let mut total = 0u64;
            let mut count = 0u64;
            for txid in &snap.txids {
                if let Some(tx) = ds.tx(txid) {
                    total += tx.vsize;
                    count += 1;
                }
            }
            SnapshotSize { timestamp: snap.timestamp, total_vbytes: total, tx_count: count }
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DelayError {
    #[error("transaction {0} has no arrival time")]
    NoArrivalTime(String),
}

/// Commit delay of a transaction, in blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delay {
    Committed {
        blocks: u64,
        /// Set when the raw count was zero (arrival after its own block's
        /// timestamp) and the delay was clamped up to 1.
        clamped: bool,
    },
    /// Not committed; counts blocks mined since arrival.
    Pending { blocks_elapsed: u64 },
}

/// Counts blocks with timestamp >= the transaction's arrival and height up
/// to (and including) the committing block. Inclusion in the next block
/// yields 1; a committed transaction never reports less than 1.
pub fn commit_delay(tx: &Transaction, ds: &Dataset) -> Result<Delay, DelayError> {
    let arrival = tx
        .arrival_time
        .ok_or_else(|| DelayError::NoArrivalTime(tx.txid.to_string()))?;
    let commit = ds.commit(&tx.txid);
    let mut count = 0u64;
    for block in ds.blocks() {
        if block.timestamp < arrival {
            continue;
        }
        match commit {
            Some(c) => {
                if block.height <= c.height {
                    count += 1;
                }
            }
            None => count += 1,
        }
    }
    Ok(match commit {
        Some(_) => Delay::Committed { blocks: count.max(1), clamped: count == 0 },
        None => Delay::Pending { blocks_elapsed: count },
    })
}

/// Bitcoin-style issuance schedule: `initial` satoshi halved every
/// `interval` blocks (floor shift).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsidySchedule {
    pub initial: u64,
    pub interval: u64,
}

impl Default for SubsidySchedule {
    fn default() -> Self {
        SubsidySchedule { initial: 50 * 100_000_000, interval: 210_000 }
    }
}

impl SubsidySchedule {
    pub fn subsidy(&self, height: u64) -> u64 {
        let halvings = height / self.interval;
        if halvings >= 64 {
            0
        } else {
            self.initial >> halvings
        }
    }
}

/// Share of a block's miner revenue coming from fees, as an exact rational
/// percentage: 100 * fees / (fees + subsidy). Zero when the block carries
/// no fees (and, degenerately, when both fees and subsidy are zero).
pub fn fee_revenue_share(block: &Block, ds: &Dataset, schedule: &SubsidySchedule) -> Ratio<u64> {
    let fees: u64 = block.tx_order.iter().filter_map(|t| ds.tx(t)).map(|t| t.fee).sum();
    let subsidy = schedule.subsidy(block.height);
    if fees == 0 {
        return Ratio::from_integer(0);
    }
    Ratio::new(100 * fees, fees + subsidy)
}

/// Nearest-rank quantile of a sorted slice: the ceil(q*n)-th element
/// (1-based), `q` in (0, 1].
fn nearest_rank<T: Copy>(sorted: &[T], q_num: usize, q_den: usize) -> T {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (n * q_num).div_ceil(q_den).max(1);
    sorted[rank - 1]
}

/// Fee-rate distribution summary for one congestion bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSummary {
    pub bin: CongestionBin,
    pub count: u64,
    pub q1: FeeRate,
    pub median: FeeRate,
    pub q3: FeeRate,
    pub mean: BigRational,
}

/// Fee rates of arriving transactions grouped by the congestion level in
/// effect at arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct FeerateByCongestion {
    pub bins: Vec<BinSummary>,
    /// Transactions without arrival time.
    pub excluded_no_arrival: u64,
    /// Transactions arriving before the first snapshot.
    pub excluded_no_snapshot: u64,
}

/// Assigns each transaction the congestion bin of the latest snapshot at or
/// before its arrival, then summarises fee rates per bin (nearest-rank
/// quartiles and exact mean). Unassignable transactions are excluded and
/// counted.
pub fn feerate_by_congestion(ds: &Dataset) -> FeerateByCongestion {
    let series = mempool_size_series(ds);
    let mut per_bin: BTreeMap<CongestionBin, Vec<FeeRate>> = BTreeMap::new();
    let mut excluded_no_arrival = 0u64;
    let mut excluded_no_snapshot = 0u64;

    for tx in ds.transactions() {
        let Some(arrival) = tx.arrival_time else {
            excluded_no_arrival += 1;
            continue;
        };
        // Latest snapshot at or before arrival.
        let idx = series.partition_point(|s| s.timestamp <= arrival);
        if idx == 0 {
            excluded_no_snapshot += 1;
            continue;
        }
        let bin = congestion_bin(series[idx - 1].total_vbytes);
        per_bin.entry(bin).or_default().push(tx.fee_rate());
    }

    let bins = per_bin
        .into_iter()
        .map(|(bin, mut rates)| {
            rates.sort();
            let mean = rates
                .iter()
                .map(|r| {
                    BigRational::new(BigInt::from(r.fee()), BigInt::from(r.vsize()))
                })
                .sum::<BigRational>()
                / BigRational::from_integer(BigInt::from(rates.len()));
            BinSummary {
                bin,
                count: rates.len() as u64,
                q1: nearest_rank(&rates, 1, 4),
                median: nearest_rank(&rates, 2, 4),
                q3: nearest_rank(&rates, 3, 4),
                mean,
            }
        })
        .collect();

    FeerateByCongestion { bins, excluded_no_arrival, excluded_no_snapshot }
}
