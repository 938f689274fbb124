//! Percentile-rank positions and the two deviation metrics: PPE (mean
//! absolute displacement per block) and SPPE (mean signed displacement per
//! cohort), plus threshold-based acceleration flagging.
//!
//! Ranks are exact rationals in [0, 100]; the x100 scaling lives in
//! [`percentile_rank`], so PPE/SPPE need no extra factor.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::Zero;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::model::{Block, Dataset, MinerId, Txid};
use crate::norms::predicted_order;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PositionError {
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("block {height} has no eligible transactions")]
    EmptyBlock { height: u64 },
    #[error("no cohort transactions committed by {miner}")]
    EmptyCohort { miner: MinerId },
}

/// Percentile rank of a 1-based position within `n` slots: `100*(i-1)/(n-1)`
/// for `n >= 2`, and 0 for a single-transaction block.
pub fn percentile_rank(index: usize, n: usize) -> Result<Rational64, PositionError> {
    if index == 0 || index > n {
        return Err(PositionError::IndexOutOfRange { index, n });
    }
    if n == 1 {
        return Ok(Rational64::zero());
    }
    Ok(Rational64::new(100 * (index as i64 - 1), n as i64 - 1))
}

/// Predicted and observed percentile ranks of one transaction within its
/// block's eligible (non-CPFP) members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionReport {
    pub txid: Txid,
    pub block_height: u64,
    pub predicted_rank: Rational64,
    pub observed_rank: Rational64,
}

impl PositionReport {
    /// Positive when the transaction sits higher in the block than its fee
    /// rate predicts (accelerated).
    pub fn signed_error(&self) -> Rational64 {
        self.predicted_rank - self.observed_rank
    }
}

/// Ranks every eligible member of a block under the observed order and the
/// fee-rate-predicted order. Reports come back in observed order.
pub fn block_position_reports(
    block: &Block,
    ds: &Dataset,
) -> Result<Vec<PositionReport>, PositionError> {
    let predicted = predicted_order(block, ds);
    let observed: Vec<&Txid> = block
        .tx_order
        .iter()
        .filter(|t| !predicted.excluded_cpfp.contains(*t))
        .collect();
    let n = observed.len();
    if n == 0 {
        return Err(PositionError::EmptyBlock { height: block.height });
    }
    debug_assert_eq!(predicted.ranked_txids.len(), n);

    let mut predicted_pos: FxHashMap<&Txid, usize> =
        FxHashMap::with_capacity_and_hasher(n, rustc_hash::FxBuildHasher);
    for (i, txid) in predicted.ranked_txids.iter().enumerate() {
        predicted_pos.insert(txid, i + 1);
    }

    let mut reports = Vec::with_capacity(n);
    for (i, txid) in observed.iter().enumerate() {
        let p = predicted_pos[*txid];
        reports.push(PositionReport {
            txid: (*txid).clone(),
            block_height: block.height,
            predicted_rank: percentile_rank(p, n)?,
            observed_rank: percentile_rank(i + 1, n)?,
        });
    }
    Ok(reports)
}

/// Position prediction error of a block: mean absolute rank displacement of
/// its eligible members, in [0, 100]. Zero iff the block follows the
/// fee-rate ordering norm (up to the tie-break convention).
pub fn ppe(block: &Block, ds: &Dataset) -> Result<Rational64, PositionError> {
    let reports = block_position_reports(block, ds)?;
    let sum: Rational64 = reports
        .iter()
        .map(|r| {
            let e = r.signed_error();
            if e < Rational64::zero() {
                -e
            } else {
                e
            }
        })
        .sum();
    Ok(sum / Rational64::from_integer(reports.len() as i64))
}

/// Signed position prediction error of a cohort within one miner's blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SppeResult {
    pub miner: MinerId,
    /// Cohort transactions committed in blocks mined by `miner`.
    pub n: usize,
    /// Mean signed error, in [-100, 100]; positive means accelerated.
    pub sppe: BigRational,
}

/// SPPE of a cohort relative to a miner: the mean, over cohort transactions
/// committed in that miner's blocks, of (predicted - observed) percentile
/// rank. Averaging is per-transaction, not per-block.
pub fn sppe(
    c_txids: &BTreeSet<Txid>,
    miner: &MinerId,
    ds: &Dataset,
) -> Result<SppeResult, PositionError> {
    let mut sum = BigRational::zero();
    let mut n = 0usize;
    for block in ds.blocks() {
        if block.miner_id != *miner {
            continue;
        }
        if !block.tx_order.iter().any(|t| c_txids.contains(t)) {
            continue;
        }
        let reports = match block_position_reports(block, ds) {
            Ok(r) => r,
            Err(PositionError::EmptyBlock { .. }) => continue,
            Err(e) => return Err(e),
        };
        for report in &reports {
            if c_txids.contains(&report.txid) {
                sum += rational64_to_big(report.signed_error());
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(PositionError::EmptyCohort { miner: miner.clone() });
    }
    Ok(SppeResult {
        miner: miner.clone(),
        n,
        sppe: sum / BigRational::from_integer(BigInt::from(n)),
    })
}

pub fn rational64_to_big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// A transaction whose signed error clears the acceleration threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceleratedTx {
    pub txid: Txid,
    pub block_height: u64,
    pub signed_error: Rational64,
}

/// Flags transactions with per-transaction signed error >= `threshold`
/// percent (default 99). Blocks with no eligible members are skipped.
/// Results come back ordered by (height, observed position).
pub fn flag_accelerated(ds: &Dataset, threshold: Rational64) -> Vec<AcceleratedTx> {
    let mut flagged = Vec::new();
    for block in ds.blocks() {
        let Ok(reports) = block_position_reports(block, ds) else {
            continue;
        };
        for report in reports {
            let e = report.signed_error();
            if e >= threshold {
                flagged.push(AcceleratedTx {
                    txid: report.txid,
                    block_height: report.block_height,
                    signed_error: e,
                });
            }
        }
    }
    flagged
}

pub const DEFAULT_SPPE_THRESHOLD: i64 = 99;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Block, OutPoint, Transaction, DEFAULT_MAX_BLOCK_VSIZE};
    use num_traits::{One, Signed, ToPrimitive};
    use proptest::prelude::*;

    fn tx(id: &str, fee: u64) -> Transaction {
        Transaction {
            txid: Txid::from(id),
            vsize: 100,
            fee,
            arrival_time: None,
            inputs: vec![],
            outputs: vec![],
        }
    }

    fn block(height: u64, miner: &str, txids: Vec<Txid>) -> Block {
        Block {
            height,
            block_hash: format!("h{height}"),
            miner_id: miner.into(),
            timestamp: 1000 + height as i64,
            tx_order: txids,
            coinbase_addresses: vec![],
            max_vsize: DEFAULT_MAX_BLOCK_VSIZE,
        }
    }

    /// Dataset with one block whose observed fee rates (sat/vB, vsize 100)
    /// are `fees` in observed order.
    fn single_block_ds(fees: &[u64]) -> Dataset {
        let txs: Vec<Transaction> =
            fees.iter().enumerate().map(|(i, f)| tx(&format!("t{i}"), f * 100)).collect();
        let order = txs.iter().map(|t| t.txid.clone()).collect();
        Dataset::new(txs, vec![block(1, "M", order)], vec![])
    }

    /// Brute-force oracle: predicted position by counting, ranks by linear
    /// interpolation, exact rational mean of |pred - obs|.
    fn ppe_oracle(fees: &[u64]) -> Rational64 {
        let n = fees.len() as i64;
        assert!(n >= 1);
        let mut total = Rational64::zero();
        for (i, f) in fees.iter().enumerate() {
            let mut pred = 1usize;
            for (j, g) in fees.iter().enumerate() {
                if g > f || (g == f && j < i) {
                    pred += 1;
                }
            }
            let rank = |pos: usize| -> Rational64 {
                if n == 1 {
                    Rational64::zero()
                } else {
                    Rational64::new(100 * (pos as i64 - 1), n - 1)
                }
            };
            total += (rank(pred) - rank(i + 1)).abs();
        }
        total / Rational64::from_integer(n)
    }

    #[test]
    fn percentile_rank_top_is_zero() {
        for n in [1usize, 2, 5, 100] {
            assert_eq!(percentile_rank(1, n).unwrap(), Rational64::zero());
        }
    }

    #[test]
    fn percentile_rank_bottom_is_hundred() {
        for n in [2usize, 3, 17] {
            assert_eq!(percentile_rank(n, n).unwrap(), Rational64::from_integer(100));
        }
    }

    #[test]
    fn percentile_rank_midpoint() {
        assert_eq!(percentile_rank(3, 5).unwrap(), Rational64::from_integer(50));
        // Linear-interpolation oracle over a few cases.
        for n in 2usize..=9 {
            for i in 1..=n {
                let expect = 100.0 * (i as f64 - 1.0) / (n as f64 - 1.0);
                let got = percentile_rank(i, n).unwrap().to_f64().unwrap();
                assert!((got - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn percentile_rank_rejects_out_of_range() {
        assert!(percentile_rank(0, 5).is_err());
        assert!(percentile_rank(6, 5).is_err());
    }

    #[test]
    fn ppe_zero_for_norm_ordered_blocks() {
        for fees in [&[9u64, 5, 1][..], &[10, 10, 10], &[100], &[8, 8, 3, 2, 2]] {
            let ds = single_block_ds(fees);
            assert_eq!(ppe(&ds.blocks()[0], &ds).unwrap(), Rational64::zero(), "{fees:?}");
        }
    }

    #[test]
    fn ppe_two_ascending_is_hundred() {
        let ds = single_block_ds(&[1, 9]);
        assert_eq!(ppe(&ds.blocks()[0], &ds).unwrap(), Rational64::from_integer(100));
    }

    #[test]
    fn ppe_four_reversed_is_two_hundred_thirds() {
        let ds = single_block_ds(&[1, 2, 3, 4]);
        let got = ppe(&ds.blocks()[0], &ds).unwrap();
        assert_eq!(got, Rational64::new(200, 3));
        assert_eq!(got, ppe_oracle(&[1, 2, 3, 4]));
    }

    #[test]
    fn ppe_empty_block_signals() {
        let ds = Dataset::new(vec![tx("p", 100)], vec![block(2, "M", vec![])], vec![]);
        assert_eq!(
            ppe(&ds.blocks()[0], &ds).unwrap_err(),
            PositionError::EmptyBlock { height: 2 }
        );
    }

    #[test]
    fn cpfp_members_are_outside_the_rank_universe() {
        // Observed rates 9, 2 (cpfp child of t0), 5: ranks over {9, 5} only.
        let mut child = tx("c", 200);
        child.inputs.push(OutPoint { txid: Txid::from("a"), vout: 0 });
        let ds = Dataset::new(
            vec![tx("a", 900), child, tx("b", 500)],
            vec![block(1, "M", vec![Txid::from("a"), Txid::from("c"), Txid::from("b")])],
            vec![],
        );
        let reports = block_position_reports(&ds.blocks()[0], &ds).unwrap();
        assert_eq!(reports.len(), 2);
        assert!(reports.iter().all(|r| r.txid != Txid::from("c")));
        assert_eq!(ppe(&ds.blocks()[0], &ds).unwrap(), Rational64::zero());
    }

    #[test]
    fn ppe_matches_oracle_exhaustively_up_to_five() {
        // All permutations of distinct fee rates for sizes 2..=5.
        fn permutations(items: &[u64]) -> Vec<Vec<u64>> {
            if items.len() <= 1 {
                return vec![items.to_vec()];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.to_vec();
                let head = rest.remove(i);
                for mut tail in permutations(&rest) {
                    tail.insert(0, head);
                    out.push(tail);
                }
            }
            out
        }
        for n in 2..=5u64 {
            let base: Vec<u64> = (1..=n).map(|i| i * 10).collect();
            for perm in permutations(&base) {
                let ds = single_block_ds(&perm);
                assert_eq!(ppe(&ds.blocks()[0], &ds).unwrap(), ppe_oracle(&perm), "{perm:?}");
            }
        }
    }

    #[test]
    fn sppe_single_tx_swapped_extremes_is_plus_hundred() {
        // Observed first but lowest fee rate: predicted bottom, observed top.
        let ds = single_block_ds(&[1, 7, 9]);
        let cohort: BTreeSet<Txid> = [Txid::from("t0")].into();
        let r = sppe(&cohort, &"M".into(), &ds).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.sppe, BigRational::from_integer(100.into()));
    }

    #[test]
    fn sppe_zero_when_cohort_at_predicted_positions() {
        let ds = single_block_ds(&[9, 7, 1]);
        let cohort: BTreeSet<Txid> = [Txid::from("t0"), Txid::from("t2")].into();
        let r = sppe(&cohort, &"M".into(), &ds).unwrap();
        assert_eq!(r.n, 2);
        assert!(r.sppe.is_zero());
    }

    #[test]
    fn sppe_three_of_five_matches_brute_force() {
        let fees = [3u64, 9, 1, 7, 5];
        let ds = single_block_ds(&fees);
        let cohort: BTreeSet<Txid> =
            [Txid::from("t0"), Txid::from("t2"), Txid::from("t4")].into();
        let r = sppe(&cohort, &"M".into(), &ds).unwrap();

        // Exhaustive oracle over the block's rank table.
        let reports = block_position_reports(&ds.blocks()[0], &ds).unwrap();
        let mut sum = BigRational::zero();
        let mut n = 0;
        for rep in &reports {
            if cohort.contains(&rep.txid) {
                sum += rational64_to_big(rep.predicted_rank - rep.observed_rank);
                n += 1;
            }
        }
        assert_eq!(r.n, n);
        assert_eq!(r.sppe, sum / BigRational::from_integer(n.into()));
    }

    #[test]
    fn sppe_empty_cohort_signals() {
        let ds = single_block_ds(&[5, 4]);
        let cohort: BTreeSet<Txid> = [Txid::from("nope")].into();
        assert!(matches!(
            sppe(&cohort, &"M".into(), &ds),
            Err(PositionError::EmptyCohort { .. })
        ));
    }

    #[test]
    fn sppe_is_mean_of_per_tx_signed_errors() {
        let fees = [2u64, 8, 6, 4];
        let ds = single_block_ds(&fees);
        let cohort: BTreeSet<Txid> = (0..4).map(|i| Txid::from(format!("t{i}").as_str())).collect();
        let r = sppe(&cohort, &"M".into(), &ds).unwrap();
        let reports = block_position_reports(&ds.blocks()[0], &ds).unwrap();
        let mean: BigRational = reports
            .iter()
            .map(|rep| rational64_to_big(rep.signed_error()))
            .sum::<BigRational>()
            / BigRational::from_integer(4.into());
        assert_eq!(r.sppe, mean);
    }

    #[test]
    fn flag_accelerated_empty_on_norm_ordered_dataset() {
        let ds = single_block_ds(&[9, 5, 1]);
        assert!(flag_accelerated(&ds, Rational64::from_integer(99)).is_empty());
    }

    #[test]
    fn flag_accelerated_catches_forced_low_fee_tx() {
        // One low-fee tx forced to position 1 of 200.
        let mut fees: Vec<u64> = vec![1];
        fees.extend((0..199).map(|i| 1000 - i));
        let ds = single_block_ds(&fees);
        let flagged = flag_accelerated(&ds, Rational64::from_integer(99));
        assert_eq!(flagged.len(), 1);
        assert_eq!(flagged[0].txid, Txid::from("t0"));
        assert_eq!(flagged[0].signed_error, Rational64::from_integer(100));
    }

    #[test]
    fn flag_thresholds_are_nested() {
        let fees = [2u64, 100, 99, 98, 1, 50, 97];
        let ds = single_block_ds(&fees);
        let thresholds = [100i64, 99, 90, 50, 1];
        let mut last: Option<usize> = None;
        for t in thresholds {
            let flags = flag_accelerated(&ds, Rational64::from_integer(t));
            if let Some(prev) = last {
                assert!(flags.len() >= prev, "threshold {t}");
            }
            // Higher thresholds flag a subset of lower ones.
            let lower = flag_accelerated(&ds, Rational64::from_integer(t - 1));
            let set: BTreeSet<&Txid> = lower.iter().map(|f| &f.txid).collect();
            assert!(flags.iter().all(|f| set.contains(&f.txid)));
            last = Some(flags.len());
        }
    }

    proptest! {
        #[test]
        fn ppe_invariant_under_uniform_fee_scaling(
            fees in proptest::collection::vec(1u64..1000, 2..12),
            scale in 1u64..1000,
        ) {
            let ds = single_block_ds(&fees);
            let scaled: Vec<u64> = fees.iter().map(|f| f * scale).collect();
            let ds2 = single_block_ds(&scaled);
            prop_assert_eq!(
                ppe(&ds.blocks()[0], &ds).unwrap(),
                ppe(&ds2.blocks()[0], &ds2).unwrap()
            );
        }

        #[test]
        fn ppe_zero_iff_non_increasing(fees in proptest::collection::vec(1u64..50, 2..10)) {
            let ds = single_block_ds(&fees);
            let value = ppe(&ds.blocks()[0], &ds).unwrap();
            let sorted = fees.windows(2).all(|w| w[0] >= w[1]);
            prop_assert_eq!(value == Rational64::zero(), sorted);
        }

        #[test]
        fn ppe_matches_oracle_random(fees in proptest::collection::vec(1u64..1000, 1..14)) {
            let ds = single_block_ds(&fees);
            prop_assert_eq!(ppe(&ds.blocks()[0], &ds).unwrap(), ppe_oracle(&fees));
        }
    }

    #[test]
    fn rational_bridge_preserves_value() {
        assert_eq!(rational64_to_big(Rational64::one()), BigRational::one());
        assert_eq!(
            rational64_to_big(Rational64::new(-200, 3)),
            BigRational::new((-200).into(), 3.into())
        );
    }
}
