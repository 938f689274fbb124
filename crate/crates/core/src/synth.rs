//! Deterministic synthetic chain generator.
//!
//! Produces ground-truth datasets in which every miner follows the three
//! prioritization norms by construction (greedy fee-rate selection up to
//! capacity, fee-rate-descending order within blocks, sub-threshold fee
//! rates never mined), and then injects accelerated cohorts: low-fee pending
//! transactions forced to the top of the next block mined by a chosen miner
//! set. All randomness flows from a ChaCha12 stream seeded with the config
//! seed, and sampled values are quantized to integers immediately, so a
//! (config, seed) pair fully determines the output bytes.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::io::GroundTruthRecord;
use crate::model::{
    Address, Block, Dataset, FeeRate, MempoolSnapshot, MinerId, Transaction, TxOutput, Txid,
};

/// Smallest generated transaction vsize; the miner loop stops scanning once
/// remaining capacity falls below it.
pub const MIN_TX_VSIZE: u64 = 60;
const MAX_TX_VSIZE: u64 = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("miner hash shares must sum to 1 (got {0})")]
    SharesNotNormalized(String),
    #[error("config field {0} must be positive")]
    NonPositive(&'static str),
    #[error("accelerating miner {0} is not part of the configured miner set")]
    UnknownMiner(MinerId),
}

/// Generation parameters. Fee rates are log-normal in sat/vB; arrivals are
/// Poisson per block interval.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub miners: Vec<(MinerId, Ratio<u64>)>,
    pub n_blocks: u64,
    pub block_capacity: u64,
    /// Mean transactions arriving per block interval.
    pub tx_arrival_rate: f64,
    /// ln-space location of the fee-rate distribution (ln sat/vB).
    pub feerate_ln_mu: f64,
    pub feerate_ln_sigma: f64,
    /// Norm-III relay threshold; transactions below it are never mined.
    pub min_feerate: FeeRate,
    pub start_height: u64,
    pub start_time: i64,
    pub block_interval_s: i64,
    /// Emit a mempool snapshot before every k-th block; `None` disables
    /// snapshots.
    pub snapshot_every: Option<u64>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(miners: Vec<(MinerId, Ratio<u64>)>, n_blocks: u64, seed: u64) -> Self {
        SynthConfig {
            miners,
            n_blocks,
            block_capacity: 1_000_000,
            tx_arrival_rate: 100.0,
            feerate_ln_mu: (20.0f64).ln(),
            feerate_ln_sigma: 1.2,
            min_feerate: FeeRate::from_sat_per_vb(1),
            start_height: 650_000,
            start_time: 1_600_000_000,
            block_interval_s: 600,
            snapshot_every: Some(10),
            seed,
        }
    }

    pub fn single_miner(n_blocks: u64, seed: u64) -> Self {
        SynthConfig::new(vec![(MinerId::from("M0"), Ratio::new(1, 1))], n_blocks, seed)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let total: Ratio<u64> = self.miners.iter().map(|(_, s)| *s).sum();
        if self.miners.is_empty() || total != Ratio::new(1, 1) {
            return Err(SynthError::SharesNotNormalized(format!("{total}")));
        }
        if self.n_blocks == 0 {
            return Err(SynthError::NonPositive("n_blocks"));
        }
        if self.block_capacity == 0 {
            return Err(SynthError::NonPositive("block_capacity"));
        }
        if self.tx_arrival_rate.is_nan() || self.tx_arrival_rate <= 0.0 {
            return Err(SynthError::NonPositive("tx_arrival_rate"));
        }
        if self.feerate_ln_sigma.is_nan() || self.feerate_ln_sigma <= 0.0 {
            return Err(SynthError::NonPositive("feerate_ln_sigma"));
        }
        if self.block_interval_s <= 0 {
            return Err(SynthError::NonPositive("block_interval_s"));
        }
        Ok(())
    }
}

/// Which transactions were accelerated, and by whom.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    /// Accelerated txid -> miner of the block it was forced into.
    pub accelerated: BTreeMap<Txid, MinerId>,
    pub accelerating_miners: BTreeSet<MinerId>,
}

impl GroundTruth {
    pub fn accelerated_txids(&self) -> BTreeSet<Txid> {
        self.accelerated.keys().cloned().collect()
    }

    pub fn records(&self) -> Vec<GroundTruthRecord> {
        self.accelerated
            .iter()
            .map(|(txid, miner)| GroundTruthRecord {
                txid: txid.clone(),
                accelerating_miner: miner.clone(),
            })
            .collect()
    }
}

/// Mempool ordering key: fee rate descending, then arrival sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PoolKey {
    fee: u64,
    vsize: u64,
    seq: u64,
}

impl Ord for PoolKey {
    fn cmp(&self, other: &Self) -> Ordering {
        let ours = self.fee as u128 * other.vsize as u128;
        let theirs = other.fee as u128 * self.vsize as u128;
        theirs.cmp(&ours).then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for PoolKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn wallet_address(miner: &MinerId) -> Address {
    format!("w-{miner}")
}

/// 32-hex-char synthetic txid from (stream, sequence); unique by
/// construction.
fn hex_id(hi: u64, lo: u64) -> Txid {
    const HEX: &[u8; 16] = b"0123456789abcdef";
    let mut buf = [0u8; 32];
    for i in 0..16 {
        buf[15 - i] = HEX[((hi >> (4 * i)) & 0xf) as usize];
        buf[31 - i] = HEX[((lo >> (4 * i)) & 0xf) as usize];
    }
    Txid::new(std::str::from_utf8(&buf).expect("hex is ascii"))
}

/// Generates a norm-following chain. Blocks are assigned to miners i.i.d.
/// by hash share (sampled with exact integer weights), transactions arrive
/// by a Poisson process with log-normal fee rates, and each block greedily
/// packs the highest-fee-rate pending transactions up to capacity. Every
/// generated block therefore has PPE = 0.
pub fn generate(cfg: &SynthConfig) -> Result<(Dataset, GroundTruth), SynthError> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let poisson = Poisson::new(cfg.tx_arrival_rate).expect("validated rate");
    let feerate_dist =
        LogNormal::new(cfg.feerate_ln_mu, cfg.feerate_ln_sigma).expect("validated sigma");
    let vsize_dist = Normal::new((250.0f64).ln(), 0.5).expect("constant params");

    // Exact integer miner weights over a common denominator.
    let denom = cfg.miners.iter().fold(1u64, |acc, (_, s)| {
        num_integer::lcm(acc, *s.denom())
    });
    let weights: Vec<(MinerId, u64)> = cfg
        .miners
        .iter()
        .map(|(m, s)| (m.clone(), s.numer() * (denom / s.denom())))
        .collect();

    let mut transactions = Vec::new();
    let mut blocks = Vec::new();
    let mut snapshots = Vec::new();
    let mut pool: BTreeMap<PoolKey, Txid> = BTreeMap::new();
    let mut seq = 0u64;

    // Recipient address pool; indices are drawn per transaction.
    let addresses: Vec<Address> =
        (0..1024).map(|_| format!("u{:08x}", rng.gen::<u32>())).collect();

    for i in 0..cfg.n_blocks {
        let interval_start = cfg.start_time + i as i64 * cfg.block_interval_s;
        let block_time = interval_start + cfg.block_interval_s;

        // Arrivals for this interval.
        let arrivals = poisson.sample(&mut rng).round() as u64;
        for _ in 0..arrivals {
            let offset = rng.gen_range(0..cfg.block_interval_s);
            let vsize = (vsize_dist.sample(&mut rng).exp().round() as u64)
                .clamp(MIN_TX_VSIZE, MAX_TX_VSIZE);
            let rate = feerate_dist.sample(&mut rng);
            let fee = (rate * vsize as f64).round().clamp(0.0, 1e15) as u64;
            let txid = hex_id(cfg.seed, seq);
            let value = rng.gen_range(1_000..100_000_000u64);
            let address = addresses[rng.gen_range(0..addresses.len())].clone();
            transactions.push(Transaction {
                txid: txid.clone(),
                vsize,
                fee,
                arrival_time: Some(interval_start + offset),
                inputs: vec![],
                outputs: vec![TxOutput { address, value }],
            });
            pool.insert(PoolKey { fee, vsize, seq }, txid);
            seq += 1;
        }

        if let Some(every) = cfg.snapshot_every {
            if every > 0 && i % every == 0 {
                snapshots.push(MempoolSnapshot {
                    timestamp: block_time - 1,
                    txids: pool.values().cloned().collect(),
                });
            }
        }

        // Miner for this block, by exact integer shares.
        let draw = rng.gen_range(0..denom);
        let mut acc = 0u64;
        let mut miner = &weights[weights.len() - 1].0;
        for (m, w) in &weights {
            acc += w;
            if draw < acc {
                miner = m;
                break;
            }
        }

        // Greedy fee-rate packing; the pool iterates fee rate descending.
        let mut remaining = cfg.block_capacity;
        let mut chosen: Vec<(PoolKey, Txid)> = Vec::new();
        for (key, txid) in pool.iter() {
            if FeeRate::new(key.fee, key.vsize) < cfg.min_feerate {
                break;
            }
            if key.vsize <= remaining {
                chosen.push((*key, txid.clone()));
                remaining -= key.vsize;
                if remaining < MIN_TX_VSIZE {
                    break;
                }
            }
        }
        for (key, _) in &chosen {
            pool.remove(key);
        }

        blocks.push(Block {
            height: cfg.start_height + i,
            block_hash: hex_id(cfg.seed ^ 0xb10c_b10c, i).to_string(),
            miner_id: miner.clone(),
            timestamp: block_time,
            tx_order: chosen.into_iter().map(|(_, t)| t).collect(),
            coinbase_addresses: vec![wallet_address(miner)],
            max_vsize: cfg.block_capacity,
        });
    }

    Ok((Dataset::new(transactions, blocks, snapshots), GroundTruth::default()))
}

/// Result of an acceleration-injection pass.
#[derive(Debug, Clone)]
pub struct InjectionOutcome {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    /// Txids actually injected, in injection order.
    pub injected: Vec<Txid>,
    /// How many requested injections could not be placed (no pending
    /// candidates left, or no later block by an accelerating miner).
    pub shortfall: u64,
}

/// Injects accelerated transactions: picks `n_txs` pending transactions from
/// the bottom fee-rate decile of the pending pool (uniformly, seeded),
/// forces each into the next block mined by any miner of `miners` after its
/// arrival, at the top of the block, evicting the lowest-fee-rate
/// non-injected tail if capacity requires. Consumes the dataset; the
/// returned one shares its transaction records.
pub fn inject_acceleration(
    ds: Dataset,
    truth: &GroundTruth,
    miners: &BTreeSet<MinerId>,
    n_txs: u64,
    seed: u64,
) -> Result<InjectionOutcome, SynthError> {
    let known: BTreeSet<&MinerId> = ds.blocks().iter().map(|b| &b.miner_id).collect();
    for m in miners {
        if !known.contains(m) {
            return Err(SynthError::UnknownMiner(m.clone()));
        }
    }

    // Bottom decile of pending fee rates, deterministically ordered.
    let mut pending: Vec<&Transaction> = ds.pending().collect();
    pending.sort_by(|a, b| a.fee_rate().cmp(&b.fee_rate()).then(a.txid.cmp(&b.txid)));
    let decile = pending.len().div_ceil(10);
    let mut candidates: Vec<&Transaction> = pending.into_iter().take(decile).collect();

    // Seeded partial Fisher-Yates selection.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut selected: Vec<(Option<i64>, Txid)> = Vec::new();
    while selected.len() < n_txs as usize && !candidates.is_empty() {
        let i = rng.gen_range(0..candidates.len());
        let tx = candidates.swap_remove(i);
        selected.push((tx.arrival_time, tx.txid.clone()));
    }
    let mut shortfall = n_txs - selected.len() as u64;
    // Fixed placement order regardless of draw order.
    selected.sort();

    let (transactions, mut blocks, snapshots) = ds.into_parts();
    let by_txid: FxHashMap<&Txid, &Transaction> =
        transactions.iter().map(|t| (&t.txid, t)).collect();
    let mut truth = truth.clone();
    let mut injected = Vec::new();
    let mut injected_per_block: BTreeMap<u64, usize> = BTreeMap::new();

    for (arrival, txid) in selected {
        let arrival = arrival.unwrap_or(i64::MIN);
        let target = blocks
            .iter()
            .position(|b| miners.contains(&b.miner_id) && b.timestamp >= arrival);
        let Some(bi) = target else {
            shortfall += 1;
            continue;
        };
        let top = injected_per_block.entry(blocks[bi].height).or_insert(0);
        blocks[bi].tx_order.insert(*top, txid.clone());
        *top += 1;
        evict_overflow(&mut blocks[bi], &by_txid, *top);
        truth.accelerated.insert(txid.clone(), blocks[bi].miner_id.clone());
        injected.push(txid);
    }
    truth.accelerating_miners.extend(miners.iter().cloned());

    let dataset = Dataset::new(transactions, blocks, snapshots);
    Ok(InjectionOutcome { dataset, truth, injected, shortfall })
}

/// Drops the lowest-fee-rate members beyond the first `protected` positions
/// until the block fits its capacity again.
fn evict_overflow(block: &mut Block, txs: &FxHashMap<&Txid, &Transaction>, protected: usize) {
    let mut total: u128 = block
        .tx_order
        .iter()
        .filter_map(|t| txs.get(t))
        .map(|t| t.vsize as u128)
        .sum();
    while total > block.max_vsize as u128 && block.tx_order.len() > protected {
        let victim = block
            .tx_order
            .iter()
            .enumerate()
            .skip(protected)
            .filter_map(|(i, t)| txs.get(t).map(|tx| (i, tx.fee_rate())))
            .min_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i);
        let Some(i) = victim else { break };
        let removed = block.tx_order.remove(i);
        total -= txs.get(&removed).map(|t| t.vsize as u128).unwrap_or(0);
    }
}
