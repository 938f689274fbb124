//! Cohort construction and the counts feeding the differential-prioritization
//! tests: miner wallet extraction, self-interest transaction selection,
//! c-block counting (x, y), and hash-rate estimation (theta0).

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use num_rational::Ratio;
use thiserror::Error;

use crate::model::{Address, Dataset, MinerId, Txid};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CohortError {
    #[error("cohort {cohort} has no members committed in any block")]
    EmptyCohort { cohort: String },
    #[error("no blocks in the requested window")]
    EmptyWindow,
}

/// A named set of transactions under test (the c-transactions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cohort {
    pub name: String,
    pub txids: BTreeSet<Txid>,
    pub description: String,
}

/// Coinbase reward addresses grouped per miner label, plus the addresses
/// seen under more than one label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WalletMap {
    pub by_miner: BTreeMap<MinerId, BTreeSet<Address>>,
    pub shared: BTreeMap<Address, BTreeSet<MinerId>>,
}

impl WalletMap {
    pub fn wallets(&self, miner: &MinerId) -> Option<&BTreeSet<Address>> {
        self.by_miner.get(miner)
    }
}

/// Collects each miner's reward addresses from block coinbases. An address
/// used by several labels is attributed to every one of them and reported in
/// `shared`.
pub fn extract_miner_wallets(ds: &Dataset) -> WalletMap {
    let mut by_miner: BTreeMap<MinerId, BTreeSet<Address>> = BTreeMap::new();
    let mut owners: BTreeMap<&Address, BTreeSet<&MinerId>> = BTreeMap::new();
    for block in ds.blocks() {
        for addr in &block.coinbase_addresses {
            by_miner.entry(block.miner_id.clone()).or_default().insert(addr.clone());
            owners.entry(addr).or_default().insert(&block.miner_id);
        }
    }
    let shared = owners
        .into_iter()
        .filter(|(_, miners)| miners.len() > 1)
        .map(|(addr, miners)| (addr.clone(), miners.into_iter().cloned().collect()))
        .collect();
    WalletMap { by_miner, shared }
}

/// Transactions that move coins from or to a miner's wallets: at least one
/// output pays a wallet address, or at least one input spends an output
/// (resolvable inside the dataset) that pays a wallet address. Inputs whose
/// referenced output is not in the dataset never qualify.
pub fn self_interest_txs(ds: &Dataset, miner: &MinerId, wallets: &WalletMap) -> Cohort {
    let name = format!("self-interest:{miner}");
    let empty = BTreeSet::new();
    let addrs = wallets.wallets(miner).unwrap_or(&empty);
    let mut txids = BTreeSet::new();
    if !addrs.is_empty() {
        for tx in ds.transactions() {
            let pays = tx.outputs.iter().any(|o| addrs.contains(&o.address));
            let spends = tx
                .inputs
                .iter()
                .any(|i| ds.output(i).is_some_and(|o| addrs.contains(&o.address)));
            if pays || spends {
                txids.insert(tx.txid.clone());
            }
        }
    }
    Cohort {
        name,
        txids,
        description: format!("coins sent from or to wallets of {miner}"),
    }
}

/// Test statistics of a cohort against a miner: `y` c-blocks in total, `x`
/// of them mined by the miner, and the miner's hash-rate estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CohortCounts {
    pub miner: MinerId,
    pub x: u64,
    pub y: u64,
    pub theta0: Ratio<u64>,
}

/// Counts c-blocks (blocks containing at least one cohort member) and how
/// many of them the miner mined. `theta0` is the miner's full-dataset hash
/// rate. A cohort with no committed members is an error.
pub fn cohort_counts(
    cohort: &Cohort,
    ds: &Dataset,
    miner: &MinerId,
) -> Result<CohortCounts, CohortError> {
    let mut x = 0u64;
    let mut y = 0u64;
    for block in ds.blocks() {
        if block.tx_order.iter().any(|t| cohort.txids.contains(t)) {
            y += 1;
            if block.miner_id == *miner {
                x += 1;
            }
        }
    }
    if y == 0 {
        return Err(CohortError::EmptyCohort { cohort: cohort.name.clone() });
    }
    Ok(CohortCounts {
        miner: miner.clone(),
        x,
        y,
        theta0: hash_rate(ds, miner, None)?,
    })
}

/// Fraction of blocks mined by `miner`, over the whole dataset or a height
/// window. Exact rational in [0, 1].
pub fn hash_rate(
    ds: &Dataset,
    miner: &MinerId,
    window: Option<RangeInclusive<u64>>,
) -> Result<Ratio<u64>, CohortError> {
    let mut mined = 0u64;
    let mut total = 0u64;
    for block in ds.blocks() {
        if let Some(w) = &window {
            if !w.contains(&block.height) {
                continue;
            }
        }
        total += 1;
        if block.miner_id == *miner {
            mined += 1;
        }
    }
    if total == 0 {
        return Err(CohortError::EmptyWindow);
    }
    Ok(Ratio::new(mined, total))
}
