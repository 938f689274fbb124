//! Subcommand implementations. Every report is deterministic: rows are
//! ordered by explicit sort keys and all numbers are formatted through
//! exact-arithmetic helpers. Machine-readable output goes to the sink;
//! human summaries go to stderr.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};

use num_rational::{Ratio, Rational64};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use ordaudit::bundles::{
    bundle_effective_priority_fee, bundle_stats, classify_bundle, read_bundles, BundleRecord,
    WEI_PER_GWEI,
};
use ordaudit::cohorts::{cohort_counts, extract_miner_wallets, self_interest_txs, Cohort};
use ordaudit::congestion::{
    commit_delay, congestion_bin, fee_revenue_share, feerate_by_congestion, mempool_size_series,
    Delay, SubsidySchedule,
};
use ordaudit::io::{
    read_dataset_dir, read_jsonl, write_dataset_dir, CohortRecord, GroundTruthRecord, IngestError,
    GROUND_TRUTH_FILE,
};
use ordaudit::norms::{detect_cpfp, find_violation_pairs};
use ordaudit::position::{block_position_reports, flag_accelerated, ppe, sppe};
use ordaudit::stats::{
    accel_test_exact, accel_test_normal, decel_test_exact, decel_test_normal, fisher_combine,
    TestKind, TestMethod, TestResult,
};
use ordaudit::synth::{generate, inject_acceleration, GroundTruth, SynthConfig};
use ordaudit::{cohorts, validate_dataset, Dataset, MinerId, Txid};

use crate::fmt::{
    big_rational_fixed, parse_decimal, ratio_u128_fixed, ratio_u64_fixed, ratio_u64_to_f64,
    rational64_fixed, sig6,
};
use crate::sink::Sink;

/// Failure carrying the process exit code: 1 for data/validation problems,
/// 2 for usage problems.
#[derive(Debug)]
pub struct CliFailure {
    pub code: u8,
    pub message: String,
}

impl CliFailure {
    pub fn data(message: impl Display) -> Self {
        CliFailure { code: 1, message: message.to_string() }
    }

    pub fn usage(message: impl Display) -> Self {
        CliFailure { code: 2, message: message.to_string() }
    }
}

impl From<IngestError> for CliFailure {
    fn from(e: IngestError) -> Self {
        CliFailure::data(e)
    }
}

impl From<std::io::Error> for CliFailure {
    fn from(e: std::io::Error) -> Self {
        CliFailure::data(e)
    }
}

type CmdResult = Result<u8, CliFailure>;

pub fn load_dataset(dir: &Path) -> Result<Dataset, CliFailure> {
    Ok(read_dataset_dir(dir)?)
}

fn eprintln_note(msg: impl Display) {
    eprintln!("note: {msg}");
}

// ---- validate ----

#[derive(Serialize)]
struct ValidateRow {
    kind: &'static str,
    identifier: String,
}

pub fn cmd_validate(sink: &Sink, ds: &Dataset) -> CmdResult {
    let report = validate_dataset(ds);
    let rows: Vec<ValidateRow> = report
        .violations
        .iter()
        .map(|v| ValidateRow { kind: v.kind.as_str(), identifier: v.identifier.clone() })
        .collect();
    sink.write_report("validate", &["kind", "identifier"], &rows)?;
    if rows.is_empty() {
        eprintln_note("dataset is well-formed");
        Ok(0)
    } else {
        eprintln_note(format!("{} violation(s) found", rows.len()));
        Ok(1)
    }
}

// ---- ppe ----

#[derive(Serialize)]
struct PpeRow {
    height: u64,
    miner: String,
    n_eligible: usize,
    ppe_pct: String,
}

pub fn cmd_ppe(sink: &Sink, ds: &Dataset) -> CmdResult {
    let mut rows = Vec::new();
    let mut empty = 0u64;
    for block in ds.blocks() {
        match block_position_reports(block, ds) {
            Ok(reports) => {
                let value = ppe(block, ds).expect("non-empty block");
                rows.push(PpeRow {
                    height: block.height,
                    miner: block.miner_id.to_string(),
                    n_eligible: reports.len(),
                    ppe_pct: rational64_fixed(value, 4),
                });
            }
            Err(_) => empty += 1,
        }
    }
    if empty > 0 {
        eprintln_note(format!("{empty} block(s) with no eligible transactions skipped"));
    }
    sink.write_report("ppe", &["height", "miner", "n_eligible", "ppe_pct"], &rows)?;
    Ok(0)
}

// ---- cohort files ----

fn read_cohorts(path: &Path) -> Result<BTreeMap<String, BTreeSet<Txid>>, CliFailure> {
    let records: Vec<CohortRecord> = read_jsonl(path)?;
    let mut cohorts: BTreeMap<String, BTreeSet<Txid>> = BTreeMap::new();
    for r in records {
        cohorts.entry(r.cohort).or_default().insert(r.txid);
    }
    if cohorts.is_empty() {
        return Err(CliFailure::data(format!("{}: no cohort records", path.display())));
    }
    Ok(cohorts)
}

// ---- sppe ----

#[derive(Serialize)]
struct SppeRow {
    miner: String,
    cohort: String,
    n: usize,
    sppe_pct: String,
}

pub fn cmd_sppe(sink: &Sink, ds: &Dataset, miner: &str, cohort_path: &Path) -> CmdResult {
    let miner = MinerId::from(miner);
    let mut rows = Vec::new();
    for (name, txids) in read_cohorts(cohort_path)? {
        match sppe(&txids, &miner, ds) {
            Ok(r) => rows.push(SppeRow {
                miner: miner.to_string(),
                cohort: name,
                n: r.n,
                sppe_pct: big_rational_fixed(&r.sppe, 4),
            }),
            Err(e) => eprintln_note(format!("cohort {name}: {e}")),
        }
    }
    sink.write_report("sppe", &["miner", "cohort", "n", "sppe_pct"], &rows)?;
    Ok(0)
}

// ---- test ----

#[derive(Serialize)]
struct TestRow {
    miner: String,
    cohort: String,
    kind: &'static str,
    method: String,
    x: u64,
    y: u64,
    theta0: String,
    p_value: String,
    rejected: bool,
}

fn run_test(kind: TestKind, method: TestMethod, x: u64, y: u64, theta0: f64) -> Result<TestResult, CliFailure> {
    let r = match (kind, method) {
        (TestKind::Acceleration, TestMethod::Exact) => accel_test_exact(x, y, theta0),
        (TestKind::Deceleration, TestMethod::Exact) => decel_test_exact(x, y, theta0),
        (TestKind::Acceleration, TestMethod::NormalApprox) => accel_test_normal(x, y, theta0),
        (TestKind::Deceleration, TestMethod::NormalApprox) => decel_test_normal(x, y, theta0),
    };
    r.map_err(CliFailure::data)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_test(
    sink: &Sink,
    ds: &Dataset,
    kind: TestKind,
    method: TestMethod,
    miner: &str,
    cohort_path: &Path,
    fisher_window: Option<u64>,
    alpha: f64,
) -> CmdResult {
    let miner = MinerId::from(miner);
    let mut rows = Vec::new();
    for (name, txids) in read_cohorts(cohort_path)? {
        let cohort = Cohort { name: name.clone(), txids, description: String::new() };
        let row = match fisher_window {
            None => {
                let counts = cohort_counts(&cohort, ds, &miner).map_err(CliFailure::data)?;
                let theta0 = counts.theta0;
                let result = run_test(kind, method, counts.x, counts.y, ratio_u64_to_f64(theta0))?
                    .with_alpha(alpha);
                if result.small_sample_warning {
                    eprintln_note(format!(
                        "cohort {name}: normal approximation outside its guidance range"
                    ));
                }
                TestRow {
                    miner: miner.to_string(),
                    cohort: name,
                    kind: kind.as_str(),
                    method: method.as_str().to_string(),
                    x: result.x,
                    y: result.y,
                    theta0: ratio_u64_fixed(theta0, 6),
                    p_value: sig6(result.p_value),
                    rejected: result.rejected,
                }
            }
            Some(window) => {
                if window == 0 {
                    return Err(CliFailure::usage("--fisher-window must be positive"));
                }
                let (row, window_ps) =
                    fisher_windowed(ds, &cohort, &miner, kind, method, window, alpha)?;
                eprintln_note(format!(
                    "cohort {}: combined {} window p-values: {}",
                    row.cohort,
                    window_ps.len(),
                    window_ps.iter().map(|p| sig6(*p)).collect::<Vec<_>>().join(", ")
                ));
                row
            }
        };
        rows.push(row);
    }
    sink.write_report(
        "tests",
        &["miner", "cohort", "kind", "method", "x", "y", "theta0", "p_value", "rejected"],
        &rows,
    )?;
    Ok(0)
}

/// Splits the chain into height windows, tests each window with its own
/// hash-rate estimate, and combines the per-window p-values with Fisher's
/// method.
fn fisher_windowed(
    ds: &Dataset,
    cohort: &Cohort,
    miner: &MinerId,
    kind: TestKind,
    method: TestMethod,
    window: u64,
    alpha: f64,
) -> Result<(TestRow, Vec<f64>), CliFailure> {
    let blocks = ds.blocks();
    if blocks.is_empty() {
        return Err(CliFailure::data("dataset has no blocks"));
    }
    let lo = blocks.first().expect("non-empty").height;
    let hi = blocks.last().expect("non-empty").height;
    let mut ps = Vec::new();
    let (mut x_total, mut y_total) = (0u64, 0u64);
    let mut start = lo;
    while start <= hi {
        let end = start.saturating_add(window - 1).min(hi);
        let range = start..=end;
        let mut x = 0u64;
        let mut y = 0u64;
        for b in blocks.iter().filter(|b| range.contains(&b.height)) {
            if b.tx_order.iter().any(|t| cohort.txids.contains(t)) {
                y += 1;
                if b.miner_id == *miner {
                    x += 1;
                }
            }
        }
        if y > 0 {
            let theta0 = cohorts::hash_rate(ds, miner, Some(range)).map_err(CliFailure::data)?;
            let r = run_test(kind, method, x, y, ratio_u64_to_f64(theta0))?;
            ps.push(r.p_value);
            x_total += x;
            y_total += y;
        }
        start = end.saturating_add(1);
        if end == u64::MAX {
            break;
        }
    }
    if ps.is_empty() {
        return Err(CliFailure::data(format!(
            "cohort {} has no members committed in any window",
            cohort.name
        )));
    }
    let combined = fisher_combine(&ps).map_err(CliFailure::data)?;
    if combined.exact_zero_input {
        eprintln_note("a window p-value underflowed to zero; the combined p is zero");
    }
    let theta0 = cohorts::hash_rate(ds, miner, None).map_err(CliFailure::data)?;
    Ok((
        TestRow {
            miner: miner.to_string(),
            cohort: cohort.name.clone(),
            kind: kind.as_str(),
            method: format!("{}+fisher", method.as_str()),
            x: x_total,
            y: y_total,
            theta0: ratio_u64_fixed(theta0, 6),
            p_value: sig6(combined.combined_p),
            rejected: combined.combined_p < alpha,
        },
        ps,
    ))
}

// ---- detect-accelerated ----

#[derive(Serialize)]
struct AcceleratedRow {
    txid: String,
    height: u64,
    signed_error_pct: String,
}

pub fn cmd_detect_accelerated(sink: &Sink, ds: &Dataset, threshold: Rational64) -> CmdResult {
    let rows: Vec<AcceleratedRow> = flag_accelerated(ds, threshold)
        .into_iter()
        .map(|f| AcceleratedRow {
            txid: f.txid.to_string(),
            height: f.block_height,
            signed_error_pct: rational64_fixed(f.signed_error, 4),
        })
        .collect();
    sink.write_report("accelerated", &["txid", "height", "signed_error_pct"], &rows)?;
    Ok(0)
}

// ---- cpfp ----

#[derive(Serialize)]
struct CpfpRow {
    height: u64,
    txid: String,
}

pub fn cmd_cpfp(sink: &Sink, ds: &Dataset) -> CmdResult {
    let mut rows = Vec::new();
    for block in ds.blocks() {
        for txid in detect_cpfp(block, ds) {
            rows.push(CpfpRow { height: block.height, txid: txid.to_string() });
        }
    }
    sink.write_report("cpfp", &["height", "txid"], &rows)?;
    Ok(0)
}

// ---- violations ----

#[derive(Serialize)]
struct ViolationRow {
    snapshot_ts: i64,
    epsilon_s: u64,
    pairs_total: u64,
    pairs_violating: u64,
    fraction: String,
}

pub fn cmd_violations(
    sink: &Sink,
    ds: &Dataset,
    epsilon_s: u64,
    include_cpfp: bool,
    sample: Option<usize>,
    sample_seed: u64,
) -> CmdResult {
    let mut indices: Vec<usize> = (0..ds.snapshots().len()).collect();
    if let Some(n) = sample {
        let mut rng = ChaCha12Rng::seed_from_u64(sample_seed);
        indices.shuffle(&mut rng);
        indices.truncate(n);
        indices.sort_unstable();
    }
    let mut rows = Vec::new();
    let mut skipped = 0u64;
    for i in indices {
        let scan = find_violation_pairs(&ds.snapshots()[i], ds, epsilon_s, !include_cpfp);
        skipped += scan.skipped;
        rows.push(ViolationRow {
            snapshot_ts: scan.snapshot_timestamp,
            epsilon_s,
            pairs_total: scan.candidate_pairs,
            pairs_violating: scan.pairs.len() as u64,
            fraction: ratio_u64_fixed(scan.violating_fraction(), 6),
        });
    }
    if skipped > 0 {
        eprintln_note(format!(
            "{skipped} snapshot member(s) without commit block or arrival time ignored"
        ));
    }
    sink.write_report(
        "violations",
        &["snapshot_ts", "epsilon_s", "pairs_total", "pairs_violating", "fraction"],
        &rows,
    )?;
    Ok(0)
}

// ---- bundles ----

#[derive(Serialize)]
struct BundleClassifyRow {
    block_number: u64,
    bundle_index: u64,
    size: usize,
    pattern: &'static str,
    effective_priority_fee_gwei: String,
}

fn load_bundles(path: &Path) -> Result<Vec<BundleRecord>, CliFailure> {
    read_bundles(path).map_err(CliFailure::data)
}

pub fn cmd_bundles_classify(sink: &Sink, path: &Path) -> CmdResult {
    let bundles = load_bundles(path)?;
    let rows: Vec<BundleClassifyRow> = bundles
        .iter()
        .map(|b| {
            let fee = bundle_effective_priority_fee(b);
            let gwei = Ratio::new(*fee.numer(), fee.denom() * WEI_PER_GWEI);
            BundleClassifyRow {
                block_number: b.block_number,
                bundle_index: b.bundle_index,
                size: b.size(),
                pattern: classify_bundle(b).pattern.as_str(),
                effective_priority_fee_gwei: ratio_u128_fixed(gwei, 6),
            }
        })
        .collect();
    sink.write_report(
        "bundle_classify",
        &["block_number", "bundle_index", "size", "pattern", "effective_priority_fee_gwei"],
        &rows,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct MetricRow {
    metric: String,
    value: String,
}

pub fn cmd_bundles_stats(sink: &Sink, path: &Path) -> CmdResult {
    let bundles = load_bundles(path)?;
    let s = bundle_stats(&bundles);
    let mut rows = vec![
        MetricRow { metric: "total_bundles".into(), value: s.total_bundles.to_string() },
        MetricRow { metric: "total_txs".into(), value: s.total_txs.to_string() },
        MetricRow { metric: "size_min".into(), value: s.size_min.to_string() },
        MetricRow { metric: "size_max".into(), value: s.size_max.to_string() },
        MetricRow { metric: "mean_size".into(), value: ratio_u64_fixed(s.mean_size, 4) },
    ];
    for (cat, count) in &s.by_category {
        rows.push(MetricRow {
            metric: format!("category_{}", cat.as_str()),
            value: count.to_string(),
        });
    }
    rows.push(MetricRow { metric: "size2_bundles".into(), value: s.size2_bundles.to_string() });
    rows.push(MetricRow { metric: "size2_matched".into(), value: s.size2_matched.to_string() });
    rows.push(MetricRow {
        metric: "size2_matched_fraction".into(),
        value: ratio_u64_fixed(s.size2_matched_fraction(), 6),
    });
    rows.push(MetricRow { metric: "size3_bundles".into(), value: s.size3_bundles.to_string() });
    rows.push(MetricRow { metric: "size3_matched".into(), value: s.size3_matched.to_string() });
    rows.push(MetricRow {
        metric: "size3_matched_fraction".into(),
        value: ratio_u64_fixed(s.size3_matched_fraction(), 6),
    });
    rows.push(MetricRow {
        metric: "blocks_with_bundles".into(),
        value: s.bundles_per_block.len().to_string(),
    });
    let max_per_block = s.bundles_per_block.values().max().copied().unwrap_or(0);
    rows.push(MetricRow { metric: "max_bundles_per_block".into(), value: max_per_block.to_string() });
    sink.write_report("bundle_stats", &["metric", "value"], &rows)?;
    Ok(0)
}

// ---- congestion ----

#[derive(Serialize)]
struct CongestionRow {
    timestamp: i64,
    vbytes: u64,
    tx_count: u64,
    bin: &'static str,
}

pub fn cmd_congestion(sink: &Sink, ds: &Dataset) -> CmdResult {
    let rows: Vec<CongestionRow> = mempool_size_series(ds)
        .into_iter()
        .map(|p| CongestionRow {
            timestamp: p.timestamp,
            vbytes: p.total_vbytes,
            tx_count: p.tx_count,
            bin: congestion_bin(p.total_vbytes).as_str(),
        })
        .collect();
    sink.write_report("congestion", &["timestamp", "vbytes", "tx_count", "bin"], &rows)?;

    // Companion per-bin fee-rate summary, stderr only.
    let summary = feerate_by_congestion(ds);
    for bin in &summary.bins {
        eprintln_note(format!(
            "bin {}: {} tx, median {} sat/vB",
            bin.bin,
            bin.count,
            big_rational_fixed(
                &num_rational::BigRational::new(
                    (*bin.median.as_ratio().numer()).into(),
                    (*bin.median.as_ratio().denom()).into()
                ),
                4
            )
        ));
    }
    Ok(0)
}

// ---- delays ----

#[derive(Serialize)]
struct DelayRow {
    txid: String,
    feerate_sat_vb: String,
    delay_blocks: u64,
}

pub fn cmd_delays(sink: &Sink, ds: &Dataset) -> CmdResult {
    let mut rows = Vec::new();
    let (mut pending, mut no_arrival, mut clamped) = (0u64, 0u64, 0u64);
    for tx in ds.transactions() {
        if tx.arrival_time.is_none() {
            no_arrival += 1;
            continue;
        }
        match commit_delay(tx, ds).expect("arrival checked") {
            Delay::Committed { blocks, clamped: c } => {
                if c {
                    clamped += 1;
                }
                let rate = tx.fee_rate().as_ratio();
                rows.push(DelayRow {
                    txid: tx.txid.to_string(),
                    feerate_sat_vb: ratio_u64_fixed(rate, 6),
                    delay_blocks: blocks,
                });
            }
            Delay::Pending { .. } => pending += 1,
        }
    }
    if pending + no_arrival + clamped > 0 {
        eprintln_note(format!(
            "{pending} pending, {no_arrival} without arrival time, {clamped} clamped to delay 1"
        ));
    }
    sink.write_report("delays", &["txid", "feerate_sat_vb", "delay_blocks"], &rows)?;
    Ok(0)
}

// ---- fee-share ----

#[derive(Serialize)]
struct FeeShareRow {
    height: u64,
    miner: String,
    fee_share_pct: String,
}

pub fn cmd_fee_share(sink: &Sink, ds: &Dataset) -> CmdResult {
    let schedule = SubsidySchedule::default();
    let rows: Vec<FeeShareRow> = ds
        .blocks()
        .iter()
        .map(|b| FeeShareRow {
            height: b.height,
            miner: b.miner_id.to_string(),
            fee_share_pct: ratio_u64_fixed(fee_revenue_share(b, ds, &schedule), 4),
        })
        .collect();
    sink.write_report("fee_share", &["height", "miner", "fee_share_pct"], &rows)?;
    Ok(0)
}

// ---- wallets / self-interest ----

#[derive(Serialize)]
struct WalletRow {
    miner: String,
    address: String,
    shared: bool,
}

pub fn cmd_wallets(sink: &Sink, ds: &Dataset) -> CmdResult {
    let wallets = extract_miner_wallets(ds);
    let mut rows = Vec::new();
    for (miner, addrs) in &wallets.by_miner {
        for addr in addrs {
            rows.push(WalletRow {
                miner: miner.to_string(),
                address: addr.clone(),
                shared: wallets.shared.contains_key(addr),
            });
        }
    }
    if !wallets.shared.is_empty() {
        eprintln_note(format!("{} address(es) shared across miner labels", wallets.shared.len()));
    }
    sink.write_report("wallets", &["miner", "address", "shared"], &rows)?;
    Ok(0)
}

pub fn cmd_self_interest(sink: &Sink, ds: &Dataset, miner: &str) -> CmdResult {
    let miner = MinerId::from(miner);
    let wallets = extract_miner_wallets(ds);
    let cohort = self_interest_txs(ds, &miner, &wallets);
    let records: Vec<CohortRecord> = cohort
        .txids
        .iter()
        .map(|t| CohortRecord { cohort: cohort.name.clone(), txid: t.clone() })
        .collect();
    eprintln_note(format!("{} self-interest transaction(s) for {miner}", records.len()));
    sink.write_jsonl_report("self_interest", &records)?;
    Ok(0)
}

// ---- synth ----

pub struct SynthGenerateArgs {
    pub seed: u64,
    pub blocks: u64,
    pub miners: String,
    pub capacity: u64,
    pub rate: f64,
    pub feerate_mu_ln: f64,
    pub feerate_sigma_ln: f64,
    pub snapshot_every: u64,
}

pub fn parse_miner_shares(spec: &str) -> Result<Vec<(MinerId, Ratio<u64>)>, CliFailure> {
    let mut miners = Vec::new();
    for part in spec.split(',') {
        let (name, share) = part
            .split_once(':')
            .ok_or_else(|| CliFailure::usage(format!("bad miner spec {part:?}; want NAME:SHARE")))?;
        let share = parse_decimal(share.trim())
            .map_err(|e| CliFailure::usage(format!("miner {name}: {e}")))?;
        miners.push((MinerId::from(name.trim()), share));
    }
    Ok(miners)
}

pub fn cmd_synth_generate(out: Option<&PathBuf>, args: &SynthGenerateArgs) -> CmdResult {
    let out = out.ok_or_else(|| CliFailure::usage("synth generate requires --out DIR"))?;
    let miners = parse_miner_shares(&args.miners)?;
    let mut cfg = SynthConfig::new(miners, args.blocks, args.seed);
    cfg.block_capacity = args.capacity;
    cfg.tx_arrival_rate = args.rate;
    cfg.feerate_ln_mu = args.feerate_mu_ln;
    cfg.feerate_ln_sigma = args.feerate_sigma_ln;
    cfg.snapshot_every = if args.snapshot_every == 0 { None } else { Some(args.snapshot_every) };
    let (ds, truth) = generate(&cfg).map_err(CliFailure::usage)?;
    write_dataset_dir(out, &ds)?;
    ordaudit::io::write_jsonl(
        std::io::BufWriter::new(std::fs::File::create(out.join(GROUND_TRUTH_FILE))?),
        &truth.records(),
    )?;
    eprintln_note(format!(
        "generated {} blocks, {} transactions into {}",
        ds.blocks().len(),
        ds.tx_count(),
        out.display()
    ));
    Ok(0)
}

pub fn cmd_synth_inject(
    data: &Path,
    out: Option<&PathBuf>,
    seed: u64,
    miners: &str,
    count: u64,
) -> CmdResult {
    let out = out.ok_or_else(|| CliFailure::usage("synth inject requires --out DIR"))?;
    let ds = load_dataset(data)?;
    let truth_path = data.join(GROUND_TRUTH_FILE);
    let mut truth = GroundTruth::default();
    if truth_path.exists() {
        let records: Vec<GroundTruthRecord> = read_jsonl(&truth_path)?;
        for r in records {
            truth.accelerating_miners.insert(r.accelerating_miner.clone());
            truth.accelerated.insert(r.txid, r.accelerating_miner);
        }
    }
    let miner_set: BTreeSet<MinerId> =
        miners.split(',').map(|m| MinerId::from(m.trim())).collect();
    let outcome =
        inject_acceleration(ds, &truth, &miner_set, count, seed).map_err(CliFailure::usage)?;
    write_dataset_dir(out, &outcome.dataset)?;
    ordaudit::io::write_jsonl(
        std::io::BufWriter::new(std::fs::File::create(out.join(GROUND_TRUTH_FILE))?),
        &outcome.truth.records(),
    )?;
    eprintln_note(format!(
        "injected {} transaction(s), shortfall {}",
        outcome.injected.len(),
        outcome.shortfall
    ));
    Ok(0)
}
