//! JSON Lines ingest and canonical emission for datasets, cohorts, bundles,
//! and ground-truth files.
//!
//! One record per line, UTF-8. Unknown fields are ignored on ingest; missing
//! required fields surface as [`IngestError`] with the offending line number.
//! Emission is canonical: fixed field order, no extra whitespace, records in
//! dataset order, `\n` terminated. Parsing a canonical file and re-emitting
//! it reproduces the bytes exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::model::{Block, Dataset, MempoolSnapshot, MinerId, Transaction, Txid};

pub const TRANSACTIONS_FILE: &str = "transactions.jsonl";
pub const BLOCKS_FILE: &str = "blocks.jsonl";
pub const SNAPSHOTS_FILE: &str = "snapshots.jsonl";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> IngestError {
    IngestError::Io { path: path.to_owned(), source }
}

/// Reads one JSONL file into records of type `T`. Blank lines are skipped.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IngestError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_jsonl_from(BufReader::new(file), path)
}

pub fn read_jsonl_from<T: DeserializeOwned, R: Read>(
    reader: BufReader<R>,
    path: &Path,
) -> Result<Vec<T>, IngestError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| IngestError::Malformed {
            path: path.to_owned(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes records as canonical JSONL.
pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, records: &[T]) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut w, record)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn write_jsonl_file<T: Serialize>(path: &Path, records: &[T]) -> Result<(), IngestError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl(&mut w, records).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Loads `transactions.jsonl`, `blocks.jsonl`, and `snapshots.jsonl` from a
/// directory. Missing snapshot/block files are treated as empty; a missing
/// transactions file is an error.
pub fn read_dataset_dir(dir: &Path) -> Result<Dataset, IngestError> {
    let transactions: Vec<Transaction> = read_jsonl(&dir.join(TRANSACTIONS_FILE))?;
    let blocks: Vec<Block> = read_optional(&dir.join(BLOCKS_FILE))?;
    let snapshots: Vec<MempoolSnapshot> = read_optional(&dir.join(SNAPSHOTS_FILE))?;
    Ok(Dataset::new(transactions, blocks, snapshots))
}

fn read_optional<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IngestError> {
    if path.exists() {
        read_jsonl(path)
    } else {
        Ok(Vec::new())
    }
}

/// Writes the three dataset files into `dir` in canonical form.
pub fn write_dataset_dir(dir: &Path, ds: &Dataset) -> Result<(), IngestError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let txs: Vec<&Transaction> = ds.transactions().collect();
    write_jsonl_file(&dir.join(TRANSACTIONS_FILE), &txs)?;
    write_jsonl_file(&dir.join(BLOCKS_FILE), ds.blocks())?;
    write_jsonl_file(&dir.join(SNAPSHOTS_FILE), ds.snapshots())
}

/// Cohort file record: `{"cohort": name, "txid": id}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct CohortRecord {
    pub cohort: String,
    pub txid: Txid,
}

/// Ground-truth record for synthetic chains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct GroundTruthRecord {
    pub txid: Txid,
    pub accelerating_miner: MinerId,
}
