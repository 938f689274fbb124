//! Report emission: CSV or JSON Lines, to stdout or to fixed-name files in
//! an output directory. Row structs serialize with declaration-order fields,
//! which fixes both the CSV column order and the JSON key order; the CSV
//! header is written explicitly so empty reports still carry it.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Sink {
    format: Format,
    out_dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(format: Format, out_dir: Option<PathBuf>) -> Self {
        Sink { format, out_dir }
    }

    fn file_writer(&self, file_name: String) -> io::Result<Box<dyn Write>> {
        match &self.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let file = File::create(dir.join(file_name))?;
                Ok(Box::new(BufWriter::new(file)))
            }
            None => Ok(Box::new(io::stdout().lock())),
        }
    }

    /// Writes one report: header line (CSV only) plus one line per row.
    pub fn write_report<T: Serialize>(
        &self,
        name: &str,
        header: &[&str],
        rows: &[T],
    ) -> io::Result<()> {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "jsonl",
        };
        let mut w = self.file_writer(format!("{name}.{ext}"))?;
        match self.format {
            Format::Csv => {
                let mut csv = csv::WriterBuilder::new().has_headers(false).from_writer(&mut w);
                csv.write_record(header)?;
                for row in rows {
                    csv.serialize(row)?;
                }
                csv.flush()?;
                drop(csv);
            }
            Format::Json => {
                for row in rows {
                    serde_json::to_writer(&mut w, row)?;
                    w.write_all(b"\n")?;
                }
            }
        }
        w.flush()
    }

    /// Writes a file that is JSONL by contract regardless of --format
    /// (cohort and ground-truth files).
    pub fn write_jsonl_report<T: Serialize>(&self, name: &str, rows: &[T]) -> io::Result<()> {
        let mut w = self.file_writer(format!("{name}.jsonl"))?;
        for row in rows {
            serde_json::to_writer(&mut w, row)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}
