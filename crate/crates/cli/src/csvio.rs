//! CSV files with `#` metadata lines above the header.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::CliError;

pub const TOOL: &str = concat!("mpest ", env!("CARGO_PKG_VERSION"));

/// Header comment block shared by every output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub master_seed: u64,
    pub config_hash: String,
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![
            format!("# tool: {TOOL}"),
            format!("# master_seed: {}", self.master_seed),
            format!("# config_sha256: {}", self.config_hash),
        ];
        out.extend(self.extra.iter().map(|(k, v)| format!("# {k}: {v}")));
        out
    }
}

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv<I>(path: &Path, meta: &Metadata, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for line in meta.lines() {
        writeln!(file, "{line}").map_err(io_err(path))?;
    }
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// A parsed output file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    /// `key: value` pairs from the comment block.
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }

    pub fn f64_column(&self, name: &str) -> Option<Vec<f64>> {
        self.column(name)?
            .into_iter()
            .map(|v| v.parse().ok())
            .collect()
    }
}

pub fn read_csv(path: &Path) -> Result<CsvTable, CliError> {
    let mut metadata = Vec::new();
    for line in BufReader::new(File::open(path).map_err(io_err(path))?).lines() {
        let line = line.map_err(io_err(path))?;
        let Some(rest) = line.strip_prefix('#') else {
            break;
        };
        if let Some((k, v)) = rest.trim().split_once(": ") {
            metadata.push((k.to_string(), v.to_string()));
        }
    }
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    let header = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(csv_err(path))?;
    Ok(CsvTable {
        metadata,
        header,
        rows,
    })
}
