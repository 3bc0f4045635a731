//! Dataset files.
//!
//! CSV: header `label,f1,...,fM`, one sample per row.
//!
//! Binary: magic `XLDD`, little-endian `u32` M, N, C, then N records of a
//! `u32` label followed by M little-endian `f64` features.
//!
//! Record numbers in errors are 0-based and count data rows only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use super::LabeledDataset;
use crate::error::{Error, Result};

pub(crate) const DATASET_MAGIC: &[u8; 4] = b"XLDD";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Csv,
    Binary,
}

impl DatasetFormat {
    /// Guesses the format from the file extension; anything but `.csv` is binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => DatasetFormat::Csv,
            _ => DatasetFormat::Binary,
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<LabeledDataset> {
    match format {
        DatasetFormat::Csv => load_csv(path),
        DatasetFormat::Binary => load_binary(path),
    }
}

/// Features in file order, with labels when the file has a `label` column.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub features: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
}

fn parse_label(record: usize, raw: &str) -> Result<usize> {
    match raw.trim().parse::<usize>() {
        Ok(l) if l >= 1 => Ok(l),
        _ => Err(Error::UnknownLabel {
            record,
            label: raw.to_string(),
        }),
    }
}

fn parse_feature(record: usize, feature: usize, raw: &str) -> Result<f64> {
    let v: f64 = raw.trim().parse().map_err(|_| Error::Parse {
        record,
        feature,
        value: raw.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue { record, feature });
    }
    Ok(v)
}

/// Reads a CSV whose first column may or may not be `label`.
pub fn load_features_csv(path: impl AsRef<Path>) -> Result<FeatureTable> {
    read_csv_table(File::open(path)?)
}

fn read_csv_table(reader: impl Read) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let labeled = header.get(0).map(|h| h.trim()) == Some("label");
    let dim = header.len() - usize::from(labeled);
    if dim == 0 || header.iter().any(|h| h.trim().is_empty()) {
        return Err(Error::MalformedHeader(format!(
            "expected `label,f1,...,fM`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (record, row) in rdr.records().enumerate() {
        let row = row?;
        if row.len() != header.len() {
            return Err(Error::DimensionMismatch {
                record,
                expected: header.len(),
                found: row.len(),
            });
        }
        let mut fields = row.iter();
        if labeled {
            labels.push(parse_label(record, fields.next().unwrap_or_default())?);
        }
        for (feature, raw) in fields.enumerate() {
            data.push(parse_feature(record, feature, raw)?);
        }
    }
    let n = data.len() / dim;
    Ok(FeatureTable {
        features: DMatrix::from_column_slice(dim, n, &data),
        labels: labeled.then_some(labels),
    })
}

/// Loads a labeled CSV. The class count is the largest label present.
pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let table = load_features_csv(path)?;
    let labels = table.labels.ok_or_else(|| {
        Error::MalformedHeader("first column must be `label` for a labeled dataset".into())
    })?;
    let classes = labels.iter().copied().max().unwrap_or(0);
    LabeledDataset::new(table.features, labels, classes)
}

/// Writes the dataset's columns, in their current order, as CSV rows.
pub fn save_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let mut header = String::from("label");
    for f in 1..=ds.dim() {
        header.push_str(&format!(",f{f}"));
    }
    writeln!(out, "{header}")?;
    for (j, column) in ds.features().column_iter().enumerate() {
        write!(out, "{}", ds.labels()[j])?;
        for v in column.iter() {
            // `{:?}` prints the shortest representation that round-trips.
            write!(out, ",{v:?}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn read_u32(buf: &[u8], at: &mut usize) -> Result<u32> {
    let bytes = buf
        .get(*at..*at + 4)
        .ok_or_else(|| Error::MalformedHeader("unexpected end of file".into()))?;
    *at += 4;
    Ok(u32::from_le_bytes(bytes.try_into().expect("4 bytes")))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let mut buf = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut buf)?;
    parse_binary(&buf)
}

pub(crate) fn parse_binary(buf: &[u8]) -> Result<LabeledDataset> {
    if buf.get(..4) != Some(DATASET_MAGIC.as_slice()) {
        return Err(Error::MalformedHeader("missing `XLDD` magic".into()));
    }
    let mut at = 4;
    let dim = read_u32(buf, &mut at)? as usize;
    let n = read_u32(buf, &mut at)? as usize;
    let classes = read_u32(buf, &mut at)? as usize;
    if dim == 0 {
        return Err(Error::MalformedHeader("feature dimension is zero".into()));
    }
    let record_len = 4 + 8 * dim;
    let body = buf.len() - at;
    if body != n * record_len {
        let found = body / record_len;
        return Err(Error::DimensionMismatch {
            record: found.min(n),
            expected: n * record_len,
            found: body,
        });
    }

    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for record in 0..n {
        let label = read_u32(buf, &mut at)? as usize;
        if label == 0 || label > classes {
            return Err(Error::UnknownLabel {
                record,
                label: label.to_string(),
            });
        }
        labels.push(label);
        for feature in 0..dim {
            let v = f64::from_le_bytes(buf[at..at + 8].try_into().expect("8 bytes"));
            at += 8;
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { record, feature });
            }
            data.push(v);
        }
    }
    LabeledDataset::new(DMatrix::from_column_slice(dim, n, &data), labels, classes)
}

pub fn save_binary(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(DATASET_MAGIC)?;
    for v in [ds.dim(), ds.len(), ds.num_classes()] {
        out.write_all(&(v as u32).to_le_bytes())?;
    }
    for (j, column) in ds.features().column_iter().enumerate() {
        out.write_all(&(ds.labels()[j] as u32).to_le_bytes())?;
        for v in column.iter() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}
