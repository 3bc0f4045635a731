//! Report writer shared by every command.
//!
//! A report is a header naming the command and seed, followed by tables.
//! Text output aligns columns, prints single-row tables as `key: value` lines
//! and marks each table with a `## name` line. CSV output separates tables by
//! a blank line. JSON-lines output writes one object per row, tagged with the
//! table name under `"record"`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn float_text(v: f64, precise: bool) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v.is_infinite() {
            if v > 0.0 { "inf" } else { "-inf" }.into()
        } else if precise {
            format!("{v:?}")
        } else {
            format!("{v:.6}")
        }
    }

    fn render(&self, precise: bool) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => Self::float_text(*v, precise),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(Self::float_text(*v, true)),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

pub struct Report {
    format: Format,
    out: Box<dyn Write>,
    tables: usize,
}

impl Report {
    pub fn open(format: Format, path: Option<&Path>, command: &str, seed: u64) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        let mut report = Self { format, out, tables: 0 };
        match format {
            Format::Text => writeln!(report.out, "# structdict {command} seed={seed}")?,
            Format::Csv => writeln!(report.out, "# command={command},seed={seed}")?,
            Format::JsonLines => writeln!(
                report.out,
                "{}",
                json!({ "record": "header", "command": command, "seed": seed })
            )?,
        }
        Ok(report)
    }

    /// One named record, e.g. a run summary.
    pub fn fields(&mut self, name: &str, fields: Vec<(&str, Cell)>) -> io::Result<()> {
        let (columns, row): (Vec<&str>, Vec<Cell>) = fields.into_iter().unzip();
        self.table(name, &columns, vec![row])
    }

    pub fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<Cell>>) -> io::Result<()> {
        let first = self.tables == 0;
        self.tables += 1;
        match self.format {
            Format::Text => self.text_table(name, columns, &rows),
            Format::Csv => {
                if !first {
                    writeln!(self.out)?;
                }
                writeln!(self.out, "{}", columns.join(","))?;
                for row in &rows {
                    let cells: Vec<String> = row.iter().map(|c| csv_escape(&c.render(true))).collect();
                    writeln!(self.out, "{}", cells.join(","))?;
                }
                Ok(())
            }
            Format::JsonLines => {
                for row in &rows {
                    let mut obj = Map::new();
                    obj.insert("record".into(), json!(name));
                    for (col, cell) in columns.iter().zip(row) {
                        obj.insert((*col).into(), cell.json());
                    }
                    writeln!(self.out, "{}", Value::Object(obj))?;
                }
                Ok(())
            }
        }
    }

    fn text_table(&mut self, name: &str, columns: &[&str], rows: &[Vec<Cell>]) -> io::Result<()> {
        if rows.len() == 1 {
            let width = columns.iter().map(|c| c.len()).max().unwrap_or(0);
            writeln!(self.out, "## {name}")?;
            for (col, cell) in columns.iter().zip(&rows[0]) {
                writeln!(self.out, "{col:<width$}  {}", cell.render(false))?;
            }
            return Ok(());
        }
        let rendered: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|c| c.render(false)).collect())
            .collect();
        let widths: Vec<usize> = columns
            .iter()
            .enumerate()
            .map(|(i, c)| {
                rendered
                    .iter()
                    .map(|r| r.get(i).map_or(0, String::len))
                    .max()
                    .unwrap_or(0)
                    .max(c.len())
            })
            .collect();
        writeln!(self.out, "## {name}")?;
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        writeln!(self.out, "{}", line(columns.to_vec()))?;
        for r in &rendered {
            writeln!(self.out, "{}", line(r.iter().map(String::as_str).collect()))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_rendering() {
        assert_eq!(Cell::Float(f64::INFINITY).render(true), "inf");
        assert_eq!(Cell::Float(0.1).render(true), "0.1");
        assert_eq!(Cell::Float(0.5).render(false), "0.500000");
        assert_eq!(Cell::Float(f64::INFINITY).json(), json!("inf"));
        assert_eq!(Cell::from(None::<f64>).json(), Value::Null);
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
    }
}
