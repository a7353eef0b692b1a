//! CSV point clouds.
//!
//! Lines starting with `#` are comments. A first record containing any
//! non-numeric field is taken as a header.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// A parsed point cloud and its optional column names.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Option<Vec<String>>,
    pub data: Matrix,
}

pub fn read_csv<R: Read>(reader: R) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut header = None;
    let mut values = Vec::new();
    let mut cols = 0;
    let mut rows = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(row) => {
                if rows == 0 {
                    cols = row.len();
                } else if row.len() != cols {
                    return Err(Error::Parse {
                        line,
                        message: format!("expected {cols} fields, found {}", row.len()),
                    });
                }
                if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line,
                        message: format!("field {} is not finite", bad + 1),
                    });
                }
                values.extend(row);
                rows += 1;
            }
            Err(_) if rows == 0 && header.is_none() => {
                header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            }
            Err(_) => {
                let (idx, field) = record
                    .iter()
                    .enumerate()
                    .find(|(_, f)| f.parse::<f64>().is_err())
                    .expect("some field failed to parse");
                return Err(Error::Parse {
                    line,
                    message: format!("field {} (`{field}`) is not a number", idx + 1),
                });
            }
        }
    }
    if rows == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    if let Some(h) = &header {
        if h.len() != cols {
            return Err(Error::Parse {
                line: 1,
                message: format!("header has {} fields but rows have {cols}", h.len()),
            });
        }
    }
    Ok(CsvTable {
        header,
        data: Matrix::from_vec(rows, cols, values)?,
    })
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<CsvTable> {
    read_csv(std::fs::File::open(path)?)
}

/// Writes `data` with leading `# ` comment lines and an optional header.
///
/// Values use Rust's shortest round-trip formatting, so output is
/// byte-identical for identical input.
pub fn write_csv<W: Write>(
    mut w: W,
    data: &Matrix,
    header: Option<&[String]>,
    comments: &[String],
) -> Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    if let Some(h) = header {
        if h.len() != data.cols() {
            return Err(Error::Shape(format!(
                "header has {} names for {} columns",
                h.len(),
                data.cols()
            )));
        }
        writeln!(w, "{}", h.join(","))?;
    }
    let mut line = String::new();
    for row in data.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&v.to_string());
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(
    path: impl AsRef<Path>,
    data: &Matrix,
    header: Option<&[String]>,
    comments: &[String],
) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(file, data, header, comments)
}

/// Column names `prefix1, prefix2, ...`.
pub fn column_names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}
