//! Matrix and report file formats.
//!
//! * CSV: comma separated, `.` decimal point, optional single header line.
//!   A header cell named `label` marks the class-label column.
//! * raw-f64: 16-byte header (`N`, `d` as little-endian `u64`) followed by
//!   `N·d` little-endian `f64` values in row-major order.
//! * Reports: pretty-printed JSON.
//!
//! Every writer goes through a temporary file in the destination directory
//! followed by a rename, so readers never observe a partial file.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::report::Report;
use crate::scalar::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    Csv,
    RawF64,
}

impl MatrixFormat {
    /// Guesses the format from the file extension (`.bin`/`.f64` → raw).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("f64") | Some("raw") => MatrixFormat::RawF64,
            _ => MatrixFormat::Csv,
        }
    }
}

impl FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(MatrixFormat::Csv),
            "raw-f64" | "raw" => Ok(MatrixFormat::RawF64),
            other => Err(Error::InvalidParameter(format!("unknown matrix format {other:?}"))),
        }
    }
}

pub fn load_matrix(path: impl AsRef<Path>, format: MatrixFormat) -> Result<DataMatrix<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    match format {
        MatrixFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|_| Error::Format {
                path: path.into(),
                msg: "not valid UTF-8".into(),
            })?;
            parse_csv(path, &text, name)
        }
        MatrixFormat::RawF64 => parse_raw(path, &bytes, name),
    }
}

fn parse_csv(path: &Path, text: &str, name: String) -> Result<DataMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();

    let Some(&(_, first)) = lines.peek() else {
        return Err(Error::NoRows { path: path.into() });
    };
    let first_cells: Vec<&str> = first.split(',').map(str::trim).collect();
    let is_header = first_cells.iter().any(|c| c.parse::<f64>().is_err());
    let label_col = if is_header {
        lines.next();
        first_cells.iter().position(|c| c.eq_ignore_ascii_case("label"))
    } else {
        None
    };
    let width = first_cells.len();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n_rows = 0usize;
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(Error::RaggedRow {
                path: path.into(),
                row: line_no,
                expected: width,
                found: cells.len(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                path: path.into(),
                row: line_no,
                col: c + 1,
                text: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    path: path.into(),
                    row: line_no,
                    col: c + 1,
                });
            }
            if Some(c) == label_col {
                if v < 0.0 || v.fract() != 0.0 {
                    return Err(Error::Format {
                        path: path.into(),
                        msg: format!("row {line_no}: label {cell:?} is not a non-negative integer"),
                    });
                }
                labels.push(v as usize);
            } else {
                values.push(v);
            }
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::NoRows { path: path.into() });
    }
    let d = width - usize::from(label_col.is_some());
    let m = Matrix::from_row_slice(n_rows, d, &values);
    let labels = label_col.map(|_| labels);
    DataMatrix::new(m, labels, name).map_err(|e| Error::Format {
        path: path.into(),
        msg: e.to_string(),
    })
}

fn parse_raw(path: &Path, bytes: &[u8], name: String) -> Result<DataMatrix<f64>> {
    if bytes.is_empty() {
        return Err(Error::NoRows { path: path.into() });
    }
    let fmt_err = |msg: String| Error::Format { path: path.into(), msg };
    if bytes.len() < 16 {
        return Err(fmt_err(format!(
            "{} bytes is shorter than the 16-byte header",
            bytes.len()
        )));
    }
    let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let d = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if n == 0 {
        return Err(Error::NoRows { path: path.into() });
    }
    let expected = n
        .checked_mul(d)
        .and_then(|c| c.checked_mul(8))
        .and_then(|c| c.checked_add(16))
        .ok_or_else(|| fmt_err(format!("header {n}x{d} overflows")))?;
    if bytes.len() != expected {
        return Err(fmt_err(format!(
            "header says {n}x{d} ({expected} bytes), file has {} bytes",
            bytes.len()
        )));
    }
    let mut values = Vec::with_capacity(n * d);
    for (idx, chunk) in bytes[16..].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::NonFinite {
                path: path.into(),
                row: idx / d + 1,
                col: idx % d + 1,
            });
        }
        values.push(v);
    }
    let m = Matrix::from_row_slice(n, d, &values);
    DataMatrix::new(m, None, name).map_err(|e| fmt_err(e.to_string()))
}

/// Something that can be written by [`write_output`].
pub trait Output {
    fn write_to(&self, w: &mut dyn Write) -> io::Result<()>;
}

impl Output for Report {
    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut *w, self)?;
        w.write_all(b"\n")
    }
}

impl Output for DataMatrix<f64> {
    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        let d = self.n_features();
        if self.labels().is_some() {
            let mut header: Vec<String> = (0..d).map(|j| format!("f{j}")).collect();
            header.push("label".into());
            writeln!(w, "{}", header.join(","))?;
        }
        let vals = self.values();
        for i in 0..self.n_points() {
            for j in 0..d {
                if j > 0 {
                    w.write_all(b",")?;
                }
                // `{}` on f64 prints the shortest representation that round-trips
                write!(w, "{}", vals[(i, j)])?;
            }
            if let Some(l) = self.labels() {
                write!(w, ",{}", l[i])?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl Output for Matrix<f64> {
    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        for i in 0..self.nrows() {
            let row: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// A CSV table with a header row, used for embeddings tagged with row ids.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Output for Table {
    fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Writes `item` to `path` atomically (temporary file plus rename).
pub fn write_output(item: &dyn Output, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    atomic_write(path, |w| item.write_to(w))
}

/// Writes a matrix in the raw-f64 format.
pub fn write_raw_f64(m: &Matrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    atomic_write(path, |w| {
        w.write_all(&(m.nrows() as u64).to_le_bytes())?;
        w.write_all(&(m.ncols() as u64).to_le_bytes())?;
        for i in 0..m.nrows() {
            for v in m.row(i).iter() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    })
}

fn atomic_write(path: &Path, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        f(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
