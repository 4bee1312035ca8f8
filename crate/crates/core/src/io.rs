//! Matrix interchange: plain CSV and a raw little-endian binary format.
//!
//! The binary layout is the 4-byte magic `APMX`, `n_rows` and `n_cols` as `u64`,
//! then `n_rows · n_cols` `f64` values in row-major order, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

pub const BINARY_MAGIC: &[u8; 4] = b"APMX";

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub skip_header: bool,
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<DataMatrix> {
    load_csv_with(path, CsvOptions::default())
}

pub fn load_csv_with(path: impl AsRef<Path>, opts: CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(BufReader::new(file), opts)
}

/// Parses CSV text. Row and column numbers in errors are 1-based.
pub fn read_csv<R: Read>(reader: R, opts: CsvOptions) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.skip_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut values = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        // a blank line is a record with a single empty field
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *n_cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                row,
                expected,
                found: record.len(),
            });
        }
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                col: c + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: row - 1,
                    col: c,
                });
            }
            values.push(v);
        }
        n_rows += 1;
    }
    DataMatrix::from_vec(n_rows, n_cols.unwrap_or(0), values)
}

pub fn save_csv(m: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_csv_with_header(m, None, path)
}

/// Writes `m` as CSV, optionally preceded by one header row.
///
/// Values use Rust's shortest round-trip float formatting, so loading the file
/// back reproduces every entry exactly.
pub fn save_csv_with_header(
    m: &DataMatrix,
    header: Option<&[&str]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv(m, header, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv<W: Write>(m: &DataMatrix, header: Option<&[&str]>, out: &mut W) -> std::io::Result<()> {
    if let Some(h) = header {
        writeln!(out, "{}", h.join(","))?;
    }
    for i in 0..m.n_rows() {
        let line: Vec<String> = m.row_slice(i).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn save_binary(m: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(m.n_rows() as u64).to_le_bytes())?;
        out.write_all(&(m.n_cols() as u64).to_le_bytes())?;
        for v in m.as_slice() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

pub fn load_binary(path: impl AsRef<Path>) -> Result<DataMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_binary(&bytes)
}

pub fn decode_binary(bytes: &[u8]) -> Result<DataMatrix> {
    if bytes.len() < 20 || &bytes[..4] != BINARY_MAGIC {
        return Err(Error::Format("missing APMX header".into()));
    }
    let u64_at = |off: usize| u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    let (n_rows, n_cols) = (u64_at(4) as usize, u64_at(12) as usize);
    let expected = n_rows
        .checked_mul(n_cols)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Format("dimensions overflow".into()))?;
    let body = &bytes[20..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "expected {expected} data bytes for {n_rows}x{n_cols}, found {}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DataMatrix::from_vec(n_rows, n_cols, values)
}

/// Loads by extension: `.bin`/`.apmx` as binary, anything else as CSV.
pub fn load_matrix(path: impl AsRef<Path>, opts: CsvOptions) -> Result<DataMatrix> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("bin") | Some("apmx") => load_binary(path),
        _ => load_csv_with(path, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DataMatrix> {
        read_csv(text.as_bytes(), CsvOptions::default())
    }

    #[test]
    fn parses_square() {
        let m = parse("1,2\n3,4").unwrap();
        assert_eq!(m, DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
    }

    #[test]
    fn ragged_row_reports_row_number() {
        match parse("1,2\n3").unwrap_err() {
            Error::RaggedRow { row, expected, found } => {
                assert_eq!((row, expected, found), (2, 2, 1));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parse_error_has_coordinates() {
        match parse("1,x").unwrap_err() {
            Error::Parse { row, col, value } => {
                assert_eq!((row, col, value.as_str()), (1, 2, "x"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn header_row_is_skipped_on_request() {
        let m = read_csv("a,b\n1,2\n".as_bytes(), CsvOptions { skip_header: true }).unwrap();
        assert_eq!((m.n_rows(), m.n_cols()), (1, 2));
    }

    #[test]
    fn single_value_file() {
        let m = DataMatrix::from_rows(&[vec![42.0]]).unwrap();
        let mut buf = Vec::new();
        write_csv(&m, None, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "42\n");
    }

    #[test]
    fn empty_matrix_roundtrip() {
        let m = DataMatrix::zeros(0, 0);
        let mut buf = Vec::new();
        write_csv(&m, None, &mut buf).unwrap();
        assert!(buf.is_empty());
        let back = parse("").unwrap();
        assert_eq!((back.n_rows(), back.n_cols()), (0, 0));
    }

    #[test]
    fn binary_rejects_truncated_body() {
        let m = DataMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        save_binary(&m, &p).unwrap();
        let mut bytes = std::fs::read(&p).unwrap();
        bytes.pop();
        assert!(matches!(decode_binary(&bytes), Err(Error::Format(_))));
        assert_eq!(load_binary(&p).unwrap(), m);
    }
}
