//! Matrix dump formats.
//!
//! JSON: an array of rows, each row an array of `[re, im]` pairs.
//! CSV: one matrix row per record, entries written as `re+imi` / `re-imi`.
//! Both use shortest round-trip float formatting, so a dump reloads bit for bit.

use super::{c64, CMatrix, C64};
use crate::error::{Error, Result};

pub fn to_json(m: &CMatrix) -> String {
    let rows: Vec<Vec<[f64; 2]>> =
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    serde_json::to_string(&rows).expect("matrix entries serialize")
}

pub fn from_json(text: &str) -> Result<CMatrix> {
    let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(text)?;
    let flat = rows.iter().map(|r| r.iter().map(|&[re, im]| c64(re, im)).collect()).collect();
    assemble(flat)
}

fn format_entry(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn parse_entry(s: &str) -> Result<C64> {
    let s = s.trim();
    let body = s.strip_suffix('i').ok_or_else(|| Error::Parse(format!("entry `{s}` lacks trailing `i`")))?;
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(|| Error::Parse(format!("entry `{s}` is not of the form re+imi")))?;
    let bad = |_| Error::Parse(format!("entry `{s}` has a malformed number"));
    let re: f64 = body[..split].parse().map_err(bad)?;
    let im: f64 = body[split..].replacen('+', "", 1).parse().map_err(bad)?;
    Ok(c64(re, im))
}

pub fn to_csv(m: &CMatrix) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..m.nrows() {
        w.write_record((0..m.ncols()).map(|j| format_entry(m[(i, j)])))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn from_csv(text: &str) -> Result<CMatrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in r.records() {
        rows.push(record?.iter().map(parse_entry).collect::<Result<Vec<_>>>()?);
    }
    assemble(rows)
}

fn assemble(rows: Vec<Vec<C64>>) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix must be square and nonempty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}
