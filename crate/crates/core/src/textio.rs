//! Plain-text vectors (one value per line) and dense matrices
//! (whitespace-separated, one row per line). Blank lines and `#` comments
//! are skipped.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linops::Dense;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn parse_num(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("not a number: {tok:?}") })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("value must be finite: {tok:?}") });
    }
    Ok(v)
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        let mut toks = l.split_whitespace();
        let tok = toks.next().unwrap();
        if toks.next().is_some() {
            return Err(Error::Parse { line, msg: "expected one value per line".into() });
        }
        out.push(parse_num(tok, line)?);
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty vector".into() });
    }
    Ok(out)
}

pub fn parse_matrix(text: &str) -> Result<Dense> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, l) in content_lines(text) {
        let row = l.split_whitespace().map(|t| parse_num(t, line)).collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line,
                    msg: format!("row has {} entries, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty matrix".into() });
    }
    Dense::from_rows(&rows)
}

/// One value per line, shortest round-trip representation.
pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::with_capacity(v.len() * 20);
    for x in v {
        let _ = writeln!(s, "{x}");
    }
    s
}

pub fn format_matrix(m: &Dense) -> String {
    let cols = crate::linops::LinearOperator::shape(m).1;
    let mut s = String::new();
    for row in m.data().chunks(cols) {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vector(&text)
}

pub fn read_matrix(path: &Path) -> Result<Dense> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    std::fs::write(path, format_vector(v)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
