//! Plain-text matrix/vector serialization and float formatting.
//!
//! Matrices: first line `m n`, then `m` lines of `n` space-separated
//! decimal floats. Vectors: first line `n`, then one line of `n` floats.
//! All floats use 17 significant digits so that write/read round-trips are
//! lossless.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Formats one float with 17 significant digits ('.' decimal, no
/// separators), the exact form used in text files and CSV.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializes a matrix to the text format.
pub fn matrix_to_string(a: &Matrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", a.rows(), a.cols());
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|&v| format_float(v)).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

/// Serializes a vector to the text format.
pub fn vector_to_string(x: &Vector) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", x.len());
    let row: Vec<String> = x.as_slice().iter().map(|&v| format_float(v)).collect();
    let _ = writeln!(s, "{}", row.join(" "));
    s
}

fn parse_float(tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| Error::Parse(format!("bad float '{tok}'")))
}

fn parse_count(tok: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::Parse(format!("bad count '{tok}'")))
}

/// Lines with content, skipping blanks and '#' comments.
fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Parses a matrix from the text format.
pub fn matrix_from_string(text: &str) -> Result<Matrix> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    let m = parse_count(parts.next().ok_or_else(|| Error::Parse("missing row count".into()))?)?;
    let n = parse_count(
        parts
            .next()
            .ok_or_else(|| Error::Parse("missing column count".into()))?,
    )?;
    let mut data = Vec::with_capacity(m * n);
    for i in 0..m {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("matrix row {i} missing")))?;
        let row: Vec<f64> = line
            .split_whitespace()
            .map(parse_float)
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(Error::Parse(format!(
                "matrix row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        data.extend(row);
    }
    Matrix::new(m, n, data)
}

/// Parses a vector from the text format.
pub fn vector_from_string(text: &str) -> Result<Vector> {
    let mut lines = content_lines(text);
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty vector file".into()))?;
    let n = parse_count(header.split_whitespace().next().unwrap_or(""))?;
    let line = lines
        .next()
        .ok_or_else(|| Error::Parse("vector entries missing".into()))?;
    let data: Vec<f64> = line
        .split_whitespace()
        .map(parse_float)
        .collect::<Result<_>>()?;
    if data.len() != n {
        return Err(Error::Parse(format!(
            "vector has {} entries, expected {n}",
            data.len()
        )));
    }
    Vector::new(data)
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    std::fs::write(path, matrix_to_string(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    matrix_from_string(&std::fs::read_to_string(path)?)
}

pub fn write_vector(path: &Path, x: &Vector) -> Result<()> {
    std::fs::write(path, vector_to_string(x))?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vector> {
    vector_from_string(&std::fs::read_to_string(path)?)
}

/// Parses a flat `key = value` config file; '#' starts a comment, blank
/// lines are ignored. Later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse(format!(
                "config line {}: expected 'key = value', got '{line}'",
                lineno + 1
            )));
        };
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::GaussianRng;

    #[test]
    fn float_formatting_is_17_significant_digits() {
        let s = format_float(std::f64::consts::PI);
        assert_eq!(s, "3.1415926535897931e0");
        assert_eq!(s.parse::<f64>().unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn matrix_round_trip_is_lossless() {
        let mut rng = GaussianRng::new(3);
        let a = Matrix::new(4, 7, rng.gaussian_vec(28)).unwrap();
        let b = matrix_from_string(&matrix_to_string(&a)).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn vector_round_trip_is_lossless() {
        let mut rng = GaussianRng::new(5);
        let x = Vector::new(rng.gaussian_vec(11)).unwrap();
        let y = vector_from_string(&vector_to_string(&x)).unwrap();
        for i in 0..11 {
            assert_eq!(x[i].to_bits(), y[i].to_bits());
        }
    }

    #[test]
    fn malformed_inputs_are_parse_errors() {
        assert!(matrix_from_string("").is_err());
        assert!(matrix_from_string("2 2\n1 2\n3").is_err());
        assert!(matrix_from_string("2 2\n1 2\n3 oops").is_err());
        assert!(vector_from_string("3\n1 2").is_err());
    }

    #[test]
    fn config_parsing_handles_comments_and_whitespace() {
        let pairs = parse_config("# header\n eps = 4.5 # inline\n\nlambda=5\n").unwrap();
        assert_eq!(
            pairs,
            vec![
                ("eps".to_string(), "4.5".to_string()),
                ("lambda".to_string(), "5".to_string())
            ]
        );
        assert!(parse_config("no equals sign").is_err());
    }
}
