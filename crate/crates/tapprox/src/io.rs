//! Text formats.
//!
//! A tensor file starts with the header `t3 m1 m2 m3` followed by
//! `m1*m2*m3` reals in storage order (last index fastest). A matrix file uses
//! the header `mat rows cols` followed by the entries row by row. Blank lines
//! and lines starting with `#` are ignored; values may be split across lines
//! freely. Values are written with 17 significant digits so that reading a
//! written file reproduces every bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use tapprox_core::{DenseTensor3, Matrix};

use crate::error::{CliError, CliResult};

/// Tokens with the line number they came from.
fn tokens(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(n, l)| l.split_whitespace().map(move |tok| (n + 1, tok)))
}

fn parse_header<'a>(
    toks: &mut impl Iterator<Item = (usize, &'a str)>,
    tag: &str,
    count: usize,
) -> CliResult<(usize, Vec<usize>)> {
    let (line, first) = toks
        .next()
        .ok_or_else(|| CliError::parse(1, format!("missing `{tag}` header")))?;
    if first != tag {
        return Err(CliError::parse(
            line,
            format!("expected `{tag}` header, found `{first}`"),
        ));
    }
    let mut dims = Vec::with_capacity(count);
    for _ in 0..count {
        match toks.next() {
            Some((l, tok)) if l == line => {
                let d: usize = tok
                    .parse()
                    .map_err(|_| CliError::parse(line, format!("invalid dimension `{tok}`")))?;
                if d == 0 {
                    return Err(CliError::parse(line, "dimensions must be positive"));
                }
                dims.push(d);
            }
            _ => {
                return Err(CliError::parse(
                    line,
                    format!("`{tag}` header needs {count} dimensions"),
                ))
            }
        }
    }
    Ok((line, dims))
}

fn parse_values<'a>(
    toks: &mut impl Iterator<Item = (usize, &'a str)>,
    header_line: usize,
    expected: usize,
) -> CliResult<Vec<f64>> {
    let mut values = Vec::with_capacity(expected);
    let mut last_line = header_line;
    for (line, tok) in toks {
        if values.len() == expected {
            return Err(CliError::parse(line, format!("more than {expected} values")));
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| CliError::parse(line, format!("invalid number `{tok}`")))?;
        if !v.is_finite() {
            return Err(CliError::parse(line, format!("non-finite value `{tok}`")));
        }
        values.push(v);
        last_line = line;
    }
    if values.len() != expected {
        return Err(CliError::parse(
            last_line,
            format!("expected {expected} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

pub fn parse_tensor(text: &str) -> CliResult<DenseTensor3> {
    let mut toks = tokens(text);
    let (line, dims) = parse_header(&mut toks, "t3", 3)?;
    let dims = [dims[0], dims[1], dims[2]];
    let values = parse_values(&mut toks, line, dims.iter().product())?;
    Ok(DenseTensor3::new(dims, values)?)
}

pub fn parse_matrix(text: &str) -> CliResult<Matrix> {
    let mut toks = tokens(text);
    let (line, dims) = parse_header(&mut toks, "mat", 2)?;
    let values = parse_values(&mut toks, line, dims[0] * dims[1])?;
    Ok(Matrix::new(dims[0], dims[1], values)?)
}

fn push_row(out: &mut String, row: &[f64]) {
    for (n, v) in row.iter().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        write!(out, "{v:.16e}").expect("writing to a String");
    }
    out.push('\n');
}

/// One line per `(i, j)` fiber.
pub fn format_tensor(t: &DenseTensor3) -> String {
    let [m1, m2, m3] = t.dims();
    let mut out = format!("t3 {m1} {m2} {m3}\n");
    for fiber in t.as_slice().chunks(m3) {
        push_row(&mut out, fiber);
    }
    out
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("mat {} {}\n", m.rows(), m.cols());
    for row in m.as_slice().chunks(m.cols()) {
        push_row(&mut out, row);
    }
    out
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_tensor(path: &Path) -> CliResult<DenseTensor3> {
    parse_tensor(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let vals = [
            0.1,
            -1.0 / 3.0,
            1e-300,
            6.02214076e23,
            -0.0,
            f64::MAX,
            f64::MIN_POSITIVE,
            2.0_f64.sqrt(),
        ];
        let t = DenseTensor3::new([2, 2, 2], vals.to_vec()).unwrap();
        let back = parse_tensor(&format_tensor(&t)).unwrap();
        for (a, b) in t.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let m = Matrix::new(2, 3, vals[..6].to_vec()).unwrap();
        assert_eq!(parse_matrix(&format_matrix(&m)).unwrap(), m);
    }

    #[test]
    fn comments_and_free_layout() {
        let t = parse_tensor("# hello\n\nt3 1 2 2\n1 2\n  # mid\n3\n4\n").unwrap();
        assert_eq!(t.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |text: &str| match parse_tensor(text) {
            Err(CliError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("# c\nt2 1 1 1\n0"), 2);
        assert_eq!(line_of("t3 1 1\n0"), 1);
        assert_eq!(line_of("t3 1 0 1\n"), 1);
        assert_eq!(line_of("t3 1 1 2\n0\nx\n"), 3);
        assert_eq!(line_of("t3 1 1 2\n0 1\n2\n"), 3);
        assert_eq!(line_of("t3 1 1 3\n0 1\n"), 2);
        assert_eq!(line_of("t3 1 1 1\nNaN\n"), 2);
        assert_eq!(line_of("t3 1 1 1\n\ninf\n"), 3);
        assert!(parse_matrix("mat 2 2\n1 2 3\n").is_err());
    }
}
