//! Plain-text matrix format shared by profiles and allocations:
//! a header line `n m` followed by `n` lines of `m` whitespace-separated
//! decimal values.

use std::fmt::Write as _;
use std::path::Path;

use super::{Allocation, ValuationProfile};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn parse_matrix<T: Scalar>(text: &str, origin: &Path) -> Result<Vec<Vec<T>>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse(origin, 1, "missing `n m` header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::parse(origin, header_no + 1, "header must be two positive integers `n m`"))?;
    let [n, m] = dims[..] else {
        return Err(Error::parse(
            origin,
            header_no + 1,
            "header must be two positive integers `n m`",
        ));
    };
    if n == 0 || m == 0 {
        return Err(Error::parse(origin, header_no + 1, "n and m must be positive"));
    }
    let mut rows = Vec::with_capacity(n);
    for (line_no, line) in lines {
        if rows.len() == n {
            return Err(Error::parse(origin, line_no + 1, format!("more than {n} rows")));
        }
        let row: Vec<T> = line
            .split_whitespace()
            .map(|tok| {
                T::parse_decimal(tok)
                    .ok_or_else(|| Error::parse(origin, line_no + 1, format!("not a decimal number: `{tok}`")))
            })
            .collect::<Result<_>>()?;
        if row.len() != m {
            return Err(Error::parse(
                origin,
                line_no + 1,
                format!("expected {m} values, found {}", row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::parse(
            origin,
            text.lines().count().max(1),
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    Ok(rows)
}

pub fn format_matrix<T: Scalar>(rows: &[Vec<T>]) -> String {
    let m = rows.first().map(Vec::len).unwrap_or(0);
    let mut out = format!("{} {}\n", rows.len(), m);
    for row in rows {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).expect("writing to a String");
    }
    out
}

pub fn parse_profile<T: Scalar>(text: &str, origin: &Path) -> Result<ValuationProfile<T>> {
    ValuationProfile::new(parse_matrix(text, origin)?)
}

pub fn parse_allocation<T: Scalar>(text: &str, origin: &Path) -> Result<Allocation<T>> {
    Allocation::from_rows(parse_matrix(text, origin)?)
}

pub fn read_profile<T: Scalar>(path: &Path) -> Result<ValuationProfile<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile(&text, path)
}

pub fn read_allocation<T: Scalar>(path: &Path) -> Result<Allocation<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_allocation(&text, path)
}

pub fn format_profile<T: Scalar>(v: &ValuationProfile<T>) -> String {
    format_matrix(v.rows())
}

pub fn format_allocation<T: Scalar>(p: &Allocation<T>) -> String {
    format_matrix(p.rows())
}
