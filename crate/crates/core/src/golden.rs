//! Reference zero tables and limit rows shipped with the crate, and comparison
//! of an atlas against them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zeros::{Atlas, CongruenceClass};

const ZEROS_17_32: &str = include_str!("../data/zeros_17_32.jsonl");
const ZEROS_33_64: &str = include_str!("../data/zeros_33_64.jsonl");
const LIMIT_ROWS: &str = include_str!("../data/limit_rows.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    /// Minimum attained by a single term.
    Open,
    Filled,
    /// One of two zeros deep inside a class.
    Pair,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenZero {
    pub log_modulus: u32,
    pub residue: u64,
    pub mark: Mark,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<u64>,
}

impl GoldenZero {
    pub fn class(&self) -> CongruenceClass {
        CongruenceClass { log_modulus: self.log_modulus, residue: self.residue }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub n: u64,
    pub zeros: Vec<GoldenZero>,
}

/// Parse line-delimited rows; blank lines and `#` comments are skipped.
pub fn parse_zero_table(text: &str) -> Result<Vec<GoldenRow>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| serde_json::from_str(l).map_err(|e| Error::Parse(format!("{e}: {l}"))))
        .collect()
}

/// Built-in zero table rows for `n` in `17..=64`.
pub fn builtin_zero_table() -> Vec<GoldenRow> {
    let mut rows = parse_zero_table(ZEROS_17_32).expect("bundled table parses");
    rows.extend(parse_zero_table(ZEROS_33_64).expect("bundled table parses"));
    rows
}

/// Built-in rows restricted to `lo..=hi`.
pub fn zero_table(lo: u64, hi: u64) -> Vec<GoldenRow> {
    builtin_zero_table().into_iter().filter(|r| (lo..=hi).contains(&r.n)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LimitRow {
    pub e: u32,
    pub n0: u32,
    pub bits: String,
    pub diff: Option<u64>,
}

pub fn parse_limit_rows(text: &str) -> Result<Vec<LimitRow>> {
    let bad = |l: &str| Error::Parse(format!("bad limit row: {l}"));
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad(l));
            }
            Ok(LimitRow {
                e: f[0].parse().map_err(|_| bad(l))?,
                n0: f[1].parse().map_err(|_| bad(l))?,
                bits: f[2].to_string(),
                diff: if f[3] == "-" { None } else { Some(f[3].parse().map_err(|_| bad(l))?) },
            })
        })
        .collect()
}

pub fn builtin_limit_rows() -> Vec<LimitRow> {
    parse_limit_rows(LIMIT_ROWS).expect("bundled rows parse")
}

/// One disagreement between an atlas and a reference row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Mismatch {
    MissingN(u64),
    MissingZero { n: u64, class: CongruenceClass },
    ExtraZero { n: u64, class: CongruenceClass },
    Constant { n: u64, class: CongruenceClass, expected: u64, found: u64 },
    Unresolved { n: u64, class: CongruenceClass },
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mismatch::MissingN(n) => write!(f, "n = {n}: not in atlas"),
            Mismatch::MissingZero { n, class } => write!(f, "n = {n}: expected a zero in {class}"),
            Mismatch::ExtraZero { n, class } => write!(f, "n = {n}: unexpected zero in {class}"),
            Mismatch::Constant { n, class, expected, found } => {
                write!(f, "n = {n}: {class} has c = {found}, expected {expected}")
            }
            Mismatch::Unresolved { n, class } => write!(f, "n = {n}: {class} unresolved"),
        }
    }
}

/// Structural comparison: the exact set of zero classes per `n`, plus `c`
/// wherever the reference records it.
pub fn compare(atlas: &Atlas, rows: &[GoldenRow]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for row in rows {
        if atlas.reports(row.n).is_none() {
            out.push(Mismatch::MissingN(row.n));
            continue;
        }
        let found = atlas.zeros(row.n);
        let have: BTreeSet<CongruenceClass> = found.iter().map(|z| z.class).collect();
        let want: BTreeSet<CongruenceClass> = row.zeros.iter().map(|z| z.class()).collect();
        for class in want.difference(&have) {
            out.push(Mismatch::MissingZero { n: row.n, class: *class });
        }
        for class in have.difference(&want) {
            out.push(Mismatch::ExtraZero { n: row.n, class: *class });
        }
        for g in &row.zeros {
            if let (Some(c), Some(z)) = (g.c, found.iter().find(|z| z.class == g.class())) {
                if z.c != c {
                    out.push(Mismatch::Constant { n: row.n, class: g.class(), expected: c, found: z.c });
                }
            }
        }
        for u in atlas.unresolved(row.n) {
            out.push(Mismatch::Unresolved { n: row.n, class: u.class });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables() {
        let rows = builtin_zero_table();
        assert_eq!(rows.len(), 48);
        assert_eq!(rows.first().unwrap().n, 17);
        assert_eq!(rows.last().unwrap().n, 64);
        let r21 = rows.iter().find(|r| r.n == 21).unwrap();
        assert_eq!(r21.zeros.len(), 8);
        let r53 = rows.iter().find(|r| r.n == 53).unwrap();
        let in4: Vec<_> = r53.zeros.iter().filter(|z| z.residue % 16 == 4).collect();
        assert_eq!(in4.len(), 3);
        let lim = builtin_limit_rows();
        assert_eq!(lim.len(), 12);
        assert_eq!(lim[0].bits, "011011101000");
        assert_eq!(lim.iter().filter_map(|r| r.diff).collect::<Vec<_>>(), vec![4, 7, 6, 8, 10, 9, 11, 12, 12]);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_zero_table("{\"n\": 3}").is_err());
        assert!(parse_limit_rows("4 4 0101").is_err());
        assert!(parse_zero_table("# only a comment\n\n").unwrap().is_empty());
    }
}
