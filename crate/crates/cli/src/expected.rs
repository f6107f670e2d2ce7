//! Reference values shipped with the binary.

use std::collections::BTreeMap;

const TABLE1: &str = include_str!("../data/table1.txt");
const TABLE2: &str = include_str!("../data/table2.txt");
const TABLE3: &str = include_str!("../data/table3.txt");

/// A reference cell: an exact value or only a lower bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Exact(u64),
    AtLeast(u64),
}

impl Expected {
    fn parse(s: &str) -> Option<Self> {
        match s.strip_prefix(">=") {
            Some(rest) => rest.parse().ok().map(Expected::AtLeast),
            None => s.parse().ok().map(Expected::Exact),
        }
    }

    /// Compares a computed value (exact or a lower bound) with this cell.
    pub fn check(self, value: u64, exact: bool) -> Check {
        match self {
            Expected::Exact(e) if value > e || (exact && value < e) => Check::Mismatch,
            Expected::Exact(e) if value == e && exact => Check::Match,
            Expected::AtLeast(b) if exact && value < b => Check::Mismatch,
            Expected::AtLeast(b) if value >= b => Check::Match,
            _ => Check::Incomplete,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Match,
    Mismatch,
    /// The budget ran out before the value could be confirmed.
    Incomplete,
}

impl std::fmt::Display for Expected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expected::Exact(v) => write!(f, "{v}"),
            Expected::AtLeast(v) => write!(f, ">= {v}"),
        }
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().collect())
}

/// `(n, m) -> I(n, m)`.
pub fn table1() -> BTreeMap<(u32, usize), Expected> {
    data_lines(TABLE1)
        .map(|f| {
            let n = f[0].parse().expect("table1 n");
            let m = f[1].parse().expect("table1 m");
            ((n, m), Expected::parse(f[2]).expect("table1 value"))
        })
        .collect()
}

fn by_n(text: &str) -> BTreeMap<u32, Expected> {
    data_lines(text)
        .map(|f| (f[0].parse().expect("n"), Expected::parse(f[1]).expect("value")))
        .collect()
}

/// `n -> ` maximum without three collinear points in `Z_n^2`.
pub fn table2() -> BTreeMap<u32, Expected> {
    by_n(TABLE2)
}

/// `n -> ` maximum in general position in `Z_n^2`.
pub fn table3() -> BTreeMap<u32, Expected> {
    by_n(TABLE3)
}
