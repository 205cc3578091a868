//! Plain-text hypergraph format.
//!
//! ```text
//! # comment
//! k n m
//! v1 v2 ... vk      (m lines, 0-based)
//! ```

use std::fmt::Write as _;

use super::Hypergraph;
use crate::error::{Error, Result};

pub fn parse_hypergraph(text: &str) -> Result<Hypergraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse { line: 0, message: "missing header `k n m`".into() })?;
    let nums = parse_numbers(hline, header)?;
    let [k, n, m] = nums[..] else {
        return Err(Error::Parse { line: hline, message: format!("header must be `k n m`, got {header:?}") });
    };
    if k < 2 {
        return Err(Error::Parse { line: hline, message: format!("uniformity must be at least 2, got {k}") });
    }

    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines.by_ref().take(m) {
        let e = parse_numbers(line, body)?;
        if e.len() != k {
            return Err(Error::Parse { line, message: format!("expected {k} vertices, found {}", e.len()) });
        }
        if let Some(v) = e.iter().find(|&&v| v >= n) {
            return Err(Error::Parse { line, message: format!("vertex {v} out of range 0..{n}") });
        }
        let mut s = e.clone();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parse { line, message: "repeated vertex in edge".into() });
        }
        edges.push(e);
    }
    if edges.len() != m {
        return Err(Error::Parse { line: hline, message: format!("header announces {m} edges, found {}", edges.len()) });
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::Parse { line, message: format!("more than the announced {m} edges") });
    }
    Hypergraph::build(k, n, edges)
}

fn parse_numbers(line: usize, body: &str) -> Result<Vec<usize>> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| Error::Parse { line, message: format!("not a nonnegative integer: {tok:?}") })
        })
        .collect()
}

pub fn write_hypergraph(h: &Hypergraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", h.k(), h.n(), h.edge_count());
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
