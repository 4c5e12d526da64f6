//! Undirected simple graphs stored as an upper-triangular adjacency bit set.

use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Simple graph on vertices 0..n (no self-loops, no multi-edges). Only pairs
/// (i, j) with i < j are stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    bits: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        let npairs = n * n.saturating_sub(1) / 2;
        Graph {
            n,
            bits: vec![0u64; npairs.div_ceil(64)],
        }
    }

    /// Build from 0-based vertex pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for &(i, j) in edges {
            g.check_pair(i, j)?;
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "bad vertex pair ({}, {}) for n={}",
                i, j, self.n
            )));
        }
        Ok(())
    }

    fn pair_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let idx = self.pair_index(i, j);
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        let idx = self.pair_index(i, j);
        if present {
            self.bits[idx / 64] |= 1 << (idx % 64);
        } else {
            self.bits[idx / 64] &= !(1 << (idx % 64));
        }
    }

    pub fn edge_count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// 0-based edge list, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count() as usize);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// File format: line 1 `n=<int>`, then one `i j` edge per line, 1-based,
    /// i < j, newline-terminated.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n={}", self.n)?;
        for (i, j) in self.edges() {
            writeln!(w, "{} {}", i + 1, j + 1)?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Graph> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty graph file".into()))??;
        let n: usize = header
            .strip_prefix("n=")
            .ok_or_else(|| Error::Parse(format!("expected n=<int>, got {header:?}")))?
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad vertex count in {header:?}")))?;
        if n == 0 {
            return Err(Error::Parse("vertex count must be positive".into()));
        }
        let mut g = Graph::empty(n);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let (a, b) = match (it.next(), it.next(), it.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(Error::Parse(format!("bad edge line {line:?}"))),
            };
            let i: usize = a
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex {a:?}")))?;
            let j: usize = b
                .parse()
                .map_err(|_| Error::Parse(format!("bad vertex {b:?}")))?;
            if !(1 <= i && i < j && j <= n) {
                return Err(Error::Parse(format!(
                    "edge {i} {j} violates 1 <= i < j <= {n}"
                )));
            }
            if g.has_edge(i - 1, j - 1) {
                return Err(Error::Parse(format!("duplicate edge {i} {j}")));
            }
            g.set_edge(i - 1, j - 1, true);
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("graph text is ASCII")
    }

    pub fn from_text(s: &str) -> Result<Graph> {
        Graph::read_from(s.as_bytes())
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.edge_count())
    }
}
