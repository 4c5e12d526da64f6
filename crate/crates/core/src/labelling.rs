//! Vertex class assignments, stored canonically so that each value is a
//! unique representative of its equivalence class under permutation of the
//! class labels.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A class assignment for `n` vertices in canonical restricted-growth form:
/// internally 0-based, and the first occurrence of class k precedes the
/// first occurrence of class k+1. Canonicalisation is O(n) and makes
/// equality, hashing and ordering representation-free. Printed 1-based.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labelling {
    labels: Vec<u8>,
    /// Vertex count per canonical class, indexed by class id.
    class_counts: Vec<u32>,
    /// Class sizes sorted ascending (the size vector m).
    sizes: Vec<u32>,
}

impl Labelling {
    /// Build from any representation; labels may use arbitrary values.
    pub fn from_labels<T: Copy + Eq>(raw: &[T]) -> Result<Labelling> {
        if raw.is_empty() {
            return Err(Error::InvalidLabelling("empty label vector".into()));
        }
        let mut seen: Vec<T> = Vec::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &v in raw {
            let id = match seen.iter().position(|&s| s == v) {
                Some(i) => i,
                None => {
                    seen.push(v);
                    if seen.len() > u8::MAX as usize {
                        return Err(Error::InvalidLabelling(format!(
                            "more than {} classes",
                            u8::MAX
                        )));
                    }
                    seen.len() - 1
                }
            };
            labels.push(id as u8);
        }
        Ok(Self::from_canonical(labels))
    }

    /// `labels` must already be in restricted-growth form.
    pub(crate) fn from_canonical(labels: Vec<u8>) -> Labelling {
        debug_assert!(is_restricted_growth(&labels));
        let ell = labels.iter().copied().max().unwrap() as usize + 1;
        let mut class_counts = vec![0u32; ell];
        for &l in &labels {
            class_counts[l as usize] += 1;
        }
        let mut sizes = class_counts.clone();
        sizes.sort_unstable();
        Labelling {
            labels,
            class_counts,
            sizes,
        }
    }

    /// All vertices in one class.
    pub fn single_class(n: usize) -> Labelling {
        Self::from_canonical(vec![0; n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct classes.
    pub fn ell(&self) -> usize {
        self.class_counts.len()
    }

    /// Canonical 0-based labels.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label_of(&self, vertex: usize) -> u8 {
        self.labels[vertex]
    }

    pub fn same_class(&self, i: usize, j: usize) -> bool {
        self.labels[i] == self.labels[j]
    }

    /// Class sizes sorted ascending.
    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Vertex count of canonical class `c`.
    pub fn class_count(&self, c: usize) -> u32 {
        self.class_counts[c]
    }

    /// Smallest and largest class size.
    pub fn min_size(&self) -> u32 {
        self.sizes[0]
    }

    pub fn max_size(&self) -> u32 {
        *self.sizes.last().unwrap()
    }

    /// Number of unordered vertex pairs in the same class.
    pub fn within_pairs(&self) -> u64 {
        self.class_counts
            .iter()
            .map(|&c| c as u64 * (c as u64 - 1) / 2)
            .sum()
    }

    /// ell_self x ell_other matrix of co-occurrence counts:
    /// entry (a, b) = #{vertices with class a here and class b there}.
    pub fn overlap_matrix(&self, other: &Labelling) -> Result<Vec<Vec<u32>>> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        let mut m = vec![vec![0u32; other.ell()]; self.ell()];
        for i in 0..self.n() {
            m[self.labels[i] as usize][other.labels[i] as usize] += 1;
        }
        Ok(m)
    }
}

fn is_restricted_growth(labels: &[u8]) -> bool {
    let mut max_seen: i32 = -1;
    for &l in labels {
        if l as i32 > max_seen + 1 {
            return false;
        }
        max_seen = max_seen.max(l as i32);
    }
    !labels.is_empty()
}

impl fmt::Display for Labelling {
    /// Space-separated 1-based labels on one line, the on-disk format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", l + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Labelling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Labelling({})", self)
    }
}

impl FromStr for Labelling {
    type Err = Error;

    /// Accepts space- or comma-separated positive integers.
    fn from_str(s: &str) -> Result<Labelling> {
        let raw: Vec<u32> = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad label {t:?}")))
            })
            .collect::<Result<_>>()?;
        Labelling::from_labels(&raw)
    }
}
