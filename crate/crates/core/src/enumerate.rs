//! Enumeration of the labelling spaces Theta_{n,l} and Theta_n.
//!
//! Canonical labellings are restricted-growth strings, generated in
//! lexicographic order with the class count capped at the family's L_n.
//! The iterator streams, so aggregates over large spaces never materialise
//! the whole space.

use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::labelling::Labelling;

/// Restrict enumeration to one class count or take the whole family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassFilter {
    All,
    Exactly(usize),
}

/// Streaming enumeration of a family in lexicographic canonical order.
pub struct LabellingIter<'a> {
    family: &'a ModelFamily,
    filter: ClassFilter,
    /// Current restricted-growth string; None once exhausted.
    current: Option<Vec<u8>>,
    /// prefix_max[i] = max(current[0..=i]).
    prefix_max: Vec<u8>,
    started: bool,
}

/// All canonical labellings whose size vector is admissible, each exactly
/// once. Errors when n exceeds the family's enumeration cap.
pub fn enumerate_space(family: &ModelFamily, filter: ClassFilter) -> Result<LabellingIter<'_>> {
    if family.n() > family.enum_cap() {
        return Err(Error::EnumerationInfeasible {
            n: family.n(),
            cap: family.enum_cap(),
        });
    }
    let n = family.n();
    Ok(LabellingIter {
        family,
        filter,
        current: Some(vec![0u8; n]),
        prefix_max: vec![0u8; n],
        started: false,
    })
}

/// Convenience: collect the whole family.
pub fn collect_space(family: &ModelFamily, filter: ClassFilter) -> Result<Vec<Labelling>> {
    Ok(enumerate_space(family, filter)?.collect())
}

impl LabellingIter<'_> {
    fn advance(&mut self) {
        let Some(cur) = self.current.as_mut() else {
            return;
        };
        let n = cur.len();
        let cap = (self.family.max_classes() - 1).min(u8::MAX as usize) as u8;
        // rightmost position that can be incremented while staying a
        // restricted-growth string with at most L classes
        let mut i = n;
        loop {
            if i <= 1 {
                self.current = None;
                return;
            }
            i -= 1;
            let limit = (self.prefix_max[i - 1] as u16 + 1).min(cap as u16) as u8;
            if cur[i] < limit {
                break;
            }
        }
        cur[i] += 1;
        self.prefix_max[i] = self.prefix_max[i - 1].max(cur[i]);
        cur[i + 1..n].fill(0);
        let carried = self.prefix_max[i];
        self.prefix_max[i + 1..n].fill(carried);
    }

    fn admissible(&self, labels: &[u8]) -> Option<Labelling> {
        let lab = Labelling::from_canonical(labels.to_vec());
        if let ClassFilter::Exactly(ell) = self.filter {
            if lab.ell() != ell {
                return None;
            }
        }
        if self.family.contains(&lab) {
            Some(lab)
        } else {
            None
        }
    }
}

impl Iterator for LabellingIter<'_> {
    type Item = Labelling;

    fn next(&mut self) -> Option<Labelling> {
        loop {
            if self.started {
                self.advance();
            } else {
                self.started = true;
            }
            let cur = self.current.as_ref()?;
            if let Some(lab) = self.admissible(cur) {
                return Some(lab);
            }
        }
    }
}
