//! Exact posteriors by enumeration: per-labelling masses, set masses, and
//! posterior odds. The normalizer is the log prior-predictive mass of the
//! conditioning graph.

use std::collections::HashMap;
use std::io::Write;

use crate::enumerate::{enumerate_space, ClassFilter};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labelling::Labelling;
use crate::numeric::log_sum_exp;
use crate::prior::Prior;
use crate::probs::EdgeProbs;
use crate::sbm::log_likelihood;
use crate::sets::LabelSet;

/// Posterior odds F = Pi(B|X) / Pi(A|X); infinite when only A has mass zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Odds(pub f64);

/// Exact per-labelling posterior masses over an enumerable family, stored
/// in enumeration (lexicographic) order.
#[derive(Clone, Debug)]
pub struct PosteriorTable {
    entries: Vec<(Labelling, f64)>,
    index: HashMap<Labelling, usize>,
    ln_normalizer: f64,
}

/// entry(theta) proportional to pi(theta) exp(loglik(theta)), normalized by
/// log-sum-exp. Every family labelling is present. Families beyond their
/// enumeration cap error out; use [`crate::mcmc::mcmc_posterior`] there.
pub fn exact_posterior(graph: &Graph, prior: &Prior, probs: &EdgeProbs) -> Result<PosteriorTable> {
    let family = prior.family();
    if graph.n() != family.n() {
        return Err(Error::DimensionMismatch {
            expected: family.n(),
            got: graph.n(),
        });
    }
    let mut entries: Vec<(Labelling, f64)> = Vec::new();
    for lab in enumerate_space(family, ClassFilter::All)? {
        let ln_prior = prior
            .ln_mass(&lab)
            .expect("enumerated labelling is in the family");
        let ln_lik = log_likelihood(graph, &lab, probs)?;
        entries.push((lab, ln_prior + ln_lik));
    }
    if entries.is_empty() {
        return Err(Error::InvalidFamily("family enumerates to nothing".into()));
    }
    let ln_normalizer = log_sum_exp(&entries.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    for (_, v) in entries.iter_mut() {
        *v -= ln_normalizer;
    }
    let index = entries
        .iter()
        .enumerate()
        .map(|(i, (lab, _))| (lab.clone(), i))
        .collect();
    Ok(PosteriorTable {
        entries,
        index,
        ln_normalizer,
    })
}

impl PosteriorTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in enumeration order as (labelling, ln mass).
    pub fn entries(&self) -> &[(Labelling, f64)] {
        &self.entries
    }

    /// ln of the prior predictive mass of the conditioning graph.
    pub fn ln_normalizer(&self) -> f64 {
        self.ln_normalizer
    }

    pub fn ln_mass(&self, lab: &Labelling) -> Option<f64> {
        self.index.get(lab).map(|&i| self.entries[i].1)
    }

    /// Posterior mass of a labelling; zero off the family.
    pub fn mass(&self, lab: &Labelling) -> f64 {
        self.ln_mass(lab).map(f64::exp).unwrap_or(0.0)
    }

    /// Sum of masses over a set.
    pub fn set_mass(&self, set: &LabelSet) -> Result<f64> {
        let mut total = 0.0;
        for (lab, ln) in &self.entries {
            if set.contains(lab)? {
                total += ln.exp();
            }
        }
        Ok(total)
    }

    /// Posterior odds F = mass(B) / mass(A). Checks disjointness on the
    /// enumerated family; errors when both masses vanish.
    pub fn odds(&self, a: &LabelSet, b: &LabelSet) -> Result<Odds> {
        let mut mass_a = 0.0;
        let mut mass_b = 0.0;
        for (lab, ln) in &self.entries {
            let in_a = a.contains(lab)?;
            let in_b = b.contains(lab)?;
            if in_a && in_b {
                return Err(Error::NotDisjoint(lab.to_string()));
            }
            if in_a {
                mass_a += ln.exp();
            }
            if in_b {
                mass_b += ln.exp();
            }
        }
        if mass_a == 0.0 && mass_b == 0.0 {
            return Err(Error::UndefinedOdds);
        }
        if mass_a == 0.0 {
            return Ok(Odds(f64::INFINITY));
        }
        Ok(Odds(mass_b / mass_a))
    }

    /// Highest-mass entry; lexicographic tie-break.
    pub fn argmax(&self) -> (&Labelling, f64) {
        let mut best = 0;
        for i in 1..self.entries.len() {
            if self.entries[i].1 > self.entries[best].1 {
                best = i;
            }
        }
        (&self.entries[best].0, self.entries[best].1.exp())
    }

    /// Entries sorted by mass descending, ties broken lexicographically
    /// ascending on the canonical labels.
    pub fn sorted_entries(&self) -> Vec<(&Labelling, f64)> {
        let mut v: Vec<(&Labelling, f64)> =
            self.entries.iter().map(|(lab, ln)| (lab, *ln)).collect();
        v.sort_by(|(la, lna), (lb, lnb)| {
            lnb.partial_cmp(lna)
                .expect("posterior masses are finite")
                .then_with(|| la.cmp(lb))
        });
        v
    }

    /// CSV export: labelling, log_mass, mass; sorted by mass descending.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "labelling,log_mass,mass")?;
        for (lab, ln) in self.sorted_entries() {
            writeln!(w, "{lab},{ln},{}", ln.exp())?;
        }
        Ok(())
    }
}
