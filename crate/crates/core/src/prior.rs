//! Priors on the labelling space: the hierarchical uniform prior (uniform
//! over class counts, then uniform within the level), the flat uniform
//! prior over the whole space, and explicit user-supplied masses.
//!
//! The two uniform kinds have closed-form log masses through the level
//! cardinalities, so they stay evaluable far beyond enumeration scale,
//! which is what the MCMC engine needs.

use std::collections::BTreeMap;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::enumerate::{collect_space, ClassFilter};
use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::labelling::Labelling;
use crate::numeric::log_sum_exp;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    HierarchicalUniform,
    FlatUniform,
    ExplicitMass,
}

/// A normalized, strictly positive prior mass function on the family.
#[derive(Clone, Debug)]
pub struct Prior {
    kind: PriorKind,
    family: ModelFamily,
    ln_level_counts: BTreeMap<usize, f64>,
    ln_total_count: f64,
    explicit: Option<HashMap<Labelling, f64>>,
}

impl Prior {
    /// l uniform over the non-empty class counts, theta | l uniform over
    /// Theta_{n,l}: pi(theta) = 1 / (|L_n| |Theta_{n,l(theta)}|).
    pub fn hierarchical(family: &ModelFamily) -> Prior {
        Self::uniform_kind(PriorKind::HierarchicalUniform, family)
    }

    /// theta uniform over Theta_n: pi(theta) = 1 / |Theta_n|.
    pub fn flat(family: &ModelFamily) -> Prior {
        Self::uniform_kind(PriorKind::FlatUniform, family)
    }

    pub fn of_kind(kind: PriorKind, family: &ModelFamily) -> Result<Prior> {
        match kind {
            PriorKind::HierarchicalUniform => Ok(Self::hierarchical(family)),
            PriorKind::FlatUniform => Ok(Self::flat(family)),
            PriorKind::ExplicitMass => Err(Error::InvalidArgument(
                "explicit priors need Prior::explicit with a mass table".into(),
            )),
        }
    }

    fn uniform_kind(kind: PriorKind, family: &ModelFamily) -> Prior {
        let ln_level_counts: BTreeMap<usize, f64> = family
            .class_counts()
            .into_iter()
            .map(|l| (l, family.ln_count_level(l)))
            .collect();
        let ln_total_count = log_sum_exp(&ln_level_counts.values().copied().collect::<Vec<_>>());
        Prior {
            kind,
            family: family.clone(),
            ln_level_counts,
            ln_total_count,
            explicit: None,
        }
    }

    /// Explicit masses; must cover every family labelling with positive
    /// mass. Masses are renormalized to sum to one.
    pub fn explicit(family: &ModelFamily, masses: Vec<(Labelling, f64)>) -> Result<Prior> {
        let all = collect_space(family, ClassFilter::All)?;
        let mut table: HashMap<Labelling, f64> = HashMap::with_capacity(all.len());
        for (lab, mass) in masses {
            if !family.contains(&lab) {
                return Err(Error::InvalidArgument(format!(
                    "labelling {lab} is not in the family"
                )));
            }
            if !mass.is_finite() || mass <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "prior mass {mass} at {lab} is not strictly positive"
                )));
            }
            if table.insert(lab.clone(), mass.ln()).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate mass for {lab}")));
            }
        }
        for lab in &all {
            if !table.contains_key(lab) {
                return Err(Error::ZeroPriorMass(lab.to_string()));
            }
        }
        let ln_norm = log_sum_exp(&table.values().copied().collect::<Vec<_>>());
        for v in table.values_mut() {
            *v -= ln_norm;
        }
        let mut prior = Self::uniform_kind(PriorKind::ExplicitMass, family);
        prior.explicit = Some(table);
        Ok(prior)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    /// ln pi(theta); None when theta is outside the family.
    pub fn ln_mass(&self, lab: &Labelling) -> Option<f64> {
        if !self.family.contains(lab) {
            return None;
        }
        match self.kind {
            PriorKind::HierarchicalUniform => {
                let ln_levels = (self.ln_level_counts.len() as f64).ln();
                Some(-ln_levels - self.ln_level_counts[&lab.ell()])
            }
            PriorKind::FlatUniform => Some(-self.ln_total_count),
            PriorKind::ExplicitMass => self.explicit.as_ref().unwrap().get(lab).copied(),
        }
    }

    /// ln pi(Theta_{n,l}).
    pub fn ln_level_mass(&self, ell: usize) -> Option<f64> {
        if !self.family.has_level(ell) {
            return None;
        }
        match self.kind {
            PriorKind::HierarchicalUniform => Some(-(self.ln_level_counts.len() as f64).ln()),
            PriorKind::FlatUniform => Some(self.ln_level_counts[&ell] - self.ln_total_count),
            PriorKind::ExplicitMass => {
                let terms: Vec<f64> = self
                    .explicit
                    .as_ref()
                    .unwrap()
                    .iter()
                    .filter(|(lab, _)| lab.ell() == ell)
                    .map(|(_, &ln)| ln)
                    .collect();
                Some(log_sum_exp(&terms))
            }
        }
    }

    /// K_{n,l}: the largest prior mass ratio within Theta_{n,l}. One for
    /// both uniform kinds.
    pub fn max_ratio_within_level(&self, ell: usize) -> Option<f64> {
        if !self.family.has_level(ell) {
            return None;
        }
        match self.kind {
            PriorKind::HierarchicalUniform | PriorKind::FlatUniform => Some(1.0),
            PriorKind::ExplicitMass => {
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for (lab, &ln) in self.explicit.as_ref().unwrap() {
                    if lab.ell() == ell {
                        lo = lo.min(ln);
                        hi = hi.max(ln);
                    }
                }
                Some((hi - lo).exp())
            }
        }
    }

    /// Smallest ln mass over the family; used to weight bridge states in
    /// the sampler.
    pub fn ln_min_mass(&self) -> f64 {
        match self.kind {
            PriorKind::HierarchicalUniform => {
                let ln_levels = (self.ln_level_counts.len() as f64).ln();
                self.ln_level_counts
                    .values()
                    .map(|&c| -ln_levels - c)
                    .fold(f64::INFINITY, f64::min)
            }
            PriorKind::FlatUniform => -self.ln_total_count,
            PriorKind::ExplicitMass => self
                .explicit
                .as_ref()
                .unwrap()
                .values()
                .copied()
                .fold(f64::INFINITY, f64::min),
        }
    }
}
