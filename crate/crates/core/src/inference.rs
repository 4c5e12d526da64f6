//! Credible sets, their enlargements, the credible-to-confidence
//! conversion, and posterior-odds test decisions.
//!
//! The conversion lemmas are construction-agnostic: any set with posterior
//! mass at least 1 - alpha qualifies. The library fixes one reproducible
//! constructor (highest posterior density with lexicographic tie-breaks)
//! and accepts user-supplied sets through the same types.

use serde::Serialize;

use crate::enumerate::{enumerate_space, ClassFilter};
use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::labelling::Labelling;
use crate::metrics::m_distance;
use crate::posterior::PosteriorTable;
use crate::sets::LabelSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CredibleConstruction {
    Hpd,
    Custom,
}

/// A set of labellings with posterior mass at least the target level.
#[derive(Clone, Debug)]
pub struct CredibleSet {
    pub members: Vec<Labelling>,
    /// 1 - alpha.
    pub level: f64,
    pub attained_mass: f64,
    pub construction: CredibleConstruction,
}

impl CredibleSet {
    pub fn contains(&self, lab: &Labelling) -> bool {
        self.members.contains(lab)
    }

    /// Smallest m-distance from `lab` to the set; membership of the
    /// k-enlargement is `min_m_distance <= k`.
    pub fn min_m_distance(&self, lab: &Labelling) -> Result<u32> {
        let mut best = u32::MAX;
        for m in &self.members {
            best = best.min(m_distance(m, lab)?);
        }
        Ok(best)
    }
}

/// Highest-posterior-density credible set at level 1 - alpha: the shortest
/// prefix of entries sorted by mass descending (ties lexicographic) whose
/// mass reaches 1 - alpha.
pub fn hpd_credible_set(table: &PosteriorTable, alpha: f64) -> Result<CredibleSet> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha={alpha} not in (0,1)"
        )));
    }
    let target = 1.0 - alpha;
    let mut members = Vec::new();
    let mut attained = 0.0;
    for (lab, ln) in table.sorted_entries() {
        members.push(lab.clone());
        attained += ln.exp();
        if attained >= target {
            break;
        }
    }
    Ok(CredibleSet {
        members,
        level: target,
        attained_mass: attained,
        construction: CredibleConstruction::Hpd,
    })
}

/// The k-enlargement: every family labelling within m-distance k of the
/// set. k = 0 returns the members unchanged.
pub fn enlarge(set: &CredibleSet, k: u32, family: &ModelFamily) -> Result<Vec<Labelling>> {
    if k == 0 {
        return Ok(set.members.clone());
    }
    let mut out = Vec::new();
    for lab in enumerate_space(family, ClassFilter::All)? {
        if set.min_m_distance(&lab)? <= k {
            out.push(lab);
        }
    }
    Ok(out)
}

/// A frequentist coverage statement derived from a credible level and a
/// posterior contraction input.
#[derive(Clone, Debug, Serialize)]
pub struct ConfidenceStatement {
    /// 1 - x_n / (1 - alpha).
    pub level: f64,
    pub alpha: f64,
    pub x_n: f64,
    pub k_n: u32,
    pub set_size: Option<usize>,
    /// False when the level is not positive.
    pub informative: bool,
}

/// Convert a credible level into a confidence level: coverage of the
/// (k_n-enlarged) credible set is at least 1 - x_n/(1 - alpha), where x_n
/// bounds the expected posterior mass outside {theta0} (k_n = 0) or outside
/// the m-ball of radius k_n (k_n > 0).
pub fn confidence_from_credible(alpha: f64, x_n: f64, k_n: u32) -> Result<ConfidenceStatement> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha={alpha} not in (0,1)"
        )));
    }
    if !(x_n > 0.0 && x_n < 1.0) {
        return Err(Error::InvalidArgument(format!("x_n={x_n} not in (0,1)")));
    }
    let level = 1.0 - x_n / (1.0 - alpha);
    Ok(ConfidenceStatement {
        level,
        alpha,
        x_n,
        k_n,
        set_size: None,
        informative: level > 0.0,
    })
}

/// Probability that an event with expected posterior mass >= 1 - a has
/// realized mass >= 1 - r: at least 1 - a/r.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EventMassBound {
    pub lower_bound: f64,
    pub informative: bool,
}

pub fn lemma1_event_bound(a: f64, r: f64) -> Result<EventMassBound> {
    if !(a > 0.0 && a < 1.0) || !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need a, r in (0,1); got a={a}, r={r}"
        )));
    }
    let lower_bound = 1.0 - a / r;
    Ok(EventMassBound {
        lower_bound,
        informative: lower_bound > 0.0,
    })
}

/// Optional theory inputs attached to an odds test: contraction rates for
/// the null side (a), the alternative's expected mass (b), and the
/// second-kind contraction used for the power lower bound.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct OddsErrorInputs {
    pub a_n: Option<f64>,
    pub b_n: Option<f64>,
    pub second_kind: Option<f64>,
}

/// The decision record of a posterior-odds test.
#[derive(Clone, Debug, Serialize)]
pub struct OddsDecision {
    /// F = Pi(B|X)/Pi(A|X); may be infinite.
    pub odds: f64,
    pub threshold: f64,
    pub reject_null: bool,
    /// 2 a (1 + 1/r).
    pub first_kind_bound: Option<f64>,
    /// 2 a + 2 b / r.
    pub combined_bound: Option<f64>,
    /// 1 - 2 (1 + r) b'.
    pub power_lower_bound: Option<f64>,
}

/// Reject H0: theta0 in A in favour of H1: theta0 in B when the posterior
/// odds exceed r. The attached bounds restate the theoretical guarantees
/// for whatever contraction inputs are supplied.
pub fn odds_test(
    table: &PosteriorTable,
    a: &LabelSet,
    b: &LabelSet,
    r: f64,
    inputs: OddsErrorInputs,
) -> Result<OddsDecision> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "threshold r={r} must be positive"
        )));
    }
    let odds = table.odds(a, b)?;
    Ok(OddsDecision {
        odds: odds.0,
        threshold: r,
        reject_null: odds.0 > r,
        first_kind_bound: inputs.a_n.map(|a_n| 2.0 * a_n * (1.0 + 1.0 / r)),
        combined_bound: inputs
            .a_n
            .zip(inputs.b_n)
            .map(|(a_n, b_n)| 2.0 * a_n + 2.0 * b_n / r),
        power_lower_bound: inputs.second_kind.map(|b2| 1.0 - 2.0 * (1.0 + r) * b2),
    })
}
