//! Symbolic labelling sets. The contraction and testing statements all
//! quantify over sets of labellings (whole levels, rings, balls, tails),
//! so set masses are aggregated through one predicate type rather than
//! materialised member lists.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labelling::Labelling;
use crate::metrics::{m_distance, r_distance};

/// A resolved set of labellings, with membership decidable pointwise.
#[derive(Clone, Debug, PartialEq)]
pub enum LabelSet {
    All,
    /// Theta_{n,l}.
    Level(usize),
    NotLevel(usize),
    Point(Labelling),
    NotPoint(Labelling),
    /// Theta_{n,l(center)} minus the centre (the set W_{n,l0,1}).
    WithinLevelComplement(Labelling),
    /// V_{n,l0,k}: same level, r-distance exactly k from the centre.
    Ring {
        center: Labelling,
        k: u32,
    },
    /// W_{n,l0,k}: same level, r-distance at least k.
    RTail {
        center: Labelling,
        k: u32,
    },
    /// bar-B_{n,k}: same level, r-distance at most k.
    RBall {
        center: Labelling,
        k: u32,
    },
    /// B_{n,k}: m-distance at most k, any level.
    HammingBall {
        center: Labelling,
        k: u32,
    },
    NotHammingBall {
        center: Labelling,
        k: u32,
    },
}

impl LabelSet {
    /// Membership test. Errors only propagate from the capped r_n search.
    pub fn contains(&self, lab: &Labelling) -> Result<bool> {
        Ok(match self {
            LabelSet::All => true,
            LabelSet::Level(ell) => lab.ell() == *ell,
            LabelSet::NotLevel(ell) => lab.ell() != *ell,
            LabelSet::Point(c) => lab == c,
            LabelSet::NotPoint(c) => lab != c,
            LabelSet::WithinLevelComplement(c) => lab.ell() == c.ell() && lab != c,
            LabelSet::Ring { center, k } => {
                lab.ell() == center.ell() && r_distance(center, lab)? == *k
            }
            LabelSet::RTail { center, k } => {
                lab.ell() == center.ell() && r_distance(center, lab)? >= *k
            }
            LabelSet::RBall { center, k } => {
                lab.ell() == center.ell() && r_distance(center, lab)? <= *k
            }
            LabelSet::HammingBall { center, k } => m_distance(center, lab)? <= *k,
            LabelSet::NotHammingBall { center, k } => m_distance(center, lab)? > *k,
        })
    }

    /// Stable name used in reports.
    pub fn name(&self) -> String {
        match self {
            LabelSet::All => "all".into(),
            LabelSet::Level(l) => format!("model:{l}"),
            LabelSet::NotLevel(l) => format!("not-model:{l}"),
            LabelSet::Point(_) => "point".into(),
            LabelSet::NotPoint(_) => "not-point".into(),
            LabelSet::WithinLevelComplement(_) => "within-model-complement".into(),
            LabelSet::Ring { k, .. } => format!("ring:{k}"),
            LabelSet::RTail { k, .. } => format!("rtail:{k}"),
            LabelSet::RBall { k, .. } => format!("rball:{k}"),
            LabelSet::HammingBall { k, .. } => format!("ball:{k}"),
            LabelSet::NotHammingBall { k, .. } => format!("not-ball:{k}"),
        }
    }
}

/// Unresolved set description as written in configs and on the command
/// line; centre-relative sets are resolved against theta0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    All,
    Level(usize),
    NotLevel(usize),
    Point,
    NotPoint,
    WithinLevelComplement,
    Ring(u32),
    RTail(u32),
    RBall(u32),
    HammingBall(u32),
    NotHammingBall(u32),
}

impl TargetSpec {
    pub fn resolve(&self, theta0: &Labelling) -> LabelSet {
        match *self {
            TargetSpec::All => LabelSet::All,
            TargetSpec::Level(l) => LabelSet::Level(l),
            TargetSpec::NotLevel(l) => LabelSet::NotLevel(l),
            TargetSpec::Point => LabelSet::Point(theta0.clone()),
            TargetSpec::NotPoint => LabelSet::NotPoint(theta0.clone()),
            TargetSpec::WithinLevelComplement => LabelSet::WithinLevelComplement(theta0.clone()),
            TargetSpec::Ring(k) => LabelSet::Ring {
                center: theta0.clone(),
                k,
            },
            TargetSpec::RTail(k) => LabelSet::RTail {
                center: theta0.clone(),
                k,
            },
            TargetSpec::RBall(k) => LabelSet::RBall {
                center: theta0.clone(),
                k,
            },
            TargetSpec::HammingBall(k) => LabelSet::HammingBall {
                center: theta0.clone(),
                k,
            },
            TargetSpec::NotHammingBall(k) => LabelSet::NotHammingBall {
                center: theta0.clone(),
                k,
            },
        }
    }

    /// Whether resolution needs a centre labelling.
    pub fn needs_center(&self) -> bool {
        !matches!(
            self,
            TargetSpec::All | TargetSpec::Level(_) | TargetSpec::NotLevel(_)
        )
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetSpec::All => "all".into(),
            TargetSpec::Level(l) => format!("model:{l}"),
            TargetSpec::NotLevel(l) => format!("not-model:{l}"),
            TargetSpec::Point => "point".into(),
            TargetSpec::NotPoint => "not-point".into(),
            TargetSpec::WithinLevelComplement => "within-model-complement".into(),
            TargetSpec::Ring(k) => format!("ring:{k}"),
            TargetSpec::RTail(k) => format!("rtail:{k}"),
            TargetSpec::RBall(k) => format!("rball:{k}"),
            TargetSpec::HammingBall(k) => format!("ball:{k}"),
            TargetSpec::NotHammingBall(k) => format!("not-ball:{k}"),
        };
        f.write_str(&s)
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<TargetSpec> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<u32> {
            a.ok_or_else(|| Error::Parse(format!("target {s:?} needs an argument")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad target argument in {s:?}")))
        };
        Ok(match (head, arg) {
            ("all", None) => TargetSpec::All,
            ("model", a) => TargetSpec::Level(num(a)? as usize),
            ("not-model", a) => TargetSpec::NotLevel(num(a)? as usize),
            ("point", None) => TargetSpec::Point,
            ("not-point", None) => TargetSpec::NotPoint,
            ("within-model-complement", None) => TargetSpec::WithinLevelComplement,
            ("ring", a) => TargetSpec::Ring(num(a)?),
            ("rtail", a) | ("w", a) => TargetSpec::RTail(num(a)?),
            ("rball", a) => TargetSpec::RBall(num(a)?),
            ("ball", a) => TargetSpec::HammingBall(num(a)?),
            ("not-ball", a) => TargetSpec::NotHammingBall(num(a)?),
            _ => return Err(Error::Parse(format!("unknown target set {s:?}"))),
        })
    }
}

impl Serialize for TargetSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TargetSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
