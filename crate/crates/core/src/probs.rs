//! Edge probabilities for the planted multi-section model, with the three
//! sparsity regimes used by the worked examples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparsity regime tag. Chernoff-Hellinger means p = a log(n)/n and
/// q = b log(n)/n; Kesten-Stigum means p = c/n and q = d/n.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "kebab-case")]
pub enum Phase {
    Dense,
    ChernoffHellinger { a: f64, b: f64 },
    KestenStigum { c: f64, d: f64 },
    Explicit,
}

/// Within-class probability p and between-class probability q.
///
/// Degenerate p, q in {0, 1} are accepted so that deterministic sampling
/// fixtures stay expressible; likelihood operations reject them via
/// [`EdgeProbs::require_open`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeProbs {
    p: f64,
    q: f64,
    phase: Phase,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) || v.is_nan() {
        return Err(Error::InvalidProbability(format!(
            "{name}={v} not in [0,1]"
        )));
    }
    Ok(())
}

fn check_open(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::InvalidProbability(format!(
            "{name}={v} not in (0,1)"
        )));
    }
    Ok(())
}

impl EdgeProbs {
    /// Arbitrary probabilities in [0,1]; endpoints allowed for sampling only.
    pub fn explicit(p: f64, q: f64) -> Result<EdgeProbs> {
        check_unit("p", p)?;
        check_unit("q", q)?;
        Ok(EdgeProbs {
            p,
            q,
            phase: Phase::Explicit,
        })
    }

    /// Dense phase: p, q fixed in (0,1).
    pub fn dense(p: f64, q: f64) -> Result<EdgeProbs> {
        check_open("p", p)?;
        check_open("q", q)?;
        Ok(EdgeProbs {
            p,
            q,
            phase: Phase::Dense,
        })
    }

    /// Chernoff-Hellinger phase at this n: p = a log(n)/n, q = b log(n)/n.
    pub fn chernoff_hellinger(n: usize, a: f64, b: f64) -> Result<EdgeProbs> {
        if n < 2 {
            return Err(Error::InvalidArgument(
                "need n >= 2 for log(n)/n scaling".into(),
            ));
        }
        let scale = (n as f64).ln() / n as f64;
        let (p, q) = (a * scale, b * scale);
        check_open("p=a*log(n)/n", p)?;
        check_open("q=b*log(n)/n", q)?;
        Ok(EdgeProbs {
            p,
            q,
            phase: Phase::ChernoffHellinger { a, b },
        })
    }

    /// Kesten-Stigum phase at this n: p = c/n, q = d/n.
    pub fn kesten_stigum(n: usize, c: f64, d: f64) -> Result<EdgeProbs> {
        if n < 1 {
            return Err(Error::InvalidArgument("need n >= 1".into()));
        }
        let (p, q) = (c / n as f64, d / n as f64);
        check_open("p=c/n", p)?;
        check_open("q=d/n", q)?;
        Ok(EdgeProbs {
            p,
            q,
            phase: Phase::KestenStigum { c, d },
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Likelihood evaluations need p, q strictly inside (0,1).
    pub fn require_open(&self) -> Result<()> {
        check_open("p", self.p)?;
        check_open("q", self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_allowed_only_for_sampling() {
        let probs = EdgeProbs::explicit(1.0, 0.0).unwrap();
        assert!(probs.require_open().is_err());
        assert!(EdgeProbs::dense(1.0, 0.5).is_err());
        assert!(EdgeProbs::explicit(1.2, 0.5).is_err());
        assert!(EdgeProbs::explicit(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn phase_scalings() {
        let n = 100;
        let ch = EdgeProbs::chernoff_hellinger(n, 2.0, 1.0).unwrap();
        assert!((ch.p() - 2.0 * (100f64).ln() / 100.0).abs() < 1e-15);
        let ks = EdgeProbs::kesten_stigum(n, 5.0, 1.0).unwrap();
        assert!((ks.p() - 0.05).abs() < 1e-15);
        assert!((ks.q() - 0.01).abs() < 1e-15);
        // scalings leaving (0,1) are rejected
        assert!(EdgeProbs::chernoff_hellinger(4, 5.0, 1.0).is_err());
        assert!(EdgeProbs::kesten_stigum(4, 5.0, 1.0).is_err());
    }
}
