//! Sampling from the planted multi-section model and likelihood evaluation.
//!
//! An edge between i < j occurs independently with probability p when the
//! two vertices share a class and q otherwise. Likelihoods are computed in
//! the log domain from the four pair/edge counts, so evaluation is O(n^2)
//! and representation-free.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labelling::Labelling;
use crate::probs::EdgeProbs;

/// Pair-bucket statistics for a labelling pair (theta0, theta):
/// d1 counts pairs within-class under theta0 but split by theta,
/// d2 the reverse; s and t count observed edges inside those buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RatioStats {
    pub d1: u64,
    pub d2: u64,
    pub s: u64,
    pub t: u64,
}

/// Draw a graph from P_theta. Deterministic given the seed; pairs are
/// visited in fixed lexicographic order.
pub fn sample_graph(theta: &Labelling, probs: &EdgeProbs, seed: u64) -> Graph {
    let n = theta.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(n);
    for i in 0..n {
        for j in (i + 1)..n {
            let pr = if theta.same_class(i, j) {
                probs.p()
            } else {
                probs.q()
            };
            if rng.random::<f64>() < pr {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

fn check_n(graph: &Graph, theta: &Labelling) -> Result<()> {
    if graph.n() != theta.n() {
        return Err(Error::DimensionMismatch {
            expected: theta.n(),
            got: graph.n(),
        });
    }
    Ok(())
}

/// Log-likelihood of the graph under theta:
/// sum over i<j of X_ij log Q_ij + (1 - X_ij) log(1 - Q_ij).
pub fn log_likelihood(graph: &Graph, theta: &Labelling, probs: &EdgeProbs) -> Result<f64> {
    check_n(graph, theta)?;
    probs.require_open()?;
    let n = graph.n() as u64;
    let within_pairs = theta.within_pairs();
    let between_pairs = n * (n - 1) / 2 - within_pairs;
    let mut edges_within = 0u64;
    for (i, j) in graph.edges() {
        if theta.same_class(i, j) {
            edges_within += 1;
        }
    }
    let edges_between = graph.edge_count() - edges_within;
    let (p, q) = (probs.p(), probs.q());
    Ok(edges_within as f64 * p.ln()
        + (within_pairs - edges_within) as f64 * (1.0 - p).ln()
        + edges_between as f64 * q.ln()
        + (between_pairs - edges_between) as f64 * (1.0 - q).ln())
}

/// Pair buckets D1, D2 and the edge counts (S, T) inside them.
pub fn likelihood_ratio_stats(
    graph: &Graph,
    theta0: &Labelling,
    theta: &Labelling,
) -> Result<RatioStats> {
    check_n(graph, theta0)?;
    check_n(graph, theta)?;
    let n = graph.n();
    let mut st = RatioStats {
        d1: 0,
        d2: 0,
        s: 0,
        t: 0,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            match (theta0.same_class(i, j), theta.same_class(i, j)) {
                (true, false) => {
                    st.d1 += 1;
                    if graph.has_edge(i, j) {
                        st.s += 1;
                    }
                }
                (false, true) => {
                    st.d2 += 1;
                    if graph.has_edge(i, j) {
                        st.t += 1;
                    }
                }
                _ => {}
            }
        }
    }
    Ok(st)
}

/// log [ p_theta / p_theta0 ](X) via the two-binomial factorisation:
/// (S - T) log[(1-p)q / (p(1-q))] + (|D1| - |D2|) log[(1-q)/(1-p)].
pub fn log_likelihood_ratio(
    graph: &Graph,
    theta0: &Labelling,
    theta: &Labelling,
    probs: &EdgeProbs,
) -> Result<f64> {
    probs.require_open()?;
    let st = likelihood_ratio_stats(graph, theta0, theta)?;
    let (p, q) = (probs.p(), probs.q());
    let edge_term = ((1.0 - p) * q / (p * (1.0 - q))).ln();
    let count_term = ((1.0 - q) / (1.0 - p)).ln();
    Ok((st.s as f64 - st.t as f64) * edge_term + (st.d1 as f64 - st.d2 as f64) * count_term)
}
