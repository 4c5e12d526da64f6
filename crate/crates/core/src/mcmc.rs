//! Metropolis-Hastings over the labelling space, for posteriors beyond
//! enumeration scale.
//!
//! The chain alternates two reversible kernels, mixed 50/50 by default:
//!
//! * swap: exchange the classes of two vertices in different classes. This
//!   preserves the size vector, and because the move acts on partitions as
//!   an involution the proposal is symmetric, so the acceptance ratio is
//!   just the target ratio.
//! * relabel: move one vertex to another existing class or to a fresh
//!   singleton. This walks between size vectors; proposals that leave the
//!   family's size-vector set are rejected. The proposal is not symmetric
//!   (target counts differ and several raw moves can coincide on
//!   partitions), so the acceptance ratio carries the exact forward and
//!   reverse proposal masses, obtained by enumerating the single-vertex
//!   moves that map one partition to the other.
//!
//! A mixture of kernels that are each in detailed balance with the target
//! is again in detailed balance, so no cross-kernel proposal mass is needed.
//!
//! Families whose size vectors are not connected under single-vertex moves
//! (e.g. {(8), (4,4)}) make the restricted chain reducible. In that case
//! the sampler surfaces a warning and runs on the bridged space of all
//! partitions with at most L classes, giving bridge states a small
//! reference mass; family-set masses are then estimated by the
//! self-normalized conditional frequency given family membership, which
//! leaves the estimates consistent for the true posterior.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labelling::Labelling;
use crate::prior::Prior;
use crate::probs::EdgeProbs;
use crate::sbm::log_likelihood;
use crate::sets::LabelSet;

#[derive(Clone, Copy, Debug)]
pub struct McmcOptions {
    pub steps: usize,
    /// Fraction of steps discarded as burn-in (default 0.1).
    pub burn_in_fraction: f64,
    /// Probability of proposing a swap move (default 0.5).
    pub swap_probability: f64,
    pub seed: u64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        McmcOptions {
            steps: 100_000,
            burn_in_fraction: 0.1,
            swap_probability: 0.5,
            seed: 0,
        }
    }
}

/// A set-mass estimate with a batch-means standard error.
#[derive(Clone, Debug)]
pub struct SetEstimate {
    pub target: String,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug)]
pub struct McmcReport {
    pub estimates: Vec<SetEstimate>,
    /// Weighted visit frequencies over family labellings (post burn-in).
    pub label_frequencies: Vec<(Labelling, f64)>,
    pub swap_proposed: u64,
    pub swap_accepted: u64,
    pub relabel_proposed: u64,
    pub relabel_accepted: u64,
    pub steps: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub bridged: bool,
    pub reducibility_warning: Option<String>,
}

/// One Markov chain state: per-vertex labels plus the canonical form.
struct ChainState {
    assignment: Vec<u8>,
    canonical: Labelling,
    ln_target: f64,
}

/// The sampler itself; step-level access supports streaming use.
pub struct McmcSampler<'a> {
    graph: &'a Graph,
    prior: &'a Prior,
    probs: &'a EdgeProbs,
    l_cap: usize,
    bridged: bool,
    ln_bridge_mass: f64,
    swap_probability: f64,
    state: ChainState,
    pub swap_proposed: u64,
    pub swap_accepted: u64,
    pub relabel_proposed: u64,
    pub relabel_accepted: u64,
}

/// Two sorted size vectors are adjacent when one single-vertex move maps
/// one to the other.
fn size_vectors_adjacent(a: &[u32], b: &[u32]) -> bool {
    if a == b {
        return false;
    }
    let mut moved = Vec::new();
    for (donor, _) in a.iter().enumerate() {
        // move one vertex out of class `donor` into each other class or a new one
        for target in 0..=a.len() {
            if target == donor {
                continue;
            }
            let mut v: Vec<u32> = a.to_vec();
            if target == a.len() {
                // new singleton
                if v[donor] == 1 {
                    continue; // null move
                }
                v[donor] -= 1;
                v.push(1);
            } else {
                v[target] += 1;
                v[donor] -= 1;
                if v[donor] == 0 {
                    v.remove(donor);
                }
            }
            v.sort_unstable();
            moved.push(v);
        }
    }
    moved.iter().any(|v| v.as_slice() == b)
}

/// BFS over the family's size vectors under single-vertex moves.
pub fn family_size_vectors_connected(prior: &Prior) -> bool {
    let family = prior.family();
    let mut vectors: Vec<Vec<u32>> = Vec::new();
    for l in family.class_counts() {
        vectors.extend(family.allowed(l).iter().cloned());
    }
    if vectors.len() <= 1 {
        return true;
    }
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(0usize);
    queue.push_back(0usize);
    while let Some(i) = queue.pop_front() {
        for j in 0..vectors.len() {
            if !seen.contains(&j) && size_vectors_adjacent(&vectors[i], &vectors[j]) {
                seen.insert(j);
                queue.push_back(j);
            }
        }
    }
    seen.len() == vectors.len()
}

impl<'a> McmcSampler<'a> {
    pub fn new(
        graph: &'a Graph,
        prior: &'a Prior,
        probs: &'a EdgeProbs,
        start: &Labelling,
        opts: &McmcOptions,
    ) -> Result<McmcSampler<'a>> {
        let family = prior.family();
        if graph.n() != family.n() {
            return Err(Error::DimensionMismatch {
                expected: family.n(),
                got: graph.n(),
            });
        }
        if !(0.0..=1.0).contains(&opts.swap_probability) {
            return Err(Error::InvalidArgument(
                "swap probability not in [0,1]".into(),
            ));
        }
        probs.require_open()?;
        let bridged = !family_size_vectors_connected(prior);
        if !family.contains(start) {
            return Err(Error::InvalidArgument(format!(
                "start labelling {start} is outside the family"
            )));
        }
        let ln_bridge_mass = prior.ln_min_mass();
        let mut sampler = McmcSampler {
            graph,
            prior,
            probs,
            l_cap: family.max_classes(),
            bridged,
            ln_bridge_mass,
            swap_probability: opts.swap_probability,
            state: ChainState {
                assignment: start.labels().to_vec(),
                canonical: start.clone(),
                ln_target: 0.0,
            },
            swap_proposed: 0,
            swap_accepted: 0,
            relabel_proposed: 0,
            relabel_accepted: 0,
        };
        sampler.state.ln_target = sampler
            .ln_target(&sampler.state.canonical)
            .expect("start state has positive target mass");
        Ok(sampler)
    }

    pub fn bridged(&self) -> bool {
        self.bridged
    }

    pub fn state(&self) -> &Labelling {
        &self.state.canonical
    }

    /// ln of the unnormalized chain target; None for zero-mass states.
    fn ln_target(&self, lab: &Labelling) -> Option<f64> {
        let ln_prior = match self.prior.ln_mass(lab) {
            Some(v) => v,
            None if self.bridged && lab.ell() <= self.l_cap => self.ln_bridge_mass,
            None => return None,
        };
        let ln_lik = log_likelihood(self.graph, lab, self.probs)
            .expect("probabilities validated at construction");
        Some(ln_prior + ln_lik)
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) {
        if rng.random::<f64>() < self.swap_probability {
            self.swap_step(rng);
        } else {
            self.relabel_step(rng);
        }
    }

    /// Swap kernel: uniform over vertex pairs in different classes;
    /// symmetric proposal, Metropolis acceptance on the target ratio.
    fn swap_step<R: Rng>(&mut self, rng: &mut R) {
        let n = self.graph.n();
        if self.state.canonical.ell() < 2 {
            return; // no cross-class pair exists
        }
        self.swap_proposed += 1;
        // rejection-sample a cross-class pair (uniform over cross pairs)
        let (i, j) = loop {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..n);
            if i != j && self.state.assignment[i] != self.state.assignment[j] {
                break (i, j);
            }
        };
        let mut proposal = self.state.assignment.clone();
        proposal.swap(i, j);
        let canonical = Labelling::from_labels(&proposal).expect("nonempty");
        let Some(ln_target) = self.ln_target(&canonical) else {
            return;
        };
        let log_accept = ln_target - self.state.ln_target;
        if log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp() {
            self.swap_accepted += 1;
            self.state = ChainState {
                assignment: canonical.labels().to_vec(),
                canonical,
                ln_target,
            };
        }
    }

    /// Relabel kernel: move one vertex to another existing class or a new
    /// singleton; Metropolis-Hastings acceptance with exact proposal masses.
    fn relabel_step<R: Rng>(&mut self, rng: &mut R) {
        let n = self.graph.n();
        let lab = &self.state.canonical;
        let i = rng.random_range(0..n);
        let targets = relabel_targets(lab, i, self.l_cap);
        if targets.is_empty() {
            return;
        }
        self.relabel_proposed += 1;
        let t = targets[rng.random_range(0..targets.len())];
        let proposal = apply_relabel(lab, i, t);
        let Some(ln_target) = self.ln_target(&proposal) else {
            return; // leaves the admissible size vectors
        };
        let q_forward = relabel_proposal_mass(lab, &proposal, self.l_cap);
        let q_reverse = relabel_proposal_mass(&proposal, lab, self.l_cap);
        debug_assert!(q_forward > 0.0);
        let log_accept = ln_target - self.state.ln_target + q_reverse.ln() - q_forward.ln();
        if log_accept >= 0.0 || rng.random::<f64>() < log_accept.exp() {
            self.relabel_accepted += 1;
            self.state = ChainState {
                assignment: proposal.labels().to_vec(),
                canonical: proposal,
                ln_target,
            };
        }
    }

    /// 1 when the current state is a family member (bridge states weigh 0).
    fn family_weight(&self) -> f64 {
        if !self.bridged || self.prior.family().contains(&self.state.canonical) {
            1.0
        } else {
            0.0
        }
    }
}

/// Relabel target for vertex i: an existing class id, or `ell` for a new
/// singleton class.
type RelabelTarget = u8;

fn relabel_targets(lab: &Labelling, vertex: usize, l_cap: usize) -> Vec<RelabelTarget> {
    let ell = lab.ell();
    let own = lab.label_of(vertex);
    let own_count = lab.class_count(own as usize);
    let mut targets = Vec::with_capacity(ell + 1);
    for c in 0..ell as u8 {
        if c != own {
            targets.push(c);
        }
    }
    if own_count >= 2 && ell < l_cap {
        targets.push(ell as u8); // fresh singleton
    }
    targets
}

fn apply_relabel(lab: &Labelling, vertex: usize, target: RelabelTarget) -> Labelling {
    let mut raw = lab.labels().to_vec();
    raw[vertex] = target;
    Labelling::from_labels(&raw).expect("nonempty")
}

/// Total proposal probability q(from -> to) of the relabel kernel: several
/// (vertex, target) moves may produce the same partition, and the per-move
/// mass depends on the source's target count.
pub(crate) fn relabel_proposal_mass(from: &Labelling, to: &Labelling, l_cap: usize) -> f64 {
    let n = from.n();
    let mut total = 0.0;
    for i in 0..n {
        let targets = relabel_targets(from, i, l_cap);
        if targets.is_empty() {
            continue;
        }
        let per_move = 1.0 / (n as f64 * targets.len() as f64);
        for &t in &targets {
            if apply_relabel(from, i, t) == *to {
                total += per_move;
            }
        }
    }
    total
}

/// Run the chain and estimate set masses (batch-means standard errors).
pub fn mcmc_posterior(
    graph: &Graph,
    prior: &Prior,
    probs: &EdgeProbs,
    start: &Labelling,
    targets: &[LabelSet],
    opts: &McmcOptions,
) -> Result<McmcReport> {
    if opts.steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    if !(0.0..1.0).contains(&opts.burn_in_fraction) {
        return Err(Error::InvalidArgument(
            "burn-in fraction not in [0,1)".into(),
        ));
    }
    let mut sampler = McmcSampler::new(graph, prior, probs, start, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let burn_in = (opts.steps as f64 * opts.burn_in_fraction).ceil() as usize;
    let kept = opts.steps.saturating_sub(burn_in);
    if kept == 0 {
        return Err(Error::InvalidArgument("no steps left after burn-in".into()));
    }
    let n_batches = (kept as f64).sqrt().floor().max(2.0) as usize;
    let batch_len = kept.div_ceil(n_batches);

    // per-target running sums: overall and per batch (weighted indicators)
    let mut weight_total = 0.0f64;
    let mut hit_total = vec![0.0f64; targets.len()];
    let mut batch_weights: Vec<f64> = Vec::with_capacity(n_batches);
    let mut batch_hits: Vec<Vec<f64>> = Vec::with_capacity(n_batches);
    let mut cur_weight = 0.0f64;
    let mut cur_hits = vec![0.0f64; targets.len()];
    let mut visits: HashMap<Labelling, f64> = HashMap::new();

    for step in 0..opts.steps {
        sampler.step(&mut rng);
        if step < burn_in {
            continue;
        }
        let w = sampler.family_weight();
        if w > 0.0 {
            weight_total += w;
            cur_weight += w;
            *visits.entry(sampler.state().clone()).or_insert(0.0) += w;
            for (t, set) in targets.iter().enumerate() {
                if set.contains(sampler.state())? {
                    hit_total[t] += w;
                    cur_hits[t] += w;
                }
            }
        }
        let kept_index = step - burn_in + 1;
        if kept_index.is_multiple_of(batch_len) || kept_index == kept {
            batch_weights.push(cur_weight);
            batch_hits.push(std::mem::replace(&mut cur_hits, vec![0.0; targets.len()]));
            cur_weight = 0.0;
        }
    }

    if weight_total == 0.0 {
        return Err(Error::InvalidArgument(
            "chain never visited the family; increase steps".into(),
        ));
    }

    let mut estimates = Vec::with_capacity(targets.len());
    for (t, set) in targets.iter().enumerate() {
        let mean = hit_total[t] / weight_total;
        // batch means of the ratio estimator
        let ratios: Vec<f64> = batch_weights
            .iter()
            .zip(batch_hits.iter())
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, h)| h[t] / w)
            .collect();
        let m = ratios.len().max(1) as f64;
        let var =
            ratios.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (m * (m - 1.0).max(1.0));
        estimates.push(SetEstimate {
            target: set.name(),
            mean,
            std_error: var.sqrt(),
        });
    }

    let mut label_frequencies: Vec<(Labelling, f64)> = visits
        .into_iter()
        .map(|(lab, w)| (lab, w / weight_total))
        .collect();
    label_frequencies.sort_by(|a, b| a.0.cmp(&b.0));

    let reducibility_warning = sampler.bridged.then(|| {
        "family size vectors are not connected under single-vertex relabel moves; \
         chain bridged through inadmissible size vectors and estimates reweighted"
            .to_string()
    });

    Ok(McmcReport {
        estimates,
        label_frequencies,
        swap_proposed: sampler.swap_proposed,
        swap_accepted: sampler.swap_accepted,
        relabel_proposed: sampler.relabel_proposed,
        relabel_accepted: sampler.relabel_accepted,
        steps: opts.steps,
        burn_in,
        seed: opts.seed,
        bridged: sampler.bridged,
        reducibility_warning,
    })
}
