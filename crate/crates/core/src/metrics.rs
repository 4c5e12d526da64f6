//! Metrics on the labelling space and the combinatorial bounds attached to
//! them: the overlap metric r_n, the permutation-Hamming metric m_n, rings
//! and balls around a centre, the Stirling cardinality bound, and the
//! closed-form lower bounds on |D1 u D2|.
//!
//! r_n minimises a bottleneck objective over relative label matchings, which
//! assignment algorithms do not solve directly, so it is computed by
//! exhaustive search over injective matchings of the smaller class count
//! into the larger (capped, default 8 classes). m_n reduces to a
//! maximum-agreement linear assignment and is solved by the Hungarian
//! algorithm in O(l^3) with no cap.

use crate::error::{Error, Result};
use crate::family::ModelFamily;
use crate::labelling::Labelling;
use crate::numeric::ln_choose;

/// Default cap on the class count for the exhaustive r_n search (8! = 40320
/// matchings). Configuration, not a constant: use [`r_distance_capped`].
pub const DEFAULT_PERM_CAP: usize = 8;

/// r_n(theta, eta): minimum over representation pairs of the largest
/// off-diagonal class-overlap count. Zero iff the labellings are equal.
pub fn r_distance(a: &Labelling, b: &Labelling) -> Result<u32> {
    r_distance_capped(a, b, DEFAULT_PERM_CAP)
}

pub fn r_distance_capped(a: &Labelling, b: &Labelling, cap: usize) -> Result<u32> {
    let (small, big) = if a.ell() <= b.ell() { (a, b) } else { (b, a) };
    let ell_big = big.ell();
    if ell_big > cap {
        return Err(Error::PermutationCapExceeded { ell: ell_big, cap });
    }
    let overlap = small.overlap_matrix(big)?;
    let (rows, cols) = (small.ell(), big.ell());

    // Choosing representations amounts to choosing an injective matching f
    // of small-side classes into big-side classes; the identified pairs are
    // the diagonal ones, and r is the largest overlap entry off the
    // matching: max over rows u of g[u][f(u)], with
    // g[u][v] = max_{v' != v} overlap[u][v'].
    let mut g = vec![vec![0u32; cols]; rows];
    for (u, g_row) in g.iter_mut().enumerate() {
        for (v, cell) in g_row.iter_mut().enumerate() {
            *cell = overlap[u]
                .iter()
                .enumerate()
                .filter(|(v2, _)| *v2 != v)
                .map(|(_, &o)| o)
                .max()
                .unwrap_or(0);
        }
    }
    let mut best = u32::MAX;
    let mut used = vec![false; cols];
    search_bottleneck(&g, 0, 0, &mut used, &mut best);
    Ok(best)
}

fn search_bottleneck(g: &[Vec<u32>], row: usize, current: u32, used: &mut [bool], best: &mut u32) {
    if current >= *best {
        return;
    }
    if row == g.len() {
        *best = current;
        return;
    }
    for v in 0..used.len() {
        if !used[v] {
            used[v] = true;
            search_bottleneck(g, row + 1, current.max(g[row][v]), used, best);
            used[v] = false;
        }
    }
}

/// m_n(theta, eta): minimum over representation pairs of the Hamming
/// distance, i.e. n minus the maximum-agreement assignment between classes.
pub fn m_distance(a: &Labelling, b: &Labelling) -> Result<u32> {
    let overlap = a.overlap_matrix(b)?;
    let k = a.ell().max(b.ell());
    let mut w = vec![vec![0i64; k]; k];
    for (u, row) in overlap.iter().enumerate() {
        for (v, &c) in row.iter().enumerate() {
            w[u][v] = c as i64;
        }
    }
    let agree = max_assignment(&w);
    Ok(a.n() as u32 - agree as u32)
}

/// Maximum-weight square assignment (Hungarian with potentials, O(k^3)).
pub(crate) fn max_assignment(w: &[Vec<i64>]) -> i64 {
    let k = w.len();
    if k == 0 {
        return 0;
    }
    let inf = i64::MAX / 4;
    // minimise cost = -w; 1-based with a virtual column 0
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut matched = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for i in 1..=k {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| w[matched[j] - 1][j - 1]).sum()
}

/// The ring V_{n,l0,k}: members of Theta_{n,l0} at r_n-distance exactly k
/// from the centre. k may not exceed floor(m_{n,l0,max} / 2).
pub fn ring_members(center: &Labelling, k: u32, family: &ModelFamily) -> Result<Vec<Labelling>> {
    let ell0 = center.ell();
    let m_max = family
        .m_max(ell0)
        .ok_or_else(|| Error::InvalidArgument(format!("family has no level {ell0}")))?;
    if 2 * k > m_max {
        return Err(Error::InvalidArgument(format!(
            "ring radius {k} exceeds m_max/2 = {}",
            m_max as f64 / 2.0
        )));
    }
    let mut out = Vec::new();
    for lab in
        crate::enumerate::enumerate_space(family, crate::enumerate::ClassFilter::Exactly(ell0))?
    {
        if r_distance(center, &lab)? == k {
            out.push(lab);
        }
    }
    Ok(out)
}

/// The r-ball within the centre's level (the set written bar-B).
pub fn r_ball_members(center: &Labelling, k: u32, family: &ModelFamily) -> Result<Vec<Labelling>> {
    let ell0 = center.ell();
    let mut out = Vec::new();
    for lab in
        crate::enumerate::enumerate_space(family, crate::enumerate::ClassFilter::Exactly(ell0))?
    {
        if r_distance(center, &lab)? <= k {
            out.push(lab);
        }
    }
    Ok(out)
}

/// The Hamming ball B_{n,k} over the whole family.
pub fn hamming_ball_members(
    center: &Labelling,
    k: u32,
    family: &ModelFamily,
) -> Result<Vec<Labelling>> {
    let mut out = Vec::new();
    for lab in crate::enumerate::enumerate_space(family, crate::enumerate::ClassFilter::All)? {
        if m_distance(center, &lab)? <= k {
            out.push(lab);
        }
    }
    Ok(out)
}

/// Stirling number of the second kind V(n, l), exact (u128 saturating is
/// plenty at desk scale). An independent route against enumeration counts.
pub fn stirling2(n: u64, ell: u64) -> u128 {
    if ell == 0 || ell > n {
        return if n == 0 && ell == 0 { 1 } else { 0 };
    }
    // V(n,l) = l V(n-1,l) + V(n-1,l-1)
    let mut row: Vec<u128> = vec![0; ell as usize + 1];
    row[0] = 1; // V(0,0)
    for i in 1..=n {
        let top = ell.min(i) as usize;
        for j in (1..=top).rev() {
            row[j] = row[j].saturating_mul(j as u128).saturating_add(row[j - 1]);
        }
        row[0] = 0;
    }
    row[ell as usize]
}

/// ln of the Stirling upper bound (1/2) C(n,l) l^(n-l).
pub fn stirling_ln_upper_bound(n: u64, ell: u64) -> f64 {
    0.5f64.ln() + ln_choose(n, ell) + (n as f64 - ell as f64) * (ell as f64).ln()
}

pub fn stirling_upper_bound(n: u64, ell: u64) -> f64 {
    stirling_ln_upper_bound(n, ell).exp()
}

/// ln of the ring-cardinality bound 2^{k l(l-1)} C(n(l-1), l(l-1)k), valid
/// for 1 <= k <= the centre's smallest class size.
pub fn ring_cardinality_ln_bound(n: u64, ell: u64, k: u64) -> f64 {
    let e = k * ell * (ell - 1);
    e as f64 * 2f64.ln() + ln_choose(n * (ell - 1), e)
}

/// ln of the looser closed form (2en/(kl))^{l(l-1)k}.
pub fn ring_cardinality_ln_bound_loose(n: u64, ell: u64, k: u64) -> f64 {
    let e = (ell * (ell - 1) * k) as f64;
    e * (2.0 * std::f64::consts::E * n as f64 / (k as f64 * ell as f64)).ln()
}

/// Cross-model lower bound on |D1 u D2|: n(m_{l0^l,min} - m_{l0vl,max})/2.
/// Needs nested class sizes; may be a half-integer, callers compare 2x.
pub fn d_union_cross_lower_bound(family: &ModelFamily, ell0: usize, ell: usize) -> Result<f64> {
    if ell0 == ell {
        return Err(Error::InvalidArgument(
            "cross-model bound needs distinct class counts".into(),
        ));
    }
    family.require_nested_class_sizes()?;
    let (lo, hi) = (ell0.min(ell), ell0.max(ell));
    let m_min = family
        .m_min(lo)
        .ok_or_else(|| Error::InvalidArgument(format!("family has no level {lo}")))?;
    let m_max = family
        .m_max(hi)
        .ok_or_else(|| Error::InvalidArgument(format!("family has no level {hi}")))?;
    Ok(0.5 * family.n() as f64 * (m_min as f64 - m_max as f64))
}

/// Within-model lower bound on |D1 u D2| at r_n-distance r: 2r(m_min - r)^+.
pub fn d_union_ring_lower_bound(m_min: u32, r: u32) -> u64 {
    2 * r as u64 * m_min.saturating_sub(r) as u64
}
