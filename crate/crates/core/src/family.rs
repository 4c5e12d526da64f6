//! Model families: the admissible class-size vectors M_{n,l} per class
//! count, the label-space cardinalities they induce, and the class-size
//! assumptions the contraction bounds rely on.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::labelling::Labelling;
use crate::numeric::{choose_exact, ln_factorial};

/// Default enumeration cap; configurable per family.
pub const DEFAULT_ENUM_CAP: usize = 14;

/// The allowed size vectors per class count, with l ranging over the
/// non-empty levels. Size vectors are stored sorted ascending and summing
/// to n.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFamily {
    n: usize,
    max_classes: usize,
    allowed: BTreeMap<usize, Vec<Vec<u32>>>,
    /// Half width n/(4 L^2) when built from the windowed construction.
    window_half_width: Option<f64>,
    enum_cap: usize,
}

impl ModelFamily {
    /// Family from explicit size vectors; each must sum to n with positive
    /// entries. Input vectors may be unsorted.
    pub fn from_size_vectors(n: usize, vectors: Vec<Vec<u32>>) -> Result<ModelFamily> {
        if n == 0 {
            return Err(Error::InvalidFamily("n must be positive".into()));
        }
        if vectors.is_empty() {
            return Err(Error::InvalidFamily("no size vectors".into()));
        }
        let mut allowed: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
        for mut v in vectors {
            if v.is_empty() || v.contains(&0) {
                return Err(Error::InvalidFamily(format!(
                    "size vector {v:?} has empty or zero entries"
                )));
            }
            let total: u64 = v.iter().map(|&m| m as u64).sum();
            if total != n as u64 {
                return Err(Error::InvalidFamily(format!(
                    "size vector {v:?} sums to {total}, expected {n}"
                )));
            }
            v.sort_unstable();
            let entry = allowed.entry(v.len()).or_default();
            if !entry.contains(&v) {
                entry.push(v);
            }
        }
        for list in allowed.values_mut() {
            list.sort();
        }
        let max_classes = *allowed.keys().max().unwrap();
        Ok(ModelFamily {
            n,
            max_classes,
            allowed,
            window_half_width: None,
            enum_cap: DEFAULT_ENUM_CAP,
        })
    }

    /// The worked-example construction: for each l in 1..=l_max, all size
    /// vectors with every entry inside n/l +- n/(4 l_max^2). Non-integer
    /// window ends are rounded toward the interior; levels whose window
    /// contains no valid vector are dropped.
    pub fn windowed(n: usize, l_max: usize) -> Result<ModelFamily> {
        if n == 0 || l_max == 0 || l_max > n {
            return Err(Error::InvalidFamily(format!(
                "bad windowed family n={n}, L={l_max}"
            )));
        }
        let mut allowed: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
        let (n_i, l2) = (n as i64, 4 * (l_max as i64) * (l_max as i64));
        for ell in 1..=l_max {
            let ell_i = ell as i64;
            // m >= n/ell - n/(4L^2)  <=>  m >= (4L^2 n - n ell) / (4L^2 ell), exactly
            let lo = div_ceil_i64(l2 * n_i - n_i * ell_i, l2 * ell_i).max(1);
            let hi = div_floor_i64(l2 * n_i + n_i * ell_i, l2 * ell_i);
            if lo > hi {
                continue;
            }
            let mut vectors = Vec::new();
            collect_compositions(
                n as u32,
                ell,
                lo as u32,
                hi as u32,
                &mut Vec::new(),
                &mut vectors,
            );
            if !vectors.is_empty() {
                vectors.sort();
                allowed.insert(ell, vectors);
            }
        }
        if allowed.is_empty() {
            return Err(Error::InvalidFamily(format!(
                "windowed family n={n}, L={l_max} is empty"
            )));
        }
        Ok(ModelFamily {
            n,
            max_classes: l_max,
            allowed,
            window_half_width: Some(n as f64 / (4.0 * (l_max * l_max) as f64)),
            enum_cap: DEFAULT_ENUM_CAP,
        })
    }

    pub fn with_enum_cap(mut self, cap: usize) -> ModelFamily {
        self.enum_cap = cap;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// L_n, the declared maximum class count.
    pub fn max_classes(&self) -> usize {
        self.max_classes
    }

    pub fn enum_cap(&self) -> usize {
        self.enum_cap
    }

    pub fn window_half_width(&self) -> Option<f64> {
        self.window_half_width
    }

    /// The non-empty class counts (the set L_n of the model).
    pub fn class_counts(&self) -> Vec<usize> {
        self.allowed.keys().copied().collect()
    }

    pub fn has_level(&self, ell: usize) -> bool {
        self.allowed.contains_key(&ell)
    }

    /// Admissible size vectors with `ell` classes (sorted; empty if none).
    pub fn allowed(&self, ell: usize) -> &[Vec<u32>] {
        self.allowed.get(&ell).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, lab: &Labelling) -> bool {
        lab.n() == self.n
            && self.allowed.get(&lab.ell()).is_some_and(|vs| {
                vs.binary_search_by(|v| v.as_slice().cmp(lab.sizes()))
                    .is_ok()
            })
    }

    /// m_{n,l,min}: smallest class size over M_{n,l}.
    pub fn m_min(&self, ell: usize) -> Option<u32> {
        self.allowed.get(&ell)?.iter().map(|v| v[0]).min()
    }

    /// m_{n,l,max}: largest class size over M_{n,l}.
    pub fn m_max(&self, ell: usize) -> Option<u32> {
        self.allowed
            .get(&ell)?
            .iter()
            .map(|v| *v.last().unwrap())
            .max()
    }

    /// Class sizes nest across levels: l1 < l2 implies
    /// m_{n,l1,min} >= m_{n,l2,max}. This is what separates the models.
    pub fn nested_class_sizes(&self) -> bool {
        let ells = self.class_counts();
        for (i, &l1) in ells.iter().enumerate() {
            for &l2 in &ells[i + 1..] {
                if self.m_min(l1).unwrap() < self.m_max(l2).unwrap() {
                    return false;
                }
            }
        }
        true
    }

    pub fn require_nested_class_sizes(&self) -> Result<()> {
        if self.nested_class_sizes() {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(
                "class sizes do not nest across class counts (m_min(l1) < m_max(l2) for some l1 < l2)"
                    .into(),
            ))
        }
    }

    /// Within every level, m_min >= m_max / 2.
    pub fn half_size_condition(&self) -> bool {
        self.class_counts()
            .iter()
            .all(|&l| 2 * self.m_min(l).unwrap() >= self.m_max(l).unwrap())
    }

    pub fn require_half_size_condition(&self) -> Result<()> {
        if self.half_size_condition() {
            Ok(())
        } else {
            Err(Error::AssumptionViolated(
                "some level has m_min < m_max/2".into(),
            ))
        }
    }

    /// Number of labellings with the given (ascending) size vector:
    /// n! / (prod_i m_i!) / (prod_s c_s!) with c_s the multiplicity of
    /// size s among the classes.
    pub fn ln_count_vector(sizes: &[u32]) -> f64 {
        let n: u64 = sizes.iter().map(|&m| m as u64).sum();
        let mut ln = ln_factorial(n);
        for &m in sizes {
            ln -= ln_factorial(m as u64);
        }
        let mut run = 1u64;
        for w in sizes.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                ln -= ln_factorial(run);
                run = 1;
            }
        }
        ln -= ln_factorial(run);
        ln
    }

    /// Exact count when it fits; None on overflow.
    pub fn count_vector_exact(sizes: &[u32]) -> Option<u128> {
        let n: u64 = sizes.iter().map(|&m| m as u64).sum();
        let mut remaining = n;
        let mut count: u128 = 1;
        for &m in sizes {
            count = count.checked_mul(choose_exact(remaining, m as u64)?)?;
            remaining -= m as u64;
        }
        let mut run: u128 = 1;
        let mut divisor: u128 = 1;
        for w in sizes.windows(2) {
            if w[0] == w[1] {
                run += 1;
                divisor = divisor.checked_mul(run)?;
            } else {
                run = 1;
            }
        }
        Some(count / divisor)
    }

    /// ln |Theta_{n,l}|; -inf when the level is empty.
    pub fn ln_count_level(&self, ell: usize) -> f64 {
        let ln_terms: Vec<f64> = self
            .allowed(ell)
            .iter()
            .map(|v| Self::ln_count_vector(v))
            .collect();
        crate::numeric::log_sum_exp(&ln_terms)
    }

    pub fn count_level_exact(&self, ell: usize) -> Option<u128> {
        let mut total: u128 = 0;
        for v in self.allowed(ell) {
            total = total.checked_add(Self::count_vector_exact(v)?)?;
        }
        Some(total)
    }

    /// ln |Theta_n|.
    pub fn ln_count_total(&self) -> f64 {
        let ln_terms: Vec<f64> = self
            .class_counts()
            .iter()
            .map(|&l| self.ln_count_level(l))
            .collect();
        crate::numeric::log_sum_exp(&ln_terms)
    }

    pub fn count_total_exact(&self) -> Option<u128> {
        let mut total: u128 = 0;
        for l in self.class_counts() {
            total = total.checked_add(self.count_level_exact(l)?)?;
        }
        Some(total)
    }
}

fn div_ceil_i64(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    if a >= 0 {
        (a + b - 1) / b
    } else {
        -((-a) / b)
    }
}

fn div_floor_i64(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    if a >= 0 {
        a / b
    } else {
        -((-a + b - 1) / b)
    }
}

/// All ascending tuples of `parts` entries in [lo, hi] summing to `total`.
fn collect_compositions(
    total: u32,
    parts: usize,
    lo: u32,
    hi: u32,
    prefix: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if parts == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let min_next = lo.max(prefix.last().copied().unwrap_or(lo));
    for m in min_next..=hi.min(total) {
        let rest = total - m;
        let remaining = (parts - 1) as u32;
        if remaining == 0 && rest != 0 {
            continue;
        }
        // later entries are all in [m, hi]
        if remaining > 0 && (rest < remaining * m || rest > remaining * hi) {
            continue;
        }
        prefix.push(m);
        collect_compositions(rest, parts - 1, lo, hi, prefix, out);
        prefix.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windowed_family_8_2_is_8_and_4_4() {
        let fam = ModelFamily::windowed(8, 2).unwrap();
        assert_eq!(fam.class_counts(), vec![1, 2]);
        assert_eq!(fam.allowed(1), &[vec![8]]);
        assert_eq!(fam.allowed(2), &[vec![4, 4]]);
        assert!((fam.window_half_width().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn windowed_levels_can_be_empty() {
        // n=10, L=3: the l=3 window [10/3 - 10/36, 10/3 + 10/36] contains no integer
        let fam = ModelFamily::windowed(10, 3).unwrap();
        assert_eq!(fam.class_counts(), vec![1, 2]);
        assert!(!fam.has_level(3));
        assert_eq!(fam.allowed(2), &[vec![5, 5]]);
    }

    #[test]
    fn windowed_families_satisfy_the_size_assumptions() {
        for n in 2..=20 {
            for l in 2..=4.min(n) {
                let Ok(fam) = ModelFamily::windowed(n, l) else {
                    continue;
                };
                assert!(fam.nested_class_sizes(), "n={n} L={l}");
                assert!(fam.half_size_condition(), "n={n} L={l}");
                // the testing-power gap: m_min(l1) - m_max(l2) >= n/(2 L^2), exactly
                let ells = fam.class_counts();
                for (i, &l1) in ells.iter().enumerate() {
                    for &l2 in &ells[i + 1..] {
                        let gap = fam.m_min(l1).unwrap() as i64 - fam.m_max(l2).unwrap() as i64;
                        assert!(
                            2 * (l * l) as i64 * gap >= n as i64,
                            "gap too small: n={n} L={l} l1={l1} l2={l2}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn explicit_family_validation() {
        assert!(ModelFamily::from_size_vectors(6, vec![vec![3, 2]]).is_err());
        assert!(ModelFamily::from_size_vectors(6, vec![vec![6, 0]]).is_err());
        let fam = ModelFamily::from_size_vectors(6, vec![vec![3, 3], vec![6]]).unwrap();
        assert_eq!(fam.class_counts(), vec![1, 2]);
        assert_eq!(fam.m_min(2), Some(3));
        assert!(fam.nested_class_sizes());
        // m_min(2) = 3 < 4 = m_max(3): nesting fails
        let bad = ModelFamily::from_size_vectors(6, vec![vec![3, 3], vec![1, 1, 4]]).unwrap();
        assert!(!bad.nested_class_sizes());
        assert!(!bad.half_size_condition()); // 2*1 < 4
    }

    #[test]
    fn counts_match_known_values() {
        // |Theta_{(2,2)}| = C(4,2)/2 = 3
        assert_eq!(ModelFamily::count_vector_exact(&[2, 2]), Some(3));
        // |Theta_{(4,4)}| = C(8,4)/2 = 35
        assert_eq!(ModelFamily::count_vector_exact(&[4, 4]), Some(35));
        // |Theta_{(3,3,2)}| = 8!/(3!3!2!)/2! = 280
        assert_eq!(ModelFamily::count_vector_exact(&[2, 3, 3]), Some(280));
        assert_eq!(ModelFamily::count_vector_exact(&[10]), Some(1));
        let fam = ModelFamily::from_size_vectors(4, vec![vec![4], vec![2, 2]]).unwrap();
        assert_eq!(fam.count_total_exact(), Some(4));
        let ln = fam.ln_count_total();
        assert!((ln - 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn membership_uses_size_vectors() {
        let fam = ModelFamily::from_size_vectors(4, vec![vec![4], vec![2, 2]]).unwrap();
        let inside: Labelling = "1 1 2 2".parse().unwrap();
        let outside: Labelling = "1 1 1 2".parse().unwrap();
        assert!(fam.contains(&inside));
        assert!(!fam.contains(&outside));
    }
}
