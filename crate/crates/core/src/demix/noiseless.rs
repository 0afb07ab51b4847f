//! Demixing permutations from noiseless comparison oracles, and the hard
//! instance showing that smaller comparison groups cannot suffice.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::oracle::{DeltaMixture, Mass, StrongGroupOracle, WeakGroupOracle};
use crate::perm::{chi_unchecked, relative_order, subsets, ChiVector, ComparisonTuple, Permutation, RelativeOrder};

/// `m*_k = ⌊log₂ k⌋ + 1`, the group size needed to identify a `k`-mixture.
pub fn min_group_size(k: usize) -> usize {
    assert!(k >= 1, "k must be positive");
    (usize::BITS - 1 - k.leading_zeros()) as usize + 1
}

/// `1 + (k/2)(n−2)(n+1)`, the strong-oracle query budget.
pub fn strong_query_bound(n: usize, k: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    1.0 + k as f64 / 2.0 * (n as f64 - 2.0) * (n as f64 + 1.0)
}

/// `1 + (k/2)(n−2)(n−1)`, the weak-oracle query budget.
pub fn weak_query_bound(n: usize, k: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    1.0 + k as f64 / 2.0 * (n as f64 - 2.0) * (n as f64 - 1.0)
}

fn check_distinct(perms: &[Permutation]) -> Result<()> {
    let Some(first) = perms.first() else {
        return Err(invalid("perms", "the set is empty"));
    };
    let mut seen = BTreeSet::new();
    for p in perms {
        if p.n() != first.n() {
            return Err(Error::SizeMismatch {
                expected: first.n(),
                found: p.n(),
            });
        }
        if !seen.insert(p) {
            return Err(Error::DuplicatePermutation(p.to_string()));
        }
    }
    Ok(())
}

/// A pair `(r, s)` with `a(r) < a(s)` and `b(r) > b(s)`, for distinct `a`, `b`.
fn discordant_pair(a: &Permutation, b: &Permutation) -> (usize, usize) {
    let order = a.order();
    order
        .windows(2)
        .map(|w| (w[0], w[1]))
        .find(|&(x, y)| b.rank(x) > b.rank(y))
        .expect("distinct permutations disagree on an adjacent pair")
}

/// Bisection signature: an index `i*` and a tuple of at most `⌊log₂ k⌋` pairs
/// on which `s[i*]` disagrees with every other member of `s`.
pub fn find_signature(s: &[Permutation]) -> Result<(usize, ComparisonTuple)> {
    check_distinct(s)?;
    let mut alive: Vec<usize> = (0..s.len()).collect();
    let mut pairs = Vec::new();
    while alive.len() > 1 {
        let (i, j) = discordant_pair(&s[alive[0]], &s[alive[1]]);
        let (before, after): (Vec<usize>, Vec<usize>) = alive.iter().partition(|&&c| s[c].rank(i) < s[c].rank(j));
        alive = if before.len() <= after.len() { before } else { after };
        pairs.push((i, j));
    }
    Ok((alive[0], ComparisonTuple::new(pairs)?))
}

/// A tuple of at most `k − 1` pairs giving pairwise distinct comparison vectors
/// to the `k` inputs (built incrementally, one pair per collision).
pub fn find_tuple(perms: &[Permutation]) -> Result<ComparisonTuple> {
    check_distinct(perms)?;
    let mut t = ComparisonTuple::empty();
    for j in 1..perms.len() {
        let cj = chi_unchecked(&perms[j], &t);
        if let Some(i) = (0..j).find(|&i| chi_unchecked(&perms[i], &t) == cj) {
            let (r, s) = discordant_pair(&perms[i], &perms[j]);
            t.push(r, s)?;
        }
    }
    Ok(t)
}

fn insert_item(base: &Permutation, rank: usize) -> Permutation {
    let mut ranks: Vec<usize> = base.ranks().iter().map(|&r| if r < rank { r } else { r + 1 }).collect();
    ranks.push(rank);
    Permutation::from_ranks(ranks).expect("insertion keeps a bijection")
}

fn padded(prefix: &ComparisonTuple, tail: &[(usize, usize)], size: usize) -> Result<ComparisonTuple> {
    let needed = prefix.len() + tail.len();
    if needed > size {
        return Err(Error::InconsistentOracle(format!(
            "query needs {needed} pairs but the oracle answers groups of {size}"
        )));
    }
    let filler = prefix.pairs().first().copied().unwrap_or(tail[0]);
    let mut pairs = prefix.pairs().to_vec();
    pairs.extend(std::iter::repeat_n(filler, size - needed));
    pairs.extend_from_slice(tail);
    ComparisonTuple::new(pairs)
}

/// Recovers a delta mixture of at most `k` components, weights included, from a
/// strong group oracle of group size at least `⌊log₂ k⌋ + 1`.
///
/// Works by induction on the number of items: item `x` is inserted into each
/// recovered prefix, with the weight of each insertion point read off as a
/// difference of successive query masses.
pub fn demix_strong<O: StrongGroupOracle>(oracle: &mut O, k: usize) -> Result<DeltaMixture<O::Weight>> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let n = oracle.n();
    let m = oracle.group_size();
    if m < min_group_size(k) {
        return Err(invalid(
            "group_size",
            format!(
                "{k} components need groups of {} comparisons, oracle answers {m}",
                min_group_size(k)
            ),
        ));
    }
    if n == 1 {
        return DeltaMixture::new(vec![(O::Weight::one(), Permutation::identity(1))]);
    }

    let base = oracle.query(&ComparisonTuple::new(vec![(0, 1); m])?)?;
    let mut level: Vec<(Permutation, O::Weight)> = Vec::new();
    for (v, w) in base {
        if w.is_negligible() {
            continue;
        }
        let p = match (v.bits().iter().all(|&b| b), v.bits().iter().all(|&b| !b)) {
            (true, _) => Permutation::identity(2),
            (_, true) => Permutation::reversal(2),
            _ => {
                return Err(Error::InconsistentOracle(format!(
                    "repeated pair answered with mixed bits {v}"
                )))
            }
        };
        level.push((p, w));
    }

    for x in 2..n {
        let mut remaining = level;
        let mut recovered: Vec<(Permutation, O::Weight)> = Vec::new();
        while !remaining.is_empty() {
            let perms: Vec<Permutation> = remaining.iter().map(|c| c.0.clone()).collect();
            let (star, sig) = find_signature(&perms)?;
            let (sigma, total) = remaining.swap_remove(star);
            let target = chi_unchecked(&sigma, &sig);
            let order = sigma.order();

            // after[p] = weight of components with prefix sigma that place x after order[p].
            let mut after = Vec::with_capacity(x);
            for &a in &order {
                let t = padded(&sig, &[(a, x)], m)?;
                let answer = oracle.query(&t)?;
                let mut mass = O::Weight::zero();
                for (v, w) in answer {
                    if v.bits()[..sig.len()] == *target.bits() && v.bits()[m - 1] {
                        mass = mass + w;
                    }
                }
                for (tau, w) in &recovered {
                    if chi_unchecked(tau, &sig) == target && tau.rank(a) < tau.rank(x) {
                        mass = mass - w.clone();
                    }
                }
                after.push(mass);
            }

            let mut prev = total;
            for q in 0..=x {
                let next = if q < x { after[q].clone() } else { O::Weight::zero() };
                let w = prev - next.clone();
                prev = next;
                if w.is_negligible() {
                    continue;
                }
                if w < O::Weight::zero() {
                    return Err(Error::InconsistentOracle(format!(
                        "negative weight {w:?} inserting item {} into {sigma}",
                        x + 1
                    )));
                }
                recovered.push((insert_item(&sigma, q), w));
            }
        }
        if recovered.len() > k {
            return Err(Error::InconsistentOracle(format!(
                "found {} components on {} items, more than k = {k}",
                recovered.len(),
                x + 1
            )));
        }
        level = recovered;
    }
    DeltaMixture::new(level.into_iter().map(|(p, w)| (w, p)).collect())
}

/// Recovers a set of at most `k` permutations from a weak oracle answering
/// groups of exactly `k + 1` comparisons (insertion demixing).
pub fn insertion_demixing<O: WeakGroupOracle>(oracle: &mut O, k: usize) -> Result<Vec<Permutation>> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    let n = oracle.n();
    let m = oracle.group_size();
    if m != k + 1 {
        return Err(invalid(
            "group_size",
            format!(
                "insertion demixing queries groups of k + 1 = {}, oracle answers {m}",
                k + 1
            ),
        ));
    }
    if n == 1 {
        return Ok(vec![Permutation::identity(1)]);
    }

    let base = oracle.query(&ComparisonTuple::new(vec![(0, 1); m])?)?;
    let firsts: BTreeSet<bool> = base.iter().map(|v| v.get(0)).collect();
    let mut level: Vec<Permutation> = Vec::new();
    if firsts.contains(&true) {
        level.push(Permutation::identity(2));
    }
    if firsts.contains(&false) {
        level.push(Permutation::reversal(2));
    }

    let mut tuple = ComparisonTuple::empty();
    let mut previous_count = 1;
    for x in 2..n {
        let count = level.len();
        if count > k {
            return Err(Error::InconsistentOracle(format!(
                "{count} distinct prefixes on {x} items, more than k = {k}"
            )));
        }
        if count > previous_count {
            tuple = find_tuple(&level)?;
        }
        previous_count = count;

        let mut next: BTreeSet<Permutation> = BTreeSet::new();
        for sigma in &level {
            let target = chi_unchecked(sigma, &tuple);
            let order = sigma.order();
            let mut first_block: Vec<ChiVector> = Vec::new();
            let mut last_block: Vec<ChiVector> = Vec::new();
            for r in 1..x {
                let t = padded(&tuple, &[(order[r - 1], x), (x, order[r])], m)?;
                let matching: Vec<ChiVector> = oracle
                    .query(&t)?
                    .into_iter()
                    .filter(|v| v.bits()[..tuple.len()] == *target.bits())
                    .collect();
                if matching.iter().any(|v| v.get(k - 1) && v.get(k)) {
                    next.insert(insert_item(sigma, r));
                }
                if r == 1 {
                    first_block = matching.clone();
                }
                if r == x - 1 {
                    last_block = matching;
                }
            }
            if first_block.iter().any(|v| !v.get(k - 1)) {
                next.insert(insert_item(sigma, 0));
            }
            if last_block.iter().any(|v| !v.get(k)) {
                next.insert(insert_item(sigma, x));
            }
        }
        level = next.into_iter().collect();
    }
    if level.is_empty() || level.len() > k {
        return Err(Error::InconsistentOracle(format!(
            "recovered {} permutations for k = {k}",
            level.len()
        )));
    }
    level.sort();
    Ok(level)
}

/// Two disjoint sets of `2^{m−1}` permutations on `2m` items that no
/// `ℓ`-wise query with `ℓ < 2m` can tell apart.
#[derive(Debug, Clone, PartialEq)]
pub struct HardInstance {
    m: usize,
    sigma1: Vec<Permutation>,
    sigma2: Vec<Permutation>,
}

impl HardInstance {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        2 * self.m
    }

    /// Permutations with an odd number of swapped pairs.
    pub fn sigma1(&self) -> &[Permutation] {
        &self.sigma1
    }

    /// Permutations with an even number of swapped pairs.
    pub fn sigma2(&self) -> &[Permutation] {
        &self.sigma2
    }

    /// Equal-weight delta mixtures over the two sets.
    pub fn delta_mixtures(&self) -> (DeltaMixture, DeltaMixture) {
        (
            DeltaMixture::uniform(self.sigma1.clone()).expect("nonempty"),
            DeltaMixture::uniform(self.sigma2.clone()).expect("nonempty"),
        )
    }
}

/// Largest `m` accepted by [`hard_instance`].
pub const HARD_INSTANCE_MAX_M: usize = 16;

/// `π_v` swaps items `2j−1, 2j` exactly when `v_j = 1`; the two sets split
/// `{0,1}^m` by the parity of `‖v‖₁`.
pub fn hard_instance(m: usize) -> Result<HardInstance> {
    if m == 0 || m > HARD_INSTANCE_MAX_M {
        return Err(invalid("m", format!("must be in 1..={HARD_INSTANCE_MAX_M}")));
    }
    let (mut sigma1, mut sigma2) = (Vec::new(), Vec::new());
    for v in 0u32..(1 << m) {
        let ranks: Vec<usize> = (0..2 * m)
            .map(|i| if v >> (i / 2) & 1 == 1 { i ^ 1 } else { i })
            .collect();
        let p = Permutation::from_ranks(ranks)?;
        if v.count_ones() % 2 == 1 {
            sigma1.push(p);
        } else {
            sigma2.push(p);
        }
    }
    sigma1.sort();
    sigma2.sort();
    Ok(HardInstance { m, sigma1, sigma2 })
}

fn order_counts(perms: &[Permutation], set: &crate::perm::IndexSet) -> BTreeMap<RelativeOrder, usize> {
    let mut out = BTreeMap::new();
    for p in perms {
        *out.entry(relative_order(p, set).expect("in range")).or_insert(0) += 1;
    }
    out
}

/// True iff every `ℓ`-wise strong query returns the same distribution for the
/// two uniform mixtures, checked over all `C(2m, ℓ)` index sets.
pub fn indistinguishable(h: &HardInstance, ell: usize) -> Result<bool> {
    if ell == 0 || ell > h.n() {
        return Err(invalid("ell", format!("must be in 1..={}", h.n())));
    }
    Ok(subsets(h.n(), ell)
        .iter()
        .all(|set| order_counts(&h.sigma1, set) == order_counts(&h.sigma2, set)))
}

/// The first `ℓ`-subset (lexicographic) that separates the two mixtures, if any.
pub fn distinguishing_set(h: &HardInstance, ell: usize) -> Result<Option<crate::perm::IndexSet>> {
    if ell == 0 || ell > h.n() {
        return Err(invalid("ell", format!("must be in 1..={}", h.n())));
    }
    Ok(subsets(h.n(), ell)
        .into_iter()
        .find(|set| order_counts(&h.sigma1, set) != order_counts(&h.sigma2, set)))
}
