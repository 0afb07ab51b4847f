//! Permutation algebra on `[n]`.
//!
//! Storage is 0-based throughout: a [`Permutation`] keeps `ranks[i] = π(i)`
//! with items and ranks in `0..n`. Text I/O uses the 1-based rank-order
//! listing `(π⁻¹(1), …, π⁻¹(n))`, i.e. the item placed first, then the item
//! placed second, and so on.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sorted, deduplicated set of 0-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }

    /// Builds a set from 1-based indices, as written in the text formats.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i == 0) {
            return Err(Error::InvalidIndexSet(format!("1-based index {bad} is not positive")));
        }
        Ok(Self::new(indices.iter().map(|&i| i - 1)))
    }

    /// `{0, …, n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn min_index(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.iter().all(|&i| !other.contains(i))
    }

    pub fn is_contiguous(&self) -> bool {
        match (self.min_index(), self.max_index()) {
            (Some(lo), Some(hi)) => hi - lo + 1 == self.len(),
            _ => false,
        }
    }

    /// Position of `i` inside the sorted set.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidIndexSet("index set is empty".into()));
        }
        match self.max_index() {
            Some(m) if m >= n => Err(Error::IndexOutOfRange { index: m, n }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::new(iter)
    }
}

/// A permutation `π ∈ S_n`, stored as its rank vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    ranks: Vec<usize>,
}

impl Permutation {
    /// Builds from 0-based ranks: `ranks[i]` is the place of item `i`.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("n must be at least 1".into()));
        }
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r >= n || seen[r] {
                return Err(Error::InvalidPermutation(format!(
                    "ranks {:?} are not a bijection onto 0..{n}",
                    ranks
                )));
            }
            seen[r] = true;
        }
        Ok(Permutation { ranks })
    }

    /// Builds from the 0-based rank-order listing: `order[r]` is the item in place `r`.
    pub fn from_order0(order: &[usize]) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![usize::MAX; n];
        for (r, &item) in order.iter().enumerate() {
            if item >= n || ranks[item] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "order {:?} is not a bijection onto 0..{n}",
                    order
                )));
            }
            ranks[item] = r;
        }
        Self::from_ranks(ranks)
    }

    /// Builds from the 1-based display notation `(π⁻¹(1), …, π⁻¹(n))`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        if order.contains(&0) {
            return Err(Error::InvalidPermutation("display notation is 1-based; found 0".into()));
        }
        let zero: Vec<usize> = order.iter().map(|&i| i - 1).collect();
        Self::from_order0(&zero)
    }

    pub(crate) fn from_ranks_unchecked(ranks: Vec<usize>) -> Self {
        debug_assert!(Self::from_ranks(ranks.clone()).is_ok());
        Permutation { ranks }
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            ranks: (0..n).collect(),
        }
    }

    pub fn reversal(n: usize) -> Self {
        Permutation {
            ranks: (0..n).rev().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.ranks.len()
    }

    /// `π(i)`, 0-based.
    pub fn rank(&self, item: usize) -> usize {
        self.ranks[item]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Items listed by increasing rank (0-based `π⁻¹`).
    pub fn order(&self) -> Vec<usize> {
        let mut order = vec![0; self.n()];
        for (item, &r) in self.ranks.iter().enumerate() {
            order[r] = item;
        }
        order
    }

    /// 1-based display listing.
    pub fn display_order(&self) -> Vec<usize> {
        self.order().into_iter().map(|i| i + 1).collect()
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { ranks: self.order() }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        check_same_n(self.n(), other.n())?;
        Ok(Permutation {
            ranks: other.ranks.iter().map(|&j| self.ranks[j]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.ranks.iter().enumerate().all(|(i, &r)| i == r)
    }

    /// The same map viewed as an injection on `[n]`.
    pub fn to_injection(&self) -> Injection {
        Injection {
            n: self.n(),
            domain: IndexSet::full(self.n()),
            values: self.ranks.clone(),
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = self.display_order();
        for (k, item) in order.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses the whitespace-separated 1-based display notation.
    fn from_str(s: &str) -> Result<Self> {
        let items = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::InvalidPermutation(format!("bad entry {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_order(&items)
    }
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An injection `ρ : J → [n]`, e.g. a restriction `π|_J`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Injection {
    n: usize,
    domain: IndexSet,
    values: Vec<usize>,
}

impl Injection {
    /// `values[k]` is the image of the `k`-th smallest element of `domain`.
    pub fn new(n: usize, domain: IndexSet, values: Vec<usize>) -> Result<Self> {
        domain.check_within(n)?;
        if values.len() != domain.len() {
            return Err(Error::InvalidIndexSet(format!(
                "{} values for a domain of size {}",
                values.len(),
                domain.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &values {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "values {values:?} are not injective into 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Injection { n, domain, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Image of domain element `j`, if `j ∈ J`.
    pub fn get(&self, j: usize) -> Option<usize> {
        self.domain.position(j).map(|k| self.values[k])
    }

    /// Rank-compression onto `{0, …, |J|-1}`.
    pub fn relative_order(&self) -> RelativeOrder {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by_key(|&k| self.values[k]);
        let mut order = vec![0; idx.len()];
        for (r, &k) in idx.iter().enumerate() {
            order[k] = r;
        }
        RelativeOrder {
            domain: self.domain.clone(),
            order,
        }
    }

    /// A permutation `π_ρ` with `π_ρ|_J = ρ`: the ranks not used by `ρ` go to
    /// the remaining items in increasing item order.
    pub fn complete(&self) -> Permutation {
        let mut ranks = vec![usize::MAX; self.n];
        let mut used = vec![false; self.n];
        for (j, &v) in self.domain.iter().zip(&self.values) {
            ranks[j] = v;
            used[v] = true;
        }
        let mut free = (0..self.n).filter(|&r| !used[r]);
        for r in ranks.iter_mut() {
            if *r == usize::MAX {
                *r = free.next().expect("rank count matches item count");
            }
        }
        Permutation::from_ranks_unchecked(ranks)
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, (j, v)) in self.domain.iter().zip(&self.values).enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}↦{}", j + 1, v + 1)?;
        }
        f.write_str("}")
    }
}

/// A relative order `π‖_J`: a bijection `J → {0, …, |J|-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelativeOrder {
    domain: IndexSet,
    order: Vec<usize>,
}

impl RelativeOrder {
    pub fn domain(&self) -> &IndexSet {
        &self.domain
    }

    /// `order[k]` is the relative rank of the `k`-th smallest element of `J`.
    pub fn ranks(&self) -> &[usize] {
        &self.order
    }

    pub fn get(&self, j: usize) -> Option<usize> {
        self.domain.position(j).map(|k| self.order[k])
    }

    /// Elements of `J` listed by increasing relative rank (original labels, 0-based).
    pub fn listing(&self) -> Vec<usize> {
        let mut out = vec![0; self.order.len()];
        for (k, &r) in self.order.iter().enumerate() {
            out[r] = self.domain.as_slice()[k];
        }
        out
    }

    /// The order as a permutation of `S_{|J|}`, identifying `J` with `0..|J|` ascending.
    pub fn as_permutation(&self) -> Permutation {
        Permutation::from_ranks_unchecked(self.order.clone())
    }

    /// Comparison vector for a tuple whose indices all lie inside `J`.
    pub fn chi(&self, t: &ComparisonTuple) -> Result<ChiVector> {
        let bits = t
            .pairs()
            .iter()
            .map(|&(i, j)| {
                let ri = self.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    n: self.domain.len(),
                })?;
                let rj = self.get(j).ok_or(Error::IndexOutOfRange {
                    index: j,
                    n: self.domain.len(),
                })?;
                Ok(ri < rj)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChiVector::new(bits))
    }

    /// Restriction to a subset `K ⊆ J`, rank-compressed.
    pub fn restrict(&self, subset: &IndexSet) -> Result<RelativeOrder> {
        let values = subset
            .iter()
            .map(|j| {
                self.get(j)
                    .ok_or(Error::InvalidIndexSet(format!("{} is not in the domain", j + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Injection {
            n: self.domain.len(),
            domain: subset.clone(),
            values,
        }
        .relative_order())
    }
}

impl fmt::Display for RelativeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, item) in self.listing().iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", item + 1)?;
        }
        f.write_str(")")
    }
}

/// A query `ℐ`: an ordered list of pairs of distinct indices. Repeats are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ComparisonTuple {
    pairs: Vec<(usize, usize)>,
}

impl ComparisonTuple {
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| i == j) {
            return Err(Error::InvalidTuple(format!("pair ({}, {j}) repeats an index", i + 1)));
        }
        Ok(ComparisonTuple { pairs })
    }

    /// Builds from 1-based pairs.
    pub fn from_one_based(pairs: &[(usize, usize)]) -> Result<Self> {
        if pairs.iter().any(|&(i, j)| i == 0 || j == 0) {
            return Err(Error::InvalidTuple("indices are 1-based".into()));
        }
        Self::new(pairs.iter().map(|&(i, j)| (i - 1, j - 1)).collect())
    }

    /// The empty tuple (used as a trivial signature).
    pub fn empty() -> Self {
        ComparisonTuple::default()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn push(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidTuple(format!("pair ({i}, {j}) repeats an index")));
        }
        self.pairs.push((i, j));
        Ok(())
    }

    /// Every index appearing in the tuple.
    pub fn support(&self) -> IndexSet {
        self.pairs.iter().flat_map(|&(i, j)| [i, j]).collect()
    }

    pub(crate) fn check_within(&self, n: usize) -> Result<()> {
        for &(i, j) in &self.pairs {
            for x in [i, j] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, n });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ComparisonTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, (i, j)) in self.pairs.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {})", i + 1, j + 1)?;
        }
        f.write_str("]")
    }
}

/// The answer `χ(π, ℐ)` to a comparison tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ChiVector(Vec<bool>);

impl ChiVector {
    pub fn new(bits: Vec<bool>) -> Self {
        ChiVector(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, r: usize) -> bool {
        self.0[r]
    }

    /// Index into `{0,1}^m` with bit `r` as the `r`-th most significant digit.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn from_index(index: usize, m: usize) -> Self {
        ChiVector((0..m).map(|r| (index >> (m - 1 - r)) & 1 == 1).collect())
    }

    pub fn prefix(&self, len: usize) -> &[bool] {
        &self.0[..len]
    }
}

impl fmt::Display for ChiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// A sequence of `(B_j, B'_j)` pairs with contiguous, increasing targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    blocks: Vec<(IndexSet, IndexSet)>,
}

impl BlockStructure {
    pub fn new(blocks: Vec<(IndexSet, IndexSet)>) -> Result<Self> {
        for (k, (b, bp)) in blocks.iter().enumerate() {
            if b.is_empty() || b.len() != bp.len() {
                return Err(Error::InvalidBlockStructure(format!(
                    "block {k} has |B| = {} and |B'| = {}",
                    b.len(),
                    bp.len()
                )));
            }
            if !bp.is_contiguous() {
                return Err(Error::InvalidBlockStructure(format!(
                    "target of block {k} is not contiguous"
                )));
            }
        }
        for k in 0..blocks.len() {
            for l in k + 1..blocks.len() {
                if !blocks[k].0.is_disjoint(&blocks[l].0) {
                    return Err(Error::InvalidBlockStructure(format!(
                        "sources of blocks {k} and {l} overlap"
                    )));
                }
            }
        }
        for w in blocks.windows(2) {
            if w[0].1.max_index() >= w[1].1.min_index() {
                return Err(Error::InvalidBlockStructure(
                    "targets must be increasing and disjoint".into(),
                ));
            }
        }
        Ok(BlockStructure { blocks })
    }

    pub fn blocks(&self) -> &[(IndexSet, IndexSet)] {
        &self.blocks
    }

    /// `ℓ = Σ |B_j|`.
    pub fn total_size(&self) -> usize {
        self.blocks.iter().map(|(b, _)| b.len()).sum()
    }

    fn check_within(&self, n: usize) -> Result<()> {
        for (b, bp) in &self.blocks {
            b.check_within(n)?;
            bp.check_within(n)?;
        }
        Ok(())
    }
}

pub(crate) fn check_same_n(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SizeMismatch { expected, found })
    }
}

/// Kendall tau distance, counted as inversions by merge sort in `O(n log n)`.
pub fn kendall_tau(a: &Permutation, b: &Permutation) -> Result<u64> {
    check_same_n(a.n(), b.n())?;
    // b's ranks listed in a's rank order; each inversion is a discordant pair.
    let mut seq: Vec<usize> = a.order().into_iter().map(|i| b.rank(i)).collect();
    let mut buf = vec![0; seq.len()];
    Ok(count_inversions(&mut seq, &mut buf))
}

fn count_inversions(v: &mut [usize], buf: &mut [usize]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut count = {
        let (lo, hi) = v.split_at_mut(mid);
        let (blo, bhi) = buf.split_at_mut(mid);
        count_inversions(lo, blo) + count_inversions(hi, bhi)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            j += 1;
            count += (mid - i) as u64;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    count
}

/// `π|_J`.
pub fn restrict(p: &Permutation, set: &IndexSet) -> Result<Injection> {
    set.check_within(p.n())?;
    Ok(Injection {
        n: p.n(),
        domain: set.clone(),
        values: set.iter().map(|j| p.rank(j)).collect(),
    })
}

/// `π‖_J`.
pub fn relative_order(p: &Permutation, set: &IndexSet) -> Result<RelativeOrder> {
    Ok(restrict(p, set)?.relative_order())
}

/// `χ(π, ℐ)_r = 𝟙{π(i_r) < π(j_r)}`.
pub fn chi(p: &Permutation, t: &ComparisonTuple) -> Result<ChiVector> {
    t.check_within(p.n())?;
    Ok(chi_unchecked(p, t))
}

pub(crate) fn chi_unchecked(p: &Permutation, t: &ComparisonTuple) -> ChiVector {
    ChiVector(t.pairs().iter().map(|&(i, j)| p.rank(i) < p.rank(j)).collect())
}

/// True iff `π(B_j) = B'_j` setwise for every block.
pub fn satisfies_block(p: &Permutation, bs: &BlockStructure) -> Result<bool> {
    bs.check_within(p.n())?;
    Ok(satisfies_block_unchecked(p, bs))
}

pub(crate) fn satisfies_block_unchecked(p: &Permutation, bs: &BlockStructure) -> bool {
    bs.blocks()
        .iter()
        .all(|(b, bp)| b.iter().all(|j| bp.contains(p.rank(j))))
}

/// Hausdorff distance between two nonempty integer sets.
pub fn hausdorff(a: &IndexSet, b: &IndexSet) -> Result<usize> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidIndexSet("Hausdorff distance needs nonempty sets".into()));
    }
    let directed = |x: &IndexSet, y: &IndexSet| {
        x.iter()
            .map(|p| y.iter().map(|q| p.abs_diff(q)).min().unwrap_or(0))
            .max()
            .unwrap_or(0)
    };
    Ok(directed(a, b).max(directed(b, a)))
}

/// `π(B) = {π(i) : i ∈ B}`.
pub fn image(p: &Permutation, set: &IndexSet) -> Result<IndexSet> {
    set.check_within(p.n())?;
    Ok(set.iter().map(|j| p.rank(j)).collect())
}

/// Lexicographic enumeration of `S_n` (by rank vector).
pub fn all_permutations(n: usize) -> AllPermutations {
    AllPermutations {
        next: Some((0..n).collect()),
    }
}

/// Iterator returned by [`all_permutations`].
#[derive(Debug, Clone)]
pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation::from_ranks_unchecked(current))
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All `ℓ`-subsets of `{0, …, n−1}` in lexicographic order.
pub fn subsets(n: usize, ell: usize) -> Vec<IndexSet> {
    let mut out = Vec::new();
    if ell > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..ell).collect();
    loop {
        out.push(IndexSet(idx.clone()));
        let Some(i) = (0..ell).rev().find(|&i| idx[i] < n - ell + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..ell {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Total order used when results must be canonically sorted.
pub fn lexicographic(a: &Permutation, b: &Permutation) -> Ordering {
    a.display_order().cmp(&b.display_order())
}
