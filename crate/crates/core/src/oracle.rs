//! Query models for delta mixtures: strong and weak group-of-`m` pairwise
//! comparison oracles, `ℓ`-wise oracles, and comparison moments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::dist::DiscreteDist;
use crate::error::{invalid, Error, Result};
use crate::perm::{
    check_same_n, chi, chi_unchecked, relative_order, ChiVector, ComparisonTuple, IndexSet, Permutation, RelativeOrder,
};

/// Largest tuple length for which [`comparison_moment`] materialises `2^m` entries.
pub const MOMENT_CAP: usize = 20;

/// Weight arithmetic used by the demixers: exact rationals or floats with a tolerance.
pub trait Mass:
    Clone + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Zero + One + Send + Sync
{
    /// Treated as zero when deciding whether a component exists.
    fn is_negligible(&self) -> bool;
    fn to_f64(&self) -> f64;
}

/// Float tolerance for weight bookkeeping.
pub const FLOAT_MASS_TOLERANCE: f64 = 1e-9;

impl Mass for f64 {
    fn is_negligible(&self) -> bool {
        self.abs() <= FLOAT_MASS_TOLERANCE
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Mass for Ratio<i64> {
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `𝖬 = Σ w_i δ_{π_i}`, deduplicated and sorted by permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaMixture<W: Mass = f64> {
    n: usize,
    components: Vec<(W, Permutation)>,
}

impl<W: Mass> DeltaMixture<W> {
    pub fn new(components: Vec<(W, Permutation)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(invalid("components", "a mixture needs at least one component"));
        };
        let n = first.1.n();
        let mut merged: BTreeMap<Permutation, W> = BTreeMap::new();
        for (w, p) in components {
            check_same_n(n, p.n())?;
            if !(w > W::zero()) || w.is_negligible() {
                return Err(invalid("weights", format!("weight {w:?} is not positive")));
            }
            let slot = merged.entry(p).or_insert_with(W::zero);
            *slot = slot.clone() + w;
        }
        let total = merged.values().fold(W::zero(), |a, w| a + w.clone());
        if !(total.clone() - W::one()).is_negligible() {
            return Err(invalid("weights", format!("weights sum to {total:?}, not 1")));
        }
        Ok(DeltaMixture {
            n,
            components: merged.into_iter().map(|(p, w)| (w, p)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[(W, Permutation)] {
        &self.components
    }

    pub fn support(&self) -> Vec<Permutation> {
        self.components.iter().map(|c| c.1.clone()).collect()
    }

    pub fn to_f64(&self) -> DeltaMixture<f64> {
        DeltaMixture {
            n: self.n,
            components: self.components.iter().map(|(w, p)| (w.to_f64(), p.clone())).collect(),
        }
    }
}

impl DeltaMixture<f64> {
    /// Equal weights over the given permutations.
    pub fn uniform(perms: Vec<Permutation>) -> Result<Self> {
        let k = perms.len() as f64;
        Self::new(perms.into_iter().map(|p| (1.0 / k, p)).collect())
    }
}

/// Number of queries an oracle has answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct OracleBudget {
    count: u64,
}

impl OracleBudget {
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn increment(&mut self) {
        self.count += 1;
    }
}

/// Returns the distribution of `χ(π, ℐ)` for `π ∼ 𝖬`.
pub trait StrongGroupOracle {
    type Weight: Mass;

    fn n(&self) -> usize;
    /// Number of pairs `m` in every query.
    fn group_size(&self) -> usize;
    fn query(&mut self, t: &ComparisonTuple) -> Result<BTreeMap<ChiVector, Self::Weight>>;
    fn budget(&self) -> OracleBudget;
}

/// Returns the unlabeled set `{χ(π_i, ℐ)}`.
pub trait WeakGroupOracle {
    fn n(&self) -> usize;
    /// Number of pairs `m` in every query.
    fn group_size(&self) -> usize;
    fn query(&mut self, t: &ComparisonTuple) -> Result<BTreeSet<ChiVector>>;
    fn budget(&self) -> OracleBudget;
}

fn check_group(t: &ComparisonTuple, n: usize, m: usize) -> Result<()> {
    if t.len() != m {
        return Err(Error::InvalidTuple(format!(
            "oracle answers groups of {m} comparisons, query has {}",
            t.len()
        )));
    }
    t.check_within(n)
}

/// Strong oracle answering from a known delta mixture.
#[derive(Debug, Clone)]
pub struct MixtureOracle<W: Mass> {
    mixture: DeltaMixture<W>,
    group_size: usize,
    budget: OracleBudget,
}

impl<W: Mass> MixtureOracle<W> {
    pub fn new(mixture: DeltaMixture<W>, group_size: usize) -> Result<Self> {
        if group_size == 0 {
            return Err(invalid("group_size", "must be at least 1"));
        }
        Ok(MixtureOracle {
            mixture,
            group_size,
            budget: OracleBudget::default(),
        })
    }
}

impl<W: Mass> StrongGroupOracle for MixtureOracle<W> {
    type Weight = W;

    fn n(&self) -> usize {
        self.mixture.n
    }

    fn group_size(&self) -> usize {
        self.group_size
    }

    fn query(&mut self, t: &ComparisonTuple) -> Result<BTreeMap<ChiVector, W>> {
        check_group(t, self.mixture.n, self.group_size)?;
        self.budget.increment();
        Ok(strong_group_masses(&self.mixture, t))
    }

    fn budget(&self) -> OracleBudget {
        self.budget
    }
}

/// Weak oracle answering from a known set of permutations.
#[derive(Debug, Clone)]
pub struct SetOracle {
    n: usize,
    perms: Vec<Permutation>,
    group_size: usize,
    budget: OracleBudget,
}

impl SetOracle {
    pub fn new(perms: Vec<Permutation>, group_size: usize) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(invalid("perms", "the hidden set is empty"));
        };
        let n = first.n();
        for p in &perms {
            check_same_n(n, p.n())?;
        }
        if group_size == 0 {
            return Err(invalid("group_size", "must be at least 1"));
        }
        Ok(SetOracle {
            n,
            perms,
            group_size,
            budget: OracleBudget::default(),
        })
    }
}

impl WeakGroupOracle for SetOracle {
    fn n(&self) -> usize {
        self.n
    }

    fn group_size(&self) -> usize {
        self.group_size
    }

    fn query(&mut self, t: &ComparisonTuple) -> Result<BTreeSet<ChiVector>> {
        check_group(t, self.n, self.group_size)?;
        self.budget.increment();
        Ok(self.perms.iter().map(|p| chi_unchecked(p, t)).collect())
    }

    fn budget(&self) -> OracleBudget {
        self.budget
    }
}

/// Pushforward of `𝖬` under `π ↦ χ(π, ℐ)`, in the mixture's own weight type.
pub fn strong_group_masses<W: Mass>(m: &DeltaMixture<W>, t: &ComparisonTuple) -> BTreeMap<ChiVector, W> {
    let mut out: BTreeMap<ChiVector, W> = BTreeMap::new();
    for (w, p) in &m.components {
        let slot = out.entry(chi_unchecked(p, t)).or_insert_with(W::zero);
        *slot = slot.clone() + w.clone();
    }
    out
}

/// Strong group-of-`m` answer as a distribution over comparison vectors.
pub fn strong_group_query<W: Mass>(m: &DeltaMixture<W>, t: &ComparisonTuple) -> Result<DiscreteDist<ChiVector>> {
    t.check_within(m.n)?;
    DiscreteDist::from_masses(strong_group_masses(m, t).into_iter().map(|(v, w)| (v, w.to_f64())))
}

/// Weak group-of-`m` answer: the set of realised comparison vectors.
pub fn weak_group_query(s: &[Permutation], t: &ComparisonTuple) -> Result<BTreeSet<ChiVector>> {
    if s.is_empty() {
        return Err(invalid("set", "the permutation set is empty"));
    }
    s.iter().map(|p| chi(p, t)).collect()
}

fn check_lwise(set: &IndexSet) -> Result<()> {
    if set.len() < 2 {
        return Err(Error::InvalidIndexSet(format!(
            "an ℓ-wise query needs ℓ ≥ 2, got {}",
            set.len()
        )));
    }
    Ok(())
}

/// Strong `ℓ`-wise answer: the distribution of `π‖_J` for `π ∼ 𝖬`.
pub fn lwise_query_strong<W: Mass>(m: &DeltaMixture<W>, set: &IndexSet) -> Result<DiscreteDist<RelativeOrder>> {
    check_lwise(set)?;
    let pairs = m
        .components
        .iter()
        .map(|(w, p)| Ok((relative_order(p, set)?, w.to_f64())))
        .collect::<Result<Vec<_>>>()?;
    DiscreteDist::from_masses(pairs)
}

/// Weak `ℓ`-wise answer: the set `{π‖_J : π ∈ s}`.
pub fn lwise_query_weak(s: &[Permutation], set: &IndexSet) -> Result<BTreeSet<RelativeOrder>> {
    check_lwise(set)?;
    if s.is_empty() {
        return Err(invalid("set", "the permutation set is empty"));
    }
    s.iter().map(|p| relative_order(p, set)).collect()
}

/// The comparison moment `𝔪(𝖬, ℐ)`: entry `v` (indexed by [`ChiVector::index`]) is `P{χ(π, ℐ) = v}`.
pub fn comparison_moment<W: Mass>(m: &DeltaMixture<W>, t: &ComparisonTuple) -> Result<Vec<f64>> {
    if t.len() > MOMENT_CAP {
        return Err(invalid(
            "tuple",
            format!("{} pairs exceeds the moment cap of {MOMENT_CAP}", t.len()),
        ));
    }
    t.check_within(m.n)?;
    let mut out = vec![0.0; 1 << t.len()];
    for (w, p) in &m.components {
        out[chi_unchecked(p, t).index()] += w.to_f64();
    }
    Ok(out)
}
