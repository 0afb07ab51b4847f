//! Finite distributions over hashable atoms.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Anything usable as an atom of a [`DiscreteDist`].
pub trait Atom: Clone + Eq + Hash + Ord {}

impl<T: Clone + Eq + Hash + Ord> Atom for T {}

const MASS_TOLERANCE: f64 = 1e-9;

/// A probability mass function with finite support.
///
/// The atom type is a type parameter, so comparing distributions over
/// different kinds of atoms is rejected at compile time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist<A: Atom> {
    masses: HashMap<A, f64>,
}

impl<A: Atom> DiscreteDist<A> {
    /// Builds from explicit masses; repeated atoms are merged.
    pub fn from_masses(pairs: impl IntoIterator<Item = (A, f64)>) -> Result<Self> {
        let mut masses: HashMap<A, f64> = HashMap::new();
        for (a, m) in pairs {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(Error::InvalidDistribution(format!("mass {m} is not a probability")));
            }
            *masses.entry(a).or_insert(0.0) += m;
        }
        let total: f64 = masses.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}, not 1")));
        }
        masses.retain(|_, m| *m > 0.0);
        Ok(DiscreteDist { masses })
    }

    /// Normalises nonnegative weights into a distribution.
    pub fn from_weights(pairs: impl IntoIterator<Item = (A, f64)>) -> Result<Self> {
        let mut masses: HashMap<A, f64> = HashMap::new();
        for (a, w) in pairs {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidDistribution(format!("weight {w} is negative")));
            }
            *masses.entry(a).or_insert(0.0) += w;
        }
        let total: f64 = masses.values().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("total weight is zero".into()));
        }
        masses.retain(|_, m| *m > 0.0);
        for m in masses.values_mut() {
            *m /= total;
        }
        Ok(DiscreteDist { masses })
    }

    /// The empirical distribution `(1/N) Σ δ_{a_m}`.
    pub fn empirical(atoms: impl IntoIterator<Item = A>) -> Result<Self> {
        let mut counts: HashMap<A, u64> = HashMap::new();
        let mut total = 0u64;
        for a in atoms {
            *counts.entry(a).or_insert(0) += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::InvalidDistribution("no observations".into()));
        }
        Ok(DiscreteDist {
            masses: counts.into_iter().map(|(a, c)| (a, c as f64 / total as f64)).collect(),
        })
    }

    pub fn point_mass(atom: A) -> Self {
        DiscreteDist {
            masses: HashMap::from([(atom, 1.0)]),
        }
    }

    pub fn mass(&self, atom: &A) -> f64 {
        self.masses.get(atom).copied().unwrap_or(0.0)
    }

    pub fn support_len(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }

    /// Atoms with positive mass, in increasing order.
    pub fn support(&self) -> Vec<A> {
        let mut s: Vec<A> = self.masses.keys().cloned().collect();
        s.sort();
        s
    }

    /// `(atom, mass)` pairs sorted by atom.
    pub fn sorted(&self) -> Vec<(A, f64)> {
        let mut v: Vec<(A, f64)> = self.masses.iter().map(|(a, &m)| (a.clone(), m)).collect();
        v.sort_by(|x, y| x.0.cmp(&y.0));
        v
    }

    pub fn iter(&self) -> impl Iterator<Item = (&A, f64)> {
        self.masses.iter().map(|(a, &m)| (a, m))
    }

    /// Pushforward under `f`.
    pub fn map<B: Atom>(&self, mut f: impl FnMut(&A) -> B) -> DiscreteDist<B> {
        let mut masses: HashMap<B, f64> = HashMap::new();
        for (a, &m) in &self.masses {
            *masses.entry(f(a)).or_insert(0.0) += m;
        }
        DiscreteDist { masses }
    }

    /// Fallible pushforward.
    pub fn try_map<B: Atom>(&self, mut f: impl FnMut(&A) -> Result<B>) -> Result<DiscreteDist<B>> {
        let mut masses: HashMap<B, f64> = HashMap::new();
        for (a, &m) in &self.masses {
            *masses.entry(f(a)?).or_insert(0.0) += m;
        }
        Ok(DiscreteDist { masses })
    }

    /// Total variation distance `½ Σ |a − b|` over the union of supports.
    pub fn tv(&self, other: &DiscreteDist<A>) -> f64 {
        let mut sum = 0.0;
        for (a, &m) in &self.masses {
            sum += (m - other.mass(a)).abs();
        }
        for (b, &m) in &other.masses {
            if !self.masses.contains_key(b) {
                sum += m;
            }
        }
        (0.5 * sum).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tv_examples() {
        let a = DiscreteDist::from_masses([(0u8, 0.7), (1, 0.3)]).unwrap();
        let b = DiscreteDist::from_masses([(0u8, 0.5), (1, 0.5)]).unwrap();
        assert!((a.tv(&b) - 0.2).abs() < 1e-15);
        assert_eq!(a.tv(&a), 0.0);
        let p = DiscreteDist::point_mass(3u8);
        let q = DiscreteDist::point_mass(4u8);
        assert_eq!(p.tv(&q), 1.0);
        assert!((a.tv(&b) - b.tv(&a)).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_distributions() {
        assert!(DiscreteDist::from_masses([(0u8, 0.7)]).is_err());
        assert!(DiscreteDist::from_masses([(0u8, 1.5), (1, -0.5)]).is_err());
        assert!(DiscreteDist::<u8>::empirical([]).is_err());
        assert!(DiscreteDist::from_weights([(0u8, 0.0)]).is_err());
    }

    #[test]
    fn empirical_counts_and_pushforward() {
        let d = DiscreteDist::empirical([1u32, 2, 2, 3]).unwrap();
        assert_eq!(d.mass(&2), 0.5);
        assert_eq!(d.support(), vec![1, 2, 3]);
        let parity = d.map(|x| x % 2);
        assert_eq!(parity.mass(&0), 0.5);
        assert_eq!(parity.mass(&1), 0.5);
    }
}
