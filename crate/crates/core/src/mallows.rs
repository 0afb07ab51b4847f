//! The Mallows model `M(π, φ)` and finite mixtures of Mallows models.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{invalid, Error, Result};
use crate::perm::{
    all_permutations, check_same_n, factorial, kendall_tau, restrict, satisfies_block_unchecked, BlockStructure,
    IndexSet, Injection, Permutation,
};
use crate::random::{chunked, stream_rng, GENERATOR};

/// Largest `n` for which the exact-enumeration routines run by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Tolerance for "weights sum to one".
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_phi(phi: f64) -> Result<()> {
    if phi > 0.0 && phi < 1.0 {
        Ok(())
    } else {
        Err(invalid("phi", format!("{phi} is not in (0, 1)")))
    }
}

pub(crate) fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        Err(Error::EnumerationCap { n, cap })
    } else {
        Ok(())
    }
}

/// `M(π, φ)`: mass proportional to `φ^{d_KT(σ, π)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsModel {
    central: Permutation,
    phi: f64,
}

impl MallowsModel {
    pub fn new(central: Permutation, phi: f64) -> Result<Self> {
        check_phi(phi)?;
        Ok(MallowsModel { central, phi })
    }

    pub fn central(&self) -> &Permutation {
        &self.central
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n(&self) -> usize {
        self.central.n()
    }

    /// Inverse temperature `β = 1 / log(1/φ)`.
    pub fn beta(&self) -> f64 {
        1.0 / (1.0 / self.phi).ln()
    }

    pub fn to_mixture(&self) -> MallowsMixture {
        MallowsMixture {
            phi: self.phi,
            components: vec![(1.0, self.central.clone())],
        }
    }
}

/// `Σ w_i M(π_i, φ)` with a shared `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MallowsMixture {
    phi: f64,
    components: Vec<(f64, Permutation)>,
}

impl MallowsMixture {
    pub fn new(components: Vec<(f64, Permutation)>, phi: f64) -> Result<Self> {
        check_phi(phi)?;
        let Some(first) = components.first() else {
            return Err(invalid("components", "a mixture needs at least one component"));
        };
        let n = first.1.n();
        for (w, p) in &components {
            check_same_n(n, p.n())?;
            if !(*w > 0.0) || !w.is_finite() {
                return Err(invalid("weights", format!("weight {w} is not positive")));
            }
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(invalid("weights", format!("weights sum to {total}, not 1")));
        }
        Ok(MallowsMixture { phi, components })
    }

    /// Equal weights `1/k` over the given centrals.
    pub fn uniform(centrals: Vec<Permutation>, phi: f64) -> Result<Self> {
        let k = centrals.len() as f64;
        Self::new(centrals.into_iter().map(|p| (1.0 / k, p)).collect(), phi)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n(&self) -> usize {
        self.components[0].1.n()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Smallest weight `γ`.
    pub fn gamma(&self) -> f64 {
        self.components.iter().map(|c| c.0).fold(f64::INFINITY, f64::min)
    }

    pub fn components(&self) -> &[(f64, Permutation)] {
        &self.components
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.0).collect()
    }

    pub fn centrals(&self) -> Vec<Permutation> {
        self.components.iter().map(|c| c.1.clone()).collect()
    }

    pub fn models(&self) -> impl Iterator<Item = (f64, MallowsModel)> + '_ {
        self.components.iter().map(|(w, p)| {
            (
                *w,
                MallowsModel {
                    central: p.clone(),
                    phi: self.phi,
                },
            )
        })
    }

    /// Draws one permutation: a component by weight, then a Mallows draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components.len() - 1;
        for (i, (w, _)) in self.components.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i;
                break;
            }
        }
        relabel(
            &sample_identity_ranks(self.n(), self.phi, rng),
            &self.components[pick].1,
        )
    }

    /// `count` i.i.d. draws, reproducible from `seed` regardless of thread count.
    pub fn sample_set(&self, count: usize, seed: u64) -> SampleSet {
        let draws = chunked(count, seed, |rng| self.sample(rng));
        SampleSet {
            n: self.n(),
            draws,
            provenance: Provenance {
                phi: Some(self.phi),
                seed: Some(seed),
                generator: GENERATOR.to_string(),
            },
        }
    }

    /// Log of the mixture PMF, by log-sum-exp over components.
    pub fn log_pmf(&self, s: &Permutation) -> Result<f64> {
        check_same_n(self.n(), s.n())?;
        let log_z = log_normalizer(self.n(), self.phi)?;
        let ln_phi = self.phi.ln();
        let terms: Vec<f64> = self
            .components
            .iter()
            .map(|(w, p)| w.ln() + kendall_tau(s, p).expect("sizes checked") as f64 * ln_phi - log_z)
            .collect();
        Ok(log_sum_exp(&terms))
    }
}

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `log Z(φ) = Σ_{i=1}^{n} log(1 + φ + … + φ^{i−1})`.
pub fn log_normalizer(n: usize, phi: f64) -> Result<f64> {
    check_phi(phi)?;
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    Ok((1..=n as i32).map(|i| ((1.0 - phi.powi(i)) / (1.0 - phi)).ln()).sum())
}

/// `log f_{M(π,φ)}(σ) = d_KT(σ, π) log φ − log Z(φ)`.
pub fn log_pmf(m: &MallowsModel, s: &Permutation) -> Result<f64> {
    let d = kendall_tau(s, &m.central)?;
    Ok(d as f64 * m.phi.ln() - log_normalizer(m.n(), m.phi)?)
}

/// One draw from `M(id, φ)` by repeated insertion, returned as a rank vector.
///
/// Item `i` is inserted `k` places before the end of the current list with
/// probability `∝ φ^k`, `0 ≤ k ≤ i`, drawn by closed-form inverse CDF.
pub fn sample_identity_ranks<R: Rng + ?Sized>(n: usize, phi: f64, rng: &mut R) -> Vec<usize> {
    let ln_phi = phi.ln();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        let u: f64 = rng.random();
        let c = 1.0 - phi.powi(i as i32 + 1);
        let k = ((1.0 - u * c).ln() / ln_phi).floor();
        let k = if k.is_finite() && k >= 0.0 {
            (k as usize).min(i)
        } else {
            0
        };
        order.insert(i - k, i);
    }
    let mut ranks = vec![0; n];
    for (r, &item) in order.iter().enumerate() {
        ranks[item] = r;
    }
    ranks
}

/// `σ = σ₀ ∘ π`: turns a draw from `M(id)` into a draw from `M(π)`.
pub(crate) fn relabel(identity_ranks: &[usize], central: &Permutation) -> Permutation {
    Permutation::from_ranks_unchecked(central.ranks().iter().map(|&r| identity_ranks[r]).collect())
}

/// Exact draw from `M(π, φ)` in `O(n²)`.
pub fn sample_rim<R: Rng + ?Sized>(m: &MallowsModel, rng: &mut R) -> Permutation {
    relabel(&sample_identity_ranks(m.n(), m.phi, rng), &m.central)
}

/// Closed-form `P{σ(i) < σ(j)}` when the central places `j` exactly `d ≥ 1` after `i`.
pub fn pairwise_formula(d: usize, phi: f64) -> f64 {
    let d = d as f64;
    (d + 1.0) / (1.0 - phi.powf(d + 1.0)) - d / (1.0 - phi.powf(d))
}

/// `P_{σ∼M(π,φ)}{σ(i) < σ(j)}` for a pair oriented by the central (`π(i) < π(j)`).
pub fn pairwise_prob(m: &MallowsModel, i: usize, j: usize) -> Result<f64> {
    let n = m.n();
    for x in [i, j] {
        if x >= n {
            return Err(Error::IndexOutOfRange { index: x, n });
        }
    }
    let (ri, rj) = (m.central.rank(i), m.central.rank(j));
    if ri >= rj {
        return Err(invalid(
            "pair",
            format!("the central must place {} before {}", i + 1, j + 1),
        ));
    }
    Ok(pairwise_formula(rj - ri, m.phi))
}

/// The full PMF table over `S_n`, lexicographic by rank vector.
pub fn pmf_table(mix: &MallowsMixture, cap: usize) -> Result<Vec<(Permutation, f64)>> {
    check_cap(mix.n(), cap)?;
    let log_z = log_normalizer(mix.n(), mix.phi)?;
    let ln_phi = mix.phi.ln();
    let log_w: Vec<f64> = mix.components.iter().map(|c| c.0.ln()).collect();
    let mut terms = vec![0.0; mix.k()];
    Ok(all_permutations(mix.n())
        .map(|s| {
            for (t, ((_, p), lw)) in terms.iter_mut().zip(mix.components.iter().zip(&log_w)) {
                *t = lw + kendall_tau(&s, p).expect("same n") as f64 * ln_phi - log_z;
            }
            let mass = log_sum_exp(&terms).exp();
            (s, mass)
        })
        .collect())
}

/// Exact distribution of a mixture over `S_n` (`n` at most `cap`).
pub fn exact_dist_capped(mix: &MallowsMixture, cap: usize) -> Result<DiscreteDist<Permutation>> {
    DiscreteDist::from_masses(pmf_table(mix, cap)?)
}

/// Exact distribution with the default enumeration cap.
pub fn exact_dist(mix: &MallowsMixture) -> Result<DiscreteDist<Permutation>> {
    exact_dist_capped(mix, DEFAULT_ENUMERATION_CAP)
}

/// `𝓜|_J`: pushforward under `σ ↦ σ|_J`.
pub fn marginal(d: &DiscreteDist<Permutation>, set: &IndexSet) -> Result<DiscreteDist<Injection>> {
    d.try_map(|p| restrict(p, set))
}

/// How [`block_prob`] evaluates the probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockProbMode {
    Exact { cap: usize },
    MonteCarlo { draws: usize, seed: u64 },
}

/// `P_{σ∼M(π,φ)}{σ satisfies bs}`.
pub fn block_prob(m: &MallowsModel, bs: &BlockStructure, mode: BlockProbMode) -> Result<f64> {
    for (b, bp) in bs.blocks() {
        for set in [b, bp] {
            if let Some(x) = set.max_index() {
                if x >= m.n() {
                    return Err(Error::IndexOutOfRange { index: x, n: m.n() });
                }
            }
        }
    }
    match mode {
        BlockProbMode::Exact { cap } => Ok(pmf_table(&m.to_mixture(), cap)?
            .into_iter()
            .filter(|(s, _)| satisfies_block_unchecked(s, bs))
            .map(|(_, p)| p)
            .sum()),
        BlockProbMode::MonteCarlo { draws, seed } => {
            if draws == 0 {
                return Err(invalid("draws", "must be positive"));
            }
            let hits = chunked(draws, seed, |rng| satisfies_block_unchecked(&sample_rim(m, rng), bs))
                .into_iter()
                .filter(|&h| h)
                .count();
            Ok(hits as f64 / draws as f64)
        }
    }
}

/// Lower bound `φ^{ℓD} (1−φ)^{3ℓ} / (2 (6ℓ)^{2ℓ})` on the block-satisfaction probability
/// when every `π(B_i)` is within Hausdorff distance `D` of `B'_i`.
pub fn block_prob_lower_bound(phi: f64, ell: usize, d: usize) -> f64 {
    let l = ell as f64;
    let log = l * d as f64 * phi.ln() + 3.0 * l * (1.0 - phi).ln() - 2f64.ln() - 2.0 * l * (6.0 * l).ln();
    log.exp()
}

/// Exact `P{|σ(j) − π(j)| ≥ r}` by enumeration.
pub fn rank_deviation_tail(m: &MallowsModel, j: usize, r: usize, cap: usize) -> Result<f64> {
    if j >= m.n() {
        return Err(Error::IndexOutOfRange { index: j, n: m.n() });
    }
    let target = m.central.rank(j);
    Ok(pmf_table(&m.to_mixture(), cap)?
        .into_iter()
        .filter(|(s, _)| s.rank(j).abs_diff(target) >= r)
        .map(|(_, p)| p)
        .sum())
}

/// Geometric tail bound `2φ^r / (1−φ)` on rank deviations.
pub fn rank_deviation_bound(phi: f64, r: usize) -> f64 {
    2.0 * phi.powi(r as i32) / (1.0 - phi)
}

/// Where a sample set came from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub phi: Option<f64>,
    pub seed: Option<u64>,
    pub generator: String,
}

/// `N` observed permutations of a common size.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    n: usize,
    draws: Vec<Permutation>,
    provenance: Provenance,
}

impl SampleSet {
    pub fn new(draws: Vec<Permutation>, provenance: Provenance) -> Result<Self> {
        let Some(first) = draws.first() else {
            return Err(invalid("samples", "at least one draw is required"));
        };
        let n = first.n();
        for d in &draws {
            check_same_n(n, d.n())?;
        }
        Ok(SampleSet { n, draws, provenance })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draws(&self) -> &[Permutation] {
        &self.draws
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The first `count` draws.
    pub fn truncated(&self, count: usize) -> SampleSet {
        SampleSet {
            n: self.n,
            draws: self.draws[..count.min(self.draws.len())].to_vec(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn empirical(&self) -> DiscreteDist<Permutation> {
        DiscreteDist::empirical(self.draws.iter().cloned()).expect("nonempty")
    }

    /// `𝓜_N|_J`, the empirical marginal on `J`.
    pub fn marginal(&self, set: &IndexSet) -> Result<DiscreteDist<Injection>> {
        set.check_within(self.n)?;
        DiscreteDist::empirical(self.draws.iter().map(|p| restrict(p, set).expect("checked")))
    }

    /// Header line of the text format.
    pub fn header(&self) -> String {
        let mut h = format!("# permix-samples n={}", self.n);
        if let Some(phi) = self.provenance.phi {
            let _ = write!(h, " phi={phi}");
        }
        if let Some(seed) = self.provenance.seed {
            let _ = write!(h, " seed={seed}");
        }
        let _ = write!(h, " generator={} count={}", self.provenance.generator, self.draws.len());
        h
    }

    /// Writes the header then one permutation per line.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{}", self.header())?;
        for d in &self.draws {
            writeln!(out, "{d}")?;
        }
        Ok(())
    }

    /// Parses the text format. Blank lines and other `#` comments are skipped.
    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut provenance = Provenance::default();
        let mut declared: (Option<usize>, Option<usize>) = (None, None);
        let mut draws = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(fields) = rest.strip_prefix("permix-samples") {
                    parse_header(fields, lineno, &mut provenance, &mut declared)?;
                }
                continue;
            }
            let p: Permutation = trimmed.parse().map_err(|e: Error| Error::Parse {
                line: lineno,
                reason: e.to_string(),
            })?;
            if let Some(first) = draws.first().map(|f: &Permutation| f.n()).or(declared.0) {
                if p.n() != first {
                    return Err(Error::Parse {
                        line: lineno,
                        reason: format!("permutation of size {} in a file of size {first}", p.n()),
                    });
                }
            }
            draws.push(p);
        }
        if let Some(count) = declared.1 {
            if count != draws.len() {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("header declares {count} draws, found {}", draws.len()),
                });
            }
        }
        if draws.is_empty() {
            return Err(Error::Parse {
                line: 0,
                reason: "no permutations found".into(),
            });
        }
        SampleSet::new(draws, provenance)
    }
}

fn parse_header(
    fields: &str,
    line: usize,
    prov: &mut Provenance,
    declared: &mut (Option<usize>, Option<usize>),
) -> Result<()> {
    let bad = |reason: String| Error::Parse { line, reason };
    for tok in fields.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| bad(format!("header field {tok:?} is not key=value")))?;
        match key {
            "n" => declared.0 = Some(value.parse().map_err(|e| bad(format!("n: {e}")))?),
            "count" => declared.1 = Some(value.parse().map_err(|e| bad(format!("count: {e}")))?),
            "phi" => prov.phi = Some(value.parse().map_err(|e| bad(format!("phi: {e}")))?),
            "seed" => prov.seed = Some(value.parse().map_err(|e| bad(format!("seed: {e}")))?),
            "generator" => prov.generator = value.to_string(),
            _ => {}
        }
    }
    Ok(())
}

/// Draws `count` permutations from a single model (see [`MallowsMixture::sample_set`]).
pub fn sample_model(m: &MallowsModel, count: usize, seed: u64) -> SampleSet {
    m.to_mixture().sample_set(count, seed)
}

/// A single `M(id, φ)` draw from a fresh stream; convenient for tests and demos.
pub fn sample_identity_once(n: usize, phi: f64, seed: u64) -> Permutation {
    Permutation::from_ranks_unchecked(sample_identity_ranks(n, phi, &mut stream_rng(seed, 0)))
}

/// `n!` as `f64`, for uniform-limit comparisons.
pub fn uniform_mass(n: usize) -> f64 {
    1.0 / factorial(n) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{hausdorff, image};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(order: &[usize]) -> Permutation {
        Permutation::from_order(order).unwrap()
    }

    fn brute_log_z(n: usize, phi: f64) -> f64 {
        let id = Permutation::identity(n);
        all_permutations(n)
            .map(|s| phi.powi(kendall_tau(&s, &id).unwrap() as i32))
            .sum::<f64>()
            .ln()
    }

    #[test]
    fn normalizer_examples() {
        assert_eq!(log_normalizer(1, 0.3).unwrap(), 0.0);
        assert!((log_normalizer(2, 0.5).unwrap() - 1.5f64.ln()).abs() < 1e-14);
        assert!((log_normalizer(3, 0.5).unwrap() - 2.625f64.ln()).abs() < 1e-14);
        for n in 1..=7 {
            for phi in [0.1, 0.5, 0.9] {
                assert!((log_normalizer(n, phi).unwrap() - brute_log_z(n, phi)).abs() < 1e-12);
            }
        }
        assert!(log_normalizer(3, 1.0).is_err());
        assert!(log_normalizer(3, 0.0).is_err());
    }

    #[test]
    fn pmf_examples() {
        let m = MallowsModel::new(p(&[1, 2]), 0.5).unwrap();
        let mode = log_pmf(&m, &p(&[1, 2])).unwrap();
        assert!((mode + log_normalizer(2, 0.5).unwrap()).abs() < 1e-15);
        assert!((log_pmf(&m, &p(&[2, 1])).unwrap() - (0.5f64 / 1.5).ln()).abs() < 1e-14);

        let m = MallowsModel::new(Permutation::identity(4), 0.999).unwrap();
        for s in all_permutations(4) {
            assert!((log_pmf(&m, &s).unwrap().exp() - 1.0 / 24.0).abs() < 1e-3);
        }
        assert!(MallowsModel::new(Permutation::identity(3), 1.5).is_err());
        assert!(log_pmf(&m, &Permutation::identity(3)).is_err());
    }

    #[test]
    fn exact_dist_examples() {
        let d = exact_dist(&MallowsModel::new(Permutation::identity(1), 0.4).unwrap().to_mixture()).unwrap();
        assert_eq!(d.support_len(), 1);
        let m = MallowsModel::new(Permutation::identity(3), 0.5).unwrap();
        let d = exact_dist(&m.to_mixture()).unwrap();
        assert!((d.mass(&Permutation::identity(3)) - 1.0 / 2.625).abs() < 1e-14);
        assert!(matches!(
            exact_dist(&MallowsModel::new(Permutation::identity(9), 0.5).unwrap().to_mixture()),
            Err(Error::EnumerationCap { n: 9, cap: 8 })
        ));
        assert!(exact_dist_capped(
            &MallowsModel::new(Permutation::identity(3), 0.5).unwrap().to_mixture(),
            2
        )
        .is_err());
    }

    #[test]
    fn mixture_validation() {
        let id = Permutation::identity(3);
        assert!(MallowsMixture::new(vec![(0.5, id.clone()), (0.4, id.clone())], 0.5).is_err());
        assert!(MallowsMixture::new(vec![(1.0, id.clone()), (0.0, id.clone())], 0.5).is_err());
        assert!(MallowsMixture::new(vec![(0.5, id.clone()), (0.5, Permutation::identity(4))], 0.5).is_err());
        assert!(MallowsMixture::new(vec![], 0.5).is_err());
        let m = MallowsMixture::new(vec![(0.25, id.clone()), (0.75, Permutation::reversal(3))], 0.5).unwrap();
        assert_eq!(m.gamma(), 0.25);
    }

    #[test]
    fn noiseless_limit_returns_central() {
        let central = p(&[3, 1, 4, 2, 5]);
        let m = MallowsModel::new(central.clone(), 1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(sample_rim(&m, &mut rng), central);
        }
    }

    #[test]
    fn two_point_sampler_frequency() {
        let m = MallowsModel::new(p(&[2, 1]), 0.5).unwrap();
        let draws = sample_model(&m, 100_000, 11);
        let hits = draws.draws().iter().filter(|d| *d == m.central()).count() as f64;
        let p0: f64 = 1.0 / 1.5;
        let sd = (100_000.0_f64 * p0 * (1.0 - p0)).sqrt();
        assert!((hits - 100_000.0 * p0).abs() <= 3.0 * sd);
    }

    #[test]
    fn sampler_matches_exact_pmf() {
        for phi in [0.3, 0.7] {
            let m = MallowsModel::new(p(&[2, 4, 1, 3]), phi).unwrap();
            let emp = sample_model(&m, 200_000, 5).empirical();
            let exact = exact_dist(&m.to_mixture()).unwrap();
            assert!(emp.tv(&exact) < 0.01, "phi={phi}");
        }
    }

    #[test]
    fn bulk_sampling_is_reproducible() {
        let mix = MallowsMixture::uniform(vec![Permutation::identity(5), Permutation::reversal(5)], 0.4).unwrap();
        let a = mix.sample_set(10_000, 9);
        let b = mix.sample_set(10_000, 9);
        assert_eq!(a, b);
        assert_ne!(a.draws()[..50], mix.sample_set(10_000, 10).draws()[..50]);
    }

    #[test]
    fn pairwise_formula_examples() {
        assert!((pairwise_formula(1, 0.5) - 2.0 / 3.0).abs() < 1e-15);
        let m = MallowsModel::new(Permutation::identity(4), 0.3).unwrap();
        let table = pmf_table(&m.to_mixture(), 8).unwrap();
        let direct: f64 = table.iter().filter(|(s, _)| s.rank(0) < s.rank(2)).map(|x| x.1).sum();
        assert!((pairwise_prob(&m, 0, 2).unwrap() - direct).abs() < 1e-12);
        assert!(pairwise_prob(&m, 2, 0).is_err());
        assert!(pairwise_prob(&m, 0, 9).is_err());
        for d in 1..30 {
            for phi in [0.01, 0.3, 0.6, 0.95] {
                assert!(pairwise_formula(d, phi) >= 0.5 + (1.0 - phi) / 4.0 - 1e-12);
            }
        }
    }

    #[test]
    fn marginal_examples() {
        let m = MallowsModel::new(p(&[2, 3, 1]), 0.5).unwrap();
        let d = exact_dist(&m.to_mixture()).unwrap();
        let full = marginal(&d, &IndexSet::full(3)).unwrap();
        for (s, mass) in d.iter() {
            assert!((full.mass(&s.to_injection()) - mass).abs() < 1e-15);
        }

        let uniform = DiscreteDist::from_masses(all_permutations(4).map(|s| (s, 1.0 / 24.0))).unwrap();
        let single = marginal(&uniform, &IndexSet::new([2])).unwrap();
        assert_eq!(single.support_len(), 4);
        for (_, mass) in single.iter() {
            assert!((mass - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_depends_only_on_restriction() {
        let j = IndexSet::new([1, 3]);
        let a = p(&[2, 4, 1, 5, 3]);
        let mut checked = 0;
        for other in all_permutations(5) {
            if restrict(&other, &j).unwrap() != restrict(&a, &j).unwrap() || other == a {
                continue;
            }
            let ma = marginal(
                &exact_dist(&MallowsModel::new(a.clone(), 0.6).unwrap().to_mixture()).unwrap(),
                &j,
            )
            .unwrap();
            let mb = marginal(
                &exact_dist(&MallowsModel::new(other.clone(), 0.6).unwrap().to_mixture()).unwrap(),
                &j,
            )
            .unwrap();
            assert!(ma.tv(&mb) < 1e-12);
            checked += 1;
        }
        assert_eq!(checked, 5);
    }

    #[test]
    fn block_probabilities() {
        let m = MallowsModel::new(Permutation::identity(4), 0.5).unwrap();
        let all = BlockStructure::new(vec![(IndexSet::full(4), IndexSet::full(4))]).unwrap();
        assert!((block_prob(&m, &all, BlockProbMode::Exact { cap: 8 }).unwrap() - 1.0).abs() < 1e-12);

        let first = BlockStructure::new(vec![(IndexSet::new([0]), IndexSet::new([0]))]).unwrap();
        let exact = block_prob(&m, &first, BlockProbMode::Exact { cap: 8 }).unwrap();
        let table = pmf_table(&m.to_mixture(), 8).unwrap();
        let direct: f64 = table.iter().filter(|(s, _)| s.rank(0) == 0).map(|x| x.1).sum();
        assert!((exact - direct).abs() < 1e-15);
        assert!(exact >= block_prob_lower_bound(0.5, 1, 0));
    }

    #[test]
    fn monte_carlo_block_prob_within_three_sd() {
        let m = MallowsModel::new(p(&[3, 1, 5, 2, 4]), 0.6).unwrap();
        let bs = BlockStructure::new(vec![
            (IndexSet::new([0, 2]), IndexSet::new([0, 1])),
            (IndexSet::new([4]), IndexSet::new([4])),
        ])
        .unwrap();
        let exact = block_prob(&m, &bs, BlockProbMode::Exact { cap: 8 }).unwrap();
        let draws = 50_000;
        let mc = block_prob(&m, &bs, BlockProbMode::MonteCarlo { draws, seed: 4 }).unwrap();
        let sd = (exact * (1.0 - exact) / draws as f64).sqrt();
        assert!((mc - exact).abs() <= 3.0 * sd, "mc={mc} exact={exact}");
    }

    #[test]
    fn rank_deviation_tail_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=6 {
            for phi in [0.2, 0.5, 0.8] {
                let mut ranks: Vec<usize> = (0..n).collect();
                ranks.shuffle(&mut rng);
                let m = MallowsModel::new(Permutation::from_ranks(ranks).unwrap(), phi).unwrap();
                for j in 0..n {
                    for r in 1..n {
                        let tail = rank_deviation_tail(&m, j, r, 8).unwrap();
                        assert!(tail <= rank_deviation_bound(phi, r) + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn block_bound_uses_hausdorff_gap() {
        let m = MallowsModel::new(p(&[2, 1, 3, 4]), 0.5).unwrap();
        let b = IndexSet::new([0]);
        let bp = IndexSet::new([0]);
        let gap = hausdorff(&image(m.central(), &b).unwrap(), &bp).unwrap();
        assert_eq!(gap, 1);
        let bs = BlockStructure::new(vec![(b, bp)]).unwrap();
        let exact = block_prob(&m, &bs, BlockProbMode::Exact { cap: 8 }).unwrap();
        assert!(exact >= block_prob_lower_bound(0.5, 1, gap));
    }

    #[test]
    fn sample_file_round_trip() {
        let m = MallowsModel::new(p(&[1, 2, 3, 4]), 0.5).unwrap();
        let s = sample_model(&m, 50, 7);
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# permix-samples n=4 phi=0.5 seed=7 generator=rim-chacha8 count=50\n"));
        assert_eq!(text.lines().count(), 51);
        let back = SampleSet::read_from(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn malformed_sample_files_are_rejected() {
        assert!(SampleSet::read_from("1 2 3\n1 2\n".as_bytes()).is_err());
        assert!(SampleSet::read_from("1 2 2\n".as_bytes()).is_err());
        assert!(SampleSet::read_from("# permix-samples n=3 count=2\n1 2 3\n".as_bytes()).is_err());
        assert!(SampleSet::read_from("\n# nothing\n".as_bytes()).is_err());
        let ok = SampleSet::read_from("# a comment\n\n2 1 3\n".as_bytes()).unwrap();
        assert_eq!(ok.len(), 1);
    }
}
