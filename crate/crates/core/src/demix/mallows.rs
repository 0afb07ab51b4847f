//! Demixing Mallows mixtures from samples.
//!
//! [`sub_order`] recovers the relative orders of the centrals on a small index
//! set by matching marginals: every candidate mixture in a (pruned) class is
//! simulated and compared with the data in total variation. A weak group
//! oracle built on it ([`SimulatedOracle`]) drives
//! [`insertion_demixing`](super::noiseless::insertion_demixing) unchanged.

use std::collections::{BTreeSet, HashMap};

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demix::noiseless::{find_tuple, insertion_demixing};
use crate::error::{invalid, Error, Result};
use crate::mallows::{check_phi, sample_identity_ranks, SampleSet};
use crate::oracle::{OracleBudget, WeakGroupOracle};
use crate::perm::{ChiVector, ComparisonTuple, IndexSet, Injection, Permutation, RelativeOrder};
use crate::random::{derive_seed, stream_rng, CHUNK};

/// Largest grid size `L` the theoretical mode will attempt.
pub const THEORETICAL_GRID_LIMIT: f64 = 1e6;
/// Largest simulation size `N'` the theoretical mode will attempt.
pub const THEORETICAL_SAMPLE_LIMIT: f64 = 1e9;
/// Default weight-grid size in practical mode.
pub const DEFAULT_GRID: usize = 10;
/// Default cap on candidate evaluations per index set.
pub const DEFAULT_MAX_CANDIDATES: u64 = 200_000_000;
/// Marginals over at most this many keys use dense lookup tables.
const DENSE_KEY_LIMIT: u128 = 1 << 20;
/// k-means runs on at most this many draws.
const KMEANS_SUBSAMPLE: usize = 20_000;
const KMEANS_RESTARTS: u64 = 4;
const KMEANS_ITERATIONS: usize = 50;
const LABEL_KMEANS: u64 = 0x6b6d_6561_6e73;
const LABEL_POOL: u64 = 0x706f_6f6c;
const LABEL_WEIGHTS: u64 = 0x7765_6967_6874;

fn check_constants(k: usize, ell: usize, phi: f64, gamma: f64) -> Result<()> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if ell == 0 {
        return Err(invalid("ell", "must be at least 1"));
    }
    check_phi(phi)?;
    check_gamma(k, gamma)
}

fn check_gamma(k: usize, gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || gamma > 1.0 / k as f64 + 1e-12 {
        return Err(invalid("gamma", format!("{gamma} is not in (0, 1/{k}]")));
    }
    Ok(())
}

/// `ln η(k, ℓ, φ, γ)` with `η = (γ/6k)^{(3ℓ)^{ℓ+1}} ((1−φ)/ℓ)^{(4ℓ)^ℓ + 2kℓ²}`.
pub fn log_eta(k: usize, ell: usize, phi: f64, gamma: f64) -> Result<f64> {
    check_constants(k, ell, phi, gamma)?;
    let (k, l) = (k as f64, ell as f64);
    let e1 = (3.0 * l).powf(l + 1.0);
    let e2 = (4.0 * l).powf(l) + 2.0 * k * l * l;
    Ok(e1 * (gamma / (6.0 * k)).ln() + e2 * ((1.0 - phi) / l).ln())
}

/// `ln ζ(k, ℓ, φ, γ)` with
/// `ζ = e^{(9ℓ)^{ℓ+1}} (k/γ)^{(6ℓ)^{ℓ+1}} (ℓ/(1−φ))^{3(4ℓ)^ℓ + 8kℓ²}`.
pub fn log_zeta(k: usize, ell: usize, phi: f64, gamma: f64) -> Result<f64> {
    check_constants(k, ell, phi, gamma)?;
    let (k, l) = (k as f64, ell as f64);
    let e1 = (9.0 * l).powf(l + 1.0);
    let e2 = (6.0 * l).powf(l + 1.0);
    let e3 = 3.0 * (4.0 * l).powf(l) + 8.0 * k * l * l;
    Ok(e1 + e2 * (k / gamma).ln() + e3 * (l / (1.0 - phi)).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Thresholds and sample sizes from the analytic constants.
    Theoretical,
    /// Argmin-TV selection over a pruned candidate class.
    #[default]
    Practical,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theoretical" => Ok(Mode::Theoretical),
            "practical" => Ok(Mode::Practical),
            other => Err(invalid("mode", format!("unknown mode {other:?}"))),
        }
    }
}

/// Settings shared by [`sub_order`], [`SimulatedOracle`] and [`demix_mallows`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixConfig {
    pub mode: Mode,
    /// Simulation draws per candidate; `None` uses the sample count.
    pub n_prime: Option<usize>,
    /// Weight-grid size `L` (practical mode).
    pub grid: usize,
    /// Accept the first candidate within this TV instead of the argmin (practical mode).
    pub threshold: Option<f64>,
    pub delta: f64,
    pub seed: u64,
    /// Rank window around the cluster centers; `None` uses `⌈3/(1−φ)⌉`.
    pub prune_radius: Option<f64>,
    pub max_candidates: u64,
}

impl Default for DemixConfig {
    fn default() -> Self {
        DemixConfig {
            mode: Mode::Practical,
            n_prime: None,
            grid: DEFAULT_GRID,
            threshold: None,
            delta: 0.05,
            seed: 0,
            prune_radius: None,
            max_candidates: DEFAULT_MAX_CANDIDATES,
        }
    }
}

impl DemixConfig {
    fn validate(&self) -> Result<()> {
        if self.n_prime == Some(0) {
            return Err(invalid("n_prime", "must be at least 1"));
        }
        if self.grid == 0 {
            return Err(invalid("grid", "must be at least 1"));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t <= 1.0) {
                return Err(invalid("threshold", format!("{t} is not in (0, 1]")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid("delta", format!("{} is not in (0, 1)", self.delta)));
        }
        if let Some(w) = self.prune_radius {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(invalid(
                    "prune_radius",
                    format!("{w} is not a finite nonnegative radius"),
                ));
            }
        }
        Ok(())
    }

    /// The rank window actually used for noise `phi`.
    pub fn radius(&self, phi: f64) -> f64 {
        self.prune_radius.unwrap_or_else(|| (3.0 / (1.0 - phi)).ceil())
    }
}

/// All compositions of `total` into `parts` parts, each at least `min`, lexicographic.
pub fn weight_grids(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            if left >= min {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let mut r = min;
        while r + min * (parts - 1) <= left {
            cur.push(r);
            rec(left - r, parts - 1, min, cur, out);
            cur.pop();
            r += 1;
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, min, &mut Vec::new(), &mut out);
    }
    out
}

/// Smallest grid count `r` with `r/L ≥ γ`.
fn min_grid_count(grid: usize, gamma: f64) -> usize {
    ((gamma * grid as f64) - 1e-9).ceil().max(1.0) as usize
}

fn injections_within(n: usize, windows: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn rec(pos: usize, windows: &[Vec<usize>], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos == windows.len() {
            out.push(cur.clone());
            return;
        }
        for &r in &windows[pos] {
            if !used[r] {
                used[r] = true;
                cur.push(r);
                rec(pos + 1, windows, used, cur, out);
                cur.pop();
                used[r] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(0, windows, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// The discretised class `𝓜(n, k, φ, γ, J, L)`: `k` injections `ρ_i : J → [n]`
/// with grid weights `r_i / L`, `r_i ≥ γL`, optionally restricted to rank windows.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateClass {
    n: usize,
    k: usize,
    phi: f64,
    gamma: f64,
    set: IndexSet,
    grid: usize,
    injections: Vec<Vec<usize>>,
    pruned: bool,
}

/// One member of a [`CandidateClass`]: `ρ_i` as values on `J` (ascending), and grid counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub rho: Vec<Vec<usize>>,
    pub counts: Vec<usize>,
}

impl CandidateClass {
    /// The unpruned class over all of `𝒮_{n,J}`.
    pub fn new(n: usize, k: usize, phi: f64, gamma: f64, set: IndexSet, grid: usize) -> Result<Self> {
        check_constants(k, set.len().max(1), phi, gamma)?;
        set.check_within(n)?;
        if grid == 0 {
            return Err(invalid("grid", "must be at least 1"));
        }
        let windows = vec![(0..n).collect::<Vec<_>>(); set.len()];
        Ok(CandidateClass {
            n,
            k,
            phi,
            gamma,
            injections: injections_within(n, &windows),
            set,
            grid,
            pruned: false,
        })
    }

    /// Keeps the injections lying within `radius` of some center on every
    /// coordinate of `J`; `centers[c][j]` is the mean rank of item `j` in cluster `c`.
    pub fn pruned(mut self, centers: &[Vec<f64>], radius: f64) -> Result<Self> {
        let mut keep = BTreeSet::new();
        for c in centers {
            if c.len() != self.n {
                return Err(Error::SizeMismatch {
                    expected: self.n,
                    found: c.len(),
                });
            }
            let windows: Vec<Vec<usize>> = self
                .set
                .iter()
                .map(|j| {
                    (0..self.n)
                        .filter(|&r| (r as f64 - c[j]).abs() <= radius + 1e-12)
                        .collect()
                })
                .collect();
            keep.extend(injections_within(self.n, &windows));
        }
        self.injections = keep.into_iter().collect();
        self.pruned = true;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn set(&self) -> &IndexSet {
        &self.set
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn is_pruned(&self) -> bool {
        self.pruned
    }

    /// Surviving injections, each as its values on `J` in ascending order of `J`.
    pub fn injections(&self) -> &[Vec<usize>] {
        &self.injections
    }

    /// Weight vectors `(r_1, …, r_k)` with `Σ r_i = L`, `r_i ≥ γL`.
    pub fn weight_grids(&self) -> Vec<Vec<usize>> {
        weight_grids(self.grid, self.k, min_grid_count(self.grid, self.gamma))
    }

    /// `|grids| · |injections|^k`, the number of ordered candidates.
    pub fn count(&self) -> u128 {
        (self.weight_grids().len() as u128)
            .saturating_mul((self.injections.len() as u128).saturating_pow(self.k as u32))
    }

    /// Lazily enumerates every ordered candidate.
    pub fn iter(&self) -> impl Iterator<Item = Candidate> + '_ {
        let grids = self.weight_grids();
        let r = self.injections.len();
        let total = r.checked_pow(self.k as u32).unwrap_or(usize::MAX);
        (0..if r == 0 { 0 } else { total }).flat_map(move |mut code| {
            let mut rho = Vec::with_capacity(self.k);
            for _ in 0..self.k {
                rho.push(self.injections[code % r].clone());
                code /= r;
            }
            rho.reverse();
            grids.clone().into_iter().map(move |counts| Candidate {
                rho: rho.clone(),
                counts,
            })
        })
    }

    fn relative_order(&self, values: &[usize]) -> RelativeOrder {
        Injection::new(self.n, self.set.clone(), values.to_vec())
            .expect("class members are injections")
            .relative_order()
    }
}

/// Keys `Σ_p v_p n^p` for value tuples on `J`.
#[derive(Debug, Clone)]
struct Codec {
    n: u128,
    len: usize,
}

impl Codec {
    fn new(n: usize, len: usize) -> Result<Self> {
        (n as u128)
            .checked_pow(len as u32)
            .filter(|&s| s < u128::MAX / 2)
            .ok_or(Error::ClassTooLarge {
                count: u128::MAX,
                limit: u128::MAX / 2,
            })?;
        Ok(Codec { n: n as u128, len })
    }

    fn size(&self) -> u128 {
        self.n.pow(self.len as u32)
    }

    fn key(&self, values: impl Iterator<Item = usize>) -> u128 {
        let mut scale = 1u128;
        let mut key = 0u128;
        for v in values {
            key += v as u128 * scale;
            scale *= self.n;
        }
        key
    }
}

type Marginal = Vec<(u128, f64)>;

fn counts_to_marginal(mut keys: Vec<u128>) -> Marginal {
    let total = keys.len() as f64;
    keys.sort_unstable();
    let mut out: Marginal = Vec::new();
    for k in keys {
        match out.last_mut() {
            Some((last, c)) if *last == k => *c += 1.0,
            _ => out.push((k, 1.0)),
        }
    }
    for e in &mut out {
        e.1 /= total;
    }
    out
}

enum Lookup {
    Dense(Vec<f64>),
    Sparse(HashMap<u128, f64>),
}

impl Lookup {
    fn new(m: &Marginal, codec: &Codec) -> Self {
        if codec.size() <= DENSE_KEY_LIMIT {
            let mut v = vec![0.0; codec.size() as usize];
            for &(k, p) in m {
                v[k as usize] = p;
            }
            Lookup::Dense(v)
        } else {
            Lookup::Sparse(m.iter().copied().collect())
        }
    }

    fn get(&self, key: u128) -> f64 {
        match self {
            Lookup::Dense(v) => v[key as usize],
            Lookup::Sparse(h) => h.get(&key).copied().unwrap_or(0.0),
        }
    }
}

fn data_marginal(samples: &SampleSet, set: &IndexSet, codec: &Codec) -> Marginal {
    counts_to_marginal(
        samples
            .draws()
            .iter()
            .map(|s| codec.key(set.iter().map(|j| s.rank(j))))
            .collect(),
    )
}

/// Marginals on `J` of `M(π_ρ, φ)` for every `ρ`, all read off one pool of
/// `count` draws from `M(id, φ)`: a draw `σ₀` contributes `(σ₀(ρ(j)))_{j∈J}`.
fn pool_marginals(n: usize, phi: f64, count: usize, seed: u64, rhos: &[Vec<usize>], codec: &Codec) -> Vec<Marginal> {
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<Vec<Vec<(u128, f64)>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            let pool: Vec<Vec<usize>> = (0..len).map(|_| sample_identity_ranks(n, phi, &mut rng)).collect();
            rhos.iter()
                .map(|rho| {
                    let mut keys: Vec<u128> = pool.iter().map(|d| codec.key(rho.iter().map(|&r| d[r]))).collect();
                    keys.sort_unstable();
                    let mut out: Vec<(u128, f64)> = Vec::new();
                    for k in keys {
                        match out.last_mut() {
                            Some((last, c)) if *last == k => *c += 1.0,
                            _ => out.push((k, 1.0)),
                        }
                    }
                    out
                })
                .collect()
        })
        .collect();
    (0..rhos.len())
        .into_par_iter()
        .map(|i| {
            let mut all: Vec<(u128, f64)> = parts.iter().flat_map(|p| p[i].iter().copied()).collect();
            all.sort_unstable_by_key(|e| e.0);
            let mut out: Marginal = Vec::new();
            for (k, c) in all {
                match out.last_mut() {
                    Some((last, m)) if *last == k => *m += c,
                    _ => out.push((k, c)),
                }
            }
            for e in &mut out {
                e.1 /= count as f64;
            }
            out
        })
        .collect()
}

fn merge_scaled(acc: &[(u128, f64)], part: &[(u128, f64)], w: f64, out: &mut Vec<(u128, f64)>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < acc.len() || j < part.len() {
        if j == part.len() || (i < acc.len() && acc[i].0 < part[j].0) {
            out.push(acc[i]);
            i += 1;
        } else if i == acc.len() || part[j].0 < acc[i].0 {
            out.push((part[j].0, w * part[j].1));
            j += 1;
        } else {
            out.push((acc[i].0, acc[i].1 + w * part[j].1));
            i += 1;
            j += 1;
        }
    }
}

/// Reusable buffers for [`mixture_tv`].
#[derive(Default)]
struct Scratch {
    a: Vec<(u128, f64)>,
    b: Vec<(u128, f64)>,
}

/// `TV(Σ w_i f_i, data)` where the `f_i` are sorted sparse marginals.
fn mixture_tv(parts: &[(&Marginal, f64)], data: &Lookup, scratch: &mut Scratch) -> f64 {
    scratch.a.clear();
    for &(f, w) in parts {
        merge_scaled(&scratch.a, f, w, &mut scratch.b);
        std::mem::swap(&mut scratch.a, &mut scratch.b);
    }
    let (mut sum, mut covered) = (0.0, 0.0);
    for &(k, c) in &scratch.a {
        let d = data.get(k);
        sum += (c - d).abs();
        covered += d;
    }
    (0.5 * (sum + (1.0 - covered).max(0.0))).clamp(0.0, 1.0)
}

/// How [`sub_order`] picks among candidates.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Selection {
    Argmin,
    Threshold(f64),
}

/// Per-query record kept by [`SimulatedOracle`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryDiagnostic {
    pub tuple: String,
    /// Index set `J`, 1-based.
    pub set: Vec<usize>,
    pub cached: bool,
    pub injections: usize,
    pub candidates: u64,
    pub best_tv: f64,
    /// Smallest TV among candidates yielding a different set of relative orders.
    pub runner_up_tv: Option<f64>,
    pub answers: usize,
}

#[derive(Debug, Clone)]
struct SubOrderOutcome {
    orders: BTreeSet<RelativeOrder>,
    injections: usize,
    candidates: u64,
    best_tv: f64,
    runner_up_tv: Option<f64>,
}

/// Everything [`sub_order`] needs besides `J`, reusable across index sets.
struct Context<'a> {
    samples: &'a SampleSet,
    k: usize,
    phi: f64,
    gamma: f64,
    cfg: DemixConfig,
    n_prime: usize,
    centers: Vec<Vec<f64>>,
}

impl<'a> Context<'a> {
    fn new(samples: &'a SampleSet, k: usize, phi: f64, gamma: f64, cfg: &DemixConfig) -> Result<Self> {
        check_constants(k, 1, phi, gamma)?;
        cfg.validate()?;
        if samples.is_empty() {
            return Err(invalid("samples", "no draws"));
        }
        let centers = kmeans_centers(samples, k, cfg.seed);
        Ok(Context {
            samples,
            k,
            phi,
            gamma,
            n_prime: cfg.n_prime.unwrap_or(samples.len()),
            cfg: cfg.clone(),
            centers,
        })
    }

    fn run(&self, set: &IndexSet) -> Result<SubOrderOutcome> {
        let n = self.samples.n();
        set.check_within(n)?;
        let ell = set.len();
        let (grid, selection) = match self.cfg.mode {
            Mode::Theoretical => {
                let ln_eta = log_eta(self.k, ell, self.phi, self.gamma)?;
                let ln_grid = (3.0 * self.k as f64).ln() - ln_eta;
                if ln_grid > THEORETICAL_GRID_LIMIT.ln() {
                    return Err(Error::TheoreticalInfeasible(format!(
                        "ln η = {ln_eta:.1} at |J| = {ell}, so the weight grid needs L ≈ e^{ln_grid:.1} points"
                    )));
                }
                (
                    (ln_grid.exp()).ceil() as usize,
                    Selection::Threshold(ln_eta.exp() / 2.0),
                )
            }
            Mode::Practical => (
                self.cfg.grid,
                self.cfg.threshold.map_or(Selection::Argmin, Selection::Threshold),
            ),
        };
        let class = CandidateClass::new(n, self.k, self.phi, self.gamma, set.clone(), grid)?
            .pruned(&self.centers, self.cfg.radius(self.phi))?;
        if class.injections().is_empty() {
            return Err(Error::EmptyCandidates(format!(
                "no injection on J = {:?} survives pruning at radius {}",
                set.iter().map(|j| j + 1).collect::<Vec<_>>(),
                self.cfg.radius(self.phi)
            )));
        }
        let codec = Codec::new(n, ell)?;
        let data = Lookup::new(&data_marginal(self.samples, set, &codec), &codec);
        let pool_seed = derive_seed(derive_seed(self.cfg.seed, LABEL_POOL), set_label(set));
        let marginals = pool_marginals(n, self.phi, self.n_prime, pool_seed, class.injections(), &codec);
        let orders: Vec<RelativeOrder> = class.injections().iter().map(|v| class.relative_order(v)).collect();
        let search = search_candidates(
            &marginals,
            &orders,
            self.k,
            grid,
            self.gamma,
            &data,
            selection,
            self.cfg.max_candidates,
        )?;
        Ok(SubOrderOutcome {
            orders: search.chosen.iter().map(|&i| orders[i].clone()).collect(),
            injections: class.injections().len(),
            candidates: search.evaluated,
            best_tv: search.best_tv,
            runner_up_tv: search.runner_up_tv,
        })
    }
}

fn set_label(set: &IndexSet) -> u64 {
    set.iter()
        .fold(set.len() as u64, |acc, j| derive_seed(acc, j as u64 + 1))
}

struct Search {
    chosen: Vec<usize>,
    evaluated: u64,
    best_tv: f64,
    runner_up_tv: Option<f64>,
}

/// Valid grid vectors for `s` distinct injections standing in for `k` components:
/// each merged weight must split into its multiplicity of parts, each `≥ min`.
fn merged_grids(grid: usize, s: usize, k: usize, min: usize) -> Vec<Vec<usize>> {
    weight_grids(grid, s, min)
        .into_iter()
        .filter(|g| g.iter().map(|r| r / min).sum::<usize>() >= k)
        .collect()
}

fn combinations(r: usize, s: usize, first: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, r: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(i + 1, r, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![first];
    rec(first + 1, r, s, &mut cur, &mut out);
    out
}

#[derive(Debug, Clone)]
struct Best {
    tv: f64,
    rank: (Vec<usize>, usize),
}

fn better(a: &Best, b: &Best) -> bool {
    a.tv.total_cmp(&b.tv).then_with(|| a.rank.cmp(&b.rank)).is_lt()
}

/// Evaluates every multiset of at most `k` distinct injections with every valid
/// grid weighting; candidates with repeated injections are covered by the
/// merged smaller multisets. Ties go to the earliest candidate in
/// (combination, grid) order.
#[allow(clippy::too_many_arguments)]
fn search_candidates(
    marginals: &[Marginal],
    orders: &[RelativeOrder],
    k: usize,
    grid: usize,
    gamma: f64,
    data: &Lookup,
    selection: Selection,
    max_candidates: u64,
) -> Result<Search> {
    let r = marginals.len();
    let min = min_grid_count(grid, gamma);
    let grids: Vec<Vec<Vec<usize>>> = (0..=k)
        .map(|s| {
            if s == 0 {
                Vec::new()
            } else {
                merged_grids(grid, s, k, min)
            }
        })
        .collect();
    if grids.iter().all(|g| g.is_empty()) {
        return Err(Error::EmptyCandidates(format!(
            "no weight grid with L = {grid}, γ = {gamma}"
        )));
    }
    let mut total: u128 = 0;
    for (s, g) in grids.iter().enumerate().skip(1) {
        total += binomial(r as u128, s as u128).saturating_mul(g.len() as u128);
    }
    if total > max_candidates as u128 {
        return Err(Error::ClassTooLarge {
            count: total,
            limit: max_candidates as u128,
        });
    }

    // Distinct relative orders get small ids so candidate order-sets compare cheaply.
    let mut ids: HashMap<&RelativeOrder, u32> = HashMap::new();
    let order_id: Vec<u32> = orders
        .iter()
        .map(|o| {
            let next = ids.len() as u32;
            *ids.entry(o).or_insert(next)
        })
        .collect();

    struct Partial {
        best: Option<Best>,
        accepted: Option<Best>,
        per_set: HashMap<Vec<u32>, f64>,
        evaluated: u64,
    }

    let partials: Vec<Partial> = (0..r)
        .into_par_iter()
        .map(|first| {
            let mut scratch = Scratch::default();
            let mut p = Partial {
                best: None,
                accepted: None,
                per_set: HashMap::new(),
                evaluated: 0,
            };
            for s in 1..=k.min(r - first) {
                if grids[s].is_empty() {
                    continue;
                }
                for combo in combinations(r, s, first) {
                    let mut set_key: Vec<u32> = combo.iter().map(|&i| order_id[i]).collect();
                    set_key.sort_unstable();
                    set_key.dedup();
                    let mut combo_best = f64::INFINITY;
                    for (gi, g) in grids[s].iter().enumerate() {
                        let parts: Vec<(&Marginal, f64)> = combo
                            .iter()
                            .zip(g)
                            .map(|(&i, &c)| (&marginals[i], c as f64 / grid as f64))
                            .collect();
                        let tv = mixture_tv(&parts, data, &mut scratch);
                        p.evaluated += 1;
                        combo_best = combo_best.min(tv);
                        let cand = Best {
                            tv,
                            rank: (combo.clone(), gi),
                        };
                        if p.best.as_ref().is_none_or(|b| better(&cand, b)) {
                            p.best = Some(cand.clone());
                        }
                        if let Selection::Threshold(t) = selection {
                            if tv <= t && p.accepted.as_ref().is_none_or(|a| cand.rank < a.rank) {
                                p.accepted = Some(cand);
                            }
                        }
                    }
                    let e = p.per_set.entry(set_key).or_insert(f64::INFINITY);
                    *e = e.min(combo_best);
                }
            }
            p
        })
        .collect();

    let mut best: Option<Best> = None;
    let mut accepted: Option<Best> = None;
    let mut per_set: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut evaluated = 0;
    for p in partials {
        evaluated += p.evaluated;
        if let Some(b) = p.best {
            if best.as_ref().is_none_or(|x| better(&b, x)) {
                best = Some(b);
            }
        }
        if let Some(a) = p.accepted {
            if accepted.as_ref().is_none_or(|x| a.rank < x.rank) {
                accepted = Some(a);
            }
        }
        for (key, tv) in p.per_set {
            let e = per_set.entry(key).or_insert(f64::INFINITY);
            *e = e.min(tv);
        }
    }
    let best = best.ok_or_else(|| Error::EmptyCandidates("no candidate was evaluated".into()))?;
    let chosen = match selection {
        Selection::Argmin => best.clone(),
        Selection::Threshold(t) => accepted.ok_or_else(|| {
            Error::EmptyCandidates(format!("no candidate within TV {t:.3e}; best was {:.4}", best.tv))
        })?,
    };
    let mut chosen_key: Vec<u32> = chosen.rank.0.iter().map(|&i| order_id[i]).collect();
    chosen_key.sort_unstable();
    chosen_key.dedup();
    let runner_up_tv = per_set
        .iter()
        .filter(|(key, _)| **key != chosen_key)
        .map(|(_, &tv)| tv)
        .min_by(f64::total_cmp);
    Ok(Search {
        chosen: chosen.rank.0,
        evaluated,
        best_tv: best.tv,
        runner_up_tv,
    })
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Cluster centers of the rank vectors (k-means++ seeding, Lloyd iterations,
/// best of a few restarts), on a prefix of at most 20 000 draws.
pub fn kmeans_centers(samples: &SampleSet, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = samples.n();
    let points: Vec<Vec<f64>> = samples
        .draws()
        .iter()
        .take(KMEANS_SUBSAMPLE)
        .map(|p| p.ranks().iter().map(|&r| r as f64).collect())
        .collect();
    if points.is_empty() {
        return Vec::new();
    }
    let k = k.min(points.len());
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = stream_rng(derive_seed(seed, LABEL_KMEANS), restart);
        let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
        let mut d: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
        while centers.len() < k {
            let total: f64 = d.iter().sum();
            let next = if total > 0.0 {
                let mut u = rng.random::<f64>() * total;
                d.iter()
                    .position(|&x| {
                        u -= x;
                        u <= 0.0
                    })
                    .unwrap_or(points.len() - 1)
            } else {
                sample_indices(&mut rng, points.len(), 1).index(0)
            };
            centers.push(points[next].clone());
            for (di, p) in d.iter_mut().zip(&points) {
                *di = di.min(dist2(p, &centers[centers.len() - 1]));
            }
        }
        let mut assign = vec![usize::MAX; points.len()];
        for _ in 0..KMEANS_ITERATIONS {
            let mut changed = false;
            for (a, p) in assign.iter_mut().zip(&points) {
                let c = (0..k)
                    .min_by(|&x, &y| dist2(p, &centers[x]).total_cmp(&dist2(p, &centers[y])))
                    .expect("k ≥ 1");
                if *a != c {
                    *a = c;
                    changed = true;
                }
            }
            let mut sums = vec![vec![0.0; n]; k];
            let mut counts = vec![0usize; k];
            for (&a, p) in assign.iter().zip(&points) {
                counts[a] += 1;
                for (s, x) in sums[a].iter_mut().zip(p) {
                    *s += x;
                }
            }
            for c in 0..k {
                if counts[c] > 0 {
                    centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = assign.iter().zip(&points).map(|(&a, p)| dist2(p, &centers[a])).sum();
        if best.as_ref().is_none_or(|b| inertia < b.0) {
            best = Some((inertia, centers));
        }
    }
    let mut centers = best.expect("at least one restart").1;
    centers.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    centers
}

/// Recovers `{π_i‖_J}` from samples: the relative orders on `J` of the
/// selected candidate (argmin TV in practical mode, first candidate within
/// `η/2` in theoretical mode).
pub fn sub_order(
    samples: &SampleSet,
    k: usize,
    phi: f64,
    gamma: f64,
    cfg: &DemixConfig,
    set: &IndexSet,
) -> Result<BTreeSet<RelativeOrder>> {
    Ok(Context::new(samples, k, phi, gamma, cfg)?.run(set)?.orders)
}

/// One weak-oracle answer from samples: the comparison vectors of the
/// relative orders [`sub_order`] finds on the support of `t`.
pub fn simulate_oracle(
    samples: &SampleSet,
    k: usize,
    phi: f64,
    gamma: f64,
    cfg: &DemixConfig,
    t: &ComparisonTuple,
) -> Result<BTreeSet<ChiVector>> {
    let orders = sub_order(samples, k, phi, gamma, cfg, &t.support())?;
    orders.iter().map(|o| o.chi(t)).collect()
}

/// Sample-backed weak group oracle; [`sub_order`] results are memoized per index set.
pub struct SimulatedOracle<'a> {
    ctx: Context<'a>,
    group_size: usize,
    memo: HashMap<IndexSet, SubOrderOutcome>,
    budget: OracleBudget,
    diagnostics: Vec<QueryDiagnostic>,
}

impl<'a> SimulatedOracle<'a> {
    pub fn new(
        samples: &'a SampleSet,
        k: usize,
        phi: f64,
        gamma: f64,
        cfg: &DemixConfig,
        group_size: usize,
    ) -> Result<Self> {
        if group_size == 0 {
            return Err(invalid("group_size", "must be at least 1"));
        }
        Ok(SimulatedOracle {
            ctx: Context::new(samples, k, phi, gamma, cfg)?,
            group_size,
            memo: HashMap::new(),
            budget: OracleBudget::default(),
            diagnostics: Vec::new(),
        })
    }

    /// Memoized [`sub_order`].
    pub fn sub_order(&mut self, set: &IndexSet) -> Result<BTreeSet<RelativeOrder>> {
        Ok(self.lookup(set)?.0.orders.clone())
    }

    fn lookup(&mut self, set: &IndexSet) -> Result<(&SubOrderOutcome, bool)> {
        let cached = self.memo.contains_key(set);
        if !cached {
            let out = self.ctx.run(set)?;
            self.memo.insert(set.clone(), out);
        }
        Ok((&self.memo[set], cached))
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.ctx.centers
    }

    pub fn diagnostics(&self) -> &[QueryDiagnostic] {
        &self.diagnostics
    }

    pub fn distinct_sets(&self) -> usize {
        self.memo.len()
    }

    pub fn n_prime(&self) -> usize {
        self.ctx.n_prime
    }
}

impl WeakGroupOracle for SimulatedOracle<'_> {
    fn n(&self) -> usize {
        self.ctx.samples.n()
    }

    fn group_size(&self) -> usize {
        self.group_size
    }

    fn query(&mut self, t: &ComparisonTuple) -> Result<BTreeSet<ChiVector>> {
        if t.len() != self.group_size {
            return Err(Error::InvalidTuple(format!(
                "oracle answers groups of {} comparisons, query has {}",
                self.group_size,
                t.len()
            )));
        }
        t.check_within(self.n())?;
        self.budget.increment();
        let set = t.support();
        let (out, cached) = self.lookup(&set)?;
        let answer: BTreeSet<ChiVector> = out.orders.iter().map(|o| o.chi(t)).collect::<Result<_>>()?;
        let diag = QueryDiagnostic {
            tuple: t.to_string(),
            set: set.iter().map(|j| j + 1).collect(),
            cached,
            injections: out.injections,
            candidates: out.candidates,
            best_tv: out.best_tv,
            runner_up_tv: out.runner_up_tv,
            answers: answer.len(),
        };
        self.diagnostics.push(diag);
        Ok(answer)
    }

    fn budget(&self) -> OracleBudget {
        self.budget
    }
}

/// Run summary for [`demix_mallows`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemixReport {
    pub queries: u64,
    pub distinct_sets: usize,
    pub n_prime: usize,
    pub prune_radius: f64,
    pub diagnostics: Vec<QueryDiagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemixOutcome {
    pub perms: Vec<Permutation>,
    pub report: DemixReport,
}

/// `ln N'` for theoretical mode: `ζ(k, 2k+2, φ, γ) · ln(n^{2k+3}/δ)`.
pub fn log_theoretical_n_prime(n: usize, k: usize, phi: f64, gamma: f64, delta: f64) -> Result<f64> {
    let ln_zeta = log_zeta(k, 2 * k + 2, phi, gamma)?;
    let inner = (2 * k + 3) as f64 * (n as f64).ln() - delta.ln();
    Ok(ln_zeta + inner.ln())
}

/// Recovers the central permutations of a Mallows mixture by running insertion
/// demixing against a [`SimulatedOracle`].
pub fn demix_mallows(samples: &SampleSet, k: usize, phi: f64, gamma: f64, cfg: &DemixConfig) -> Result<DemixOutcome> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    if cfg.mode == Mode::Theoretical {
        let ln_np = log_theoretical_n_prime(samples.n(), k, phi, gamma, cfg.delta)?;
        if ln_np > THEORETICAL_SAMPLE_LIMIT.ln() {
            return Err(Error::TheoreticalInfeasible(format!(
                "simulation size N' ≈ e^{ln_np:.1} draws per candidate"
            )));
        }
        cfg.n_prime = Some(ln_np.exp().ceil() as usize);
    }
    let mut oracle = SimulatedOracle::new(samples, k, phi, gamma, &cfg, k + 1)?;
    let perms = insertion_demixing(&mut oracle, k)?;
    Ok(DemixOutcome {
        perms,
        report: DemixReport {
            queries: oracle.budget().count(),
            distinct_sets: oracle.distinct_sets(),
            n_prime: oracle.n_prime(),
            prune_radius: cfg.radius(phi),
            diagnostics: oracle.diagnostics,
        },
    })
}

/// Settings for [`estimate_weights`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    /// Grid size `L`; `None` uses `⌈k√N⌉`.
    pub grid: Option<usize>,
    /// Simulation draws per component; `None` uses `⌈kN ln N⌉`.
    pub n_prime: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEstimate {
    /// `ŵ_i`, aligned with the input permutations.
    pub weights: Vec<f64>,
    pub grid: usize,
    pub n_prime: usize,
    /// Index set `J` the marginals were matched on, 1-based.
    pub set: Vec<usize>,
    pub tv: f64,
}

/// Estimates mixing weights for known centrals by matching the marginal on the
/// support of a separating tuple against every grid weighting.
pub fn estimate_weights(
    samples: &SampleSet,
    phi: f64,
    gamma: f64,
    perms: &[Permutation],
    cfg: &WeightConfig,
) -> Result<WeightEstimate> {
    let t = find_tuple(perms)?;
    let k = perms.len();
    check_constants(k, 1, phi, gamma)?;
    let n = perms[0].n();
    if samples.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: samples.n(),
        });
    }
    if samples.is_empty() {
        return Err(invalid("samples", "no draws"));
    }
    if k == 1 {
        return Ok(WeightEstimate {
            weights: vec![1.0],
            grid: 1,
            n_prime: 0,
            set: Vec::new(),
            tv: 0.0,
        });
    }
    let big_n = samples.len() as f64;
    let grid = cfg.grid.unwrap_or((k as f64 * big_n.sqrt()).ceil() as usize);
    let n_prime = cfg
        .n_prime
        .unwrap_or((k as f64 * big_n * big_n.ln()).ceil().max(1.0) as usize);
    if grid == 0 || n_prime == 0 {
        return Err(invalid("grid", "grid size and simulation size must be positive"));
    }
    let grids = weight_grids(grid, k, min_grid_count(grid, gamma));
    if grids.is_empty() {
        return Err(Error::EmptyCandidates(format!(
            "no weight grid with L = {grid}, γ = {gamma}"
        )));
    }
    let set = t.support();
    let codec = Codec::new(n, set.len())?;
    let data = Lookup::new(&data_marginal(samples, &set, &codec), &codec);
    let rhos: Vec<Vec<usize>> = perms.iter().map(|p| set.iter().map(|j| p.rank(j)).collect()).collect();
    let marginals = pool_marginals(n, phi, n_prime, derive_seed(cfg.seed, LABEL_WEIGHTS), &rhos, &codec);
    let (best, tv) = grids
        .par_iter()
        .enumerate()
        .map_init(Scratch::default, |scratch, (gi, g)| {
            let parts: Vec<(&Marginal, f64)> = marginals
                .iter()
                .zip(g)
                .map(|(m, &c)| (m, c as f64 / grid as f64))
                .collect();
            (gi, mixture_tv(&parts, &data, scratch))
        })
        .reduce(
            || (usize::MAX, f64::INFINITY),
            |a, b| {
                if b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)).is_lt() {
                    b
                } else {
                    a
                }
            },
        );
    Ok(WeightEstimate {
        weights: grids[best].iter().map(|&c| c as f64 / grid as f64).collect(),
        grid,
        n_prime,
        set: set.iter().map(|j| j + 1).collect(),
        tv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mallows::MallowsMixture;
    use crate::oracle::{weak_group_query, SetOracle};
    use crate::perm::{all_permutations, relative_order};

    fn p(order: &[usize]) -> Permutation {
        Permutation::from_order(order).unwrap()
    }

    #[test]
    fn eta_and_zeta_closed_forms() {
        let eta = log_eta(2, 2, 0.5, 0.5).unwrap();
        let want = 216.0 * (1.0f64 / 24.0).ln() + 80.0 * 0.25f64.ln();
        assert!((eta - want).abs() < 1e-9);
        assert!((eta + 797.4).abs() < 0.05);
        let zeta = log_zeta(2, 2, 0.5, 0.5).unwrap();
        let want = 5832.0 + 1728.0 * 4f64.ln() + 256.0 * 4f64.ln();
        assert!((zeta - want).abs() < 1e-9);
        assert!(log_eta(2, 2, 0.5, 0.6).is_err());
        assert!(log_zeta(0, 2, 0.5, 0.5).is_err());
        assert!(log_eta(1, 2, 1.0, 0.5).is_err());
    }

    #[test]
    fn eta_and_zeta_monotone() {
        for &(k, ell) in &[(1, 1), (2, 3), (3, 6)] {
            let g = 0.5 / k as f64;
            assert!(log_eta(k, ell, 0.4, g).unwrap() < log_eta(k, ell, 0.4, 2.0 * g).unwrap());
            assert!(log_eta(k, ell, 0.4, g).unwrap() > log_eta(k, ell, 0.8, g).unwrap());
            assert!(log_zeta(k, ell, 0.4, g).unwrap() > 0.0);
        }
    }

    #[test]
    fn grids_and_class_counts() {
        assert_eq!(weight_grids(4, 2, 1), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(weight_grids(5, 3, 2), Vec::<Vec<usize>>::new());
        for n in 2..=4 {
            for k in 1..=2 {
                for ell in 1..=n.min(3) {
                    for grid in [2, 4] {
                        let set = IndexSet::new(0..ell);
                        let c = CandidateClass::new(n, k, 0.5, 1.0 / (2 * k) as f64, set, grid).unwrap();
                        let inj = (n - ell + 1..=n).product::<usize>();
                        assert_eq!(c.injections().len(), inj);
                        let grids = c.weight_grids().len();
                        assert_eq!(c.count(), (grids * inj.pow(k as u32)) as u128);
                        assert_eq!(c.iter().count() as u128, c.count());
                        assert!(c.count() <= (grid.pow(k as u32) * n.pow((k * ell) as u32)) as u128);
                        for cand in c.iter().take(50) {
                            assert_eq!(cand.counts.iter().sum::<usize>(), grid);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn pruning_keeps_windows() {
        let set = IndexSet::new([0, 2]);
        let c = CandidateClass::new(4, 1, 0.5, 1.0, set, 1).unwrap();
        let pruned = c.pruned(&[vec![0.2, 1.0, 2.9, 3.0]], 0.5).unwrap();
        assert_eq!(pruned.injections(), &[vec![0, 3]]);
    }

    #[test]
    fn tv_of_sparse_mixtures() {
        let codec = Codec::new(3, 1).unwrap();
        let data = Lookup::new(&vec![(0, 0.5), (1, 0.5)], &codec);
        let a: Marginal = vec![(0, 1.0)];
        let b: Marginal = vec![(2, 1.0)];
        let mut s = Scratch::default();
        assert!((mixture_tv(&[(&a, 1.0)], &data, &mut s) - 0.5).abs() < 1e-12);
        assert!((mixture_tv(&[(&a, 0.5), (&b, 0.5)], &data, &mut s) - 0.5).abs() < 1e-12);
        let c: Marginal = vec![(1, 1.0)];
        assert!(mixture_tv(&[(&a, 0.5), (&c, 0.5)], &data, &mut s).abs() < 1e-12);
    }

    #[test]
    fn pool_marginal_matches_exact_marginal() {
        let n = 4;
        let central = p(&[3, 1, 4, 2]);
        let set = IndexSet::new([1, 3]);
        let codec = Codec::new(n, 2).unwrap();
        let rho: Vec<usize> = set.iter().map(|j| central.rank(j)).collect();
        let got = &pool_marginals(n, 0.5, 200_000, 3, &[rho], &codec)[0];
        let mix = MallowsMixture::uniform(vec![central], 0.5).unwrap();
        let mut exact: HashMap<u128, f64> = HashMap::new();
        for s in all_permutations(n) {
            let key = codec.key(set.iter().map(|j| s.rank(j)));
            *exact.entry(key).or_insert(0.0) += mix.log_pmf(&s).unwrap().exp();
        }
        for &(key, mass) in got {
            assert!((mass - exact[&key]).abs() < 0.01);
        }
        assert_eq!(got.len(), exact.len());
    }

    #[test]
    fn sub_order_single_component() {
        let central = p(&[2, 5, 1, 4, 3]);
        let mix = MallowsMixture::uniform(vec![central.clone()], 0.3).unwrap();
        let samples = mix.sample_set(3000, 11);
        let cfg = DemixConfig {
            seed: 1,
            ..DemixConfig::default()
        };
        let set = IndexSet::new([0, 2, 4]);
        let got = sub_order(&samples, 1, 0.3, 1.0, &cfg, &set).unwrap();
        assert_eq!(got, BTreeSet::from([relative_order(&central, &set).unwrap()]));
    }

    #[test]
    fn sub_order_planted_pair() {
        let a = p(&[1, 2, 3, 4, 5]);
        let b = p(&[5, 4, 3, 2, 1]);
        let mix = MallowsMixture::uniform(vec![a.clone(), b.clone()], 0.3).unwrap();
        let cfg = DemixConfig {
            prune_radius: Some(1.5),
            ..DemixConfig::default()
        };
        let mut hits = 0;
        for trial in 0..10 {
            let samples = mix.sample_set(5000, 100 + trial);
            let cfg = DemixConfig {
                seed: trial,
                ..cfg.clone()
            };
            let set = IndexSet::new([1, 3]);
            let got = sub_order(&samples, 2, 0.3, 0.5, &cfg, &set).unwrap();
            let want: BTreeSet<_> = [&a, &b].iter().map(|q| relative_order(q, &set).unwrap()).collect();
            hits += (got == want) as u32;
        }
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn sub_order_agreeing_components_give_singleton() {
        let a = p(&[1, 2, 3, 4, 5]);
        let b = p(&[1, 2, 5, 4, 3]);
        let mix = MallowsMixture::uniform(vec![a.clone(), b], 0.3).unwrap();
        let samples = mix.sample_set(5000, 5);
        let cfg = DemixConfig {
            prune_radius: Some(1.5),
            ..DemixConfig::default()
        };
        let set = IndexSet::new([0, 1]);
        let got = sub_order(&samples, 2, 0.3, 0.5, &cfg, &set).unwrap();
        assert_eq!(got, BTreeSet::from([relative_order(&a, &set).unwrap()]));
    }

    #[test]
    fn simulated_answers_match_ground_truth() {
        let hidden = vec![p(&[2, 1, 3, 5, 4]), p(&[4, 5, 3, 1, 2])];
        let mix = MallowsMixture::uniform(hidden.clone(), 0.2).unwrap();
        let samples = mix.sample_set(5000, 9);
        let cfg = DemixConfig {
            prune_radius: Some(1.5),
            ..DemixConfig::default()
        };
        for pairs in [vec![(0, 1), (2, 3), (3, 4)], vec![(0, 4), (0, 4), (1, 2)]] {
            let t = ComparisonTuple::new(pairs).unwrap();
            let got = simulate_oracle(&samples, 2, 0.2, 0.5, &cfg, &t).unwrap();
            assert_eq!(got, weak_group_query(&hidden, &t).unwrap());
        }
    }

    #[test]
    fn ground_truth_oracle_reproduces_insertion_demixing() {
        let hidden = vec![p(&[2, 1, 3, 5, 4, 6]), p(&[4, 5, 3, 1, 2, 6])];
        let mut a = SetOracle::new(hidden.clone(), 3).unwrap();
        let mut b = SetOracle::new(hidden, 3).unwrap();
        assert_eq!(
            insertion_demixing(&mut a, 2).unwrap(),
            insertion_demixing(&mut b, 2).unwrap()
        );
    }

    #[test]
    fn demix_recovers_planted_pair() {
        let hidden = vec![p(&[1, 2, 3, 4, 5, 6]), p(&[4, 6, 1, 5, 2, 3])];
        let mix = MallowsMixture::uniform(hidden.clone(), 0.3).unwrap();
        let samples = mix.sample_set(20_000, 21);
        let cfg = DemixConfig {
            prune_radius: Some(1.5),
            seed: 4,
            ..DemixConfig::default()
        };
        let out = demix_mallows(&samples, 2, 0.3, 0.5, &cfg).unwrap();
        let mut want = hidden;
        want.sort();
        assert_eq!(out.perms, want);
        assert!(out.report.queries as f64 <= crate::demix::noiseless::weak_query_bound(6, 2));
        assert_eq!(out.report.diagnostics.len() as u64, out.report.queries);
        assert!(out.report.distinct_sets as u64 <= out.report.queries);
    }

    #[test]
    fn demix_single_component() {
        let central = p(&[3, 8, 1, 6, 2, 7, 5, 4]);
        let mix = MallowsMixture::uniform(vec![central.clone()], 0.5).unwrap();
        let samples = mix.sample_set(2000, 8);
        let out = demix_mallows(&samples, 1, 0.5, 1.0, &DemixConfig::default()).unwrap();
        assert_eq!(out.perms, vec![central]);
    }

    #[test]
    fn theoretical_mode_reports_infeasibility() {
        let mix = MallowsMixture::uniform(vec![p(&[1, 2, 3])], 0.5).unwrap();
        let samples = mix.sample_set(100, 1);
        let cfg = DemixConfig {
            mode: Mode::Theoretical,
            ..DemixConfig::default()
        };
        assert!(matches!(
            demix_mallows(&samples, 1, 0.5, 1.0, &cfg),
            Err(Error::TheoreticalInfeasible(_))
        ));
        assert!(matches!(
            sub_order(&samples, 1, 0.5, 1.0, &cfg, &IndexSet::new([0, 1])),
            Err(Error::TheoreticalInfeasible(_))
        ));
    }

    #[test]
    fn empty_pruning_is_an_error() {
        let mix = MallowsMixture::uniform(vec![p(&[1, 2, 3, 4])], 0.5).unwrap();
        let samples = mix.sample_set(50, 1);
        let centers = kmeans_centers(&samples, 1, 0);
        let c = CandidateClass::new(4, 1, 0.5, 1.0, IndexSet::new([0, 1, 2, 3]), 1).unwrap();
        let shifted: Vec<Vec<f64>> = centers.iter().map(|c| c.iter().map(|x| x + 0.5).collect()).collect();
        let pruned = c.pruned(&shifted, 0.1).unwrap();
        assert!(pruned.injections().is_empty());
    }

    #[test]
    fn weights_single_and_pair() {
        let a = p(&[1, 2, 3, 4, 5, 6]);
        let b = p(&[6, 5, 4, 3, 2, 1]);
        let solo = MallowsMixture::uniform(vec![a.clone()], 0.3)
            .unwrap()
            .sample_set(100, 1);
        let w = estimate_weights(&solo, 0.3, 1.0, std::slice::from_ref(&a), &WeightConfig::default()).unwrap();
        assert_eq!(w.weights, vec![1.0]);

        let mix = MallowsMixture::new(vec![(0.7, a.clone()), (0.3, b.clone())], 0.3).unwrap();
        let samples = mix.sample_set(20_000, 3);
        let w = estimate_weights(&samples, 0.3, 0.1, &[a.clone(), b.clone()], &WeightConfig::default()).unwrap();
        assert!((w.weights[0] - 0.7).abs() < 0.03, "{:?}", w.weights);
        assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.weights.iter().all(|&x| x >= 0.1 - 1e-12));
        assert!(estimate_weights(&samples, 0.3, 0.1, &[a.clone(), a], &WeightConfig::default()).is_err());
    }

    #[test]
    fn kmeans_separates_clusters() {
        let a = p(&[1, 2, 3, 4, 5, 6]);
        let b = p(&[6, 5, 4, 3, 2, 1]);
        let mix = MallowsMixture::uniform(vec![a.clone(), b.clone()], 0.3).unwrap();
        let samples = mix.sample_set(4000, 2);
        let centers = kmeans_centers(&samples, 2, 0);
        assert_eq!(centers.len(), 2);
        for (c, truth) in centers.iter().zip([&a, &b]) {
            for j in 0..6 {
                assert!((c[j] - truth.rank(j) as f64).abs() < 0.5, "{centers:?}");
            }
        }
    }
}
