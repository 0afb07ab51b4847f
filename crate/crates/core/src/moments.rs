//! Distance and comparison moments, exact total variation between Mallows
//! mixtures, the minimum-TV estimator, and the group-determinant matrix `L`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demix::noiseless::HardInstance;
use crate::error::{invalid, Error, Result};
use crate::mallows::{check_cap, check_phi, log_normalizer, MallowsMixture, SampleSet, DEFAULT_ENUMERATION_CAP};
use crate::oracle::{comparison_moment, DeltaMixture, Mass};
use crate::perm::{
    all_permutations, check_same_n, factorial, kendall_tau, lexicographic, ComparisonTuple, Permutation,
};

/// Relative tolerance when comparing moments computed in floating point.
pub const MOMENT_TOLERANCE: f64 = 1e-9;
/// Largest `r` accepted by [`build_l`].
pub const L_MAX_R: usize = 7;
/// Relative singular-value tolerance for invertibility.
pub const L_TOLERANCE: f64 = 1e-8;
/// Default limit on the number of candidates [`min_tv_estimate`] scores.
pub const MIN_TV_CLASS_LIMIT: u128 = 1_000_000;

/// `Σ_i w_i d_KT(s, π_i)^ℓ`.
pub fn distance_moment<W: Mass>(m: &DeltaMixture<W>, s: &Permutation, ell: u32) -> Result<f64> {
    if ell == 0 {
        return Err(invalid("ell", "must be at least 1"));
    }
    check_same_n(m.n(), s.n())?;
    Ok(m.components()
        .iter()
        .map(|(w, p)| w.to_f64() * (kendall_tau(s, p).expect("sizes checked") as f64).powi(ell as i32))
        .sum())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MOMENT_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Largest `ℓ ≤ max_ell` such that the distance moments of every order up to
/// `ℓ` agree at every `σ ∈ S_n` (0 if some first moment differs).
pub fn moments_match<W: Mass>(a: &DeltaMixture<W>, b: &DeltaMixture<W>, max_ell: u32, cap: usize) -> Result<u32> {
    check_same_n(a.n(), b.n())?;
    check_cap(a.n(), cap)?;
    let sigmas: Vec<Permutation> = all_permutations(a.n()).collect();
    for ell in 1..=max_ell {
        for s in &sigmas {
            if !close(distance_moment(a, s, ell)?, distance_moment(b, s, ell)?) {
                return Ok(ell - 1);
            }
        }
    }
    Ok(max_ell)
}

/// [`moments_match`] for the two uniform delta mixtures of a hard instance.
pub fn hard_instance_moments(h: &HardInstance, max_ell: u32) -> Result<u32> {
    let (a, b) = h.delta_mixtures();
    moments_match(&a, &b, max_ell, DEFAULT_ENUMERATION_CAP)
}

fn multisets(items: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, items: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..items {
            cur.push(i);
            rec(i, items, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, items, size, &mut Vec::new(), &mut out);
    out
}

/// True iff `𝔪(a, ℐ) = 𝔪(b, ℐ)` for every tuple of `order` unordered pairs.
/// Tuples with repeated pairs carry the lower-order moments, so this covers
/// every order up to `order`.
pub fn comparison_moments_agree<W: Mass>(a: &DeltaMixture<W>, b: &DeltaMixture<W>, order: usize) -> Result<bool> {
    check_same_n(a.n(), b.n())?;
    if order == 0 {
        return Err(invalid("order", "must be at least 1"));
    }
    let n = a.n();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    for pick in multisets(pairs.len(), order) {
        let t = ComparisonTuple::new(pick.iter().map(|&i| pairs[i]).collect())?;
        let (ma, mb) = (comparison_moment(a, &t)?, comparison_moment(b, &t)?);
        if ma.iter().zip(&mb).any(|(x, y)| !close(*x, *y)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact `TV(a, b)` by enumerating `S_n`.
pub fn tv_mixtures_exact(a: &MallowsMixture, b: &MallowsMixture) -> Result<f64> {
    tv_mixtures_exact_capped(a, b, DEFAULT_ENUMERATION_CAP)
}

pub fn tv_mixtures_exact_capped(a: &MallowsMixture, b: &MallowsMixture, cap: usize) -> Result<f64> {
    check_same_n(a.n(), b.n())?;
    check_cap(a.n(), cap)?;
    let unnormalised = |m: &MallowsMixture, s: &Permutation| -> f64 {
        m.components()
            .iter()
            .map(|(w, p)| w * m.phi().powi(kendall_tau(s, p).expect("sizes checked") as i32))
            .sum()
    };
    let za = log_normalizer(a.n(), a.phi())?.exp();
    let zb = log_normalizer(b.n(), b.phi())?.exp();
    let sigmas: Vec<Permutation> = all_permutations(a.n()).collect();
    let sum: f64 = sigmas
        .par_iter()
        .map(|s| (unnormalised(a, s) / za - unnormalised(b, s) / zb).abs())
        .sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

/// Exact TV over a grid of `ε = 1 − φ`, with the least-squares slope of `ln TV` on `ln ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsScan {
    pub eps_grid: Vec<f64>,
    pub tv_values: Vec<f64>,
    pub fitted_slope: f64,
    /// Whether the largest `ε` was left out of the fit.
    pub dropped_largest: bool,
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(invalid("points", "a slope needs at least two (x, y) pairs"));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("points", "all x values coincide"));
    }
    Ok(sxy / sxx)
}

/// Scans `TV(𝓜_{Σ1}, 𝓜_{Σ2})` for equally weighted Mallows mixtures with
/// `φ = 1 − ε` over a strictly decreasing grid; the slope should approach `m`.
pub fn tv_slope_scan(h: &HardInstance, eps_grid: &[f64], drop_largest: bool) -> Result<EpsScan> {
    if eps_grid.len() < 2 + drop_largest as usize {
        return Err(invalid("eps_grid", "too few grid points to fit a slope"));
    }
    if eps_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(invalid("eps_grid", "must be strictly decreasing"));
    }
    let mut tv_values = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let phi = 1.0 - eps;
        check_phi(phi)?;
        let a = MallowsMixture::uniform(h.sigma1().to_vec(), phi)?;
        let b = MallowsMixture::uniform(h.sigma2().to_vec(), phi)?;
        tv_values.push(tv_mixtures_exact(&a, &b)?);
    }
    if let Some(z) = tv_values.iter().position(|&t| !(t > 0.0)) {
        return Err(invalid(
            "eps_grid",
            format!("TV underflows to zero at ε = {}; the slope is undefined", eps_grid[z]),
        ));
    }
    let skip = drop_largest as usize;
    let x: Vec<f64> = eps_grid[skip..].iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = tv_values[skip..].iter().map(|t| t.ln()).collect();
    Ok(EpsScan {
        fitted_slope: ols_slope(&x, &y)?,
        eps_grid: eps_grid.to_vec(),
        tv_values,
        dropped_largest: drop_largest,
    })
}

/// `10^{-1}, 10^{-1.5}, …, 10^{-3}`.
pub fn default_eps_grid() -> Vec<f64> {
    (0..5).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect()
}

/// The minimum-TV estimator over equally weighted `k`-mixtures on `S_n`:
/// every multiset of `k` centrals is scored against the empirical PMF, and
/// ties go to the lexicographically smallest sorted central list.
pub fn min_tv_estimate(samples: &SampleSet, k: usize, phi: f64, limit: u128) -> Result<MallowsMixture> {
    check_phi(phi)?;
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if samples.is_empty() {
        return Err(invalid("samples", "no draws"));
    }
    let n = samples.n();
    check_cap(n, DEFAULT_ENUMERATION_CAP)?;
    let size = factorial(n);
    let count = (0..k as u128).fold(1u128, |acc, i| acc.saturating_mul(size + i) / (i + 1));
    if count > limit {
        return Err(Error::ClassTooLarge { count, limit });
    }
    let mut perms: Vec<Permutation> = all_permutations(n).collect();
    perms.sort_by(lexicographic);
    let index: HashMap<&Permutation, usize> = perms.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut empirical = vec![0.0; perms.len()];
    for s in samples.draws() {
        empirical[index[s]] += 1.0 / samples.len() as f64;
    }
    let z = log_normalizer(n, phi)?.exp();
    // pmf[c][s] = P_{M(perms[c], φ)}(perms[s])
    let pmf: Vec<Vec<f64>> = perms
        .par_iter()
        .map(|c| {
            perms
                .iter()
                .map(|s| phi.powi(kendall_tau(s, c).expect("same n") as i32) / z)
                .collect()
        })
        .collect();
    let inv_k = 1.0 / k as f64;
    let score = |combo: &[usize]| -> f64 {
        let sum: f64 = (0..perms.len())
            .map(|s| (combo.iter().map(|&c| pmf[c][s]).sum::<f64>() * inv_k - empirical[s]).abs())
            .sum();
        0.5 * sum
    };
    let best = (0..perms.len())
        .into_par_iter()
        .map(|first| {
            let mut best: Option<(f64, Vec<usize>)> = None;
            for rest in multisets(perms.len() - first, k - 1) {
                let mut combo = vec![first];
                combo.extend(rest.iter().map(|&i| i + first));
                let tv = score(&combo);
                if best.as_ref().is_none_or(|b| tv < b.0) {
                    best = Some((tv, combo));
                }
            }
            best.expect("at least one multiset per first index")
        })
        .reduce_with(|a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .expect("S_n is nonempty");
    MallowsMixture::uniform(best.1.iter().map(|&i| perms[i].clone()).collect(), phi)
}

/// How the identity relation, reached by both `τ_r` and `τ_{r+1}`, is valued.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `Σ s` over matching `s`, so the identity entry is `2r + 1`.
    #[default]
    Sum,
    /// Largest matching `s` (`r + 1` at the identity).
    Max,
    /// Smallest matching `s` (`r` at the identity).
    Min,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Convention::Sum),
            "max" => Ok(Convention::Max),
            "min" => Ok(Convention::Min),
            other => Err(invalid("convention", format!("unknown convention {other:?}"))),
        }
    }
}

/// `τ_s ∈ S_{r+1}` for `s ∈ 1..=r+1`: fixes `1..=s`, sends `s+1` to `r+1`
/// and shifts the rest down by one (all 1-based).
pub fn tau(r: usize, s: usize) -> Permutation {
    assert!((1..=r + 1).contains(&s), "s out of range");
    let ranks = (1..=r + 1)
        .map(|i| {
            let image = if i <= s {
                i
            } else if i == s + 1 {
                r + 1
            } else {
                i - 1
            };
            image - 1
        })
        .collect();
    Permutation::from_ranks(ranks).expect("τ_s is a bijection")
}

/// `L_{π,σ}` over `S_{r+1}`, stored as `r + 1` sparse diagonal blocks.
///
/// Block `b` holds the permutations with `σ⁻¹(1) = b + 1`, listed as `σ ∘ (1 b+1)`
/// for `σ` running over block 0 in lexicographic order; under this listing
/// every block has the same entries as block 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LMatrix {
    r: usize,
    convention: Convention,
    members: Vec<Vec<Permutation>>,
    blocks: Vec<Vec<Vec<(usize, f64)>>>,
    position: HashMap<Permutation, (usize, usize)>,
}

impl LMatrix {
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Side length `r!` of every block.
    pub fn block_size(&self) -> usize {
        self.members[0].len()
    }

    /// Permutations indexing block `b`, in row order.
    pub fn members(&self, b: usize) -> &[Permutation] {
        &self.members[b]
    }

    /// `(block, offset)` of a permutation.
    pub fn position(&self, p: &Permutation) -> Option<(usize, usize)> {
        self.position.get(p).copied()
    }

    /// Sparse rows of block `b`: `(column, value)` pairs.
    pub fn block_rows(&self, b: usize) -> &[Vec<(usize, f64)>] {
        &self.blocks[b]
    }

    pub fn dense_block(&self, b: usize) -> DMatrix<f64> {
        let size = self.block_size();
        let mut m = DMatrix::zeros(size, size);
        for (i, row) in self.blocks[b].iter().enumerate() {
            for &(j, v) in row {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// `L_{π,σ}`; zero across blocks.
    pub fn entry(&self, pi: &Permutation, sigma: &Permutation) -> f64 {
        match (self.position(pi), self.position(sigma)) {
            (Some((bp, i)), Some((bs, j))) if bp == bs => {
                self.blocks[bp][i].iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
            }
            _ => 0.0,
        }
    }
}

/// Builds `L` for `r ≤ 7`.
pub fn build_l(r: usize, convention: Convention) -> Result<LMatrix> {
    if r == 0 || r > L_MAX_R {
        return Err(invalid("r", format!("must be in 1..={L_MAX_R}")));
    }
    let n = r + 1;
    let taus: Vec<Permutation> = (1..=n).map(|s| tau(r, s)).collect();
    let mut block0: Vec<Permutation> = all_permutations(n).filter(|p| p.order()[0] == 0).collect();
    block0.sort_by(lexicographic);
    let members: Vec<Vec<Permutation>> = (0..n)
        .map(|b| {
            let mut g: Vec<usize> = (0..n).collect();
            g.swap(0, b);
            let g = Permutation::from_ranks(g).expect("transposition");
            block0.iter().map(|s| s.compose(&g).expect("same n")).collect()
        })
        .collect();
    let position: HashMap<Permutation, (usize, usize)> = members
        .iter()
        .enumerate()
        .flat_map(|(b, ms)| ms.iter().enumerate().map(move |(i, p)| (p.clone(), (b, i))))
        .collect();
    let blocks = members
        .par_iter()
        .map(|ms| {
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ms.len()];
            for (j, sigma) in ms.iter().enumerate() {
                for (s, t) in taus.iter().enumerate() {
                    let pi = t.compose(sigma).expect("same n");
                    let (_, i) = position[&pi];
                    let value = (s + 1) as f64;
                    match rows[i].iter_mut().find(|e| e.0 == j) {
                        Some(e) => {
                            e.1 = match convention {
                                Convention::Sum => e.1 + value,
                                Convention::Max => e.1.max(value),
                                Convention::Min => e.1.min(value),
                            }
                        }
                        None => rows[i].push((j, value)),
                    }
                }
            }
            for row in &mut rows {
                row.sort_by_key(|e| e.0);
            }
            rows
        })
        .collect();
    Ok(LMatrix {
        r,
        convention,
        members,
        blocks,
        position,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LCheck {
    pub r: usize,
    pub convention: Convention,
    pub invertible: bool,
    /// Smallest singular value of each diagonal block.
    pub min_singular_values: Vec<f64>,
    /// Largest singular value (spectral norm) of each diagonal block.
    pub max_singular_values: Vec<f64>,
    pub tolerance: f64,
    /// Whether every block was confirmed entrywise equal to block 0 (so factored once).
    pub blocks_identical: bool,
}

/// Certifies invertibility of `L` blockwise by singular values: a block passes
/// when `σ_min > 10⁻⁸ σ_max`.
pub fn check_l_invertible(r: usize, convention: Convention) -> Result<LCheck> {
    let l = build_l(r, convention)?;
    let identical = (1..l.block_count()).all(|b| l.block_rows(b) == l.block_rows(0));
    let factor = |b: usize| -> (f64, f64) {
        let sv = l.dense_block(b).singular_values();
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let max = sv.iter().copied().fold(0.0, f64::max);
        (min, max)
    };
    let per_block: Vec<(f64, f64)> = if identical {
        vec![factor(0); l.block_count()]
    } else {
        (0..l.block_count()).map(factor).collect()
    };
    Ok(LCheck {
        r,
        convention,
        invertible: per_block.iter().all(|&(lo, hi)| lo > L_TOLERANCE * hi),
        min_singular_values: per_block.iter().map(|b| b.0).collect(),
        max_singular_values: per_block.iter().map(|b| b.1).collect(),
        tolerance: L_TOLERANCE,
        blocks_identical: identical,
    })
}
