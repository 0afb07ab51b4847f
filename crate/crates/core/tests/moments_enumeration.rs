use nalgebra::DMatrix;
use permix::demix::noiseless::hard_instance;
use permix::moments::{build_l, min_tv_estimate, moments_match, tau, tv_mixtures_exact, Convention};
use permix::{all_permutations, DeltaMixture, MallowsMixture, Permutation};
use proptest::prelude::*;

fn brute_kendall(a: &Permutation, b: &Permutation) -> u64 {
    let n = a.n();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| (a.rank(i) < a.rank(j)) != (b.rank(i) < b.rank(j)))
        .count() as u64
}

/// Distance moments compared in exact integer arithmetic (weights are equal).
fn brute_moment_order(a: &[Permutation], b: &[Permutation], max_ell: u32) -> u32 {
    let n = a[0].n();
    for ell in 1..=max_ell {
        for s in all_permutations(n) {
            let sa: u128 = a.iter().map(|p| (brute_kendall(&s, p) as u128).pow(ell)).sum();
            let sb: u128 = b.iter().map(|p| (brute_kendall(&s, p) as u128).pow(ell)).sum();
            if sa * b.len() as u128 != sb * a.len() as u128 {
                return ell - 1;
            }
        }
    }
    max_ell
}

#[test]
fn hard_instance_moment_order_matches_integer_check() {
    for m in 1..=3 {
        let h = hard_instance(m).unwrap();
        let (a, b) = h.delta_mixtures();
        let got = moments_match(&a, &b, 5, 8).unwrap();
        assert_eq!(got, brute_moment_order(h.sigma1(), h.sigma2(), 5));
        assert_eq!(got, m as u32 - 1);
    }
}

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|r| Permutation::from_ranks(r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_order_matches_integer_check(
        (a, b) in (3usize..=5).prop_flat_map(|n| (
            prop::collection::btree_set(perm(n), 1..4),
            prop::collection::btree_set(perm(n), 1..4),
        )),
    ) {
        let (a, b): (Vec<_>, Vec<_>) = (a.into_iter().collect(), b.into_iter().collect());
        let got = moments_match(
            &DeltaMixture::uniform(a.clone()).unwrap(),
            &DeltaMixture::uniform(b.clone()).unwrap(),
            4,
            8,
        ).unwrap();
        prop_assert_eq!(got, brute_moment_order(&a, &b, 4));
    }

    #[test]
    fn tv_is_symmetric_and_bounded(
        (x, y, phi) in (2usize..=5).prop_flat_map(|n| (
            prop::collection::vec(perm(n), 1..4),
            prop::collection::vec(perm(n), 1..4),
            0.05f64..0.95,
        )),
    ) {
        let a = MallowsMixture::uniform(x, phi).unwrap();
        let b = MallowsMixture::uniform(y, phi).unwrap();
        let ab = tv_mixtures_exact(&a, &b).unwrap();
        prop_assert!((ab - tv_mixtures_exact(&b, &a).unwrap()).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(tv_mixtures_exact(&a, &a).unwrap() < 1e-14);
    }
}

#[test]
fn full_l_matrix_determinant_is_product_of_blocks() {
    for r in 1..=3 {
        let n = r + 1;
        let perms: Vec<Permutation> = all_permutations(n).collect();
        let l = build_l(r, Convention::Sum).unwrap();
        let full = DMatrix::from_fn(perms.len(), perms.len(), |i, j| {
            let rel = perms[i].compose(&perms[j].inverse()).unwrap();
            (1..=n).filter(|&s| tau(r, s) == rel).map(|s| s as f64).sum::<f64>()
        });
        let block = l.dense_block(0).determinant();
        let det = full.determinant();
        assert!(
            (det - block.powi(n as i32)).abs() <= 1e-6 * det.abs().max(1.0),
            "r = {r}"
        );
        assert!(det.abs() > 0.5);
    }
}

#[test]
fn min_tv_matches_brute_force_scan() {
    let mix = MallowsMixture::uniform(
        vec![
            Permutation::from_order(&[1, 2, 3]).unwrap(),
            Permutation::from_order(&[3, 1, 2]).unwrap(),
        ],
        0.4,
    )
    .unwrap();
    let samples = mix.sample_set(3000, 19);
    let got = min_tv_estimate(&samples, 2, 0.4, 1_000).unwrap();

    let perms: Vec<Permutation> = all_permutations(3).collect();
    let emp = samples.empirical();
    let mut best: Option<(f64, Vec<Permutation>)> = None;
    for i in 0..perms.len() {
        for j in i..perms.len() {
            let cand = MallowsMixture::uniform(vec![perms[i].clone(), perms[j].clone()], 0.4).unwrap();
            let tv: f64 = perms
                .iter()
                .map(|s| (cand.log_pmf(s).unwrap().exp() - emp.mass(s)).abs())
                .sum::<f64>()
                / 2.0;
            if best.as_ref().is_none_or(|b| tv < b.0 - 1e-12) {
                best = Some((tv, vec![perms[i].clone(), perms[j].clone()]));
            }
        }
    }
    let mut want = best.unwrap().1;
    want.sort();
    let mut centrals = got.centrals();
    centrals.sort();
    assert_eq!(centrals, want);
}
