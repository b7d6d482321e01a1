use proptest::prelude::*;

use polyens::ensembles::{
    apply_ginibre_transform, apply_inversion, ginibre_chain_ensemble, jpdf, truncated_unitary_chain_ensemble,
    PolynomialEnsemble, Support, TruncationModelParams, WeightFunction,
};
use polyens::kernels::GenericKernel;
use polyens::quad::{integrate_half_line, integrate_unit_interval};
use polyens::rmt_sim::{goodness_of_fit, sample_chain, FactorSpec, MatrixChainSpec};
use polyens::Error;

/// Weight list as a sorted multiset of debug strings.
fn multiset(weights: &[WeightFunction]) -> Vec<String> {
    let mut v: Vec<String> = weights.iter().map(|w| format!("{w:?}")).collect();
    v.sort();
    v
}

/// jpdf, zero on the measure-zero diagonal.
fn density(ens: &PolynomialEnsemble, points: &[f64]) -> f64 {
    match jpdf(ens, points) {
        Ok(v) => v,
        Err(Error::DegenerateInput(_)) => 0.0,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jpdf_is_symmetric(points in prop::collection::vec(0.1f64..6.0, 3), shift in 1usize..3) {
        let sorted = {
            let mut s = points.clone();
            s.sort_by(f64::total_cmp);
            s
        };
        prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 1e-3));
        let ens = ginibre_chain_ensemble(3, &[1, 2]).unwrap();
        let mut rotated = points.clone();
        rotated.rotate_left(shift);
        let mut swapped = points.clone();
        swapped.swap(0, 2);
        let v = jpdf(&ens, &points).unwrap();
        for other in [rotated, swapped] {
            let w = jpdf(&ens, &other).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * v.abs().max(1e-300), "{v} vs {w}");
        }
        prop_assert!(v >= 0.0);
    }

    #[test]
    fn ginibre_transform_closes_the_chain(n in 1usize..6, nu1 in 0usize..5, nu2 in 0usize..5) {
        let built = apply_ginibre_transform(&ginibre_chain_ensemble(n, &[nu1]).unwrap(), nu2).unwrap();
        let direct = ginibre_chain_ensemble(n, &[nu1, nu2]).unwrap();
        prop_assert_eq!(multiset(&built.weights), multiset(&direct.weights));
    }

    #[test]
    fn truncated_chain_is_a_transformed_jacobi_ensemble(n in 1usize..5, nu1 in 0usize..3, nu2 in 0usize..4, extra in 0usize..4) {
        let l = 2 * n + nu1 + extra;
        let one = truncated_unitary_chain_ensemble(&TruncationModelParams::new(n, vec![nu1], l).unwrap()).unwrap();
        let two = truncated_unitary_chain_ensemble(&TruncationModelParams::new(n, vec![nu1, nu2], l).unwrap()).unwrap();
        let built = apply_ginibre_transform(&one, nu2).unwrap();
        prop_assert_eq!(multiset(&built.weights), multiset(&two.weights));
    }

    #[test]
    fn inversion_is_an_involution(nu in 0usize..4, y in 0.1f64..8.0) {
        let ens = ginibre_chain_ensemble(2, &[nu, 1]).unwrap();
        let back = apply_inversion(&apply_inversion(&ens).unwrap()).unwrap();
        for (w, b) in ens.weights.iter().zip(&back.weights) {
            let (a, c) = (w.eval(y).unwrap(), b.eval(y).unwrap());
            prop_assert!((a - c).abs() <= 1e-9 * a.abs(), "{a} vs {c}");
        }
    }
}

#[test]
fn ginibre_jpdf_integrates_to_one() {
    for nu in [0, 2] {
        let ens = ginibre_chain_ensemble(2, &[nu]).unwrap();
        let inner = |x: f64| integrate_half_line(|y| density(&ens, &[x, y]), 1e-8).unwrap().value.re;
        let total = integrate_half_line(inner, 1e-7).unwrap().value.re;
        assert!((total - 1.0).abs() <= 1e-4, "nu = {nu}: {total}");
    }
}

#[test]
fn truncated_jpdf_integrates_to_one() {
    for (nu, l) in [(0, 4), (1, 7)] {
        let ens = truncated_unitary_chain_ensemble(&TruncationModelParams::new(2, vec![nu], l).unwrap()).unwrap();
        let inner = |x: f64| integrate_unit_interval(|y| density(&ens, &[x, y]), (0.0, 0.0), 1e-9).unwrap().value.re;
        let total = integrate_unit_interval(inner, (0.0, 0.0), 1e-8).unwrap().value.re;
        assert!((total - 1.0).abs() <= 1e-4, "(nu, l) = ({nu}, {l}): {total}");
    }
}

#[test]
fn truncation_times_ginibre_matches_sampling() {
    let params = TruncationModelParams::new(2, vec![0], 6).unwrap();
    let ens = apply_ginibre_transform(&truncated_unitary_chain_ensemble(&params).unwrap(), 0).unwrap();
    let kernel = GenericKernel::new(&ens).unwrap();
    let spec = MatrixChainSpec::new(
        2,
        vec![FactorSpec::TruncatedUnitary { nu: 0, l: 6 }, FactorSpec::Ginibre { nu: 0 }],
    )
    .unwrap();
    let batch = sample_chain(&spec, 11, 100_000).unwrap();
    let report = goodness_of_fit(&batch.pooled(), |x| kernel.density(x), Support::PositiveAxis, 0.02).unwrap();
    assert!(report.pass, "KS {}", report.ks_distance);
}
