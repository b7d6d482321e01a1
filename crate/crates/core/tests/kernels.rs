use proptest::prelude::*;

use polyens::ensembles::{truncated_unitary_chain_ensemble, TruncationModelParams};
use polyens::kernels::{kernel_finite, kernel_generic, pk, pk_coefficients, pk_hypergeometric, qk, KernelRoute};
use polyens::quad::{integrate_half_line, integrate_unit_interval, KERNEL_TOLERANCE};
use polyens::verify::{hard_edge_deviation, telescope_sides};

fn params(n: usize, nu: Vec<usize>, l: usize) -> TruncationModelParams {
    TruncationModelParams::new(n, nu, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pk_is_monic_and_matches_hypergeometric(
        n in 1usize..8,
        nu in prop::collection::vec(0usize..4, 1..4),
        extra in 0usize..4,
        x in 0.0f64..3.0,
    ) {
        let p = params(n, nu.clone(), 2 * n + nu[0] + extra);
        for k in 0..=n {
            let c = pk_coefficients(&p, k).unwrap();
            prop_assert_eq!(c.len(), k + 1);
            prop_assert_eq!(c[k], 1.0);
            let mass: f64 = c.iter().enumerate().map(|(t, ct)| (ct * x.powi(t as i32)).abs()).sum();
            let a = pk(&p, k, x).unwrap();
            let b = pk_hypergeometric(&p, k, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * mass, "k={}: {} vs {}", k, a, b);
        }
    }

    #[test]
    fn telescoping_identity(n in 1usize..7, extra in 0usize..5, s in -4.0f64..8.0, t in -4.0f64..8.0) {
        let off_integer = |v: f64| (v - v.round()).abs() > 1e-3;
        prop_assume!(off_integer(s) && off_integer(t));
        let (lhs, rhs) = telescope_sides(s, t, n, 2 * n + extra).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{lhs} vs {rhs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn jacobi_biorthogonality(n in 1usize..4, nu in 0usize..3, extra in 0usize..3) {
        let p = params(n, vec![nu], 2 * n + 2 * nu + extra);
        for k in 0..n {
            for j in 0..n {
                let f = |x: f64| pk(&p, j, x).unwrap() * qk(&p, k, x, 1e-12).unwrap().value;
                let v = integrate_unit_interval(f, (0.0, 0.0), 1e-11).unwrap().value.re;
                let delta = if j == k { 1.0 } else { 0.0 };
                prop_assert!((v - delta).abs() <= 1e-8, "(j, k) = ({}, {}): {}", j, k, v);
            }
        }
    }

    #[test]
    fn two_factor_biorthogonality(nu1 in 0usize..2, nu2 in 0usize..3, extra in 0usize..3) {
        let p = params(2, vec![nu1, nu2], 4 + nu1 + extra);
        for k in 0..2 {
            for j in 0..2 {
                let f = |x: f64| pk(&p, j, x).unwrap() * qk(&p, k, x, 1e-12).unwrap().value;
                let v = integrate_half_line(f, 1e-9).unwrap().value.re;
                let delta = if j == k { 1.0 } else { 0.0 };
                prop_assert!((v - delta).abs() <= 1e-7, "(j, k) = ({}, {}): {}", j, k, v);
            }
        }
    }

    #[test]
    fn finite_routes_agree(
        n in 1usize..4,
        nu in prop::collection::vec(0usize..3, 1..3),
        extra in 1usize..4,
        x in 0.05f64..0.95,
        y in 0.05f64..0.95,
    ) {
        let p = params(n, nu.clone(), 2 * n + nu[0] + extra);
        let c = kernel_finite(&p, x, y, KernelRoute::Contour, KERNEL_TOLERANCE).unwrap().value;
        let b = kernel_finite(&p, x, y, KernelRoute::BiorthogonalSum, KERNEL_TOLERANCE).unwrap().value;
        let g = kernel_generic(&truncated_unitary_chain_ensemble(&p).unwrap(), x, y).unwrap();
        let scale = c.abs().max(1.0);
        prop_assert!((c - b).abs() <= 1e-5 * scale, "{c} vs {b}");
        prop_assert!((c - g).abs() <= 1e-5 * scale, "{c} vs {g}");
    }
}

#[test]
fn kernel_trace_counts_points() {
    let p = params(2, vec![1], 6);
    let f = |x: f64| kernel_finite(&p, x, x, KernelRoute::BiorthogonalSum, KERNEL_TOLERANCE).unwrap().value;
    let trace = integrate_unit_interval(f, (1.0, 0.0), 1e-8).unwrap().value.re;
    assert!((trace - 2.0).abs() <= 1e-4 * 2.0, "{trace}");
}

#[test]
fn hard_edge_deviation_shrinks_with_n() {
    let grid = [0.5, 2.0];
    let d4 = hard_edge_deviation(&params(4, vec![0, 1], 11), &grid).unwrap();
    let d12 = hard_edge_deviation(&params(12, vec![0, 1], 27), &grid).unwrap();
    assert!(d12 < d4, "{d12} vs {d4}");
}
