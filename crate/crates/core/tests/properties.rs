mod common;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

use posdef_core::kernel::{logspace, DEFAULT_BAND};
use posdef_core::matrix::{default_tolerance, min_eigenvalue};
use posdef_core::poly::{
    build_phi_with_substitution, build_psi_with_substitution, descartes_sign_changes, multiplicity_at_one,
};
use posdef_core::probes::{logconvex_midpoint_probe, quadrature_identity_check, widder_cm_probe};
use posdef_core::{
    build_kernel_matrix, cnd_verdict, eval_f, eval_f_prime, eval_f_second, eval_g, hadamard_power, psd_verdict,
    ConfigRef, Direction, Generator, KernelParams, PickPair, PointConfig, RadialKernel,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn coprime(p: u64, q: u64) -> bool {
    num_integer::gcd(p, q) == 1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn f_times_g_is_one(r in 0.05f64..12.0, t in 0.0f64..1e3) {
        let params = KernelParams::new(r).unwrap();
        let prod = eval_f(&params, t).unwrap() * eval_g(&params, t).unwrap();
        prop_assert!((prod - 1.0).abs() <= 1e-12, "r = {r}, t = {t}: f g = {prod}");
    }

    #[test]
    fn f_starts_at_one_and_decreases(r in 1.01f64..12.0, a in 0.0f64..50.0, d in 1e-3f64..50.0) {
        let params = KernelParams::new(r).unwrap();
        prop_assert_eq!(eval_f(&params, 0.0).unwrap(), 1.0);
        prop_assert!(eval_f(&params, a + d).unwrap() < eval_f(&params, a).unwrap());
        // f(T) ~ T^(1 - r) as T grows.
        let big = 1e12f64;
        prop_assert!((eval_f(&params, big).unwrap() * big.powf(r - 1.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn band_edges_match_the_direct_formula(r in 0.2f64..12.0, side in prop::bool::ANY) {
        prop_assume!((r - 1.0).abs() > 1e-3);
        let params = KernelParams::new(r).unwrap();
        let t = if side { 1.0 + DEFAULT_BAND } else { 1.0 - DEFAULT_BAND };
        // Just inside and just outside the band.
        for t in [t, t * (1.0 + 1e-12), t * (1.0 - 1e-12)] {
            let v = eval_f(&params, t).unwrap();
            prop_assert!(rel(v, common::f_direct(r, t)) <= 1e-10, "r = {r}, t = {t}");
        }
    }

    #[test]
    fn integer_exponent_is_a_geometric_sum(r in 2u32..15, t in 0.0f64..20.0) {
        let params = KernelParams::new(r as f64).unwrap();
        let g = eval_g(&params, t).unwrap();
        prop_assert!(rel(g, common::geometric_sum(r, t)) <= 1e-12, "r = {r}, t = {t}");
    }

    #[test]
    fn derivatives_match_central_differences(r in 0.3f64..10.0, e in -3.0f64..3.0) {
        let t = 10f64.powf(e);
        let h = 0.01 * t;
        prop_assume!((t - 1.0).abs() > DEFAULT_BAND + 2.0 * h);
        let params = KernelParams::new(r).unwrap();
        let f = |x: f64| eval_f(&params, x).unwrap();
        let d1 = |h: f64| (f(t - 2.0 * h) - 8.0 * f(t - h) + 8.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h);
        let d2 = |h: f64| (-f(t - 2.0 * h) + 16.0 * f(t - h) - 30.0 * f(t) + 16.0 * f(t + h) - f(t + 2.0 * h)) / (12.0 * h * h);
        // Fourth-order stencils, one Richardson step.
        let fd1 = (16.0 * d1(h / 2.0) - d1(h)) / 15.0;
        let fd2 = (16.0 * d2(h / 2.0) - d2(h)) / 15.0;
        let p1 = eval_f_prime(&params, t).unwrap();
        let p2 = eval_f_second(&params, t).unwrap();
        // Rounding in a difference quotient scales with f / t^k, so that is
        // the natural size to measure against when the derivative is tiny.
        let s1 = p1.abs().max(f(t) / t);
        let s2 = p2.abs().max(f(t) / (t * t));
        prop_assert!((p1 - fd1).abs() <= 1e-6 * s1, "f' at r = {r}, t = {t}: {p1} vs {fd1}");
        prop_assert!((p2 - fd2).abs() <= 1e-6 * s2, "f'' at r = {r}, t = {t}: {p2} vs {fd2}");
    }
}

/// The numerators of `f''` and `f f'' - f'^2` straight from their closed forms.
fn phi_direct(r: f64, x: f64) -> (f64, f64) {
    let terms = [
        r * (1.0 - r) * x.powf(2.0 * r - 1.0),
        r * (1.0 + r) * x.powf(2.0 * r - 2.0),
        -r * (1.0 + r) * x.powf(r - 1.0),
        -r * (1.0 - r) * x.powf(r - 2.0),
    ];
    (terms.iter().sum(), terms.iter().map(|v| v.abs()).sum())
}

fn psi_direct(r: f64, x: f64) -> (f64, f64) {
    let terms = [
        (r - 1.0) * x.powf(2.0 * r),
        -2.0 * r * x.powf(2.0 * r - 1.0),
        r * x.powf(2.0 * r - 2.0),
        (r * r - r + 2.0) * x.powf(r),
        -2.0 * r * (r - 1.0) * x.powf(r - 1.0),
        -1.0,
        r * (r - 1.0) * x.powf(r - 2.0),
    ];
    (terms.iter().sum(), terms.iter().map(|v| v.abs()).sum())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn cleared_polynomials_reproduce_the_closed_forms(p in 2u64..30, q in 1u64..8, xs in prop::collection::vec(0.01f64..2.0, 5)) {
        prop_assume!(p > q && coprime(p, q) && (p as f64 / q as f64) < 5.0);
        let r = p as f64 / q as f64;
        let (phi, s_phi) = build_phi_with_substitution(p, q).unwrap();
        let (psi, s_psi) = build_psi_with_substitution(p, q).unwrap();
        for x in xs {
            let (v, scale) = phi_direct(r, x);
            prop_assert!((s_phi.original_at(&phi, x) - v).abs() <= 1e-10 * scale, "phi {p}/{q} at {x}");
            let (v, scale) = psi_direct(r, x);
            prop_assert!((s_psi.original_at(&psi, x) - v).abs() <= 1e-10 * scale, "psi {p}/{q} at {x}");
        }
    }

    #[test]
    fn descartes_bounds_the_roots_seen_on_a_grid(p in 2u64..25, q in 1u64..6) {
        prop_assume!(p > q && coprime(p, q));
        for (poly, _) in [build_phi_with_substitution(p, q).unwrap(), build_psi_with_substitution(p, q).unwrap()] {
            // Sign changes between consecutive grid points, plus exact zeros.
            let grid: Vec<BigRational> = (1..=400)
                .map(|k| BigRational::new(BigInt::from(k), BigInt::from(100)))
                .collect();
            let values: Vec<BigRational> = grid.iter().map(|t| poly.eval(t)).collect();
            let zeros = values.iter().filter(|v| v == &&BigRational::from_integer(BigInt::from(0))).count();
            let nonzero: Vec<&BigRational> = values.iter().filter(|v| !v.is_zero_value()).collect();
            let crossings = nonzero.windows(2).filter(|w| w[0].is_negative() != w[1].is_negative()).count();
            prop_assert!(zeros + crossings <= descartes_sign_changes(&poly), "{p}/{q}");
        }
    }

    #[test]
    fn numerators_vanish_to_the_expected_order_at_one(p in 2u64..40, q in 1u64..8) {
        prop_assume!(p > q && coprime(p, q));
        let (phi, _) = build_phi_with_substitution(p, q).unwrap();
        let (psi, _) = build_psi_with_substitution(p, q).unwrap();
        prop_assert!(multiplicity_at_one(&phi) >= 3);
        prop_assert!(multiplicity_at_one(&psi) >= 4);
    }
}

trait ZeroValue {
    fn is_zero_value(&self) -> bool;
}

impl ZeroValue for BigRational {
    fn is_zero_value(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

fn permuted(points: &[Vec<f64>], seed: u64) -> Vec<Vec<f64>> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    let mut state = seed | 1;
    for i in (1..idx.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        idx.swap(i, (state % (i as u64 + 1)) as usize);
    }
    idx.into_iter().map(|i| points[i].clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn verdicts_ignore_order_and_translation(
        r in 0.5f64..9.0,
        m in 3usize..20,
        n in 1usize..5,
        scale in 0.1f64..20.0,
        seed in any::<u64>(),
        shift in prop::collection::vec(-50.0f64..50.0, 4),
        g in prop::bool::ANY,
    ) {
        let base = PointConfig::generate(&ConfigRef::new(Generator::RandomGaussian, seed, m, n, scale)).unwrap();
        let params = KernelParams::new(r).unwrap().with_direction(if g { Direction::G } else { Direction::F });
        let verdict = |cfg: &PointConfig| {
            let a = build_kernel_matrix(cfg, &params).unwrap();
            if g { cnd_verdict(&a, default_tolerance(&a)).unwrap() } else { psd_verdict(&a, default_tolerance(&a)).unwrap() }
        };
        let v0 = verdict(&base);
        let moved: Vec<Vec<f64>> = base.points().iter().map(|p| p.iter().zip(&shift).map(|(x, s)| x + s).collect()).collect();
        let scale_eig = build_kernel_matrix(&base, &params).unwrap().max_abs() * m as f64;
        for pts in [permuted(base.points(), seed), moved] {
            let v = verdict(&PointConfig::from_points(pts).unwrap());
            prop_assert_eq!(v.status, v0.status);
            // Translations perturb distances by rounding only.
            prop_assert!((v.min_eigenvalue - v0.min_eigenvalue).abs() <= 1e-12 * scale_eig.max(1.0));
        }
    }

    #[test]
    fn schur_square_of_a_certified_matrix_is_psd(r in 1.0f64..4.0, m in 3usize..25, n in 1usize..6, scale in 0.1f64..10.0, seed in any::<u64>()) {
        let cfg = PointConfig::generate(&ConfigRef::new(Generator::RandomGaussian, seed, m, n, scale)).unwrap();
        let a = build_kernel_matrix(&cfg, &KernelParams::new(r).unwrap()).unwrap();
        let v = psd_verdict(&a, default_tolerance(&a)).unwrap();
        prop_assume!(v.is_certified() && v.min_eigenvalue > v.tolerance);
        let sq = hadamard_power(&a, 2.0).unwrap();
        prop_assert!(min_eigenvalue(&sq).unwrap().value >= -default_tolerance(&sq));
    }

    #[test]
    fn hankel_cm_is_stable_under_powers(c in 0.1f64..3.0, kind in 0usize..3, alpha_idx in 0usize..2) {
        let alpha = [0.3, 0.7][alpha_idx];
        let points = [0.05, 0.15, 0.4, 0.8, 1.5, 3.0];
        let kernel = RadialKernel::new(KernelParams::new(1.0 + c / 3.0).unwrap()).unwrap();
        let fun = move |x: f64| match kind {
            0 => (-c * x).exp(),
            1 => (1.0 + x).powf(-c),
            _ => kernel.h(x).unwrap(),
        };
        let base = widder_cm_probe(&fun, &points, 1e-9).unwrap();
        prop_assume!(base.passed());
        let powered = widder_cm_probe(|x: f64| fun(x.powf(alpha)), &points, 1e-9).unwrap();
        prop_assert!(powered.passed(), "kind {kind}, c = {c}, alpha = {alpha}: {}", powered.worst_margin);
    }

    #[test]
    fn logconvex_probe_is_exact_on_the_diagonal(r in 0.5f64..12.0, x in 1e-3f64..50.0) {
        let kernel = RadialKernel::new(KernelParams::new(r).unwrap()).unwrap();
        let report = logconvex_midpoint_probe(|s| kernel.h(s).unwrap(), &[(x, x)], 0.0).unwrap();
        prop_assert!(report.passed());
        prop_assert_eq!(report.worst_margin, 0.0);
    }
}

#[test]
fn pick_and_cnd_agree_for_integer_exponents() {
    use posdef_core::probes::{pick_grid, pick_probe, PICK_TOLERANCE};
    let suite = posdef_core::reproduce::config_suite(posdef_core::search::DEFAULT_SEED);
    for r in [1.0, 2.0, 3.0] {
        let pick = pick_probe(PickPair::new(0.5, 0.5 * r).unwrap(), &pick_grid(), PICK_TOLERANCE).unwrap();
        let params = KernelParams::new(r).unwrap().with_direction(Direction::G);
        let cnd = suite.iter().all(|cfg| {
            let a = build_kernel_matrix(&PointConfig::generate(cfg).unwrap(), &params).unwrap();
            cnd_verdict(&a, default_tolerance(&a)).unwrap().is_certified()
        });
        assert_eq!(pick.passed(), cnd, "r = {r}");
    }
}

#[test]
fn quadrature_error_shrinks_with_more_nodes() {
    let grid: Vec<f64> = logspace(0.01, 100.0, 401).into_iter().filter(|t| (t - 1.0).abs() >= DEFAULT_BAND).collect();
    for (p, q) in [(0.5, 1.0), (0.5, 1.5), (0.25, 1.0)] {
        let errors: Vec<f64> = [4, 8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let report = quadrature_identity_check(p, q, &grid, n, 1.0).unwrap();
                1.0 - report.worst_margin
            })
            .collect();
        for w in errors.windows(2) {
            assert!(w[1] <= w[0].max(1e-14), "({p}, {q}): {errors:?}");
        }
    }
}
