mod common;

use common::{jacobi_theta1, rel_err};
use ecs_core::elliptic::*;
use ecs_core::numeric::richardson_second_derivative;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn setup(q: f64) -> (Nome, EllipticConfig) {
    let nome = Nome::new(q).unwrap();
    let cfg = EllipticConfig::for_nome(&nome);
    (nome, cfg)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn theta_trivial_values() {
    for q in [0.0, 0.1, 0.5] {
        let (nome, cfg) = setup(q);
        assert_eq!(theta(c(0.0, 0.0), &nome, &cfg).norm(), 0.0);
    }
    let (nome, cfg) = setup(0.0);
    for r in [0.3, 1.0, 2.5] {
        assert_eq!(theta(c(r, 0.0), &nome, &cfg), c((r / 2.0).sin(), 0.0));
    }
}

#[test]
fn theta_against_jacobi_series() {
    for (q, r) in [(0.1, c(PI, 0.0)), (0.3, c(1.1, 0.4)), (0.05, c(-2.0, -0.7))] {
        let (nome, cfg) = setup(q);
        let prod: f64 = (1..200).map(|n| 1.0 - q.powi(2 * n)).product();
        let expect = jacobi_theta1(r / 2.0, q) / (2.0 * q.powf(0.25) * prod);
        assert!(rel_err(theta(r, &nome, &cfg), expect) < 1e-13, "q={q} r={r}");
    }
}

#[test]
fn capital_theta_trivial_values() {
    let (nome, cfg) = setup(0.2);
    assert_eq!(capital_theta(c(1.0, 0.0), &nome, &cfg).unwrap().norm(), 0.0);
    let (nome0, cfg0) = setup(0.0);
    let z = c(0.3, -0.2);
    assert_eq!(capital_theta(z, &nome0, &cfg0).unwrap(), 1.0 - z);
    assert!(capital_theta(c(0.0, 0.0), &nome, &cfg).is_err());
}

#[test]
fn capital_theta_on_circle_is_theta() {
    // Θ(e^{ir}) = -2i e^{ir/2} θ(r)
    let (nome, cfg) = setup(0.3);
    for r in [c(0.4, 0.0), c(2.0, 0.5), c(-1.0, 0.9)] {
        let z = (Complex64::i() * r).exp();
        let lhs = capital_theta(z, &nome, &cfg).unwrap();
        let rhs = -2.0 * Complex64::i() * (Complex64::i() * r / 2.0).exp() * theta(r, &nome, &cfg);
        assert!(rel_err(lhs, rhs) < 1e-13);
    }
}

#[test]
fn capital_theta_log_outside_annulus() {
    let (nome, cfg) = setup(0.3);
    assert!(capital_theta_log(c(1.2, 0.0), &nome, &cfg).is_err());
    assert!(capital_theta_log(c(0.05, 0.0), &nome, &cfg).is_err());
}

#[test]
fn potential_trigonometric_limit() {
    let (nome, cfg) = setup(0.0);
    assert!((potential_v(c(PI, 0.0), &nome, &cfg).unwrap().re - 0.25).abs() < 1e-15);
    for r in [c(0.7, 0.0), c(2.0, 0.3)] {
        let s = (r / 2.0).sin();
        assert!(rel_err(potential_v(r, &nome, &cfg).unwrap(), 1.0 / (4.0 * s * s)) < 1e-14);
    }
}

#[test]
fn potential_pole_is_an_error() {
    let (nome, cfg) = setup(0.1);
    assert!(matches!(potential_v(c(0.0, 0.0), &nome, &cfg), Err(ecs_core::EcsError::Pole(_))));
    let beta = nome.beta();
    assert!(potential_v(c(2.0 * PI, beta), &nome, &cfg).is_err());
}

#[test]
fn potential_fourier_series() {
    // 1 < |e^{ir}| < q^{-2}
    let nome = Nome::new(0.2).unwrap();
    for y in [-2.0, 0.1, 1.7, 3.0] {
        let r = ecs_core::suite::veps_residual(c(y, -0.3), &nome).unwrap();
        assert!(r < 1e-10, "y={y}: {r:e}");
    }
}

#[test]
fn c0_trivial_and_series_forms() {
    let (nome, cfg) = setup(0.0);
    assert_eq!(c0(&nome, &cfg), 1.0 / 12.0);
    let (nome, cfg) = setup(0.3);
    let beta = nome.beta();
    let sinh_form: f64 = 1.0 / 12.0 - (1..400).map(|m| 0.5 / (beta * m as f64 / 2.0).sinh().powi(2)).sum::<f64>();
    assert!((c0(&nome, &cfg) - sinh_form).abs() < 1e-12);
}

#[test]
fn c0_from_small_r_expansion_of_log_theta() {
    // log(θ(r)/(κ r/2)) = c₂ r² + O(r⁴) with κ = ∏(1-q^{2n})², and c₀ = -2c₂
    for q in [0.1, 0.3] {
        let (nome, cfg) = setup(q);
        let kappa: f64 = (1..200).map(|n| (1.0 - q.powi(2 * n)).powi(2)).product();
        let g = |r: f64| (theta(c(r, 0.0), &nome, &cfg).re / (kappa * r / 2.0)).ln() / (r * r);
        let (h1, h2, h3) = (g(0.08), g(0.04), g(0.02));
        // two Richardson passes in r²
        let a1 = (4.0 * h2 - h1) / 3.0;
        let a2 = (4.0 * h3 - h2) / 3.0;
        let c2 = (16.0 * a2 - a1) / 15.0;
        assert!((-2.0 * c2 - c0(&nome, &cfg)).abs() < 1e-8, "q={q} {} {}", -2.0 * c2, c0(&nome, &cfg));
    }
}

#[test]
fn s_coeff_values() {
    let (nome, _) = setup(0.4);
    assert_eq!(s_coeff(0, &nome), 0.0);
    let (nome0, _) = setup(0.0);
    for nu in 1..6 {
        assert_eq!(s_coeff(-nu, &nome0), 0.0);
        assert_eq!(s_coeff(nu, &nome0), nu as f64);
    }
    for nu in 1..10i64 {
        let lhs = s_coeff(-nu, &nome);
        let rhs = 0.4f64.powi(2 * nu as i32) * s_coeff(nu, &nome);
        assert!((lhs - rhs).abs() <= 1e-15 * rhs, "nu={nu}");
    }
}

#[test]
fn nome_rejects_out_of_range() {
    assert!(Nome::new(-0.1).is_err());
    assert!(Nome::new(1.0).is_err());
    assert!(Nome::new(f64::NAN).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn v_is_minus_second_log_derivative(r in 0.3f64..(2.0 * PI - 0.3), qi in 0usize..3) {
        let q = [0.0, 0.1, 0.3][qi];
        let (nome, cfg) = setup(q);
        let lt = |t: f64| theta(c(r + t, 0.0), &nome, &cfg).ln();
        let d2 = richardson_second_derivative(lt, 1e-2, 3, lt(0.0));
        let v = potential_v(c(r, 0.0), &nome, &cfg).unwrap();
        prop_assert!(rel_err(-d2, v) < 1e-8);
    }

    #[test]
    fn v_periodic_and_even(re in -3.0f64..3.0, im in -0.5f64..0.5, q in 0.05f64..0.4) {
        let (nome, cfg) = setup(q);
        let r = c(re, im);
        prop_assume!(zero_lattice_distance(r, &nome) > 0.1);
        let v = potential_v(r, &nome, &cfg).unwrap();
        prop_assert!(rel_err(potential_v(-r, &nome, &cfg).unwrap(), v) < 1e-12);
        prop_assert!(rel_err(potential_v(r + 2.0 * PI, &nome, &cfg).unwrap(), v) < 1e-12);
        prop_assert!(rel_err(potential_v(r + c(0.0, nome.beta()), &nome, &cfg).unwrap(), v) < 1e-12);
    }

    #[test]
    fn phi_odd_f_even(re in -3.0f64..3.0, im in -0.5f64..0.5, q in 0.0f64..0.4) {
        let (nome, cfg) = setup(q);
        let x = c(re, im);
        prop_assume!(zero_lattice_distance(x, &nome) > 0.1);
        let p = phi_fun(x, &nome, &cfg).unwrap();
        prop_assert!((phi_fun(-x, &nome, &cfg).unwrap() + p).norm() <= 1e-12 * p.norm().max(1.0));
        let f = f_aux(x, &nome, &cfg).unwrap();
        prop_assert!((f_aux(-x, &nome, &cfg).unwrap() - f).norm() <= 1e-12 * f.norm().max(1.0));
    }

    #[test]
    fn three_term_identity(x1 in -3.0f64..3.0, x2 in -0.3f64..0.3, y1 in -3.0f64..3.0, y2 in -0.3f64..0.3) {
        let (nome, cfg) = setup(0.25);
        let (x, y) = (c(x1, x2), c(y1, y2));
        let z = -x - y;
        prop_assume!([x, y, z].iter().all(|w| theta(*w, &nome, &cfg).norm() > 0.1));
        let (px, py, pz) = (phi_fun(x, &nome, &cfg).unwrap(), phi_fun(y, &nome, &cfg).unwrap(), phi_fun(z, &nome, &cfg).unwrap());
        let f = f_aux(x, &nome, &cfg).unwrap() + f_aux(y, &nome, &cfg).unwrap() + f_aux(z, &nome, &cfg).unwrap();
        let lhs = px * py + px * pz + py * pz;
        prop_assert!((lhs - f).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn capital_theta_modulus_bounds(rho in 0.0401f64..0.999, arg in -PI..PI) {
        let (nome, cfg) = setup(0.2);
        let m = capital_theta(Complex64::from_polar(rho, arg), &nome, &cfg).unwrap().norm();
        let lo = capital_theta(c(rho, 0.0), &nome, &cfg).unwrap().re;
        let hi = capital_theta(c(-rho, 0.0), &nome, &cfg).unwrap().re;
        prop_assert!(lo > 0.0);
        prop_assert!(lo <= m * (1.0 + 1e-13) && m <= hi * (1.0 + 1e-13));
    }

    #[test]
    fn capital_theta_log_matches_product(rho in 0.1f64..0.99, arg in -PI..PI, q in 0.0f64..0.3) {
        let (nome, cfg) = setup(q);
        let z = Complex64::from_polar(rho, arg);
        prop_assume!(rho > nome.q2() * 1.01);
        let l = capital_theta_log(z, &nome, &cfg).unwrap();
        prop_assert!(rel_err(l.exp(), capital_theta(z, &nome, &cfg).unwrap()) < 1e-13);
    }

    #[test]
    fn s_coeff_nonnegative(nu in -40i64..40, q in 0.0f64..0.9) {
        let (nome, _) = setup(q);
        prop_assert!(s_coeff(nu, &nome) >= 0.0);
    }
}
