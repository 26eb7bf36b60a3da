mod common;

use common::{partitions, rel_err, schur, unit_points};
use ecs_core::eigenfunction::*;
use ecs_core::lattice::*;
use ecs_core::solver::{explicit_solve, TruncationPolicy};
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

fn lv(v: &[i64]) -> LatticeVector {
    LatticeVector::new(v.to_vec())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn separated(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI..PI)).collect();
        let ok = (0..n).all(|j| (j + 1..n).all(|k| {
            let d = (x[j] - x[k]).rem_euclid(2.0 * PI);
            d > 0.4 && d < 2.0 * PI - 0.4
        }));
        if ok {
            return x;
        }
    }
}

#[test]
fn schur_polynomials_at_free_fermion_point() {
    // λ = 1, q = 0: f_n = κ s_n with one constant κ per (N, n); all observed κ are 1
    let mut rng = common::rng(21);
    for nn in [2usize, 3] {
        let params = ModelParams::new(nn, 1.0, 0.0).unwrap();
        let quad = QuadratureConfig::for_params(&params);
        let grid = ContourGrid::new(&params, &quad).unwrap();
        let parts = partitions(nn, 3);
        let mut kappa: Vec<Option<Complex64>> = vec![None; parts.len()];
        for _ in 0..10 {
            let z = unit_points(&mut rng, nn);
            let table = grid.laurent_table(&z, &parts).unwrap();
            for (i, part) in parts.iter().enumerate() {
                let ratio = table[i] / schur(part, &z);
                let k = *kappa[i].get_or_insert(ratio);
                assert!(rel_err(ratio, k) < 1e-10, "N={nn} n={part:?}");
            }
        }
        for k in kappa {
            assert!(rel_err(k.unwrap(), c(1.0, 0.0)) < 1e-10);
        }
    }
}

#[test]
fn non_partition_coefficients_vanish_at_free_fermion_point() {
    let params = ModelParams::new(2, 1.0, 0.0).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    let z = unit_points(&mut common::rng(22), 2);
    for n in [[0, 1], [-1, 0], [1, 2]] {
        assert!(f_n(&lv(&n), &z, &params, &quad).unwrap().norm() < 1e-12, "n={n:?}");
    }
}

#[test]
fn generating_function_at_lambda_two() {
    // Laurent coefficient of ξ^{-n⁺} in c e^{iPΣ(x-y)} F(x; y), n⁺ = (n₁+1, n₂-1), P = -λN/2,
    // over 1 < |ξ₁| < |ξ₂| < q^{-2}; the ratio to F̂_n(x) is one constant
    let params = ModelParams::new(2, 2.0, 0.1).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    let beta = params.nome.beta();
    let (e1, e2) = (beta / 3.0, 2.0 * beta / 3.0);
    let m = 64;
    let p = -2.0;
    let mut rng = common::rng(23);
    let mut constant: Option<Complex64> = None;
    for _ in 0..3 {
        let x = separated(&mut rng, 2);
        let xs = [c(x[0], 0.0), c(x[1], 0.0)];
        let ns = [[0i64, 0], [1, 0], [2, 0], [1, 1], [0, 1], [2, -1]];
        let mut coef = [c(0.0, 0.0); 6];
        for a in 0..m {
            for b in 0..m {
                let y = [c(2.0 * PI * a as f64 / m as f64, -e1), c(2.0 * PI * b as f64 / m as f64, -e2)];
                let f = kernel_f_prime(&xs, &y, &params, p, c(1.0, 0.0)).unwrap();
                let xi = [(Complex64::i() * y[0]).exp(), (Complex64::i() * y[1]).exp()];
                for (slot, n) in coef.iter_mut().zip(&ns) {
                    *slot += f * xi[0].powi(n[0] as i32 + 1) * xi[1].powi(n[1] as i32 - 1);
                }
            }
        }
        for (cf, n) in coef.iter().zip(&ns) {
            let cf = cf / (m * m) as f64;
            let fh = f_hat(&lv(n), &PhasePoint::real(x.clone()), &params, &quad).unwrap();
            let ratio = cf / fh;
            let k = *constant.get_or_insert(ratio);
            assert!(rel_err(ratio, k) < 1e-8, "n={n:?} x={x:?}: {ratio} vs {k}");
        }
    }
}

#[test]
fn f_n_symmetric() {
    let params = ModelParams::new(2, 2.5, 0.1).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    let mut rng = common::rng(24);
    for n in [[0, 0], [2, -1], [1, 3]] {
        let z = unit_points(&mut rng, 2);
        let a = f_n(&lv(&n), &z, &params, &quad).unwrap();
        let b = f_n(&lv(&n), &[z[1], z[0]], &params, &quad).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm().max(1e-12), "n={n:?}");
    }
    let p3 = ModelParams::new(3, 1.5, 0.1).unwrap();
    let q3 = QuadratureConfig::for_params(&p3);
    let z = unit_points(&mut rng, 3);
    let a = f_n(&lv(&[1, 0, 0]), &z, &p3, &q3).unwrap();
    let b = f_n(&lv(&[1, 0, 0]), &[z[2], z[0], z[1]], &p3, &q3).unwrap();
    assert!((a - b).norm() < 1e-10 * a.norm());
}

#[test]
fn contour_and_node_independence() {
    let mut rng = common::rng(25);
    for (lam, q) in [(2.5, 0.1), (1.5, 0.3), (2f64.sqrt(), 0.2)] {
        let params = ModelParams::new(2, lam, q).unwrap();
        let quad = QuadratureConfig::for_params(&params);
        let doubled = quad.clone().with_nodes(128);
        let moved = doubled.clone().scaled_epsilons(1.3);
        for n in [[0, 0], [4, -4], [-3, 2], [4, 4]] {
            let z = unit_points(&mut rng, 2);
            let base = f_n(&lv(&n), &z, &params, &quad).unwrap();
            let scale = base.norm();
            let fine = f_n(&lv(&n), &z, &params, &doubled).unwrap();
            assert!((fine - base).norm() < 1e-9 * scale, "λ={lam} n={n:?}");
            let mv = f_n(&lv(&n), &z, &params, &moved).unwrap();
            assert!((mv - fine).norm() < 1e-8 * scale, "λ={lam} n={n:?}");
            assert!(f_n_checked(&lv(&n), &z, &params, &quad, 1e-8).is_ok());
        }
    }
}

#[test]
fn quadrature_config_validation() {
    let params = ModelParams::new(2, 2.5, 0.1).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    assert!(quad.validate(&params).is_ok());
    assert!(quad.clone().with_nodes(96).validate(&params).is_err());
    assert!(quad.clone().with_nodes(32).validate(&params).is_err());
    assert!(quad.clone().scaled_epsilons(2.0).validate(&params).is_err());
    let z = [c(1.1, 0.0), c(1.0, 0.0)];
    assert!(f_n(&lv(&[0, 0]), &z, &params, &quad).is_err());
}

#[test]
fn psi0_values() {
    let p1 = ModelParams::new(2, 1.0, 0.0).unwrap();
    for (a, b) in [(0.3, 1.9), (-2.0, 0.5)] {
        let v = psi0(&[c(a, 0.0), c(b, 0.0)], &p1).unwrap();
        assert!((v - c(((b - a) / 2.0).sin(), 0.0)).norm() < 1e-15);
    }
    let p2 = ModelParams::new(2, 2.0, 0.1).unwrap();
    let (x1, x2) = (c(0.4, 0.0), c(1.7, 0.0));
    let v = psi0(&[x1, x2], &p2).unwrap();
    assert!((psi0(&[x2, x1], &p2).unwrap() - v).norm() < 1e-15 * v.norm());
    assert_eq!(psi0(&[x1, x1], &p2).unwrap().norm(), 0.0);
    let p25 = ModelParams::new(2, 2.5, 0.1).unwrap();
    assert!(psi0(&[x1, x1], &p25).is_err());
    assert!(psi0(&[x1, x1 + 1e-3], &p25).unwrap().norm() < 1e-7);
}

#[test]
fn f_hat_ground_state_at_free_fermion_point() {
    let params = ModelParams::new(2, 1.0, 0.0).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    let mut rng = common::rng(26);
    let mut f0: Option<Complex64> = None;
    for _ in 0..5 {
        let x = separated(&mut rng, 2);
        let v = f_hat(&lv(&[0, 0]), &PhasePoint::real(x.clone()), &params, &quad).unwrap();
        let ratio = v / ((x[1] - x[0]) / 2.0).sin();
        let k = *f0.get_or_insert(ratio);
        assert!(rel_err(ratio, k) < 1e-12);
    }
    let p2 = ModelParams::new(2, 2.0, 0.1).unwrap();
    let v = f_hat(&lv(&[1, 0]), &PhasePoint::real(vec![0.7, 0.7]), &p2, &QuadratureConfig::for_params(&p2)).unwrap();
    assert_eq!(v.norm(), 0.0);
}

#[test]
fn kernel_translation_invariance() {
    let params = ModelParams::new(3, 1.5, 0.2).unwrap();
    let x = [c(0.3, 0.0), c(1.4, 0.0), c(-2.0, 0.0)];
    let y = [c(-0.9, -0.3), c(2.2, -0.6), c(0.8, -0.9)];
    let f = kernel_f(&x, &y, &params).unwrap();
    for a in [0.1, -0.7, 1.3] {
        let xs: Vec<Complex64> = x.iter().map(|v| v + a).collect();
        let ys: Vec<Complex64> = y.iter().map(|v| v + a).collect();
        assert!(rel_err(kernel_f(&xs, &ys, &params).unwrap(), f) < 1e-12);
    }
    let fp = kernel_f_prime(&x, &y, &params, 0.0, c(2.0, 0.0)).unwrap();
    assert!(rel_err(fp, 2.0 * f) < 1e-15);
    assert!(kernel_f(&x, &[x[0], y[1], y[2]], &params).is_err());
}

#[test]
fn single_particle_kernel() {
    let params = ModelParams::new(2, 1.5, 0.2).unwrap();
    let cfg = params.elliptic();
    let (x, y) = (c(0.9, 0.0), c(-0.4, -0.5));
    let f = kernel_f(&[x], &[y], &params).unwrap();
    let t = ecs_core::elliptic::theta(x - y, &params.nome, &cfg);
    assert!(rel_err(f, (-1.5 * t.ln()).exp()) < 1e-12);
    let quad = QuadratureConfig::for_params(&params);
    let r = verify_lemma1(&PhasePoint::real(vec![0.9]), &PhasePoint::with_offsets(vec![-0.4], vec![-0.5]), &params, &quad).unwrap();
    assert!(r < 1e-8);
}

#[test]
fn kernel_identity() {
    let mut rng = common::rng(27);
    for (nn, lam, q) in [(2usize, 1.4, 0.2), (3, 2.0, 0.1), (2, 1.0, 0.3), (3, 1.0, 0.1)] {
        let params = ModelParams::new(nn, lam, q).unwrap();
        let quad = QuadratureConfig::for_params(&params);
        for _ in 0..3 {
            let x = PhasePoint::real(separated(&mut rng, nn));
            let y = PhasePoint::with_offsets(separated(&mut rng, nn), vec![-0.3; nn]);
            let r = verify_lemma1(&x, &y, &params, &quad).unwrap();
            assert!(r < 1e-6, "N={nn} λ={lam}: {r:e}");
        }
    }
}

#[test]
fn lattice_action_on_f_hat() {
    let mut rng = common::rng(28);
    for (lam, q, n) in [(2.0, 0.1, [0, 0]), (2.0, 0.1, [1, 0]), (2.5, 0.0, [1, 0]), (1.5, 0.05, [2, -1])] {
        let params = ModelParams::new(2, lam, q).unwrap();
        let quad = QuadratureConfig::for_params(&params);
        let x = PhasePoint::real(separated(&mut rng, 2));
        let r = verify_prop1(&lv(&n), &x, &params, &quad, 8).unwrap();
        assert!(r < 1e-5, "λ={lam} q={q} n={n:?}: {r:e}");
    }
}

#[test]
fn assembled_eigenfunction_residual_and_bound() {
    let n = lv(&[0, 0]);
    let mut rng = common::rng(29);
    // q = 0.05 keeps the eigen-residual meaningful; the b = 0.05 gate needs the smaller nome
    for (q, with_bound) in [(0.05, false), (0.02, true)] {
        let params = ModelParams::new(2, 2.5, q).unwrap();
        let constants = hypothesis_constants(&n, &params, DeltaMode::N2ClosedForm, 0).unwrap();
        let r = explicit_solve(&n, &params, &TruncationPolicy::new(12, 8, 12).unwrap(), &constants, 8).unwrap();
        let quad = QuadratureConfig::for_params(&params);
        let psi = PsiEvaluator::new(&r.coefficients, r.eigenvalue, &params, &quad, 6).unwrap();
        let bound = if with_bound { Some(psi_uniform_bound(&n, &params, &constants, 0.05).unwrap()) } else { None };
        for _ in 0..5 {
            let x = PhasePoint::real(separated(&mut rng, 2));
            let res = psi.eigen_residual(&x, &quad).unwrap();
            assert!(res < 1e-4, "q={q}: {res:e}");
            let v = psi.eval(&x).unwrap();
            assert!(rel_err(assemble_psi(&x, &r.coefficients, &params, &quad, 6).unwrap(), v) < 1e-14);
            if let Some(b) = bound {
                assert!(v.norm() <= b);
            }
        }
        assert!(psi_uniform_bound(&n, &params, &constants, 30.0).is_err());
    }
    let params = ModelParams::new(2, 2.5, 0.05).unwrap();
    let constants = hypothesis_constants(&n, &params, DeltaMode::N2ClosedForm, 0).unwrap();
    assert!(psi_uniform_bound(&n, &params, &constants, 0.05).is_err());
}

#[test]
fn f_n_below_decay_bound() {
    let params = ModelParams::new(2, 1.5, 0.2).unwrap();
    let quad = QuadratureConfig::for_params(&params);
    let grid = ContourGrid::new(&params, &quad).unwrap();
    let ns: Vec<Vec<i64>> = (-3..=3).flat_map(|a| (-3..=3).map(move |b| vec![a, b])).collect();
    let mut rng = common::rng(30);
    for _ in 0..3 {
        let b = rng.gen_range(0.2..2.0);
        let z = unit_points(&mut rng, 2);
        let table = grid.laurent_table(&z, &ns).unwrap();
        for (n, v) in ns.iter().zip(&table) {
            assert!(v.norm() < f_n_bound(&LatticeVector::new(n.clone()), &params, b).unwrap(), "n={n:?} b={b}");
        }
    }
}
