use ecs_core::elliptic::s_coeff;
use ecs_core::lattice::*;
use ecs_core::oracle::*;
use ecs_core::solver::{explicit_solve, TruncationPolicy};
use ecs_core::EcsError;

fn lv(v: &[i64]) -> LatticeVector {
    LatticeVector::new(v.to_vec())
}

#[test]
fn basis_sizes() {
    let p = ModelParams::new(2, 2.5, 0.1).unwrap();
    for c in [1, 4, 9] {
        assert_eq!(build_truncated_operator(&lv(&[0, 0]), &p, c).unwrap().size(), (2 * c + 1) as usize);
    }
    let p3 = ModelParams::new(3, 2.5, 0.1).unwrap();
    let op = build_truncated_operator(&lv(&[1, 0, 0]), &p3, 3).unwrap();
    assert_eq!(op.size(), relative_shell(3, 3).len());
    assert!(matches!(
        build_truncated_operator_with_limit(&lv(&[0, 0, 0]), &p3, 10, 100),
        Err(EcsError::BasisTooLarge { .. })
    ));
    assert!(build_truncated_operator(&lv(&[0, 0]), &p, 0).is_err());
}

#[test]
fn matrix_entries() {
    let p = ModelParams::new(3, 2.5, 0.2).unwrap();
    let n = lv(&[1, 0, -1]);
    let op = build_truncated_operator(&n, &p, 3).unwrap();
    for (i, m) in op.basis.iter().enumerate() {
        assert_eq!(op.matrix[(i, i)], free_energy(m.as_slice(), &p));
    }
    let row = op.position(&n).unwrap();
    for (col, m) in op.basis.iter().enumerate() {
        if col == row {
            continue;
        }
        let d = m.sub(&n);
        // n - νE_jk: exactly two nonzero entries, -ν at j and +ν at k
        let nz: Vec<usize> = (0..3).filter(|&i| d[i] != 0).collect();
        let expect = if nz.len() == 2 && d[nz[0]] == -d[nz[1]] { -p.gamma * s_coeff(-d[nz[0]], &p.nome) } else { 0.0 };
        assert_eq!(op.matrix[(row, col)], expect, "m={m}");
    }
}

#[test]
fn zero_nome_triangular() {
    for (nn, base, c) in [(2, vec![0, 0], 8), (3, vec![1, 0, 0], 3)] {
        let p = ModelParams::new(nn, 2.5, 0.0).unwrap();
        let n = LatticeVector::new(base);
        let op = build_truncated_operator(&n, &p, c).unwrap();
        let mut diag: Vec<f64> = (0..op.size()).map(|i| op.matrix[(i, i)]).collect();
        diag.sort_by(|a, b| a.total_cmp(b));
        let spec = oracle_spectrum(&op);
        assert_eq!(spec.len(), diag.len());
        for (a, b) in spec.iter().zip(&diag) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
        let r = oracle_eigenpair(&op, &n).unwrap();
        assert!((r.eigenvalue - free_energy(n.as_slice(), &p)).abs() < 1e-12);
    }
}

#[test]
fn cutoff_self_convergence() {
    let p = ModelParams::new(2, 2.5, 0.1).unwrap();
    let n = lv(&[0, 0]);
    let e12 = oracle_solve(&n, &p, 12).unwrap().eigenvalue;
    let e16 = oracle_solve(&n, &p, 16).unwrap().eigenvalue;
    assert!((e12 - e16).abs() < 1e-9);
    let p3 = ModelParams::new(3, 2.5, 0.02).unwrap();
    let a = oracle_solve(&lv(&[0, 0, 0]), &p3, 4).unwrap().eigenvalue;
    let b = oracle_solve(&lv(&[0, 0, 0]), &p3, 8).unwrap().eigenvalue;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn coefficients_agree_with_explicit_solver() {
    let p = ModelParams::new(2, 2.5, 0.02).unwrap();
    let n = lv(&[0, 0]);
    let orc = oracle_solve(&n, &p, 16).unwrap();
    assert_eq!(orc.coefficients.get(&n), 1.0);
    assert!(orc.residual < 1e-8);
    let c = hypothesis_constants(&n, &p, DeltaMode::N2ClosedForm, 0).unwrap();
    let r = explicit_solve(&n, &p, &TruncationPolicy::new(16, 8, 12).unwrap(), &c, 10).unwrap();
    for rel in relative_shell(2, 4) {
        let (x, y) = (orc.coefficients.get_rel(&rel), r.coefficients.get_rel(&rel));
        assert!((x - y).abs() < 1e-7, "{rel:?}: {x} vs {y}");
    }
}

#[test]
fn k1_and_k2_at_zero() {
    for nn in [2, 3] {
        let p = ModelParams::new(nn, 2.5, 0.2).unwrap();
        let zero = vec![0; nn];
        assert_eq!(k_s_enumerate(1, &zero, &p, 10).unwrap().value, 0.0);
        let k2 = k_s_enumerate(2, &zero, &p, 30).unwrap().value;
        let per_pair: f64 = (1..=30).map(|nu| {
            let x = 0.2f64.powi(2 * nu);
            2.0 * (nu * nu) as f64 * x / ((1.0 - x) * (1.0 - x))
        }).sum();
        let closed = p.gamma * p.gamma * (nn * (nn - 1) / 2) as f64 * per_pair;
        assert!((k2 - closed).abs() < 1e-12 * closed);
    }
}

#[test]
fn k_s_against_sequence_enumeration() {
    let p = ModelParams::new(3, 1.5, 0.3).unwrap();
    let cutoff = 2;
    let mut shifts = Vec::new();
    for (j, k) in pairs(3) {
        for nu in -cutoff..=cutoff {
            if nu != 0 {
                shifts.push((LatticeShift::new(j, k, nu).unwrap().to_vector(3), s_coeff(nu, &p.nome)));
            }
        }
    }
    for m in [vec![0, 0, 0], vec![1, -1, 0], vec![2, 0, -2]] {
        let mut total = 0.0;
        for a in &shifts {
            for b in &shifts {
                for c in &shifts {
                    let sum: Vec<i64> = (0..3).map(|i| a.0[i] + b.0[i] + c.0[i]).collect();
                    if sum == m {
                        total += a.1 * b.1 * c.1;
                    }
                }
            }
        }
        let brute = p.gamma.abs().powi(3) * total;
        let dp = k_s_enumerate(3, &m, &p, cutoff).unwrap();
        assert!((dp.value - brute).abs() <= 1e-13 * brute.max(1.0), "m={m:?}");
        assert!(dp.tail_bound >= 0.0);
    }
}

#[test]
fn k_s_below_analyticity_bound() {
    for nn in [2usize, 3] {
        for q in [0.1, 0.3] {
            let p = ModelParams::new(nn, 2.5, q).unwrap();
            let cutoff = if nn == 2 { 24 } else { 10 };
            for m in relative_shell(nn, 2) {
                for s in 1..=4 {
                    let k = k_s_enumerate(s, &m, &p, cutoff).unwrap().value;
                    for b in [0.5, 1.0] {
                        assert!(k <= k_s_bound(s, &m, &p, b), "N={nn} q={q} m={m:?} s={s} b={b}");
                    }
                }
            }
        }
    }
}

#[test]
fn k_s_below_general_bound() {
    let p = ModelParams::new(2, 2.5, 0.2).unwrap();
    let top = p.nome.beta() / 2.0;
    for eps in [0.1 * top, 0.5 * top, 0.9 * top] {
        for m in [vec![0, 0], vec![2, -2], vec![-1, 1]] {
            for s in 1..=3 {
                let k = k_s_enumerate(s, &m, &p, 20).unwrap().value;
                assert!(k <= k_s_general_bound(s, &m, &p, eps));
            }
        }
    }
}

#[test]
fn k_s_guards() {
    let p = ModelParams::new(3, 2.5, 0.2).unwrap();
    assert!(k_s_enumerate(0, &[0, 0, 0], &p, 4).is_err());
    assert!(k_s_enumerate(2, &[0, 0], &p, 4).is_err());
    assert!(k_s_enumerate(12, &[0, 0, 0], &p, 40).is_err());
}

#[test]
fn conjecture_leading_order() {
    // K_s(0)/q^{2⌈s/N⌉} settles as q → 0; for N = 2, s = 2 the limit is 2γ²
    let qs = [0.08, 0.04, 0.02];
    for (nn, s) in [(2usize, 2usize), (3, 2), (3, 3)] {
        let ratios: Vec<f64> = qs
            .iter()
            .map(|&q| {
                let p = ModelParams::new(nn, 2.5, q).unwrap();
                let row = &k_s_conjecture_report(s..=s, &p, 8).unwrap()[0];
                row.k_s_zero / q.powi(2 * s.div_ceil(nn) as i32)
            })
            .collect();
        let d1 = (ratios[0] - ratios[1]).abs();
        let d2 = (ratios[1] - ratios[2]).abs();
        assert!(d2 < d1 && d2 < 0.05 * ratios[2], "N={nn} s={s}: {ratios:?}");
        if nn == 2 {
            assert!((ratios[2] / (7.5 * 7.5) - 2.0).abs() < 0.01);
        }
    }
}

#[test]
fn conjecture_report_is_emitted_when_it_fails() {
    let p = ModelParams::new(2, 2.5, 0.6).unwrap();
    let rows = k_s_conjecture_report(1..=4, &p, 12).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.holds, r.k_s_zero <= r.conjectured_bound);
    }
}
