#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn unit_points(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::from_polar(1.0, rng.gen_range(-PI..PI))).collect()
}

pub fn det(m: DMatrix<Complex64>) -> Complex64 {
    m.determinant()
}

/// Schur polynomial by the bialternant det(z_i^{λ_j+N-j}) / det(z_i^{N-j}).
pub fn schur(partition: &[i64], z: &[Complex64]) -> Complex64 {
    let n = z.len();
    let num = DMatrix::from_fn(n, n, |i, j| z[i].powi((partition[j] + (n - 1 - j) as i64) as i32));
    let den = DMatrix::from_fn(n, n, |i, j| z[i].powi((n - 1 - j) as i32));
    det(num) / det(den)
}

/// Partitions with N parts (zeros allowed) of total weight ≤ max_weight.
pub fn partitions(n: usize, max_weight: i64) -> Vec<Vec<i64>> {
    fn rec(n: usize, max_part: i64, left: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in (0..=max_part.min(left)).rev() {
            cur.push(p);
            rec(n, p, left - p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, max_weight, max_weight, &mut Vec::new(), &mut out);
    out.sort_by_key(|p| (p.iter().sum::<i64>(), std::cmp::Reverse(p.clone())));
    out
}

/// Jacobi ϑ₁(u, q) = 2 Σ_{n≥0} (-1)^n q^{(n+1/2)²} sin((2n+1)u).
pub fn jacobi_theta1(u: Complex64, q: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 0..200 {
        let e = (n as f64 + 0.5).powi(2);
        let t = q.powf(e) * ((2 * n + 1) as f64 * u).sin() * if n % 2 == 0 { 2.0 } else { -2.0 };
        acc += t;
        if n > 3 && t.norm() < 1e-20 * acc.norm() {
            break;
        }
    }
    acc
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn partitions_of_weight_three() {
    let p = partitions(2, 3);
    assert_eq!(p, vec![vec![0, 0], vec![1, 0], vec![2, 0], vec![1, 1], vec![3, 0], vec![2, 1]]);
}

#[test]
fn schur_two_variables() {
    let z = [Complex64::new(0.3, 0.4), Complex64::new(-0.8, 0.1)];
    let s = schur(&[2, 1], &z);
    let expect = z[0] * z[1] * (z[0] + z[1]);
    assert!(rel_err(s, expect) < 1e-13);
}
