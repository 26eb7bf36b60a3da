//! Elliptic special functions of the model: the odd theta function θ, the
//! product Θ, the periodic potential V, its log-derivative companions φ and
//! f, the constant c₀ and the coupling coefficients S_ν.

use crate::error::{EcsError, Result};
use crate::numeric::{ComplexCompensatedSum, CompensatedSum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Inputs closer than this to a zero of θ (pole of V) are rejected.
pub const POLE_GUARD: f64 = 1e-8;

/// Tail target for truncated products and sums: q^{2T} < TAIL_TARGET.
pub const TAIL_TARGET: f64 = 1e-18;

/// The nome q = exp(-β/2); q = 0 stands for β = ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nome {
    q: f64,
    beta: f64,
}

impl Nome {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&q) || !q.is_finite() {
            return Err(EcsError::Config(format!("nome q = {q} must lie in [0, 1)")));
        }
        let beta = if q == 0.0 { f64::INFINITY } else { -2.0 * q.ln() };
        Ok(Self { q, beta })
    }

    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta <= 0.0 {
            return Err(EcsError::Config(format!("beta = {beta} must be positive")));
        }
        let q = if beta.is_infinite() { 0.0 } else { (-beta / 2.0).exp() };
        Ok(Self { q, beta })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn q2(&self) -> f64 {
        self.q * self.q
    }

    pub fn is_trigonometric(&self) -> bool {
        self.q == 0.0
    }
}

/// Truncation and precision settings for products and series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticConfig {
    pub product_terms: usize,
    pub precision_digits: u32,
}

impl EllipticConfig {
    /// Smallest T with q^{2T} below the tail target, double precision.
    pub fn for_nome(nome: &Nome) -> Self {
        let q2 = nome.q2();
        let mut t = 1usize;
        let mut p = q2;
        while p >= TAIL_TARGET && t < 10_000 {
            p *= q2;
            t += 1;
        }
        Self { product_terms: t, precision_digits: 16 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.product_terms == 0 {
            return Err(EcsError::Config("product_terms must be >= 1".into()));
        }
        if self.precision_digits == 0 || self.precision_digits > 17 {
            return Err(EcsError::Config(format!(
                "precision_digits = {} not available (binary64 only, 1..=17)",
                self.precision_digits
            )));
        }
        Ok(())
    }

    /// Bound on the relative error of each truncated product factor.
    pub fn tail_bound(&self, nome: &Nome) -> f64 {
        let q2 = nome.q2();
        q2.powi(self.product_terms as i32 + 1) / (1.0 - q2)
    }
}

/// Distance from r to the zero lattice 2πZ + iβZ of θ.
pub fn zero_lattice_distance(r: Complex64, nome: &Nome) -> f64 {
    let two_pi = 2.0 * PI;
    let re = r.re - two_pi * (r.re / two_pi).round();
    let im = if nome.beta().is_finite() {
        r.im - nome.beta() * (r.im / nome.beta()).round()
    } else {
        r.im
    };
    Complex64::new(re, im).norm()
}

fn guard(r: Complex64, nome: &Nome, what: &str) -> Result<()> {
    if zero_lattice_distance(r, nome) < POLE_GUARD {
        Err(EcsError::Pole(format!("{what} evaluated within {POLE_GUARD:e} of a lattice point at r = {r}")))
    } else {
        Ok(())
    }
}

/// θ(r) = sin(r/2) ∏_{n=1}^{T} (1 - 2q^{2n} cos r + q^{4n}).
pub fn theta(r: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Complex64 {
    let mut value = (r / 2.0).sin();
    if nome.is_trigonometric() {
        return value;
    }
    let cos_r = r.cos();
    let q2 = nome.q2();
    let mut q2n = 1.0;
    for _ in 0..cfg.product_terms {
        q2n *= q2;
        value *= 1.0 - cos_r * (2.0 * q2n) + q2n * q2n;
    }
    value
}

/// Θ(z) = (1 - z) ∏_{m=1}^{T} (1 - q^{2m} z)(1 - q^{2m}/z).
pub fn capital_theta(z: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Err(EcsError::Domain("capital_theta undefined at z = 0".into()));
    }
    let mut value = 1.0 - z;
    if nome.is_trigonometric() {
        return Ok(value);
    }
    let q2 = nome.q2();
    let zi = z.inv();
    let mut q2m = 1.0;
    for _ in 0..cfg.product_terms {
        q2m *= q2;
        value *= (1.0 - z * q2m) * (1.0 - zi * q2m);
    }
    Ok(value)
}

/// log Θ(z) as the sum of principal logarithms of the factors. Inside the
/// annulus q² < |z| < 1 every factor has positive real part, so the result
/// is analytic there and Θ(z)^λ = exp(λ log Θ(z)) needs no branch tracking.
pub fn capital_theta_log(z: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Result<Complex64> {
    let r = z.norm();
    if !(r < 1.0 && r > nome.q2()) {
        return Err(EcsError::Domain(format!(
            "log Θ requested at |z| = {r} outside the annulus ({}, 1)",
            nome.q2()
        )));
    }
    let mut acc = ComplexCompensatedSum::new();
    acc.add((1.0 - z).ln());
    if !nome.is_trigonometric() {
        let q2 = nome.q2();
        let zi = z.inv();
        let mut q2m = 1.0;
        for _ in 0..cfg.product_terms {
            q2m *= q2;
            acc.add((1.0 - z * q2m).ln());
            acc.add((1.0 - zi * q2m).ln());
        }
    }
    Ok(acc.value())
}

/// V(r) = Σ_{|m|≤T} 1/(4 sin²((r + iβm)/2)).
pub fn potential_v(r: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Result<Complex64> {
    guard(r, nome, "potential_v")?;
    let term = |w: Complex64| {
        let s = (w / 2.0).sin();
        (s * s * 4.0).inv()
    };
    if nome.is_trigonometric() {
        return Ok(term(r));
    }
    let beta = nome.beta();
    let extra = (r.im.abs() / beta).ceil() as usize + 1;
    let t = (cfg.product_terms + extra) as i64;
    let mut acc = ComplexCompensatedSum::new();
    // small terms first
    for m in (1..=t).rev() {
        acc.add(term(r + Complex64::new(0.0, beta * m as f64)));
        acc.add(term(r - Complex64::new(0.0, beta * m as f64)));
    }
    acc.add(term(r));
    Ok(acc.value())
}

/// c₀ = 1/12 - Σ_{n=1}^{T} 2q^{2n}/(1 - q^{2n})².
pub fn c0(nome: &Nome, cfg: &EllipticConfig) -> f64 {
    let q2 = nome.q2();
    let mut acc = CompensatedSum::new();
    let mut q2n = 1.0;
    let mut terms = Vec::with_capacity(cfg.product_terms);
    for _ in 0..cfg.product_terms {
        q2n *= q2;
        let d = 1.0 - q2n;
        terms.push(2.0 * q2n / (d * d));
    }
    for t in terms.iter().rev() {
        acc.add(-t);
    }
    acc.add(1.0 / 12.0);
    acc.value()
}

/// φ(x) = θ'(x)/θ(x) from the term-wise logarithmic derivative.
pub fn phi_fun(x: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Result<Complex64> {
    guard(x, nome, "phi_fun")?;
    let half = x / 2.0;
    let mut acc = ComplexCompensatedSum::new();
    acc.add(half.cos() / half.sin() * 0.5);
    if !nome.is_trigonometric() {
        let (s, c) = (x.sin(), x.cos());
        let q2 = nome.q2();
        let mut q2n = 1.0;
        for _ in 0..cfg.product_terms {
            q2n *= q2;
            acc.add(s * (2.0 * q2n) / (1.0 - c * (2.0 * q2n) + q2n * q2n));
        }
    }
    Ok(acc.value())
}

/// f(x) = (V(x) - φ(x)² - c₀)/2.
pub fn f_aux(x: Complex64, nome: &Nome, cfg: &EllipticConfig) -> Result<Complex64> {
    let v = potential_v(x, nome, cfg)?;
    let p = phi_fun(x, nome, cfg)?;
    Ok((v - p * p - c0(nome, cfg)) / 2.0)
}

/// S_ν = |ν| q^{|ν|-ν}/(1 - q^{2|ν|}), S₀ = 0.
pub fn s_coeff(nu: i64, nome: &Nome) -> f64 {
    if nu == 0 {
        return 0.0;
    }
    let a = nu.unsigned_abs() as i32;
    let q = nome.q();
    let denom = 1.0 - q.powi(2 * a);
    if nu > 0 {
        a as f64 / denom
    } else {
        a as f64 * q.powi(2 * a) / denom
    }
}
