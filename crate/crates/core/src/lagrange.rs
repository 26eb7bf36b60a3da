//! Lagrange reversion of ξ = a + ηφ(ξ) and composition g(ξ) on truncated
//! power series, by recursive substitution and by the closed multinomial
//! form.

use crate::error::{EcsError, Result};
use serde::{Deserialize, Serialize};

/// Σ_{r≤M} c_r (z - a)^r.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormalSeries {
    pub expansion_point: f64,
    pub coefficients: Vec<f64>,
}

impl FormalSeries {
    pub fn new(expansion_point: f64, coefficients: Vec<f64>) -> Self {
        assert!(!coefficients.is_empty(), "a formal series needs at least one coefficient");
        Self { expansion_point, coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coeff(&self, r: usize) -> f64 {
        self.coefficients.get(r).copied().unwrap_or(0.0)
    }

    /// Value at z with Horner's rule.
    pub fn eval(&self, z: f64) -> f64 {
        let h = z - self.expansion_point;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}

/// Truncated product of two coefficient sequences up to `order`.
pub fn mul_truncated(a: &[f64], b: &[f64], order: usize) -> Vec<f64> {
    let mut out = vec![0.0; order + 1];
    for (i, &x) in a.iter().enumerate().take(order + 1) {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Powers h^0..h^max truncated at `order`.
fn power_table(h: &[f64], max_power: usize, order: usize) -> Vec<Vec<f64>> {
    let mut one = vec![0.0; order + 1];
    one[0] = 1.0;
    let mut table = vec![one];
    for r in 1..=max_power {
        let next = mul_truncated(&table[r - 1], h, order);
        table.push(next);
    }
    table
}

/// Solution ξ(η) of ξ = a + ηφ(ξ) with the powers of h = ξ - a cached, so
/// that many functions g can be composed against the same reversion.
#[derive(Debug, Clone)]
pub struct Reversion {
    pub xi: FormalSeries,
    powers: Vec<Vec<f64>>,
}

impl Reversion {
    pub fn new(phi: &FormalSeries, order: usize) -> Result<Self> {
        if order > phi.order() {
            return Err(EcsError::Precondition(format!(
                "reversion order {order} exceeds the order {} of φ",
                phi.order()
            )));
        }
        // h_{k+1} = η φ(h_k); each pass fixes one more coefficient
        let mut h = vec![0.0; order + 1];
        for _ in 0..order {
            let powers = power_table(&h, order, order);
            let mut next = vec![0.0; order + 1];
            for (r, p) in powers.iter().enumerate() {
                let c = phi.coeff(r);
                if c == 0.0 {
                    continue;
                }
                for i in 0..order {
                    next[i + 1] += c * p[i];
                }
            }
            h = next;
        }
        let powers = power_table(&h, order, order);
        let mut coeffs = h;
        coeffs[0] = phi.expansion_point;
        Ok(Self { xi: FormalSeries::new(0.0, coeffs), powers })
    }

    pub fn order(&self) -> usize {
        self.xi.order()
    }

    /// η-coefficients of g(ξ(η)) for g given by its Taylor coefficients at a.
    pub fn compose_coefficients(&self, g: &[f64]) -> Vec<f64> {
        let order = self.order();
        let mut out = vec![0.0; order + 1];
        for (r, p) in self.powers.iter().enumerate() {
            let c = g.get(r).copied().unwrap_or(0.0);
            if c == 0.0 {
                continue;
            }
            for (o, v) in out.iter_mut().zip(p) {
                *o += c * v;
            }
        }
        out
    }
}

/// ξ(η) as a series in η (expansion point 0, constant term a).
pub fn revert(phi: &FormalSeries, order: usize) -> Result<FormalSeries> {
    Ok(Reversion::new(phi, order)?.xi)
}

/// g(ξ(η)) as a series in η.
pub fn compose(g: &FormalSeries, phi: &FormalSeries, order: usize) -> Result<FormalSeries> {
    if g.expansion_point != phi.expansion_point {
        return Err(EcsError::Precondition(format!(
            "expansion points differ: {} vs {}",
            g.expansion_point, phi.expansion_point
        )));
    }
    if order > g.order() {
        return Err(EcsError::Precondition(format!("order {order} exceeds the order {} of g", g.order())));
    }
    let rev = Reversion::new(phi, order)?;
    Ok(FormalSeries::new(0.0, rev.compose_coefficients(&g.coefficients)))
}

/// m!/(ℓ₀! ℓ₁! ...) for multiplicities summing to m.
fn multinomial(mults: &[usize]) -> f64 {
    let mut total = 0usize;
    let mut value = 1.0;
    for &l in mults {
        for i in 1..=l {
            total += 1;
            value *= total as f64 / i as f64;
        }
    }
    value
}

/// Coefficients 0..=L of (Σ φ_r x^r)^m from the multinomial expansion over
/// multiplicities (ℓ₀, ℓ₁, ...) with Σℓ_r = m and Σ rℓ_r = ℓ.
pub fn multinomial_power(coeffs: &[f64], m: usize, order: usize) -> Vec<f64> {
    let phi = |r: usize| coeffs.get(r).copied().unwrap_or(0.0);
    let mut out = vec![0.0; order + 1];
    // parts r ≥ 1 as multiplicities; ℓ₀ = m - Σ_{r≥1} ℓ_r
    fn rec(
        r: usize,
        remaining: usize,
        parts_left: usize,
        mults: &mut Vec<usize>,
        m: usize,
        phi: &dyn Fn(usize) -> f64,
        acc: &mut f64,
    ) {
        if remaining == 0 {
            let used: usize = mults.iter().sum();
            let l0 = m - used;
            let mut all = vec![l0];
            all.extend_from_slice(mults);
            let mut term = multinomial(&all) * phi(0).powi(l0 as i32);
            for (idx, &l) in mults.iter().enumerate() {
                if l > 0 {
                    term *= phi(idx + 1).powi(l as i32);
                }
            }
            *acc += term;
            return;
        }
        if r > remaining {
            return;
        }
        for l in 0..=(remaining / r).min(parts_left) {
            mults.push(l);
            rec(r + 1, remaining - l * r, parts_left - l, mults, m, phi, acc);
            mults.pop();
        }
    }
    for (ell, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut mults = Vec::new();
        rec(1, ell, m, &mut mults, m, &phi, &mut acc);
        *slot = acc;
    }
    out
}

/// ξ_m = (1/m)[x^{m-1}] φ(x)^m, i.e. the closed Lagrange form.
pub fn revert_lagrange(phi: &FormalSeries, order: usize) -> Result<FormalSeries> {
    if order > phi.order() {
        return Err(EcsError::Precondition(format!("order {order} exceeds the order {} of φ", phi.order())));
    }
    let mut coeffs = vec![phi.expansion_point];
    for m in 1..=order {
        let pw = multinomial_power(&phi.coefficients, m, m - 1);
        coeffs.push(pw[m - 1] / m as f64);
    }
    Ok(FormalSeries::new(0.0, coeffs))
}

/// g(ξ) = g₀ + Σ_m (1/m)[x^{m-1}](g'(x) φ(x)^m), the closed Lagrange form.
pub fn compose_lagrange(g: &FormalSeries, phi: &FormalSeries, order: usize) -> Result<FormalSeries> {
    if g.expansion_point != phi.expansion_point {
        return Err(EcsError::Precondition("expansion points differ".into()));
    }
    if order > g.order() || order > phi.order() {
        return Err(EcsError::Precondition(format!("order {order} exceeds the input orders")));
    }
    let dg: Vec<f64> = (1..=g.order()).map(|r| r as f64 * g.coeff(r)).collect();
    let mut coeffs = vec![g.coeff(0)];
    for m in 1..=order {
        let pw = multinomial_power(&phi.coefficients, m, m - 1);
        let prod = mul_truncated(&dg, &pw, m - 1);
        coeffs.push(prod[m - 1] / m as f64);
    }
    Ok(FormalSeries::new(0.0, coeffs))
}

/// All (k₁..k_s) of non-negative integers with Σk = r.
pub fn leibniz_derivative_weights(s: usize, r: usize) -> Vec<Vec<usize>> {
    assert!(s >= 1, "need at least one factor");
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(s: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s - 1 {
            cur.push(r);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=r).rev() {
            cur.push(k);
            rec(s, r - k, cur, out);
            cur.pop();
        }
    }
    rec(s, r, &mut cur, &mut out);
    out
}
