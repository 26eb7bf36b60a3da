//! Φ_n(z) and G_n(z; m) together with their Taylor coefficients in z.
//!
//! Every path n → n + ν̂₁ → ... contributes ∏ S_ν divided by a product of
//! regularised denominators that depend only on the visited points, so the
//! path sums are accumulated by propagating a vector indexed by the shell:
//! v_s = D(z) γ S v_{s-1}, with D(z) the diagonal of 1/[[E₀(m) - E₀(n) - z]].
//! Expanding D about z₀ as Σ_k h^k/(x - z₀)^{k+1} turns each entry into a
//! truncated power series in h = z - z₀, which yields the derivative stacks
//! of the explicit solution in the same sweep.

use super::TruncationPolicy;
use crate::error::{EcsError, Result};
use crate::lattice::{bound_b, resonance_tolerance, HypothesisConstants, LatticeVector, ModelParams, Shell};
use crate::numeric::Scalar;
use serde::{Deserialize, Serialize};

/// Result of one sweep.
#[derive(Debug, Clone)]
pub struct Walk<T> {
    /// for each requested target J: Taylor coefficients of
    /// -Σ_{s≤s_max} γ^s (S (D S)^{s-1} δ_start)(n_J)
    pub readout: Vec<Vec<T>>,
    /// per shell point: Taylor coefficients of G (empty when not requested)
    pub g: Vec<Vec<T>>,
    /// total weight of shifts dropped at the shell boundary (order 0)
    pub escaped: f64,
}

/// Φ_n at a point with its derivative stack.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhiEvaluation {
    pub z: f64,
    /// Φ_n(z), series part only
    pub value: f64,
    /// (1/r!) d^r/dz^r (Φ_n(z) - z₀)|_{z₀ = z}, r = 0..R
    pub derivative_values: Vec<f64>,
    pub truncation_tail_estimate: f64,
}

/// Shell, exclusion set and truncation shared by the series evaluators.
#[derive(Debug, Clone)]
pub struct SeriesContext {
    pub params: ModelParams,
    pub policy: TruncationPolicy,
    pub shell: Shell,
    pub excluded: Vec<bool>,
}

impl SeriesContext {
    /// Regularisation at n only.
    pub fn new(n: &LatticeVector, params: &ModelParams, policy: &TruncationPolicy) -> Result<Self> {
        Self::with_excluded(n, params, policy, &[])
    }

    /// Regularisation on n and on every vector of `extra`.
    pub fn with_excluded(
        n: &LatticeVector,
        params: &ModelParams,
        policy: &TruncationPolicy,
        extra: &[LatticeVector],
    ) -> Result<Self> {
        policy.validate()?;
        let shell = Shell::new(n, params, policy.shell_radius, policy.nu_cutoff)?;
        if policy.shell_radius < policy.nu_cutoff {
            return Err(EcsError::TruncationTooSmall(format!(
                "shell radius {} cannot hold a single shift of size {}",
                policy.shell_radius, policy.nu_cutoff
            )));
        }
        let mut excluded = vec![false; shell.len()];
        excluded[shell.origin()] = true;
        for m in extra {
            let idx = shell.index_of(m).ok_or_else(|| {
                EcsError::TruncationTooSmall(format!("resonance partner {m} lies outside the shell"))
            })?;
            excluded[idx] = true;
        }
        Ok(Self { params: *params, policy: *policy, shell, excluded })
    }

    pub fn origin(&self) -> usize {
        self.shell.origin()
    }

    /// One sweep starting from shell point `start`, expanding in h = z - z0
    /// up to `order`.
    pub fn walk<T: Scalar>(&self, start: usize, z0: T, order: usize, want_g: bool, targets: &[usize]) -> Result<Walk<T>> {
        let np = self.shell.len();
        let w = order + 1;
        let gamma = T::from(self.params.gamma);
        let tol = resonance_tolerance(self.shell.e0_base);

        // denominator series d_k(i) = 1/(x_i - z0)^{k+1}
        let mut dens = vec![T::from(0.0); np * w];
        for i in 0..np {
            if self.excluded[i] {
                continue;
            }
            let x = T::from(self.shell.gaps[i]) - z0;
            if x.modulus() < tol {
                return Err(EcsError::Resonance {
                    m: self.shell.base.add(&self.shell.points[i]).0,
                    gap: x.modulus(),
                });
            }
            let inv = T::from(1.0) / x;
            let mut p = inv;
            for k in 0..w {
                dens[i * w + k] = p;
                p *= inv;
            }
        }

        let mut v = vec![T::from(0.0); np * w];
        v[start * w] = T::from(1.0);
        let mut active = vec![false; np];
        active[start] = true;
        let mut g = if want_g { vec![T::from(0.0); np * w] } else { Vec::new() };
        if want_g {
            g[start * w] = T::from(1.0);
        }
        let mut readout = vec![vec![T::from(0.0); w]; targets.len()];
        let mut escaped = 0.0;
        let mut wbuf = vec![T::from(0.0); np * w];

        for s in 1..=self.policy.s_max {
            for x in wbuf.iter_mut() {
                *x = T::from(0.0);
            }
            let mut next_active = vec![false; np];
            for i in 0..np {
                let out = &mut wbuf[i * w..(i + 1) * w];
                let mut touched = false;
                for &(src, sv) in &self.shell.incoming[i] {
                    if !active[src] {
                        continue;
                    }
                    let sv = T::from(sv);
                    let input = &v[src * w..(src + 1) * w];
                    for k in 0..w {
                        out[k] += sv * input[k];
                    }
                    touched = true;
                }
                if touched {
                    for x in out.iter_mut() {
                        *x *= gamma;
                    }
                    next_active[i] = true;
                }
            }
            for i in 0..np {
                if active[i] {
                    escaped += self.shell.leaked[i] * self.params.gamma.abs() * v[i * w].modulus();
                }
            }
            for (slot, &t) in readout.iter_mut().zip(targets) {
                for k in 0..w {
                    slot[k] -= wbuf[t * w + k];
                }
            }
            if s == self.policy.s_max && !want_g {
                break;
            }
            // v_s = D w, series product truncated at `order`
            for i in 0..np {
                let dst = &mut v[i * w..(i + 1) * w];
                if !next_active[i] || self.excluded[i] {
                    for x in dst.iter_mut() {
                        *x = T::from(0.0);
                    }
                    next_active[i] = false;
                    continue;
                }
                let src = &wbuf[i * w..(i + 1) * w];
                let d = &dens[i * w..(i + 1) * w];
                for k in 0..w {
                    let mut acc = T::from(0.0);
                    for j in 0..=k {
                        acc += src[j] * d[k - j];
                    }
                    dst[k] = acc;
                }
            }
            active = next_active;
            if want_g {
                for i in 0..np {
                    if active[i] {
                        for k in 0..w {
                            g[i * w + k] += v[i * w + k];
                        }
                    }
                }
            }
        }

        let g = if want_g { g.chunks(w).map(|c| c.to_vec()).collect() } else { Vec::new() };
        Ok(Walk { readout, g, escaped })
    }

    /// Φ_n(z) (series part).
    pub fn phi_value<T: Scalar>(&self, z: T) -> Result<T> {
        let o = self.origin();
        Ok(self.walk(o, z, 0, false, &[o])?.readout[0][0])
    }

    /// Taylor coefficients of Φ_n about z, r = 0..order.
    pub fn phi_taylor<T: Scalar>(&self, z: T, order: usize) -> Result<Vec<T>> {
        let o = self.origin();
        Ok(self.walk(o, z, order, false, &[o])?.readout.swap_remove(0))
    }

    /// G_n(z; m) for every shell point, together with Φ_n(z).
    pub fn phi_and_g<T: Scalar>(&self, z: T, order: usize) -> Result<(Vec<T>, Vec<Vec<T>>, f64)> {
        let o = self.origin();
        let mut walk = self.walk(o, z, order, true, &[o])?;
        Ok((walk.readout.swap_remove(0), walk.g, walk.escaped))
    }

    /// Geometric tail beyond s_max from the analyticity bound, or ∞ when the
    /// bound does not apply at z.
    pub fn tail_estimate(&self, z_minus_a: f64, constants: Option<&HypothesisConstants>) -> f64 {
        let Some(c) = constants else { return f64::INFINITY };
        let b = bound_b(&self.params, 0.0);
        let room = c.delta - z_minus_a.abs();
        if b >= room {
            return f64::INFINITY;
        }
        let ratio = b / room;
        b * ratio.powi(self.policy.s_max as i32) / (1.0 - ratio)
    }
}

/// Φ_n(z) with its derivative stack up to `order` (Taylor normalisation).
pub fn phi_series(
    z: f64,
    n: &LatticeVector,
    params: &ModelParams,
    policy: &TruncationPolicy,
    order: usize,
    constants: Option<&HypothesisConstants>,
) -> Result<PhiEvaluation> {
    let ctx = SeriesContext::new(n, params, policy)?;
    let series = ctx.phi_taylor(z, order)?;
    let mut derivative_values = series.clone();
    derivative_values[0] -= z;
    let a = constants.map(|c| c.a).unwrap_or(0.0);
    Ok(PhiEvaluation {
        z,
        value: series[0],
        derivative_values,
        truncation_tail_estimate: ctx.tail_estimate(z - a, constants),
    })
}

/// G_n(z; m).
pub fn g_series(z: f64, m: &LatticeVector, n: &LatticeVector, params: &ModelParams, policy: &TruncationPolicy) -> Result<f64> {
    let ctx = SeriesContext::new(n, params, policy)?;
    let idx = ctx
        .shell
        .index_of(m)
        .ok_or_else(|| EcsError::TruncationTooSmall(format!("m = {m} lies outside the shell around n = {n}")))?;
    let (_, g, _) = ctx.phi_and_g(z, 0)?;
    Ok(g[idx][0])
}
