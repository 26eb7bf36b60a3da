//! Fixed-point iteration Ẽ ← Φ_n(Ẽ) with coefficients α(m) = G_n(Ẽ; m).

use super::series::SeriesContext;
use super::{gate_report, partition_flag, Diagnostics, Method, SpectralResult, TruncationPolicy};
use crate::error::{EcsError, Result};
use crate::lattice::{free_energy, CoefficientMap, HypothesisConstants, LatticeVector, ModelParams};

const DAMPING: f64 = 0.5;

pub fn implicit_solve(
    n: &LatticeVector,
    params: &ModelParams,
    policy: &TruncationPolicy,
    constants: &HypothesisConstants,
    max_iter: usize,
    tol: f64,
) -> Result<SpectralResult> {
    if !constants.admissible() {
        return Err(EcsError::Precondition(format!(
            "constants need Δ > |a|, got a = {}, Δ = {}",
            constants.a, constants.delta
        )));
    }
    let ctx = SeriesContext::new(n, params, policy)?;
    let e0 = free_energy(n.as_slice(), params);
    let mut diagnostics = Diagnostics::default();
    partition_flag(n, &mut diagnostics);

    let mut z = constants.a;
    let mut omega = 1.0;
    let mut prev_step: Option<f64> = None;
    let mut converged = false;
    let mut last = f64::INFINITY;
    for it in 1..=max_iter {
        let step = ctx.phi_value(z)? - z;
        if let Some(p) = prev_step {
            let oscillating = step * p < 0.0 && step.abs() > 0.5 * p.abs();
            if omega == 1.0 && (oscillating || step.abs() > p.abs()) {
                omega = DAMPING;
                diagnostics.damped = true;
            }
        }
        let next = z + omega * step;
        last = (next - z).abs();
        z = next;
        prev_step = Some(step);
        diagnostics.iterations = it;
        if last < tol {
            converged = true;
            break;
        }
    }
    diagnostics.last_step = last;
    if !converged {
        return Err(EcsError::NoConvergence { iterations: max_iter, last_step: last });
    }

    let (_, g, escaped) = ctx.phi_and_g(z, 0)?;
    let mut coefficients = CoefficientMap::new(n.clone());
    for (i, gi) in g.iter().enumerate() {
        if gi[0] != 0.0 {
            coefficients.insert_rel(ctx.shell.points[i].clone(), gi[0]);
        }
    }
    diagnostics.escaped_weight = escaped;
    diagnostics.tail_estimate = ctx.tail_estimate(z - constants.a, Some(constants));
    let gate = gate_report(params, constants, z, Some(&coefficients));
    if !gate.gate_passed {
        diagnostics.warnings.push(format!(
            "convergence gate fails: B = {:.3e} is not below (Δ - |a|)/3 = {:.3e}",
            gate.b,
            (constants.delta - constants.a.abs()) / 3.0
        ));
    }

    Ok(SpectralResult {
        method: Method::Implicit,
        base: n.clone(),
        e0,
        eigenvalue: e0 + z,
        eta_terms: Vec::new(),
        coefficients,
        constants: Some(constants.clone()),
        gate: Some(gate),
        policy: *policy,
        degenerate: None,
        diagnostics,
    })
}
