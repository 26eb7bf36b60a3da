//! Explicit η-series for E and α from the derivative stacks of Φ and G at a.

use super::series::SeriesContext;
use super::{gate_report, partition_flag, Diagnostics, Method, SpectralResult, TruncationPolicy};
use crate::error::{EcsError, Result};
use crate::lagrange::{FormalSeries, Reversion};
use crate::lattice::{free_energy, CoefficientMap, HypothesisConstants, LatticeVector, ModelParams};

pub fn explicit_solve(
    n: &LatticeVector,
    params: &ModelParams,
    policy: &TruncationPolicy,
    constants: &HypothesisConstants,
    eta_order: usize,
) -> Result<SpectralResult> {
    if !constants.admissible() {
        return Err(EcsError::Precondition(format!(
            "constants need Δ > |a|, got a = {}, Δ = {}",
            constants.a, constants.delta
        )));
    }
    if eta_order < 1 {
        return Err(EcsError::Config("eta order must be ≥ 1".into()));
    }
    let ctx = SeriesContext::new(n, params, policy)?;
    let e0 = free_energy(n.as_slice(), params);
    let a = constants.a;
    let (phi, g, escaped) = ctx.phi_and_g(a, eta_order)?;

    let mut phi_coeffs = phi;
    phi_coeffs[0] -= a;
    let rev = Reversion::new(&FormalSeries::new(a, phi_coeffs), eta_order)?;
    let eta_terms: Vec<f64> = rev.xi.coefficients[1..].to_vec();
    let shift = a + eta_terms.iter().sum::<f64>();

    let mut coefficients = CoefficientMap::new(n.clone());
    for (i, gi) in g.iter().enumerate() {
        if gi.iter().all(|&x| x == 0.0) {
            continue;
        }
        let v: f64 = rev.compose_coefficients(gi).iter().sum();
        if v != 0.0 {
            coefficients.insert_rel(ctx.shell.points[i].clone(), v);
        }
    }

    let mut diagnostics = Diagnostics {
        iterations: eta_order,
        last_step: eta_terms.last().copied().unwrap_or(0.0).abs(),
        order_terms: eta_terms.clone(),
        tail_estimate: ctx.tail_estimate(0.0, Some(constants)),
        escaped_weight: escaped,
        ..Default::default()
    };
    partition_flag(n, &mut diagnostics);
    let gate = gate_report(params, constants, shift, Some(&coefficients));
    if !gate.gate_passed {
        diagnostics.warnings.push(format!("convergence gate fails: B = {:.3e}", gate.b));
    }

    Ok(SpectralResult {
        method: Method::Explicit,
        base: n.clone(),
        e0,
        eigenvalue: e0 + shift,
        eta_terms,
        coefficients,
        constants: Some(constants.clone()),
        gate: Some(gate),
        policy: *policy,
        degenerate: None,
        diagnostics,
    })
}
