//! Order-by-order recursion in γ.

use super::{partition_flag, Diagnostics, Method, SpectralResult, TruncationPolicy};
use crate::error::{EcsError, Result};
use crate::lattice::{free_energy, CoefficientMap, LatticeVector, ModelParams, Shell};

#[derive(Debug, Clone)]
pub struct PerturbativeSolution {
    pub result: SpectralResult,
    /// E^{(s)}, s = 0..=s_max (E^{(0)} = E₀(n))
    pub order_energies: Vec<f64>,
    /// α^{(s)}, s = 0..=s_max
    pub order_coefficients: Vec<CoefficientMap>,
}

pub fn perturbative_solve(n: &LatticeVector, params: &ModelParams, policy: &TruncationPolicy) -> Result<PerturbativeSolution> {
    policy.validate()?;
    if policy.shell_radius < policy.nu_cutoff {
        return Err(EcsError::TruncationTooSmall(format!(
            "shell radius {} cannot hold a single shift of size {}",
            policy.shell_radius, policy.nu_cutoff
        )));
    }
    let shell = Shell::new(n, params, policy.shell_radius, policy.nu_cutoff)?;
    if let Some(&i) = shell.resonant_points().first() {
        return Err(EcsError::Resonance { m: n.add(&shell.points[i]).0, gap: shell.gaps[i].abs() });
    }
    let np = shell.len();
    let origin = shell.origin();
    let e0 = free_energy(n.as_slice(), params);

    let mut energies = vec![e0];
    let mut alphas: Vec<Vec<f64>> = vec![{
        let mut v = vec![0.0; np];
        v[origin] = 1.0;
        v
    }];
    let mut escaped = 0.0;
    let mut s_alpha = vec![0.0; np];
    for s in 1..=policy.s_max {
        let prev = &alphas[s - 1];
        for (i, slot) in s_alpha.iter_mut().enumerate() {
            *slot = shell.incoming[i].iter().map(|&(src, sv)| sv * prev[src]).sum();
        }
        escaped += prev.iter().zip(&shell.leaked).map(|(a, l)| a.abs() * l).sum::<f64>();
        let es = -s_alpha[origin];
        energies.push(es);
        let mut next = vec![0.0; np];
        for i in 0..np {
            if i == origin {
                continue;
            }
            let mut acc = s_alpha[i];
            for sp in 1..s {
                acc += energies[sp] * alphas[s - sp][i];
            }
            next[i] = acc / shell.gaps[i];
        }
        alphas.push(next);
    }

    let gamma = params.gamma;
    let order_terms: Vec<f64> = energies.iter().enumerate().skip(1).map(|(s, e)| gamma.powi(s as i32) * e).collect();
    let eigenvalue = e0 + order_terms.iter().sum::<f64>();

    let mut total = vec![0.0; np];
    let mut order_coefficients = Vec::with_capacity(alphas.len());
    for (s, a) in alphas.iter().enumerate() {
        let gs = gamma.powi(s as i32);
        let mut map = CoefficientMap::new(n.clone());
        for (i, &v) in a.iter().enumerate() {
            if v != 0.0 {
                map.insert_rel(shell.points[i].clone(), v);
                total[i] += gs * v;
            }
        }
        order_coefficients.push(map);
    }
    let mut coefficients = CoefficientMap::new(n.clone());
    for (i, &v) in total.iter().enumerate() {
        if v != 0.0 {
            coefficients.insert_rel(shell.points[i].clone(), v);
        }
    }

    let mut diagnostics = Diagnostics {
        iterations: policy.s_max,
        last_step: order_terms.last().copied().unwrap_or(0.0).abs(),
        order_terms,
        tail_estimate: f64::NAN,
        escaped_weight: escaped * gamma.abs(),
        ..Default::default()
    };
    partition_flag(n, &mut diagnostics);

    Ok(PerturbativeSolution {
        result: SpectralResult {
            method: Method::Perturbative,
            base: n.clone(),
            e0,
            eigenvalue,
            eta_terms: Vec::new(),
            coefficients,
            constants: None,
            gate: None,
            policy: *policy,
            degenerate: None,
            diagnostics,
        },
        order_energies: energies,
        order_coefficients,
    })
}
