//! Degenerate variant: the regularisation removes the whole resonance set
//! {n = n₁, n₂, ...} and Ẽ c = Φ(Ẽ) c is solved on that set, one branch per
//! eigenvalue, by continuation in the eigenvector overlap.

use super::series::SeriesContext;
use super::{partition_flag, DegenerateInfo, Diagnostics, Method, SpectralResult, TruncationPolicy};
use crate::error::{EcsError, Result};
use crate::lattice::{find_resonances, free_energy, CoefficientMap, LatticeVector, ModelParams};
use nalgebra::{DMatrix, DVector};

const AMBIGUITY: f64 = 1e-6;
const DAMPING: f64 = 0.5;

/// Φ_{JK}(z) over the resonance set (row J, column K).
pub fn phi_matrix(ctx: &SeriesContext, set: &[usize], z: f64) -> Result<DMatrix<f64>> {
    let r = set.len();
    let mut m = DMatrix::zeros(r, r);
    for (kcol, &start) in set.iter().enumerate() {
        let walk = ctx.walk(start, z, 0, false, set)?;
        for j in 0..r {
            m[(j, kcol)] = walk.readout[j][0];
        }
    }
    Ok(m)
}

#[derive(Debug, Clone)]
struct EigenPair {
    value: f64,
    vector: DVector<f64>,
    /// a repeated eigenvalue with a single eigenvector
    defective: bool,
}

/// Real eigenpairs of a small nonsymmetric matrix, ascending by eigenvalue.
fn real_eigenpairs(m: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let r = m.nrows();
    let scale = m.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1e-300);
    let values = m.clone().complex_eigenvalues();
    let mut reals = Vec::with_capacity(r);
    for v in values.iter() {
        if v.im.abs() > 1e-9 * scale {
            return Err(EcsError::Domain(format!(
                "the resonance-set matrix has a complex eigenvalue {} + {}i",
                v.re, v.im
            )));
        }
        reals.push(v.re);
    }
    reals.sort_by(|a, b| a.total_cmp(b));
    let mut out = Vec::with_capacity(r);
    for &lam in &reals {
        let shifted = m - DMatrix::identity(r, r) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| EcsError::Domain("SVD failed".into()))?;
        let mut order: Vec<usize> = (0..r).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        let mut vector: DVector<f64> = v_t.row(order[0]).transpose();
        let lead = vector.iter().enumerate().fold(0, |best, (i, x)| if x.abs() > vector[best].abs() { i } else { best });
        if vector[lead] < 0.0 {
            vector = -vector;
        }
        let repeated = reals.iter().filter(|&&x| (x - lam).abs() <= 1e-10 * scale).count() > 1;
        let null_dim = svd.singular_values.iter().filter(|&&s| s <= 1e-10 * scale).count();
        out.push(EigenPair { value: lam, vector, defective: repeated && null_dim < 2 });
    }
    Ok(out)
}

fn overlap(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.dot(b).abs() / (a.norm() * b.norm())
}

/// One result per eigenvalue branch of the resonance-set problem.
pub fn degenerate_solve(
    n: &LatticeVector,
    params: &ModelParams,
    policy: &TruncationPolicy,
    radius: i64,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<SpectralResult>> {
    let partners = find_resonances(n, params, radius);
    if partners.is_empty() {
        return Err(EcsError::Precondition(format!(
            "n = {n} has no resonance partner within radius {radius}; use a non-degenerate method"
        )));
    }
    let ctx = SeriesContext::with_excluded(n, params, policy, &partners)?;
    let mut set_vectors = vec![n.clone()];
    set_vectors.extend(partners.iter().cloned());
    let set: Vec<usize> = set_vectors.iter().map(|m| ctx.shell.index_of(m).expect("checked by the context")).collect();
    let e0 = free_energy(n.as_slice(), params);

    let start = real_eigenpairs(&phi_matrix(&ctx, &set, 0.0)?)?;
    let mut results = Vec::with_capacity(start.len());
    for (branch, init) in start.iter().enumerate() {
        let mut diagnostics = Diagnostics::default();
        partition_flag(n, &mut diagnostics);
        let mut z = init.value;
        let mut c = init.vector.clone();
        let mut defective = init.defective;
        let mut omega = 1.0;
        let mut prev_step: Option<f64> = None;
        let mut converged = false;
        let mut last = f64::INFINITY;
        for it in 1..=max_iter {
            let pairs = real_eigenpairs(&phi_matrix(&ctx, &set, z)?)?;
            let mut scored: Vec<(f64, usize)> = pairs.iter().enumerate().map(|(i, p)| (overlap(&p.vector, &c), i)).collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let best = &pairs[scored[0].1];
            if let Some(&(second, idx)) = scored.get(1) {
                let other = &pairs[idx];
                let distinct = (other.value - best.value).abs() > 1e-9 * best.value.abs().max(1.0);
                if scored[0].0 - second < AMBIGUITY && distinct {
                    return Err(EcsError::Ambiguous { first: best.value, second: other.value });
                }
            }
            defective = best.defective;
            let step = best.value - z;
            if let Some(p) = prev_step {
                if omega == 1.0 && step * p < 0.0 && step.abs() > 0.5 * p.abs() {
                    omega = DAMPING;
                    diagnostics.damped = true;
                }
            }
            let next = z + omega * step;
            last = (next - z).abs();
            z = next;
            c = best.vector.clone();
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
        if defective {
            diagnostics.warnings.push(format!(
                "the resonance-set matrix is defective at Ẽ = {z:.3e}; branches share one eigenvector"
            ));
        }

        let mut total = vec![0.0; ctx.shell.len()];
        for (k, &start_idx) in set.iter().enumerate() {
            let walk = ctx.walk(start_idx, z, 0, true, &[])?;
            diagnostics.escaped_weight += walk.escaped * c[k].abs();
            for (slot, gi) in total.iter_mut().zip(&walk.g) {
                *slot += c[k] * gi[0];
            }
        }
        let mut coefficients = CoefficientMap::new(n.clone());
        for (i, &v) in total.iter().enumerate() {
            if v != 0.0 {
                coefficients.insert_rel(ctx.shell.points[i].clone(), v);
            }
        }
        results.push(SpectralResult {
            method: Method::Degenerate,
            base: n.clone(),
            e0,
            eigenvalue: e0 + z,
            eta_terms: Vec::new(),
            coefficients,
            constants: None,
            gate: None,
            policy: *policy,
            degenerate: Some(DegenerateInfo {
                resonance_set: set_vectors.clone(),
                mixing: c.iter().copied().collect(),
                branch,
            }),
            diagnostics,
        });
    }
    Ok(results)
}
