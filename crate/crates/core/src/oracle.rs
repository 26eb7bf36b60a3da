//! Brute-force references: dense diagonalisation of the truncated lattice
//! operator and exact sums K_s over shift sequences.

use crate::elliptic::s_coeff;
use crate::error::{EcsError, Result};
use crate::lattice::{bound_b, free_energy, CoefficientMap, LatticeVector, ModelParams};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

pub const DEFAULT_MAX_BASIS: usize = 20_000;

/// Number of real eigenvalues closest to E₀(n) that are examined.
const CANDIDATES: usize = 24;

/// M(m, m') = E₀(m) δ(m, m') - γ Σ_{j<k} Σ_ν S_ν δ(m', m - νE_jk) on a box
/// max|m_j - n_j| ≤ cutoff with Σ(m_j - n_j) = 0.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub base: LatticeVector,
    pub cutoff: i64,
    pub basis: Vec<LatticeVector>,
    pub matrix: DMatrix<f64>,
}

impl TruncatedOperator {
    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn position(&self, m: &LatticeVector) -> Option<usize> {
        self.basis.iter().position(|b| b == m)
    }
}

/// Box of relative vectors by odometer, keeping those with vanishing sum.
fn box_basis(n_particles: usize, cutoff: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-cutoff; n_particles];
    loop {
        if cur.iter().sum::<i64>() == 0 {
            out.push(cur.clone());
        }
        let mut pos = n_particles;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] < cutoff {
                cur[pos] += 1;
                for c in cur.iter_mut().skip(pos + 1) {
                    *c = -cutoff;
                }
                break;
            }
        }
    }
}

pub fn build_truncated_operator(n: &LatticeVector, params: &ModelParams, cutoff: i64) -> Result<TruncatedOperator> {
    build_truncated_operator_with_limit(n, params, cutoff, DEFAULT_MAX_BASIS)
}

pub fn build_truncated_operator_with_limit(
    n: &LatticeVector,
    params: &ModelParams,
    cutoff: i64,
    max_basis: usize,
) -> Result<TruncatedOperator> {
    if cutoff < 1 {
        return Err(EcsError::Config(format!("oracle cutoff must be ≥ 1, got {cutoff}")));
    }
    if n.len() != params.n_particles {
        return Err(EcsError::Precondition(format!("n has {} components, N = {}", n.len(), params.n_particles)));
    }
    let rel = box_basis(params.n_particles, cutoff);
    if rel.len() > max_basis {
        return Err(EcsError::BasisTooLarge { size: rel.len(), max: max_basis });
    }
    let basis: Vec<LatticeVector> = rel.iter().map(|r| n.add(r)).collect();
    let lookup: HashMap<&[i64], usize> = basis.iter().enumerate().map(|(i, b)| (b.as_slice(), i)).collect();
    let dim = basis.len();
    let mut matrix = DMatrix::zeros(dim, dim);
    let nn = params.n_particles;
    for (row, m) in basis.iter().enumerate() {
        matrix[(row, row)] = free_energy(m.as_slice(), params);
        for j in 0..nn {
            for k in (j + 1)..nn {
                for nu in -2 * cutoff..=2 * cutoff {
                    let s = s_coeff(nu, &params.nome);
                    if s == 0.0 {
                        continue;
                    }
                    let mut col = m.0.clone();
                    col[j] -= nu;
                    col[k] += nu;
                    if let Some(&c) = lookup.get(col.as_slice()) {
                        matrix[(row, c)] -= params.gamma * s;
                    }
                }
            }
        }
    }
    Ok(TruncatedOperator { base: n.clone(), cutoff, basis, matrix })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleResult {
    pub eigenvalue: f64,
    pub coefficients: CoefficientMap,
    pub basis_size: usize,
    /// ‖Mv - Ev‖/‖v‖ of the selected pair
    pub residual: f64,
    /// spectral-projector weight r_n l_n/(l·r) of the selected pair
    pub weight: f64,
    /// eigenvalues with a sizeable imaginary part (truncation artefacts)
    pub complex_flagged: usize,
}

/// Eigenvector for an eigenvalue estimate by shifted inverse iteration.
fn inverse_iteration(m: &DMatrix<f64>, lambda: f64) -> Option<DVector<f64>> {
    let dim = m.nrows();
    let shift = lambda + 1e-10 * lambda.abs().max(1.0);
    let lu = (m - DMatrix::identity(dim, dim) * shift).lu();
    let mut v = DVector::from_fn(dim, |i, _| 1.0 + 0.01 * ((i * 7919) % 101) as f64);
    for _ in 0..4 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / norm;
    }
    Some(v)
}

pub fn oracle_eigenpair(op: &TruncatedOperator, n: &LatticeVector) -> Result<OracleResult> {
    let idx = op
        .position(n)
        .ok_or_else(|| EcsError::Precondition(format!("n = {n} is not in the oracle basis")))?;
    let scale = op.matrix.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let values = op.matrix.clone().complex_eigenvalues();
    let e0n = op.matrix[(idx, idx)];
    let mut complex_flagged = 0;
    let mut reals: Vec<f64> = Vec::new();
    for v in values.iter() {
        if v.im.abs() > 1e-8 * scale {
            complex_flagged += 1;
        } else {
            reals.push(v.re);
        }
    }
    reals.sort_by(|a, b| (a - e0n).abs().total_cmp(&(b - e0n).abs()));
    reals.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    reals.truncate(CANDIDATES);

    // diagonal entry of the spectral projector, r_n l_n/(l·r): equals δ at
    // q = 0 for the eigenpair continuing from E₀(n)
    let transposed = op.matrix.transpose();
    let mut scored: Vec<(f64, f64, DVector<f64>)> = Vec::new();
    for &lam in &reals {
        let Some(r) = inverse_iteration(&op.matrix, lam) else { continue };
        let Some(l) = inverse_iteration(&transposed, lam) else { continue };
        let overlap = l.dot(&r);
        if overlap == 0.0 {
            continue;
        }
        scored.push(((r[idx] * l[idx] / overlap).abs(), lam, r));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut scored = scored.into_iter();
    let (weight, eigenvalue, v) =
        scored.next().ok_or_else(|| EcsError::Domain("no real eigenpair found in the truncated operator".into()))?;
    if let Some((rw, re, _)) = scored.next() {
        if (weight - rw).abs() < 1e-6 * weight && (re - eigenvalue).abs() > 1e-9 * scale {
            return Err(EcsError::Ambiguous { first: eigenvalue, second: re });
        }
    }
    let v = &v / v[idx];
    let residual = (&op.matrix * &v - &v * eigenvalue).norm() / v.norm();
    let mut coefficients = CoefficientMap::new(n.clone());
    for (b, &x) in op.basis.iter().zip(v.iter()) {
        if x != 0.0 {
            coefficients.insert_rel(b.sub(n), x);
        }
    }
    Ok(OracleResult { eigenvalue, coefficients, basis_size: op.size(), residual, weight, complex_flagged })
}

/// Convenience: build and diagonalise in one step.
pub fn oracle_solve(n: &LatticeVector, params: &ModelParams, cutoff: i64) -> Result<OracleResult> {
    oracle_eigenpair(&build_truncated_operator(n, params, cutoff)?, n)
}

/// All real eigenvalues of the truncated operator, ascending.
pub fn oracle_spectrum(op: &TruncatedOperator) -> Vec<f64> {
    let scale = op.matrix.iter().fold(0.0f64, |acc, x| acc.max(x.abs())).max(1.0);
    let mut out: Vec<f64> = op
        .matrix
        .clone()
        .complex_eigenvalues()
        .iter()
        .filter(|v| v.im.abs() <= 1e-8 * scale)
        .map(|v| v.re)
        .collect();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Upper limit on (number of pairs · 2 nu_cutoff)^s for K_s.
pub const KS_SEQUENCE_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsValue {
    pub s: usize,
    pub m: Vec<i64>,
    pub value: f64,
    /// bound on the sequences dropped by the ν cutoff
    pub tail_bound: f64,
}

/// A(ε) = Σ_{j<k} Σ_ν S_ν e^{-ν(k-j)ε}, restricted to |ν| ≤ cutoff when given.
fn a_eps(params: &ModelParams, eps: f64, cutoff: Option<i64>) -> f64 {
    let nn = params.n_particles;
    let mut total = 0.0;
    for j in 0..nn {
        for k in (j + 1)..nn {
            let d = (k - j) as f64;
            let mut nu = 1i64;
            loop {
                if cutoff.is_some_and(|c| nu > c) {
                    break;
                }
                let t = s_coeff(nu, &params.nome) * (-(nu as f64) * d * eps).exp()
                    + s_coeff(-nu, &params.nome) * ((nu as f64) * d * eps).exp();
                total += t;
                if cutoff.is_none() && nu > 4 && t < 1e-22 * total {
                    break;
                }
                nu += 1;
                if nu > 100_000 {
                    break;
                }
            }
        }
    }
    total
}

/// K_s(m) = |γ|^s Σ over sequences ((j_κ,k_κ), ν_κ), |ν_κ| ≤ nu_cutoff, of
/// ∏ S_{ν_κ} with Σ ν̂_κ = m; summed exactly by convolution over partial sums.
pub fn k_s_enumerate(s: usize, m: &[i64], params: &ModelParams, nu_cutoff: i64) -> Result<KsValue> {
    if s < 1 {
        return Err(EcsError::Precondition("K_s needs s ≥ 1".into()));
    }
    if m.len() != params.n_particles {
        return Err(EcsError::Precondition(format!("m has {} components, N = {}", m.len(), params.n_particles)));
    }
    let pairs = params.pairs();
    let branching = (pairs.len() as f64) * 2.0 * nu_cutoff as f64;
    if branching.powi(s as i32) > KS_SEQUENCE_LIMIT {
        return Err(EcsError::Precondition(format!(
            "K_{s} enumeration would visit {:.2e} sequences",
            branching.powi(s as i32)
        )));
    }
    let shifts: Vec<(Vec<i64>, f64)> = pairs
        .iter()
        .flat_map(|&(j, k)| {
            (-nu_cutoff..=nu_cutoff).filter(|&nu| nu != 0).map(move |nu| {
                let mut v = vec![0i64; params.n_particles];
                v[j] += nu;
                v[k] -= nu;
                (v, nu)
            })
        })
        .map(|(v, nu)| (v, s_coeff(nu, &params.nome)))
        .filter(|(_, sv)| *sv != 0.0)
        .collect();
    // ordered layers keep the summation order, and so the rounding, reproducible
    let mut layer: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    layer.insert(vec![0; params.n_particles], 1.0);
    for _ in 0..s {
        let mut next: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
        for (p, &w) in &layer {
            for (v, sv) in &shifts {
                let key: Vec<i64> = p.iter().zip(v).map(|(a, b)| a + b).collect();
                *next.entry(key).or_insert(0.0) += w * sv;
            }
        }
        layer = next;
    }
    let g = params.gamma.abs().powi(s as i32);
    let value = g * layer.get(m).copied().unwrap_or(0.0);

    let eps = if params.q() == 0.0 { 1.0 } else { params.nome.beta() / (2.0 * params.n_particles as f64) };
    let weight: f64 = m.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x as f64).sum();
    let full = a_eps(params, eps, None);
    let cut = a_eps(params, eps, Some(nu_cutoff));
    let tail_bound = (-eps * weight).exp() * g * (full.powi(s as i32) - cut.powi(s as i32)).max(0.0);
    Ok(KsValue { s, m: m.to_vec(), value, tail_bound })
}

/// q^{2Σ_j j m_j/(N+b)} B(b)^s.
pub fn k_s_bound(s: usize, m: &[i64], params: &ModelParams, b_param: f64) -> f64 {
    let nn = params.n_particles as f64;
    let weight: f64 = m.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x as f64).sum();
    params.q().powf(2.0 * weight / (nn + b_param)) * bound_b(params, b_param).powi(s as i32)
}

/// e^{-εΣ_j j m_j} (|γ| A(ε))^s with the full ν sum.
pub fn k_s_general_bound(s: usize, m: &[i64], params: &ModelParams, eps: f64) -> f64 {
    let weight: f64 = m.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x as f64).sum();
    (-eps * weight).exp() * (params.gamma.abs() * a_eps(params, eps, None)).powi(s as i32)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub s: usize,
    pub k_s_zero: f64,
    /// B̃^s q^{2⌈s/N⌉}, B̃ = N(N-1)|γ|/(1 - q^{2/N})³
    pub conjectured_bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Report-only comparison of K_s(0) with the conjectured sharper bound.
pub fn k_s_conjecture_report(s_range: std::ops::RangeInclusive<usize>, params: &ModelParams, nu_cutoff: i64) -> Result<Vec<ConjectureRow>> {
    let nn = params.n_particles;
    let q = params.q();
    let b_tilde = (nn * (nn - 1)) as f64 * params.gamma.abs() / (1.0 - q.powf(2.0 / nn as f64)).powi(3);
    let zero = vec![0i64; nn];
    let mut rows = Vec::new();
    for s in s_range {
        let k = k_s_enumerate(s, &zero, params, nu_cutoff)?.value;
        let bound = b_tilde.powi(s as i32) * q.powi(2 * s.div_ceil(nn) as i32);
        rows.push(ConjectureRow { s, k_s_zero: k, conjectured_bound: bound, ratio: k / bound, holds: k <= bound });
    }
    Ok(rows)
}
