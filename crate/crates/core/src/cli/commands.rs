//! The four subcommands.

use super::config::{DeltaChoice, MethodChoice, RunConfig};
use super::output::{emit, num, opt_num, vector, Table};
use crate::error::{EcsError, Result};
use crate::lattice::{find_resonances, free_energy, hypothesis_constants, DeltaMode, HypothesisConstants, LatticeVector, ModelParams};
use crate::oracle::{build_truncated_operator, oracle_eigenpair, oracle_spectrum};
use crate::solver::{
    degenerate_solve, explicit_solve, implicit_solve, perturbative_solve, Method, SeriesContext, SpectralResult, TruncationPolicy,
};
use crate::suite::{failures, run_suite, CheckRecord, SuiteConfig, CHECK_NAMES};
use serde::Serialize;

/// (a, Δ) according to the configured mode.
pub fn resolve_constants(
    cfg: &RunConfig,
    n: &LatticeVector,
    params: &ModelParams,
    policy: &TruncationPolicy,
) -> Result<HypothesisConstants> {
    let radius = cfg.shell_radius;
    let zero_mode = if params.n_particles == 2 { DeltaMode::N2ClosedForm } else { DeltaMode::ExhaustiveSearch };
    match cfg.delta_mode {
        DeltaChoice::N2 => hypothesis_constants(n, params, DeltaMode::N2ClosedForm, radius),
        DeltaChoice::Exhaustive => hypothesis_constants(n, params, DeltaMode::ExhaustiveSearch, radius),
        DeltaChoice::Shifted => {
            let a = match cfg.a {
                Some(a) => a,
                None => SeriesContext::new(n, params, policy)?.phi_value(0.0)?,
            };
            hypothesis_constants(n, params, DeltaMode::Shifted { a }, radius)
        }
        DeltaChoice::Rational => {
            let (p, m) = cfg
                .lambda
                .fraction
                .ok_or_else(|| EcsError::Config("--delta-mode rational needs lambda given as p/m".into()))?;
            let (k1, k2, a0) = match (cfg.k1, cfg.k2, cfg.a0) {
                (Some(k1), Some(k2), Some(a0)) => (k1, k2, a0),
                _ => return Err(EcsError::Config("--delta-mode rational needs --k1, --k2 and --a0".into())),
            };
            hypothesis_constants(n, params, DeltaMode::RationalGrid { p, m, k1, k2, a0 }, radius)
        }
        DeltaChoice::Auto => {
            if params.n_particles == 2 {
                let shifted = SeriesContext::new(n, params, policy)
                    .and_then(|ctx| ctx.phi_value(0.0))
                    .and_then(|a| hypothesis_constants(n, params, DeltaMode::Shifted { a }, radius));
                if let Ok(c) = shifted {
                    if c.admissible() {
                        return Ok(c);
                    }
                }
            }
            hypothesis_constants(n, params, zero_mode, radius)
        }
    }
}

fn resonance_error(n: &LatticeVector, params: &ModelParams, radius: i64) -> Option<EcsError> {
    let partner = find_resonances(n, params, radius).into_iter().next()?;
    let gap = (free_energy(partner.as_slice(), params) - free_energy(n.as_slice(), params)).abs();
    Some(EcsError::Resonance { m: partner.0, gap })
}

fn methods_for(cfg: &RunConfig, resonant: bool) -> Vec<Method> {
    match cfg.method {
        MethodChoice::Perturbative => vec![Method::Perturbative],
        MethodChoice::Implicit => vec![Method::Implicit],
        MethodChoice::Explicit => vec![Method::Explicit],
        MethodChoice::Degenerate => vec![Method::Degenerate],
        MethodChoice::All if resonant => vec![Method::Degenerate],
        MethodChoice::All => vec![Method::Perturbative, Method::Implicit, Method::Explicit],
    }
}

/// Runs the configured methods; a degenerate run yields one result per branch.
pub fn solve_all(cfg: &RunConfig) -> Result<Vec<SpectralResult>> {
    let params = cfg.params()?;
    let n = cfg.target();
    let policy = cfg.policy()?;
    let resonance = resonance_error(&n, &params, cfg.shell_radius);
    let mut out = Vec::new();
    for method in methods_for(cfg, resonance.is_some()) {
        if method != Method::Degenerate {
            if let Some(err) = &resonance {
                return Err(err.clone());
            }
        }
        match method {
            Method::Perturbative => out.push(perturbative_solve(&n, &params, &policy)?.result),
            Method::Implicit => {
                let c = resolve_constants(cfg, &n, &params, &policy)?;
                out.push(implicit_solve(&n, &params, &policy, &c, cfg.max_iter, cfg.tol)?);
            }
            Method::Explicit => {
                let c = resolve_constants(cfg, &n, &params, &policy)?;
                out.push(explicit_solve(&n, &params, &policy, &c, cfg.eta_order)?);
            }
            Method::Degenerate => {
                out.extend(degenerate_solve(&n, &params, &policy, cfg.shell_radius, cfg.max_iter, cfg.tol)?);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SpectrumData {
    pub results: Vec<SpectralResult>,
}

fn branch_of(r: &SpectralResult) -> String {
    r.degenerate.as_ref().map(|d| d.branch.to_string()).unwrap_or_default()
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<()> {
    let mut results = solve_all(cfg)?;
    for r in &mut results {
        r.coefficients = r.coefficients.restricted(cfg.coeff_radius);
    }
    emit("spectrum", cfg, SpectrumData { results }, |d| {
        let mut t = Table::new(vec!["method", "branch", "kind", "index", "value"]);
        for r in &d.results {
            let (m, b) = (r.method.to_string(), branch_of(r));
            t.push(vec![m.clone(), b.clone(), "eigenvalue".into(), String::new(), num(r.eigenvalue)]);
            t.push(vec![m.clone(), b.clone(), "e0".into(), String::new(), num(r.e0)]);
            for (k, e) in r.eta_terms.iter().enumerate() {
                t.push(vec![m.clone(), b.clone(), "eta".into(), (k + 1).to_string(), num(*e)]);
            }
            for (mv, v) in r.coefficients.iter_abs() {
                t.push(vec![m.clone(), b.clone(), "coefficient".into(), vector(mv.as_slice()), num(v)]);
            }
        }
        t
    })
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub cutoff: i64,
    pub basis_size: usize,
    /// eigenvalue selected for n; absent when n is resonant
    pub eigenvalue: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub method: Method,
    pub branch: Option<usize>,
    pub eigenvalue: f64,
    pub oracle_eigenvalue: f64,
    pub abs_diff: f64,
    /// max |α - α_oracle| over the coefficient radius (non-degenerate only)
    pub coeff_max_error: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct CompareData {
    pub oracle: OracleSummary,
    pub rows: Vec<CompareRow>,
}

pub fn cmd_oracle_compare(cfg: &RunConfig) -> Result<()> {
    if cfg.n.len() > 4 {
        return Err(EcsError::Precondition(format!("oracle comparison needs N <= 4, got {}", cfg.n.len())));
    }
    let params = cfg.params()?;
    let n = cfg.target();
    let results = solve_all(cfg)?;
    let op = build_truncated_operator(&n, &params, cfg.oracle_cutoff())?;
    let degenerate = results.iter().any(|r| r.method == Method::Degenerate);
    let (selected, spectrum) = if degenerate {
        (None, oracle_spectrum(&op))
    } else {
        (Some(oracle_eigenpair(&op, &n)?), Vec::new())
    };
    let mut rows = Vec::new();
    for r in &results {
        let (target, coeff_err) = match &selected {
            Some(o) => {
                let inner = o.coefficients.restricted(cfg.coeff_radius);
                let err = inner
                    .entries
                    .iter()
                    .map(|(rel, v)| (r.coefficients.get_rel(rel) - v).abs())
                    .fold(0.0, f64::max);
                (o.eigenvalue, Some(err))
            }
            None => {
                let nearest = spectrum
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - r.eigenvalue).abs().total_cmp(&(b - r.eigenvalue).abs()))
                    .unwrap_or(f64::NAN);
                (nearest, None)
            }
        };
        rows.push(CompareRow {
            method: r.method,
            branch: r.degenerate.as_ref().map(|d| d.branch),
            eigenvalue: r.eigenvalue,
            oracle_eigenvalue: target,
            abs_diff: (r.eigenvalue - target).abs(),
            coeff_max_error: coeff_err,
        });
    }
    let oracle = OracleSummary {
        cutoff: op.cutoff,
        basis_size: op.size(),
        eigenvalue: selected.as_ref().map(|o| o.eigenvalue),
        residual: selected.as_ref().map(|o| o.residual),
    };
    emit("oracle-compare", cfg, CompareData { oracle, rows }, |d| {
        let mut t = Table::new(vec!["method", "branch", "eigenvalue", "oracle_eigenvalue", "abs_diff", "coeff_max_error"]);
        for r in &d.rows {
            t.push(vec![
                r.method.to_string(),
                r.branch.map(|b| b.to_string()).unwrap_or_default(),
                num(r.eigenvalue),
                num(r.oracle_eigenvalue),
                num(r.abs_diff),
                opt_num(r.coeff_max_error),
            ]);
        }
        t
    })
}

#[derive(Debug, Serialize)]
pub struct VerifyData {
    pub checks: Vec<CheckRecord>,
    pub failed: usize,
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<()> {
    if let Some(only) = &cfg.only {
        if let Some(bad) = only.iter().find(|o| !CHECK_NAMES.contains(&o.as_str())) {
            return Err(EcsError::Config(format!("unknown check '{bad}'; known: {}", CHECK_NAMES.join(", "))));
        }
    }
    if let Some(nn) = cfg.n_filter {
        if !(2..=4).contains(&nn) {
            return Err(EcsError::Config(format!("--N must be between 2 and 4, got {nn}")));
        }
    }
    let suite = SuiteConfig { only: cfg.only.clone(), n_particles: cfg.n_filter, seed: cfg.seed, nodes: Some(cfg.nodes) };
    let checks = run_suite(&suite);
    let failed: Vec<String> = failures(&checks).iter().map(|c| c.name.clone()).collect();
    emit("verify", cfg, VerifyData { checks, failed: failed.len() }, |d| {
        let mut t = Table::new(vec!["name", "tag", "residual", "tolerance", "passed", "asserted", "samples", "note"]);
        for c in &d.checks {
            t.push(vec![
                c.name.clone(),
                c.tag.clone(),
                num(c.residual),
                num(c.tolerance),
                c.passed.to_string(),
                c.asserted.to_string(),
                c.samples.to_string(),
                c.note.clone().unwrap_or_default(),
            ]);
        }
        t
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(EcsError::CheckFailed(failed.join(", ")))
    }
}

#[derive(Debug, Serialize)]
pub struct QRow {
    pub q: f64,
    pub eigenvalue: f64,
    pub eta_terms: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct SlopeRow {
    pub m: usize,
    /// least-squares slope of log|η_m| against log q
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Serialize)]
pub struct QSeriesData {
    pub rows: Vec<QRow>,
    pub slopes: Vec<SlopeRow>,
}

/// Least-squares slope of log|y| against log x over x > 0 and y ≠ 0.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<(f64, usize)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && y.abs() > 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some((sxy / sxx, pts.len()))
}

/// η-graded terms of the explicit series over the q grid, expanded at the
/// a = 0 constants unless a mode is given.
pub fn qseries_data(cfg: &RunConfig) -> Result<QSeriesData> {
    let n = cfg.target();
    let policy = cfg.policy()?;
    let mut local = cfg.clone();
    if local.delta_mode == DeltaChoice::Auto {
        local.delta_mode = if n.len() == 2 { DeltaChoice::N2 } else { DeltaChoice::Exhaustive };
    }
    let mut rows = Vec::new();
    for &q in &cfg.q_grid {
        let params = ModelParams::new(n.len(), cfg.lambda.value, q)?;
        if let Some(err) = resonance_error(&n, &params, cfg.shell_radius) {
            return Err(err);
        }
        let c = resolve_constants(&local, &n, &params, &policy)?;
        let r = explicit_solve(&n, &params, &policy, &c, cfg.eta_order)?;
        rows.push(QRow { q, eigenvalue: r.eigenvalue, eta_terms: r.eta_terms });
    }
    let slopes = (1..=cfg.eta_order)
        .map(|m| {
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.q, r.eta_terms.get(m - 1).copied().unwrap_or(0.0))).collect();
            let fit = log_log_slope(&pts);
            SlopeRow { m, slope: fit.map(|f| f.0), points: fit.map(|f| f.1).unwrap_or(0) }
        })
        .collect();
    Ok(QSeriesData { rows, slopes })
}

pub fn cmd_qseries(cfg: &RunConfig) -> Result<()> {
    let data = qseries_data(cfg)?;
    emit("qseries", cfg, data, |d| {
        let mut header = vec!["q".to_string(), "eigenvalue".to_string()];
        header.extend((1..=cfg.eta_order).map(|m| format!("eta_{m}")));
        let mut t = Table::new(header);
        for r in &d.rows {
            let mut row = vec![num(r.q), num(r.eigenvalue)];
            row.extend((0..cfg.eta_order).map(|k| num(r.eta_terms.get(k).copied().unwrap_or(0.0))));
            t.push(row);
        }
        let mut row = vec!["slope".to_string(), String::new()];
        row.extend(d.slopes.iter().map(|s| opt_num(s.slope)));
        t.push(row);
        t
    })
}
