//! Eigenvalue and eigenvector algorithms for the lattice problem
//! [E₀(m) - E] α(m) = γ (Sα)(m): perturbative recursion, implicit fixed
//! point, explicit Lagrange series and the degenerate variant.

pub mod degenerate;
pub mod explicit;
pub mod implicit;
pub mod perturbative;
pub mod series;

pub use degenerate::degenerate_solve;
pub use explicit::explicit_solve;
pub use implicit::implicit_solve;
pub use perturbative::{perturbative_solve, PerturbativeSolution};
pub use series::{g_series, phi_series, PhiEvaluation, SeriesContext};

use crate::error::{EcsError, Result};
use crate::lattice::{bound_b, bound_kc, converges_gate, CoefficientMap, HypothesisConstants, LatticeVector, ModelParams};
use serde::{Deserialize, Serialize};

/// Free parameter b of the bound B(b); b = 0 gives the smallest B.
pub const GATE_B_PARAM: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub s_max: usize,
    pub nu_cutoff: i64,
    pub shell_radius: i64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { s_max: 8, nu_cutoff: 8, shell_radius: 12 }
    }
}

impl TruncationPolicy {
    pub fn new(s_max: usize, nu_cutoff: i64, shell_radius: i64) -> Result<Self> {
        let p = Self { s_max, nu_cutoff, shell_radius };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_max < 1 || self.nu_cutoff < 1 || self.shell_radius < 1 {
            return Err(EcsError::Config(format!(
                "truncation parameters must be ≥ 1, got s_max={}, nu_cutoff={}, shell_radius={}",
                self.s_max, self.nu_cutoff, self.shell_radius
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Perturbative,
    Implicit,
    Explicit,
    Degenerate,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Perturbative => "perturbative",
            Method::Implicit => "implicit",
            Method::Explicit => "explicit",
            Method::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Convergence gate B < Δ - |a| and the enclosure of E - E₀ - a.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub b_param: f64,
    pub b: f64,
    pub gate_passed: bool,
    /// radius of the enclosure around E₀ + a, present when the gate passes
    pub enclosure: Option<f64>,
    pub enclosure_holds: Option<bool>,
    /// |α(m)| bound checked over the computed coefficients
    pub alpha_bound_holds: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub last_step: f64,
    pub damped: bool,
    /// γ^s E^{(s)} (perturbative) or the truncation tail estimate terms
    pub order_terms: Vec<f64>,
    pub tail_estimate: f64,
    /// weight of shifts dropped at the shell boundary
    pub escaped_weight: f64,
    pub non_partition: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateInfo {
    pub resonance_set: Vec<LatticeVector>,
    /// mixing vector c over the resonance set
    pub mixing: Vec<f64>,
    pub branch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub method: Method,
    pub base: LatticeVector,
    pub e0: f64,
    pub eigenvalue: f64,
    pub eta_terms: Vec<f64>,
    pub coefficients: CoefficientMap,
    pub constants: Option<HypothesisConstants>,
    pub gate: Option<GateReport>,
    pub policy: TruncationPolicy,
    pub degenerate: Option<DegenerateInfo>,
    pub diagnostics: Diagnostics,
}

/// Enclosure radius (Δ - B + |a| - sqrt((Δ - B - |a|)² - 4B²))/2, when real.
pub fn enclosure_radius(b: f64, constants: &HypothesisConstants) -> Option<f64> {
    let a = constants.a.abs();
    let d = constants.delta;
    let disc = (d - b - a).powi(2) - 4.0 * b * b;
    if disc < 0.0 || d - b - a <= 0.0 {
        return None;
    }
    Some((d - b + a - disc.sqrt()) / 2.0)
}

/// Gate report for a computed shift Ẽ = E - E₀ and coefficient map.
pub fn gate_report(
    params: &ModelParams,
    constants: &HypothesisConstants,
    shift: f64,
    coefficients: Option<&CoefficientMap>,
) -> GateReport {
    let b = bound_b(params, GATE_B_PARAM);
    let passed = converges_gate(b, constants);
    let enclosure = if passed { enclosure_radius(b, constants) } else { None };
    let slack = 1e-12 * shift.abs().max(1.0);
    let enclosure_holds = enclosure.map(|r| (shift - constants.a).abs() <= r + slack);
    let alpha_bound_holds = match (passed, coefficients) {
        (true, Some(c)) => alpha_bound_check(params, constants, b, c),
        _ => None,
    };
    GateReport { b_param: GATE_B_PARAM, b, gate_passed: passed, enclosure, enclosure_holds, alpha_bound_holds }
}

/// |α(m)| ≤ δ(m,n) + q^{Σ_j K j (m_j - n_j)} 2B/(Δ - B - |a| + sqrt((Δ - B - |a|)² - 4B²)).
fn alpha_bound_check(params: &ModelParams, constants: &HypothesisConstants, b: f64, alpha: &CoefficientMap) -> Option<bool> {
    let q = params.q();
    if q == 0.0 {
        return None;
    }
    let kc = bound_kc(params, GATE_B_PARAM.max(1e-12)).ok()?;
    let a = constants.a.abs();
    let d = constants.delta;
    let disc = (d - b - a).powi(2) - 4.0 * b * b;
    if disc < 0.0 {
        return None;
    }
    let scale = 2.0 * b / (d - b - a + disc.sqrt());
    let ok = alpha.entries.iter().all(|(rel, &v)| {
        let weight: f64 = rel.iter().enumerate().map(|(j, &x)| (j + 1) as f64 * x as f64).sum();
        let delta = if rel.iter().all(|&x| x == 0) { 1.0 } else { 0.0 };
        let bound = delta + q.powf(kc.k * weight) * scale;
        v.abs() <= bound * (1.0 + 1e-9) + 1e-14
    });
    Some(ok)
}

/// Warning text for a non-partition base vector.
pub(crate) fn partition_flag(n: &LatticeVector, diag: &mut Diagnostics) {
    if !n.is_partition() {
        diag.non_partition = true;
        diag.warnings.push(format!("n = {n} is not a partition; the eigenfunction may vanish or be dependent"));
    }
}
