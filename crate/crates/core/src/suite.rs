//! Identity and bound checks with fixed seeds, each reported as one record.
//! Conjecture reports are informational and never count as failures.

use crate::eigenfunction::{f_n_bound, verify_lemma1, verify_prop1, ContourGrid, PhasePoint, QuadratureConfig};
use crate::elliptic::{c0, capital_theta, f_aux, phi_fun, potential_v, s_coeff, theta, Nome};
use crate::error::Result;
use crate::lattice::{bound_b, hypothesis_constants, relative_shell, DeltaMode, LatticeVector, ModelParams};
use crate::numeric::richardson_second_derivative;
use crate::oracle::{k_s_bound, k_s_conjecture_report, k_s_enumerate};
use crate::solver::{SeriesContext, TruncationPolicy};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub tag: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// false for report-only checks
    pub asserted: bool,
    pub samples: usize,
    pub note: Option<String>,
}

impl CheckRecord {
    fn new(name: &str, tag: &str, residual: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            tag: tag.into(),
            residual,
            tolerance,
            passed: residual < tolerance,
            asserted: true,
            samples,
            note: None,
        }
    }

    fn failed(name: &str, tag: &str, tolerance: f64, msg: String) -> Self {
        Self {
            name: name.into(),
            tag: tag.into(),
            residual: f64::NAN,
            tolerance,
            passed: false,
            asserted: true,
            samples: 0,
            note: Some(msg),
        }
    }

    fn report(mut self) -> Self {
        self.asserted = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// restrict to these check names
    pub only: Option<Vec<String>>,
    /// restrict N-dependent checks to one particle number
    pub n_particles: Option<usize>,
    pub seed: u64,
    /// quadrature nodes per contour for the kernel checks
    pub nodes: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { only: None, n_particles: None, seed: 20_240_917, nodes: None }
    }
}

fn quadrature(params: &ModelParams, nodes: Option<usize>) -> QuadratureConfig {
    let q = QuadratureConfig::for_params(params);
    match nodes {
        Some(k) => q.with_nodes(k),
        None => q,
    }
}

pub const CHECK_NAMES: [&str; 13] = [
    "lemma1",
    "rel",
    "prop1",
    "veps",
    "v-log-theta",
    "c0-forms",
    "theta-bound",
    "phi-bound",
    "g-bound",
    "ks-bound",
    "fn-bound",
    "ks-conjecture",
    "phi-conjecture",
];

/// Runs the selected checks in a fixed order.
pub fn run_suite(config: &SuiteConfig) -> Vec<CheckRecord> {
    let wanted = |name: &str| config.only.as_ref().is_none_or(|o| o.iter().any(|s| s == name));
    let ns: Vec<usize> = match config.n_particles {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let mut out = Vec::new();
    for (i, name) in CHECK_NAMES.iter().enumerate() {
        if !wanted(name) {
            continue;
        }
        let seed = config.seed.wrapping_add(i as u64 * 7919);
        let rec = match *name {
            "lemma1" => check_lemma1(&ns, seed, config.nodes),
            "rel" => check_rel(seed),
            "prop1" => check_prop1(seed, config.nodes),
            "veps" => check_veps(seed),
            "v-log-theta" => check_v_log_theta(seed),
            "c0-forms" => check_c0_forms(),
            "theta-bound" => check_theta_bound(seed),
            "phi-bound" => check_phi_bound(seed),
            "g-bound" => check_g_bound(seed),
            "ks-bound" => check_ks_bound(&ns),
            "fn-bound" => check_fn_bound(seed),
            "ks-conjecture" => check_ks_conjecture(&ns),
            "phi-conjecture" => check_phi_conjecture(seed),
            _ => unreachable!(),
        };
        out.push(rec);
    }
    out
}

fn wrap(name: &str, tag: &str, tol: f64, body: impl FnOnce() -> Result<CheckRecord>) -> CheckRecord {
    body().unwrap_or_else(|e| CheckRecord::failed(name, tag, tol, e.to_string()))
}

/// Sorted real coordinates in (-π, π) with pairwise gaps ≥ `gap`.
pub fn random_positions(rng: &mut StdRng, n: usize, gap: f64) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-PI + 0.1..PI - 0.1)).collect();
        x.sort_by(|a, b| a.total_cmp(b));
        let ok = x.windows(2).all(|w| w[1] - w[0] >= gap) && (x[0] + 2.0 * PI - x[n - 1]) >= gap;
        if ok {
            return x;
        }
    }
}

fn check_lemma1(ns: &[usize], seed: u64, nodes: Option<usize>) -> CheckRecord {
    let (name, tag, tol) = ("lemma1", "kernel identity H(x)F = H(y)F", 1e-6);
    wrap(name, tag, tol, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for &nn in ns {
            let (lam, q) = if nn == 2 { (1.4, 0.2) } else { (2.0, 0.1) };
            let params = ModelParams::new(nn, lam, q)?;
            let quad = quadrature(&params, nodes);
            let cfg = params.elliptic();
            let mut done = 0;
            while done < 10 {
                let x = random_positions(&mut rng, nn, 0.4);
                let y: Vec<f64> = (0..nn).map(|_| rng.gen_range(-PI..PI)).collect();
                let yi: Vec<f64> = (0..nn).map(|_| rng.gen_range(-0.4..-0.1)).collect();
                let far = x.iter().all(|&xj| {
                    y.iter().zip(&yi).all(|(&yr, &yim)| theta(Complex64::new(xj - yr, -yim), &params.nome, &cfg).norm() > 0.05)
                });
                if !far {
                    continue;
                }
                let r = verify_lemma1(&PhasePoint::real(x), &PhasePoint::with_offsets(y, yi), &params, &quad)?;
                worst = worst.max(r);
                done += 1;
                count += 1;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, count))
    })
}

fn check_rel(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("rel", "three-term functional identity of φ and f", 1e-10);
    wrap(name, tag, tol, || {
        let nome = Nome::new(0.25)?;
        let cfg = crate::elliptic::EllipticConfig::for_nome(&nome);
        let mut rng = StdRng::seed_from_u64(seed);
        let im_max = nome.beta() / 4.0;
        let mut worst: f64 = 0.0;
        let mut count = 0;
        while count < 100 {
            let x = Complex64::new(rng.gen_range(-PI..PI), rng.gen_range(-im_max..im_max));
            let y = Complex64::new(rng.gen_range(-PI..PI), rng.gen_range(-im_max..im_max));
            let z = -x - y;
            if [x, y, z].iter().any(|w| theta(*w, &nome, &cfg).norm() < 0.1) {
                continue;
            }
            let (px, py, pz) = (phi_fun(x, &nome, &cfg)?, phi_fun(y, &nome, &cfg)?, phi_fun(z, &nome, &cfg)?);
            let (fx, fy, fz) = (f_aux(x, &nome, &cfg)?, f_aux(y, &nome, &cfg)?, f_aux(z, &nome, &cfg)?);
            let lhs = px * py + px * pz + py * pz;
            let rhs = fx + fy + fz;
            let scale = [lhs.norm(), fx.norm(), fy.norm(), fz.norm(), 1.0].into_iter().fold(0.0, f64::max);
            worst = worst.max((lhs - rhs).norm() / scale);
            count += 1;
        }
        Ok(CheckRecord::new(name, tag, worst, tol, count))
    })
}

fn check_prop1(seed: u64, nodes: Option<usize>) -> CheckRecord {
    let (name, tag, tol) = ("prop1", "action of H on F̂_n through S_ν shifts", 1e-5);
    wrap(name, tag, tol, || {
        let params = ModelParams::new(2, 2.0, 0.1)?;
        let quad = quadrature(&params, nodes);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for n in [vec![0, 0], vec![1, 0]] {
            for _ in 0..3 {
                let x = random_positions(&mut rng, 2, 0.5);
                let r = verify_prop1(&LatticeVector::new(n.clone()), &PhasePoint::real(x), &params, &quad, 8)?;
                worst = worst.max(r);
                count += 1;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, count))
    })
}

/// V(r) + Σ_ν S_ν ξ^{-ν} with ξ = e^{ir}, summed until the terms drop below 1e-18.
pub fn veps_residual(r: Complex64, nome: &Nome) -> Result<f64> {
    let cfg = crate::elliptic::EllipticConfig::for_nome(nome);
    let v = potential_v(r, nome, &cfg)?;
    let xi = (Complex64::i() * r).exp();
    let inv = 1.0 / xi;
    let mut acc = v;
    let mut pos = Complex64::new(1.0, 0.0);
    let mut neg = Complex64::new(1.0, 0.0);
    for nu in 1..100_000i64 {
        pos *= inv;
        neg *= xi;
        let tp = pos * s_coeff(nu, nome);
        let tn = neg * s_coeff(-nu, nome);
        acc += tp + tn;
        if nu > 10 && tp.norm() < 1e-18 && tn.norm() < 1e-18 {
            break;
        }
    }
    Ok(acc.norm() / v.norm().max(1.0))
}

fn check_veps(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("veps", "Fourier series of V in the strip", 1e-10);
    wrap(name, tag, tol, || {
        let nome = Nome::new(0.2)?;
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            // 1 < |e^{ir}| < q^{-2} means -β < Im r < 0
            let r = Complex64::new(rng.gen_range(-PI..PI), -rng.gen_range(0.2..nome.beta() - 0.2));
            worst = worst.max(veps_residual(r, &nome)?);
        }
        Ok(CheckRecord::new(name, tag, worst, tol, 20))
    })
}

fn check_v_log_theta(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("v-log-theta", "V as minus the second log-derivative of θ", 1e-8);
    wrap(name, tag, tol, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for q in [0.0, 0.1, 0.3] {
            let nome = Nome::new(q)?;
            let cfg = crate::elliptic::EllipticConfig::for_nome(&nome);
            for _ in 0..20 {
                let r = rng.gen_range(0.3..2.0 * PI - 0.3);
                let log_theta = |t: f64| theta(Complex64::new(r + t, 0.0), &nome, &cfg).ln();
                let d2 = richardson_second_derivative(log_theta, 1e-2, 3, log_theta(0.0));
                let v = potential_v(Complex64::new(r, 0.0), &nome, &cfg)?;
                worst = worst.max((v + d2).norm() / v.norm());
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, 60))
    })
}

fn check_c0_forms() -> CheckRecord {
    let (name, tag, tol) = ("c0-forms", "sinh and q-series forms of c₀", 1e-12);
    wrap(name, tag, tol, || {
        let mut worst: f64 = 0.0;
        for q in [0.05, 0.1, 0.3, 0.5] {
            let nome = Nome::new(q)?;
            let cfg = crate::elliptic::EllipticConfig::for_nome(&nome);
            let beta = nome.beta();
            let mut sinh_form = 1.0 / 12.0;
            for m in 1..200 {
                let s = (beta * m as f64 / 2.0).sinh();
                sinh_form -= 1.0 / (2.0 * s * s);
            }
            worst = worst.max((sinh_form - c0(&nome, &cfg)).abs());
        }
        Ok(CheckRecord::new(name, tag, worst, tol, 4))
    })
}

fn check_theta_bound(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("theta-bound", "Θ(|z|) ≤ |Θ(z)| ≤ Θ(-|z|) in the annulus", 1e-13);
    wrap(name, tag, tol, || {
        let nome = Nome::new(0.2)?;
        let cfg = crate::elliptic::EllipticConfig::for_nome(&nome);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let rho = rng.gen_range(nome.q2() * 1.0001..0.9999);
            let z = Complex64::from_polar(rho, rng.gen_range(-PI..PI));
            let m = capital_theta(z, &nome, &cfg)?.norm();
            let lo = capital_theta(Complex64::new(rho, 0.0), &nome, &cfg)?.re;
            let hi = capital_theta(Complex64::new(-rho, 0.0), &nome, &cfg)?.re;
            let violation = ((lo - m).max(m - hi).max(0.0)) / hi;
            worst = worst.max(violation);
            if lo <= 0.0 {
                worst = f64::INFINITY;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, 50))
    })
}

/// Sample points z = a + ρe^{iϑ} with ρ < 0.9(Δ - B).
fn region_samples(rng: &mut StdRng, a: f64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|_| Complex64::new(a, 0.0) + Complex64::from_polar(rng.gen_range(0.0..0.9 * radius), rng.gen_range(-PI..PI)))
        .collect()
}

fn bound_setups() -> Result<Vec<(LatticeVector, ModelParams)>> {
    let params = ModelParams::new(2, 2.5, 0.05)?;
    Ok(vec![(LatticeVector::new(vec![0, 0]), params), (LatticeVector::new(vec![1, 0]), params)])
}

fn check_phi_bound(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("phi-bound", "|Φ_n(z)| against B²/(Δ - B - |z - a|)", 1.0);
    wrap(name, tag, tol, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (n, params) in bound_setups()? {
            let c = hypothesis_constants(&n, &params, DeltaMode::N2ClosedForm, 0)?;
            let b = bound_b(&params, 0.0);
            let ctx = SeriesContext::new(&n, &params, &TruncationPolicy { s_max: 16, nu_cutoff: 8, shell_radius: 12 })?;
            for z in region_samples(&mut rng, c.a, c.delta - b, 20) {
                let phi = ctx.phi_value(z)?;
                let bound = b * b / (c.delta - b - (z - c.a).norm());
                worst = worst.max(phi.norm() / bound);
                count += 1;
            }
        }
        let mut rec = CheckRecord::new(name, tag, worst, tol, count);
        rec.note = Some("residual is the largest ratio |Φ|/bound".into());
        Ok(rec)
    })
}

fn check_g_bound(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("g-bound", "|G_n(z; m)| against δ + q^{KΣj(m_j-n_j)} B/(Δ - B - |z - a|)", 1.0);
    wrap(name, tag, tol, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (n, params) in bound_setups()? {
            let c = hypothesis_constants(&n, &params, DeltaMode::N2ClosedForm, 0)?;
            let b = bound_b(&params, 0.0);
            let k = 2.0 / params.n_particles as f64;
            let ctx = SeriesContext::new(&n, &params, &TruncationPolicy { s_max: 16, nu_cutoff: 8, shell_radius: 12 })?;
            let origin = ctx.origin();
            for z in region_samples(&mut rng, c.a, c.delta - b, 20) {
                let walk = ctx.walk(origin, z, 0, true, &[origin])?;
                let room = c.delta - b - (z - c.a).norm();
                for (i, g) in walk.g.iter().enumerate() {
                    let rel = &ctx.shell.points[i];
                    let weight: f64 = rel.iter().enumerate().map(|(j, &v)| (j + 1) as f64 * v as f64).sum();
                    let delta = if i == origin { 1.0 } else { 0.0 };
                    let bound = delta + params.q().powf(k * weight) * b / room;
                    worst = worst.max(g[0].norm() / bound);
                }
                count += 1;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, count))
    })
}

fn check_ks_bound(ns: &[usize]) -> CheckRecord {
    let (name, tag, tol) = ("ks-bound", "K_s(m) ≤ q^{2Σjm_j/(N+b)} B^s by exact enumeration", 1.0);
    wrap(name, tag, tol, || {
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for &nn in ns {
            for q in [0.1, 0.3] {
                let params = ModelParams::new(nn, 2.5, q)?;
                let cutoff = if nn == 2 { 24 } else { 12 };
                let ms: Vec<Vec<i64>> = relative_shell(nn, 2);
                for s in 1..=4usize {
                    for m in &ms {
                        let ks = k_s_enumerate(s, m, &params, cutoff)?;
                        for b in [0.5, 1.0] {
                            let bound = k_s_bound(s, m, &params, b);
                            worst = worst.max((ks.value + ks.tail_bound) / bound);
                            count += 1;
                        }
                    }
                }
            }
        }
        let mut rec = CheckRecord::new(name, tag, worst, tol, count);
        rec.note = Some("residual is the largest ratio (K_s + cutoff tail)/bound".into());
        Ok(rec)
    })
}

fn check_fn_bound(seed: u64) -> CheckRecord {
    let (name, tag, tol) = ("fn-bound", "|f_n(z)| < C q^{Σ(K̃|n_j| - K j n_j)}", 1.0);
    wrap(name, tag, tol, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let params = ModelParams::new(2, 1.5, 0.2)?;
        let quad = QuadratureConfig::for_params(&params);
        let grid = ContourGrid::new(&params, &quad)?;
        let ns: Vec<Vec<i64>> = (-3..=3).flat_map(|a| (-3..=3).map(move |b| vec![a, b])).collect();
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for _ in 0..3 {
            let b_param = rng.gen_range(0.2..2.0);
            let z: Vec<Complex64> = (0..2).map(|_| Complex64::from_polar(1.0, rng.gen_range(-PI..PI))).collect();
            let values = grid.laurent_table(&z, &ns)?;
            for (n, v) in ns.iter().zip(values) {
                let bound = f_n_bound(&LatticeVector::new(n.clone()), &params, b_param)?;
                worst = worst.max(v.norm() / bound);
                count += 1;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, tol, count))
    })
}

fn check_ks_conjecture(ns: &[usize]) -> CheckRecord {
    let (name, tag) = ("ks-conjecture", "K_s(0) against the conjectured B̃^s q^{2⌈s/N⌉} (report)");
    wrap(name, tag, 1.0, || {
        let mut worst: f64 = 0.0;
        let mut rows = Vec::new();
        for &nn in ns {
            for q in [0.1, 0.3] {
                let params = ModelParams::new(nn, 2.5, q)?;
                for row in k_s_conjecture_report(2..=4, &params, if nn == 2 { 24 } else { 12 })? {
                    worst = worst.max(row.ratio);
                    rows.push(format!("N={nn} q={q} s={} ratio={:.3e}", row.s, row.ratio));
                }
            }
        }
        let mut rec = CheckRecord::new(name, tag, worst, 1.0, rows.len()).report();
        rec.note = Some(rows.join("; "));
        Ok(rec)
    })
}

fn check_phi_conjecture(seed: u64) -> CheckRecord {
    let (name, tag) = ("phi-conjecture", "|Φ_n(z)| against the conjectured O(q²) estimate (report)");
    wrap(name, tag, 1.0, || {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut count = 0;
        for (n, params) in bound_setups()? {
            let c = hypothesis_constants(&n, &params, DeltaMode::N2ClosedForm, 0)?;
            let nn = params.n_particles as i32;
            let q = params.q();
            let bt = (nn * (nn - 1)) as f64 * params.gamma.abs() / (1.0 - q.powf(2.0 / nn as f64)).powi(3);
            let b = bound_b(&params, 0.0);
            let ctx = SeriesContext::new(&n, &params, &TruncationPolicy { s_max: 16, nu_cutoff: 8, shell_radius: 12 })?;
            for z in region_samples(&mut rng, c.a, c.delta - b, 20) {
                let d = c.delta - (z - c.a).norm();
                let denom = d.powi(nn) - bt.powi(nn) * q * q;
                if denom <= 0.0 {
                    continue;
                }
                let inner: f64 = (1..nn).map(|k| bt.powi(nn - k) * d.powi(k)).sum();
                let estimate = bt * q * q * (d / denom * inner - 1.0);
                if estimate <= 0.0 {
                    continue;
                }
                worst = worst.max(ctx.phi_value(z)?.norm() / estimate);
                count += 1;
            }
        }
        Ok(CheckRecord::new(name, tag, worst, 1.0, count).report())
    })
}

/// Asserted checks that failed.
pub fn failures(records: &[CheckRecord]) -> Vec<&CheckRecord> {
    records.iter().filter(|r| r.asserted && !r.passed).collect()
}
