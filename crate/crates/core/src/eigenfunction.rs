//! Position-space objects: f_n by contour quadrature, Ψ₀, F̂_n = f_n Ψ₀,
//! the kernel F(x; y), assembled eigenfunctions and their residuals.
//!
//! All contour integrals share one tensor grid ξ_j = e^{ε_j + iφ_j} with
//! trapezoidal nodes; the z-independent factors Θ(ξ_j/ξ_k)^λ are tabulated
//! once per grid, and any linear combination Σ c_m f_m(z) is a single
//! weighted mean over the grid.

use crate::elliptic::{capital_theta_log, potential_v, s_coeff, theta, EllipticConfig, Nome, POLE_GUARD};
use crate::error::{EcsError, Result};
use crate::lattice::{bound_b, bound_kc, free_energy, CoefficientMap, HypothesisConstants, LatticeVector, ModelParams};
use crate::numeric::{principal_pow, richardson_second_derivative};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Particle coordinates, optionally with imaginary offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub imag: Option<Vec<f64>>,
}

impl PhasePoint {
    pub fn real(x: Vec<f64>) -> Self {
        Self { x, imag: None }
    }

    pub fn with_offsets(x: Vec<f64>, imag: Vec<f64>) -> Self {
        Self { x, imag: Some(imag) }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn coords(&self) -> Vec<Complex64> {
        match &self.imag {
            None => self.x.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            Some(im) => self.x.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub nodes_per_contour: usize,
    pub epsilons: Vec<f64>,
    pub fd_step: f64,
    pub fd_levels: usize,
}

impl QuadratureConfig {
    /// ε_j = βj/(N+1) (ε_j = j/2 at q = 0), 64 nodes, step 1e-3, 3 levels.
    pub fn for_params(params: &ModelParams) -> Self {
        let nn = params.n_particles;
        let beta = params.nome.beta();
        let epsilons = (1..=nn)
            .map(|j| if beta.is_finite() { beta * j as f64 / (nn + 1) as f64 } else { 0.5 * j as f64 })
            .collect();
        Self { nodes_per_contour: 64, epsilons, fd_step: 1e-3, fd_levels: 3 }
    }

    pub fn with_nodes(mut self, nodes: usize) -> Self {
        self.nodes_per_contour = nodes;
        self
    }

    pub fn scaled_epsilons(mut self, factor: f64) -> Self {
        for e in self.epsilons.iter_mut() {
            *e *= factor;
        }
        self
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        let p = self.nodes_per_contour;
        if p < 64 || !p.is_power_of_two() {
            return Err(EcsError::Config(format!("nodes per contour must be a power of two ≥ 64, got {p}")));
        }
        if self.epsilons.len() != params.n_particles {
            return Err(EcsError::Config(format!(
                "need {} contour radii, got {}",
                params.n_particles,
                self.epsilons.len()
            )));
        }
        let beta = params.nome.beta();
        let mut prev = 0.0;
        for &e in &self.epsilons {
            if !(e > prev && e < beta) {
                return Err(EcsError::Quadrature(format!(
                    "contour radii must satisfy 0 < ε₁ < … < ε_N < β = {beta}, got {:?}",
                    self.epsilons
                )));
            }
            prev = e;
        }
        if !(self.fd_step > 0.0) || self.fd_levels < 1 {
            return Err(EcsError::Config("finite-difference step must be positive with at least one level".into()));
        }
        Ok(())
    }
}

/// Tensor grid on the contours C_j with the z-independent factors.
#[derive(Debug, Clone)]
pub struct ContourGrid {
    params: ModelParams,
    cfg: EllipticConfig,
    nodes: usize,
    epsilons: Vec<f64>,
    /// ξ_j at node a
    xi: Vec<Vec<Complex64>>,
    /// per pair (j < k), Θ(ξ_j/ξ_k)^λ indexed by (a_j - a_k) mod P
    pair_tables: Vec<((usize, usize), Vec<Complex64>)>,
}

impl ContourGrid {
    pub fn new(params: &ModelParams, quad: &QuadratureConfig) -> Result<Self> {
        quad.validate(params)?;
        let nn = params.n_particles;
        if nn > 4 {
            return Err(EcsError::Precondition(format!("contour quadrature supports N ≤ 4, got {nn}")));
        }
        let p = quad.nodes_per_contour;
        let cfg = params.elliptic();
        let phase = |a: usize| Complex64::from_polar(1.0, 2.0 * PI * a as f64 / p as f64);
        let xi = quad
            .epsilons
            .iter()
            .map(|&e| (0..p).map(|a| phase(a) * e.exp()).collect())
            .collect();
        let mut pair_tables = Vec::new();
        for j in 0..nn {
            for k in (j + 1)..nn {
                let radius = (quad.epsilons[j] - quad.epsilons[k]).exp();
                let table = (0..p)
                    .map(|d| {
                        let w = phase(d) * radius;
                        capital_theta_log(w, &params.nome, &cfg).map(|l| (l * params.lambda).exp())
                    })
                    .collect::<Result<Vec<_>>>()?;
                pair_tables.push(((j, k), table));
            }
        }
        Ok(Self { params: *params, cfg, nodes: p, epsilons: quad.epsilons.clone(), xi, pair_tables })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn size(&self) -> usize {
        self.nodes.pow(self.params.n_particles as u32)
    }

    /// ∏_j Θ(z_j/ξ_k)^{-λ} for every k and node.
    fn z_factors(&self, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        let nn = self.params.n_particles;
        if z.len() != nn {
            return Err(EcsError::Precondition(format!("z has {} components, N = {}", z.len(), nn)));
        }
        let q2 = self.params.nome.q2();
        for &zj in z {
            for &e in &self.epsilons {
                let r = zj.norm() * (-e).exp();
                if !(r < 1.0 && r > q2) {
                    return Err(EcsError::Quadrature(format!(
                        "|z_j/ξ_k| = {r} leaves the annulus (q², 1) of the contours"
                    )));
                }
            }
        }
        let mut out = Vec::with_capacity(nn);
        for k in 0..nn {
            let mut col = Vec::with_capacity(self.nodes);
            for a in 0..self.nodes {
                let mut log_sum = Complex64::new(0.0, 0.0);
                for &zj in z {
                    log_sum += capital_theta_log(zj / self.xi[k][a], &self.params.nome, &self.cfg)?;
                }
                col.push((-log_sum * self.params.lambda).exp());
            }
            out.push(col);
        }
        Ok(out)
    }

    /// Grid weights for Σ_m c_m ξ^m.
    pub fn monomial_weights<'a, I>(&self, terms: I) -> Vec<Complex64>
    where
        I: IntoIterator<Item = (&'a [i64], Complex64)>,
    {
        let nn = self.params.n_particles;
        let p = self.nodes;
        let mut weights = vec![Complex64::new(0.0, 0.0); self.size()];
        for (m, c) in terms {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let per_axis: Vec<Vec<Complex64>> =
                (0..nn).map(|j| self.xi[j].iter().map(|x| x.powi(m[j] as i32)).collect()).collect();
            let mut idx = vec![0usize; nn];
            for w in weights.iter_mut() {
                let mut v = c;
                for j in 0..nn {
                    v *= per_axis[j][idx[j]];
                }
                *w += v;
                advance(&mut idx, p);
            }
        }
        weights
    }

    /// mean over the grid of g_z(ξ) w(ξ), i.e. Σ_m c_m f_m(z).
    pub fn integrate(&self, z: &[Complex64], weights: &[Complex64]) -> Result<Complex64> {
        if weights.len() != self.size() {
            return Err(EcsError::Precondition("weight table does not match the grid".into()));
        }
        let zf = self.z_factors(z)?;
        let nn = self.params.n_particles;
        let p = self.nodes;
        let mut idx = vec![0usize; nn];
        let mut acc = Complex64::new(0.0, 0.0);
        for &w in weights {
            if w != Complex64::new(0.0, 0.0) {
                let mut v = w;
                for ((j, k), table) in &self.pair_tables {
                    v *= table[(idx[*j] + p - idx[*k]) % p];
                }
                for (k, col) in zf.iter().enumerate() {
                    v *= col[idx[k]];
                }
                acc += v;
            }
            advance(&mut idx, p);
        }
        Ok(acc / self.size() as f64)
    }

    /// f_n(z) for every requested n from one sampling of the integrand.
    pub fn laurent_table(&self, z: &[Complex64], ns: &[Vec<i64>]) -> Result<Vec<Complex64>> {
        let zf = self.z_factors(z)?;
        let nn = self.params.n_particles;
        let p = self.nodes;
        let mut samples = Vec::with_capacity(self.size());
        let mut idx = vec![0usize; nn];
        for _ in 0..self.size() {
            let mut v = Complex64::new(1.0, 0.0);
            for ((j, k), table) in &self.pair_tables {
                v *= table[(idx[*j] + p - idx[*k]) % p];
            }
            for (k, col) in zf.iter().enumerate() {
                v *= col[idx[k]];
            }
            samples.push(v);
            advance(&mut idx, p);
        }
        let mut out = Vec::with_capacity(ns.len());
        for n in ns {
            let per_axis: Vec<Vec<Complex64>> =
                (0..nn).map(|j| self.xi[j].iter().map(|x| x.powi(n[j] as i32)).collect()).collect();
            let mut idx = vec![0usize; nn];
            let mut acc = Complex64::new(0.0, 0.0);
            for s in &samples {
                let mut v = *s;
                for j in 0..nn {
                    v *= per_axis[j][idx[j]];
                }
                acc += v;
                advance(&mut idx, p);
            }
            out.push(acc / self.size() as f64);
        }
        Ok(out)
    }
}

fn advance(idx: &mut [usize], p: usize) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < p {
            return;
        }
        idx[i] = 0;
    }
}

fn unit_check(z: &[Complex64]) -> Result<()> {
    for zj in z {
        if (zj.norm() - 1.0).abs() > 1e-12 {
            return Err(EcsError::Quadrature(format!("|z_j| = {} is not 1", zj.norm())));
        }
    }
    Ok(())
}

/// f_n(z) for unit-modulus z.
pub fn f_n(n: &LatticeVector, z: &[Complex64], params: &ModelParams, quad: &QuadratureConfig) -> Result<Complex64> {
    unit_check(z)?;
    let grid = ContourGrid::new(params, quad)?;
    Ok(grid.laurent_table(z, std::slice::from_ref(&n.0))?[0])
}

/// f_n(z) recomputed with doubled nodes and with radii scaled by 1.3 (when
/// still admissible); errors if either differs by more than `rel_tol`.
/// The moved contour sits closer to the outer pole, so it is sampled with
/// the doubled node count.
pub fn f_n_checked(
    n: &LatticeVector,
    z: &[Complex64],
    params: &ModelParams,
    quad: &QuadratureConfig,
    rel_tol: f64,
) -> Result<Complex64> {
    let base = f_n(n, z, params, quad)?;
    let scale = base.norm().max(1e-300);
    let fine = quad.clone().with_nodes(quad.nodes_per_contour * 2);
    let doubled = f_n(n, z, params, &fine)?;
    if (doubled - base).norm() > rel_tol * scale {
        return Err(EcsError::Quadrature(format!(
            "doubling the nodes changes f_n by {:e}",
            (doubled - base).norm() / scale
        )));
    }
    let moved = fine.scaled_epsilons(1.3);
    if moved.validate(params).is_ok() {
        let other = f_n(n, z, params, &moved)?;
        if (other - base).norm() > rel_tol * scale {
            return Err(EcsError::Quadrature(format!(
                "moving the contours changes f_n by {:e}",
                (other - base).norm() / scale
            )));
        }
    }
    Ok(base)
}

/// θ(r)^λ on the principal branch; zero only for integer λ.
fn theta_pow(r: Complex64, params: &ModelParams, cfg: &EllipticConfig) -> Result<Complex64> {
    let t = theta(r, &params.nome, cfg);
    if t.norm() < POLE_GUARD {
        if params.lambda.fract() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Err(EcsError::Domain(format!("θ({r}) vanishes and λ = {} is not an integer", params.lambda)));
    }
    Ok(principal_pow(t, params.lambda))
}

/// Ψ₀(x) = ∏_{j<k} θ(x_k - x_j)^λ.
pub fn psi0(x: &[Complex64], params: &ModelParams) -> Result<Complex64> {
    let cfg = params.elliptic();
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..x.len() {
        for k in (j + 1)..x.len() {
            acc *= theta_pow(x[k] - x[j], params, &cfg)?;
        }
    }
    Ok(acc)
}

fn to_z(x: &[Complex64]) -> Vec<Complex64> {
    x.iter().map(|&v| (Complex64::i() * v).exp()).collect()
}

/// F̂_n(x) = f_n(e^{ix}) Ψ₀(x).
pub fn f_hat(n: &LatticeVector, x: &PhasePoint, params: &ModelParams, quad: &QuadratureConfig) -> Result<Complex64> {
    let coords = x.coords();
    Ok(f_n(n, &to_z(&coords), params, quad)? * psi0(&coords, params)?)
}

/// F(x; y) = ∏_{j<k} θ(x_k - x_j)^λ θ(y_j - y_k)^λ / ∏_{j,k} θ(x_j - y_k)^λ.
pub fn kernel_f(x: &[Complex64], y: &[Complex64], params: &ModelParams) -> Result<Complex64> {
    let cfg = params.elliptic();
    let nn = x.len();
    let mut num = Complex64::new(1.0, 0.0);
    for j in 0..nn {
        for k in (j + 1)..nn {
            num *= theta_pow(x[k] - x[j], params, &cfg)?;
            num *= theta_pow(y[j] - y[k], params, &cfg)?;
        }
    }
    let mut den = Complex64::new(1.0, 0.0);
    for &xj in x {
        for &yk in y {
            let t = theta(xj - yk, &params.nome, &cfg);
            if t.norm() < POLE_GUARD {
                return Err(EcsError::Pole(format!("θ(x_j - y_k) vanishes at {}", xj - yk)));
            }
            den *= principal_pow(t, params.lambda);
        }
    }
    Ok(num / den)
}

/// F'(x; y) = c e^{iPΣ(x_j - y_j)} F(x; y).
pub fn kernel_f_prime(x: &[Complex64], y: &[Complex64], params: &ModelParams, p: f64, c: Complex64) -> Result<Complex64> {
    let shift: Complex64 = x.iter().zip(y).map(|(a, b)| a - b).sum();
    Ok(c * (Complex64::i() * p * shift).exp() * kernel_f(x, y, params)?)
}

/// Σ_j ∂²/∂w_j² of `f` at w by Richardson-extrapolated central differences.
fn laplacian<F>(w: &[Complex64], quad: &QuadratureConfig, mut f: F) -> Result<(Complex64, Complex64)>
where
    F: FnMut(&[Complex64]) -> Result<Complex64>,
{
    let f0 = f(w)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut err: Option<EcsError> = None;
    for j in 0..w.len() {
        let mut shifted = w.to_vec();
        let d = richardson_second_derivative(
            |t| {
                shifted[j] = w[j] + t;
                match f(&shifted) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        Complex64::new(f64::NAN, f64::NAN)
                    }
                }
            },
            quad.fd_step,
            quad.fd_levels,
            f0,
        );
        total += d;
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok((total, f0))
}

/// Relative residual of Σ_j(∂²_{x_j} - ∂²_{y_j})F = γ Σ_{j<k}(V(x_k - x_j) - V(y_j - y_k)) F.
pub fn verify_lemma1(x: &PhasePoint, y: &PhasePoint, params: &ModelParams, quad: &QuadratureConfig) -> Result<f64> {
    let xs = x.coords();
    let ys = y.coords();
    let (lx, f0) = laplacian(&xs, quad, |w| kernel_f(w, &ys, params))?;
    let (ly, _) = laplacian(&ys, quad, |w| kernel_f(&xs, w, params))?;
    let cfg = params.elliptic();
    let mut vsum = Complex64::new(0.0, 0.0);
    let nn = xs.len();
    for j in 0..nn {
        for k in (j + 1)..nn {
            vsum += potential_v(xs[k] - xs[j], &params.nome, &cfg)? - potential_v(ys[j] - ys[k], &params.nome, &cfg)?;
        }
    }
    let rhs = vsum * f0 * params.gamma;
    let lhs = lx - ly;
    let scale = lx.norm().max(ly.norm()).max(rhs.norm()).max(f0.norm());
    Ok((lhs - rhs).norm() / scale)
}

/// H applied to x ↦ Ψ₀(x) Σ c_m f_m(e^{ix}) given its grid weights.
fn apply_h(grid: &ContourGrid, weights: &[Complex64], x: &[Complex64], quad: &QuadratureConfig) -> Result<(Complex64, Complex64)> {
    let params = *grid.params();
    let eval = |w: &[Complex64]| -> Result<Complex64> { Ok(grid.integrate(&to_z(w), weights)? * psi0(w, &params)?) };
    let (lap, f0) = laplacian(x, quad, eval)?;
    let cfg = params.elliptic();
    let mut vsum = Complex64::new(0.0, 0.0);
    for j in 0..x.len() {
        for k in (j + 1)..x.len() {
            vsum += potential_v(x[j] - x[k], &params.nome, &cfg)?;
        }
    }
    Ok((-lap + vsum * f0 * params.gamma, f0))
}

/// Relative residual of H F̂_n = E₀(n) F̂_n - γ Σ_{ν̂} S_ν F̂_{n+ν̂}, |ν| ≤ nu_cutoff,
/// plus the size of the next four |ν| shells as a tail estimate.
pub fn verify_prop1(
    n: &LatticeVector,
    x: &PhasePoint,
    params: &ModelParams,
    quad: &QuadratureConfig,
    nu_cutoff: i64,
) -> Result<f64> {
    let grid = ContourGrid::new(params, quad)?;
    let coords = x.coords();
    let one = Complex64::new(1.0, 0.0);
    let w_n = grid.monomial_weights([(n.as_slice(), one)]);
    let (h_f, f0) = apply_h(&grid, &w_n, &coords, quad)?;

    let e0 = free_energy(n.as_slice(), params);
    let mut terms: Vec<(Vec<i64>, Complex64)> = vec![(n.0.clone(), Complex64::new(e0, 0.0))];
    let mut tail_terms: Vec<(Vec<i64>, Complex64)> = Vec::new();
    for (j, k) in params.pairs() {
        for nu in -(nu_cutoff + 4)..=(nu_cutoff + 4) {
            let s = s_coeff(nu, &params.nome);
            if s == 0.0 {
                continue;
            }
            let mut m = n.0.clone();
            m[j] += nu;
            m[k] -= nu;
            let entry = (m, Complex64::new(-params.gamma * s, 0.0));
            if nu.abs() <= nu_cutoff {
                terms.push(entry);
            } else {
                tail_terms.push(entry);
            }
        }
    }
    let psi = psi0(&coords, params)?;
    let w_rhs = grid.monomial_weights(terms.iter().map(|(m, c)| (m.as_slice(), *c)));
    let rhs = grid.integrate(&to_z(&coords), &w_rhs)? * psi;
    let z = to_z(&coords);
    let mut tail = 0.0;
    for (m, c) in &tail_terms {
        let w = grid.monomial_weights([(m.as_slice(), *c)]);
        tail += (grid.integrate(&z, &w)? * psi).norm();
    }
    let scale = h_f.norm().max((f0 * e0).norm()).max(1e-300);
    Ok(((h_f - rhs).norm() + tail) / scale)
}

/// Ψ_n(x) = Σ α(m) F̂_m(x) over the coefficients with max|m_j - n_j| ≤ support_cut.
#[derive(Debug, Clone)]
pub struct PsiEvaluator {
    grid: ContourGrid,
    weights: Vec<Complex64>,
    pub eigenvalue: f64,
    pub terms: usize,
}

impl PsiEvaluator {
    pub fn new(
        coefficients: &CoefficientMap,
        eigenvalue: f64,
        params: &ModelParams,
        quad: &QuadratureConfig,
        support_cut: i64,
    ) -> Result<Self> {
        let grid = ContourGrid::new(params, quad)?;
        let kept = coefficients.restricted(support_cut);
        let abs: Vec<(Vec<i64>, Complex64)> = kept.iter_abs().map(|(m, v)| (m.0, Complex64::new(v, 0.0))).collect();
        let weights = grid.monomial_weights(abs.iter().map(|(m, c)| (m.as_slice(), *c)));
        Ok(Self { grid, weights, eigenvalue, terms: abs.len() })
    }

    pub fn eval(&self, x: &PhasePoint) -> Result<Complex64> {
        let coords = x.coords();
        Ok(self.grid.integrate(&to_z(&coords), &self.weights)? * psi0(&coords, self.grid.params())?)
    }

    /// |HΨ - EΨ|/|EΨ|.
    pub fn eigen_residual(&self, x: &PhasePoint, quad: &QuadratureConfig) -> Result<f64> {
        let (h_psi, psi) = apply_h(&self.grid, &self.weights, &x.coords(), quad)?;
        let e_psi = psi * self.eigenvalue;
        Ok((h_psi - e_psi).norm() / e_psi.norm())
    }
}

pub fn assemble_psi(
    x: &PhasePoint,
    coefficients: &CoefficientMap,
    params: &ModelParams,
    quad: &QuadratureConfig,
    support_cut: i64,
) -> Result<Complex64> {
    PsiEvaluator::new(coefficients, 0.0, params, quad, support_cut)?.eval(x)
}

/// C q^{Σ_j(K̃|n_j| - K j n_j)}.
pub fn f_n_bound(n: &LatticeVector, params: &ModelParams, b_param: f64) -> Result<f64> {
    let kc = bound_kc(params, b_param)?;
    let expo: f64 = n
        .as_slice()
        .iter()
        .enumerate()
        .map(|(idx, &nj)| kc.k_tilde * (nj as f64).abs() - kc.k * (idx + 1) as f64 * nj as f64)
        .sum();
    Ok(kc.c * params.q().powf(expo))
}

/// sup |Ψ₀| on the real torus: |θ(r)| ≤ ∏_m (1 + q^{2m})².
fn psi0_sup(params: &ModelParams) -> f64 {
    let nome: &Nome = &params.nome;
    let q2 = nome.q2();
    let mut prod = 1.0;
    let mut q2m = 1.0;
    for _ in 0..params.elliptic().product_terms {
        q2m *= q2;
        prod *= (1.0 + q2m) * (1.0 + q2m);
    }
    let pairs = (params.n_particles * (params.n_particles - 1) / 2) as f64;
    prod.powf(params.lambda * pairs)
}

/// Uniform bound on |Ψ_n| on the real torus from the α bound and the f_n
/// bound with the same b: sup|Ψ₀| Σ_m [δ(m,n) + q^{KΣj(m_j-n_j)} X] C q^{Σ(K̃|m_j| - K j m_j)}.
pub fn psi_uniform_bound(n: &LatticeVector, params: &ModelParams, constants: &HypothesisConstants, b_param: f64) -> Result<f64> {
    let kc = bound_kc(params, b_param)?;
    let b = bound_b(params, b_param);
    let a = constants.a.abs();
    let d = constants.delta;
    let disc = (d - b - a).powi(2) - 4.0 * b * b;
    if !(b < (d - a) / 3.0) || disc < 0.0 {
        return Err(EcsError::Precondition(format!("gate fails for b = {b_param}: B = {b}")));
    }
    let x = 2.0 * b / (d - b - a + disc.sqrt());
    let q = params.q();
    let nn = params.n_particles;
    let weight_n: f64 = n.as_slice().iter().enumerate().map(|(j, &v)| (j + 1) as f64 * v as f64).sum();
    // Σ_m q^{K̃Σ|m_j|} over Σm = Σn, by growing boxes until the shell adds nothing
    let total: i64 = n.as_slice().iter().sum();
    let mut sum = 0.0;
    let mut r = 0i64;
    loop {
        let mut shell = 0.0;
        let mut cur = vec![-r; nn];
        loop {
            let on_shell = cur.iter().any(|&v| v.abs() == r);
            if on_shell && cur.iter().sum::<i64>() == total {
                let l1: i64 = cur.iter().map(|v| v.abs()).sum();
                shell += q.powf(kc.k_tilde * l1 as f64);
            }
            let mut pos = nn;
            let mut done = true;
            while pos > 0 {
                pos -= 1;
                if cur[pos] < r {
                    cur[pos] += 1;
                    for c in cur.iter_mut().skip(pos + 1) {
                        *c = -r;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        sum += shell;
        if (r > 2 && shell < 1e-16 * sum) || r > 400 {
            break;
        }
        r += 1;
    }
    let own = f_n_bound(n, params, b_param)?;
    Ok(psi0_sup(params) * (own + x * kc.c * q.powf(-kc.k * weight_n) * sum))
}
