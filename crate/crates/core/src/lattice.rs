//! Lattice substrate: model parameters, free energies E₀, the shift
//! operator S, resonance detection, the no-resonance constants (a, Δ) and
//! the convergence constants B, K, K̃, C.

use crate::elliptic::{capital_theta, s_coeff, EllipticConfig, Nome};
use crate::error::{EcsError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// (N, λ, q) with γ = 2λ(λ-1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_particles: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub nome: Nome,
}

impl ModelParams {
    pub fn new(n_particles: usize, lambda: f64, q: f64) -> Result<Self> {
        if n_particles < 2 {
            return Err(EcsError::Config(format!("need N >= 2, got {n_particles}")));
        }
        if !(lambda > 0.5) || !lambda.is_finite() {
            return Err(EcsError::Config(format!("need lambda > 1/2, got {lambda}")));
        }
        Ok(Self {
            n_particles,
            lambda,
            gamma: 2.0 * lambda * (lambda - 1.0),
            nome: Nome::new(q)?,
        })
    }

    pub fn q(&self) -> f64 {
        self.nome.q()
    }

    pub fn elliptic(&self) -> EllipticConfig {
        EllipticConfig::for_nome(&self.nome)
    }

    /// Index pairs (j, k), j < k, zero-based.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n_particles)
    }
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for j in 0..n {
        for k in j + 1..n {
            out.push((j, k));
        }
    }
    out
}

/// Integer vector in Z^N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector(pub Vec<i64>);

impl LatticeVector {
    pub fn new(v: Vec<i64>) -> Self {
        Self(v)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn add(&self, rel: &[i64]) -> Self {
        Self(self.0.iter().zip(rel).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeVector) -> Vec<i64> {
        self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()
    }

    /// Weakly decreasing and non-negative.
    pub fn is_partition(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1]) && self.0.iter().all(|&x| x >= 0)
    }
}

impl std::fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// ν·E_jk with (E_jk)_ℓ = δ_jℓ - δ_kℓ (zero-based j < k).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeShift {
    pub j: usize,
    pub k: usize,
    pub nu: i64,
}

impl LatticeShift {
    pub fn new(j: usize, k: usize, nu: i64) -> Result<Self> {
        if j >= k || nu == 0 {
            return Err(EcsError::Domain(format!("invalid shift j={j} k={k} nu={nu}")));
        }
        Ok(Self { j, k, nu })
    }

    pub fn to_vector(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        v[self.j] += self.nu;
        v[self.k] -= self.nu;
        v
    }
}

/// Sparse α(m) keyed by the relative vector m - n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMap {
    pub base: LatticeVector,
    #[serde(with = "entry_list")]
    pub entries: BTreeMap<Vec<i64>, f64>,
}

/// Map keys are vectors, so the entries go through JSON as [rel, value] pairs.
mod entry_list {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::collections::BTreeMap;

    pub fn serialize<S: Serializer>(map: &BTreeMap<Vec<i64>, f64>, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<(&Vec<i64>, &f64)> = map.iter().collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<i64>, f64>, D::Error> {
        let pairs: Vec<(Vec<i64>, f64)> = Vec::deserialize(d)?;
        Ok(pairs.into_iter().collect())
    }
}

impl CoefficientMap {
    pub fn new(base: LatticeVector) -> Self {
        Self { base, entries: BTreeMap::new() }
    }

    /// δ_n.
    pub fn delta(base: LatticeVector) -> Self {
        let mut map = Self::new(base.clone());
        map.entries.insert(vec![0; base.len()], 1.0);
        map
    }

    pub fn get_rel(&self, rel: &[i64]) -> f64 {
        self.entries.get(rel).copied().unwrap_or(0.0)
    }

    pub fn get(&self, m: &LatticeVector) -> f64 {
        self.get_rel(&m.sub(&self.base))
    }

    pub fn insert_rel(&mut self, rel: Vec<i64>, value: f64) {
        self.entries.insert(rel, value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// (m, α(m)) with absolute lattice vectors, lexicographic in m - n.
    pub fn iter_abs(&self) -> impl Iterator<Item = (LatticeVector, f64)> + '_ {
        self.entries.iter().map(move |(rel, v)| (self.base.add(rel), *v))
    }

    /// Entries with max_j |m_j - n_j| ≤ radius.
    pub fn restricted(&self, radius: i64) -> CoefficientMap {
        let entries = self
            .entries
            .iter()
            .filter(|(rel, _)| rel.iter().all(|x| x.abs() <= radius))
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        CoefficientMap { base: self.base.clone(), entries }
    }
}

/// E₀(n) = Σ_j (n_j + λ(N+1-2j)/2)².
pub fn free_energy(n: &[i64], params: &ModelParams) -> f64 {
    let nn = n.len() as f64;
    n.iter()
        .enumerate()
        .map(|(idx, &nj)| {
            let j = (idx + 1) as f64;
            let x = nj as f64 + params.lambda * (nn + 1.0 - 2.0 * j) / 2.0;
            x * x
        })
        .sum()
}

pub fn resonance_tolerance(e0: f64) -> f64 {
    1e-9 * e0.abs().max(1.0)
}

/// (Sα)(m) = Σ_{j<k} Σ_{0<|ν|≤cutoff} S_ν α(m - νE_jk).
pub fn apply_shift_operator(alpha: &CoefficientMap, params: &ModelParams, nu_cutoff: i64) -> CoefficientMap {
    let pairs = params.pairs();
    let mut out: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for (rel, &value) in &alpha.entries {
        if value == 0.0 {
            continue;
        }
        for &(j, k) in &pairs {
            for nu in -nu_cutoff..=nu_cutoff {
                let s = s_coeff(nu, &params.nome);
                if s == 0.0 {
                    continue;
                }
                let mut target = rel.clone();
                target[j] += nu;
                target[k] -= nu;
                *out.entry(target).or_insert(0.0) += s * value;
            }
        }
    }
    CoefficientMap { base: alpha.base.clone(), entries: out }
}

/// All relative vectors r with Σr = 0 and max|r_j| ≤ radius, lexicographic.
pub fn relative_shell(n_particles: usize, radius: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![0i64; n_particles];
    fn rec(pos: usize, partial: i64, radius: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let n = cur.len();
        if pos == n - 1 {
            let last = -partial;
            if last.abs() <= radius {
                cur[pos] = last;
                out.push(cur.clone());
            }
            return;
        }
        // the remaining components must be able to cancel the partial sum
        let remaining = (n - 1 - pos) as i64;
        for v in -radius..=radius {
            let p = partial + v;
            if p.abs() <= remaining * radius {
                cur[pos] = v;
                rec(pos + 1, p, radius, cur, out);
            }
        }
    }
    rec(0, 0, radius, &mut cur, &mut out);
    out
}

/// All m ≠ n in the shell of the given radius with |E₀(m) - E₀(n)| below the
/// resonance tolerance.
pub fn find_resonances(n: &LatticeVector, params: &ModelParams, radius: i64) -> Vec<LatticeVector> {
    let e0n = free_energy(n.as_slice(), params);
    let tol = resonance_tolerance(e0n);
    relative_shell(n.len(), radius)
        .into_iter()
        .filter(|rel| rel.iter().any(|&x| x != 0))
        .map(|rel| n.add(&rel))
        .filter(|m| (free_energy(m.as_slice(), params) - e0n).abs() < tol)
        .collect()
}

/// How (a, Δ) are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DeltaMode {
    /// λ = p/m in lowest terms; the caller chooses k₁, k₂ and a₀.
    RationalGrid { p: i64, m: i64, k1: i64, k2: i64, a0: f64 },
    /// N = 2 closed form with a = 0.
    N2ClosedForm,
    /// a = 0, Δ = minimum over a finite shell.
    ExhaustiveSearch,
    /// caller-chosen a, Δ = min_{m≠n} |E₀(m) - E₀(n) - a| (all ν for N = 2,
    /// the finite shell otherwise).
    Shifted { a: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisConstants {
    pub a: f64,
    pub delta: f64,
    pub mode: DeltaMode,
    /// true when Δ is proven for the whole lattice, false for shell minima.
    pub certified: bool,
    pub radius: Option<i64>,
}

impl HypothesisConstants {
    /// Δ > |a|.
    pub fn admissible(&self) -> bool {
        self.delta > self.a.abs()
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn hypothesis_constants(
    n: &LatticeVector,
    params: &ModelParams,
    mode: DeltaMode,
    radius: i64,
) -> Result<HypothesisConstants> {
    if n.len() != params.n_particles {
        return Err(EcsError::Precondition(format!("n has {} components, N = {}", n.len(), params.n_particles)));
    }
    let lam = params.lambda;
    match mode {
        DeltaMode::RationalGrid { p, m, k1, k2, a0 } => {
            if m <= 0 || p <= 0 || gcd(p, m) != 1 {
                return Err(EcsError::Precondition(format!("lambda = {p}/{m} must be in lowest terms")));
            }
            if (lam - p as f64 / m as f64).abs() > 1e-12 * lam.max(1.0) {
                return Err(EcsError::Precondition(format!("lambda = {lam} is not {p}/{m}")));
            }
            if !(a0 != 0.0 && a0.abs() <= 0.5 / m as f64) {
                return Err(EcsError::Precondition(format!("need 0 < |a0| <= 1/(2m) = {}", 0.5 / m as f64)));
            }
            Ok(HypothesisConstants {
                a: k1 as f64 + lam * k2 as f64 + a0,
                delta: a0.abs(),
                mode,
                certified: true,
                radius: None,
            })
        }
        DeltaMode::N2ClosedForm => {
            if params.n_particles != 2 {
                return Err(EcsError::Precondition("closed-form gap needs N = 2".into()));
            }
            let c = (n.0[0] - n.0[1]) as f64 + lam;
            let e0n = free_energy(n.as_slice(), params);
            let tol = resonance_tolerance(e0n);
            let reach = c.abs().ceil() as i64 + 2;
            let mut best = f64::INFINITY;
            let mut best_nu = 0;
            for nu in -reach..=reach {
                if nu == 0 {
                    continue;
                }
                let v = (2.0 * nu as f64 * (nu as f64 + c)).abs();
                if v < best {
                    best = v;
                    best_nu = nu;
                }
            }
            if best < tol {
                return Err(EcsError::Resonance { m: vec![n.0[0] + best_nu, n.0[1] - best_nu], gap: best });
            }
            Ok(HypothesisConstants { a: 0.0, delta: best, mode, certified: true, radius: None })
        }
        DeltaMode::ExhaustiveSearch => {
            let e0n = free_energy(n.as_slice(), params);
            let tol = resonance_tolerance(e0n);
            let mut best = f64::INFINITY;
            let mut arg = Vec::new();
            for rel in relative_shell(n.len(), radius) {
                if rel.iter().all(|&x| x == 0) {
                    continue;
                }
                let m = n.add(&rel);
                let v = (free_energy(m.as_slice(), params) - e0n).abs();
                if v < best {
                    best = v;
                    arg = m.0;
                }
            }
            if best < tol {
                return Err(EcsError::Resonance { m: arg, gap: best });
            }
            Ok(HypothesisConstants { a: 0.0, delta: best, mode, certified: false, radius: Some(radius) })
        }
        DeltaMode::Shifted { a } => {
            let e0n = free_energy(n.as_slice(), params);
            let mut best = f64::INFINITY;
            let mut arg = Vec::new();
            let (candidates, certified, used_radius) = if params.n_particles == 2 {
                // gaps 2ν(ν + c) grow quadratically, so a window around -c/2 suffices
                let c = (n.0[0] - n.0[1]) as f64 + lam;
                let reach = (c.abs() + a.abs().sqrt()).ceil() as i64 + 2;
                ((-reach..=reach).map(|nu| vec![nu, -nu]).collect::<Vec<_>>(), true, None)
            } else {
                (relative_shell(n.len(), radius), false, Some(radius))
            };
            for rel in candidates {
                if rel.iter().all(|&x| x == 0) {
                    continue;
                }
                let m = n.add(&rel);
                let v = (free_energy(m.as_slice(), params) - e0n - a).abs();
                if v < best {
                    best = v;
                    arg = m.0;
                }
            }
            if best <= a.abs() {
                return Err(EcsError::Precondition(format!(
                    "a = {a} is not admissible: Δ(a) = {best} at m = {arg:?} does not exceed |a|"
                )));
            }
            Ok(HypothesisConstants { a, delta: best, mode, certified, radius: used_radius })
        }
    }
}

/// B = N(N-1)|γ| q^{2/(N+b)}/(1 - q^{2/(N+b)})³.
pub fn bound_b(params: &ModelParams, b_param: f64) -> f64 {
    let q = params.q();
    if q == 0.0 {
        return 0.0;
    }
    let nn = params.n_particles as f64;
    let x = q.powf(2.0 / (nn + b_param));
    nn * (nn - 1.0) * params.gamma.abs() * x / (1.0 - x).powi(3)
}

/// Gate B < (Δ - |a|)/3.
pub fn converges_gate(b: f64, constants: &HypothesisConstants) -> bool {
    b < (constants.delta - constants.a.abs()) / 3.0
}

/// Constants (K, K̃, C) of the f_n bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KcConstants {
    pub k: f64,
    pub k_tilde: f64,
    pub c: f64,
}

pub fn bound_kc(params: &ModelParams, b_param: f64) -> Result<KcConstants> {
    if !(b_param > 0.0) {
        return Err(EcsError::Precondition(format!("b = {b_param} must be positive")));
    }
    let q = params.q();
    if q == 0.0 {
        return Err(EcsError::Precondition("the f_n bound needs q > 0".into()));
    }
    let nn = params.n_particles as f64;
    let lam = params.lambda;
    let k = 2.0 / (nn + b_param);
    let k_tilde = b_param * k / (1.0 + 2.0 * b_param);
    let cfg = params.elliptic();
    let nome = &params.nome;
    let theta_real = |x: f64| -> Result<f64> { Ok(capital_theta(Complex64::new(x, 0.0), nome, &cfg)?.re) };
    let num = (2.0 * theta_real(-q * q)?).powf(nn * (nn - 1.0) * lam / 2.0);
    let x0 = q.powf(2.0 - 2.0 * b_param * k_tilde);
    let x1 = q.powf(k - k_tilde);
    let den = ((1.0 - x1) * theta_real(x0)? / (1.0 - x0)).powf(nn * nn * lam);
    Ok(KcConstants { k, k_tilde, c: num / den })
}

/// Indexed finite shell around n with the incoming-shift table of S.
#[derive(Debug, Clone)]
pub struct Shell {
    pub base: LatticeVector,
    pub radius: i64,
    pub nu_cutoff: i64,
    /// relative vectors m - n, lexicographic
    pub points: Vec<Vec<i64>>,
    pub e0_base: f64,
    pub index: HashMap<Vec<i64>, usize>,
    /// E₀(m) - E₀(n)
    pub gaps: Vec<f64>,
    /// for target i: (source, S_ν) with source = m_i - ν̂ inside the shell
    pub incoming: Vec<Vec<(usize, f64)>>,
    /// for source i: Σ S_ν over shifts that leave the shell
    pub leaked: Vec<f64>,
}

impl Shell {
    pub fn new(base: &LatticeVector, params: &ModelParams, radius: i64, nu_cutoff: i64) -> Result<Self> {
        if radius < 1 || nu_cutoff < 1 {
            return Err(EcsError::Config("shell radius and nu cutoff must be >= 1".into()));
        }
        if base.len() != params.n_particles {
            return Err(EcsError::Precondition(format!("n has {} components, N = {}", base.len(), params.n_particles)));
        }
        let points = relative_shell(params.n_particles, radius);
        let index: HashMap<Vec<i64>, usize> = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let e0n = free_energy(base.as_slice(), params);
        let gaps = points.iter().map(|rel| free_energy(base.add(rel).as_slice(), params) - e0n).collect();
        let pairs = params.pairs();
        let svals: Vec<(i64, f64)> = (-nu_cutoff..=nu_cutoff)
            .map(|nu| (nu, s_coeff(nu, &params.nome)))
            .filter(|&(_, s)| s != 0.0)
            .collect();
        let mut incoming = vec![Vec::new(); points.len()];
        let mut leaked = vec![0.0; points.len()];
        let mut target = vec![0i64; params.n_particles];
        for (src, rel) in points.iter().enumerate() {
            for &(j, k) in &pairs {
                for &(nu, s) in &svals {
                    target.copy_from_slice(rel);
                    target[j] += nu;
                    target[k] -= nu;
                    match index.get(&target) {
                        Some(&t) => incoming[t].push((src, s)),
                        None => leaked[src] += s,
                    }
                }
            }
        }
        Ok(Self { base: base.clone(), radius, nu_cutoff, points, e0_base: e0n, index, gaps, incoming, leaked })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn origin(&self) -> usize {
        self.index[&vec![0i64; self.base.len()]]
    }

    pub fn index_of(&self, m: &LatticeVector) -> Option<usize> {
        self.index.get(&m.sub(&self.base)).copied()
    }

    /// Relative vectors in the shell that are resonant with n (excluding n).
    pub fn resonant_points(&self) -> Vec<usize> {
        let tol = resonance_tolerance(self.e0_base);
        let origin = self.origin();
        (0..self.len()).filter(|&i| i != origin && self.gaps[i].abs() < tol).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[i64]) -> LatticeVector {
        LatticeVector(v.to_vec())
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1, 2.0, 0.1).is_err());
        assert!(ModelParams::new(2, 0.5, 0.1).is_err());
        let p = ModelParams::new(3, 2.5, 0.1).unwrap();
        assert_eq!(p.gamma, 2.0 * 2.5 * 1.5);
    }

    #[test]
    fn free_energy_examples() {
        let p = ModelParams::new(2, 2.0, 0.0).unwrap();
        assert_eq!(free_energy(&[0, 0], &p), 2.0);
        assert_eq!(free_energy(&[1, 1], &p) - free_energy(&[0, 0], &p), 2.0);
        for lam in [0.7, 1.5, 2.5] {
            let p = ModelParams::new(2, lam, 0.0).unwrap();
            let d = free_energy(&[1, 0], &p) - free_energy(&[0, 1], &p);
            assert!((d - 2.0 * lam).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_operator_basics() {
        let p = ModelParams::new(3, 1.5, 0.0).unwrap();
        let n = lv(&[1, 0, 0]);
        let s = apply_shift_operator(&CoefficientMap::delta(n.clone()), &p, 4);
        for (rel, v) in &s.entries {
            assert!(*v > 0.0);
            // single positive shift of some pair
            let nonzero: Vec<i64> = rel.iter().copied().filter(|&x| x != 0).collect();
            assert_eq!(nonzero.len(), 2);
            let first = rel.iter().position(|&x| x != 0).unwrap();
            assert!(rel[first] > 0);
        }
        assert_eq!(s.get_rel(&[0, 0, 0]), 0.0);
        let zero = apply_shift_operator(&CoefficientMap::new(n), &p, 4);
        assert!(zero.is_empty());
    }

    #[test]
    fn shell_sizes() {
        assert_eq!(relative_shell(2, 5).len(), 11);
        let s3 = relative_shell(3, 2);
        assert!(s3.iter().all(|r| r.iter().sum::<i64>() == 0 && r.iter().all(|x| x.abs() <= 2)));
        assert_eq!(s3.len(), 19);
        let mut sorted = s3.clone();
        sorted.sort();
        assert_eq!(sorted, s3);
    }

    #[test]
    fn resonances_n2() {
        let p = ModelParams::new(2, 2.0, 0.1).unwrap();
        let n = lv(&[3, 1]);
        let r = find_resonances(&n, &p, 6);
        assert_eq!(r, vec![lv(&[1 - 2, 3 + 2])]);
        let p = ModelParams::new(2, 2.5, 0.1).unwrap();
        assert!(find_resonances(&n, &p, 10).is_empty());
    }

    #[test]
    fn resonances_n3_lambda_independent() {
        let p = ModelParams::new(3, 1.7, 0.1).unwrap();
        let n = lv(&[2, 0, 1]);
        // ν = (2 - 0 + 1)/3 = 1
        let r = find_resonances(&n, &p, 4);
        assert!(r.contains(&lv(&[1, 2, 0])));
    }

    #[test]
    fn hypothesis_examples() {
        let p = ModelParams::new(2, 2.5, 0.05).unwrap();
        let h = hypothesis_constants(&lv(&[0, 0]), &p, DeltaMode::N2ClosedForm, 10).unwrap();
        assert_eq!(h.a, 0.0);
        assert!((h.delta - 2.0).abs() < 1e-14);
        let p = ModelParams::new(2, 1.5, 0.05).unwrap();
        let h = hypothesis_constants(
            &lv(&[0, 0]),
            &p,
            DeltaMode::RationalGrid { p: 3, m: 2, k1: 0, k2: 0, a0: 0.25 },
            10,
        )
        .unwrap();
        assert_eq!((h.a, h.delta), (0.25, 0.25));
        assert!(!h.admissible());
        let p = ModelParams::new(2, 3.0, 0.05).unwrap();
        let e = hypothesis_constants(&lv(&[0, 0]), &p, DeltaMode::N2ClosedForm, 10).unwrap_err();
        assert!(matches!(e, EcsError::Resonance { .. }));
    }

    #[test]
    fn rational_mode_preconditions() {
        let p = ModelParams::new(2, 1.5, 0.05).unwrap();
        let bad = DeltaMode::RationalGrid { p: 6, m: 4, k1: 0, k2: 0, a0: 0.1 };
        assert!(hypothesis_constants(&lv(&[0, 0]), &p, bad, 4).is_err());
        let too_big = DeltaMode::RationalGrid { p: 3, m: 2, k1: 0, k2: 0, a0: 0.3 };
        assert!(hypothesis_constants(&lv(&[0, 0]), &p, too_big, 4).is_err());
        let p3 = ModelParams::new(3, 1.5, 0.05).unwrap();
        assert!(hypothesis_constants(&lv(&[0, 0, 0]), &p3, DeltaMode::N2ClosedForm, 4).is_err());
    }

    #[test]
    fn bound_b_examples() {
        let p = ModelParams::new(2, 2.5, 0.0).unwrap();
        assert_eq!(bound_b(&p, 0.7), 0.0);
        let p = ModelParams::new(2, 2.5, 0.05).unwrap();
        let expected = 2.0 * 7.5 * 0.05 / (0.95f64).powi(3);
        assert!((bound_b(&p, 0.0) - expected).abs() < 1e-14);
    }

    #[test]
    fn bound_kc_example() {
        let p = ModelParams::new(2, 1.4, 0.1).unwrap();
        let kc = bound_kc(&p, 1.0).unwrap();
        assert!((kc.k - 2.0 / 3.0).abs() < 1e-15);
        assert!((kc.k_tilde - 2.0 / 9.0).abs() < 1e-15);
        assert!(kc.c.is_finite() && kc.c > 0.0);
        assert!(bound_kc(&p, 0.0).is_err());
    }

    #[test]
    fn shell_tables() {
        let p = ModelParams::new(2, 2.5, 0.1).unwrap();
        let sh = Shell::new(&lv(&[1, 0]), &p, 3, 2).unwrap();
        assert_eq!(sh.len(), 7);
        let o = sh.origin();
        assert_eq!(sh.gaps[o], 0.0);
        // origin receives from ±1, ±2 shifts
        assert_eq!(sh.incoming[o].len(), 4);
    }
}
