//! Resolved run configuration: file values first, then command-line flags.

use crate::error::{EcsError, Result};
use crate::lattice::{LatticeVector, ModelParams};
use crate::solver::TruncationPolicy;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// λ with the token it was parsed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSpec {
    pub value: f64,
    pub origin: String,
    /// (p, m) when given as a fraction p/m
    pub fraction: Option<(i64, i64)>,
}

impl LambdaSpec {
    /// Accepts `2.5`, `5/2`, `sqrt2` and `sqrt(2)`.
    pub fn parse(token: &str) -> Result<Self> {
        let t = token.trim();
        let bad = || EcsError::Config(format!("cannot parse lambda '{token}'"));
        if let Some(rest) = t.strip_prefix("sqrt") {
            let inner = rest.trim_start_matches('(').trim_end_matches(')');
            let x: f64 = inner.parse().map_err(|_| bad())?;
            if x < 0.0 {
                return Err(bad());
            }
            return Ok(Self { value: x.sqrt(), origin: t.into(), fraction: None });
        }
        if let Some((p, m)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let m: i64 = m.trim().parse().map_err(|_| bad())?;
            if m <= 0 {
                return Err(bad());
            }
            return Ok(Self { value: p as f64 / m as f64, origin: t.into(), fraction: Some((p, m)) });
        }
        let value: f64 = t.parse().map_err(|_| bad())?;
        Ok(Self { value, origin: t.into(), fraction: None })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Perturbative,
    Implicit,
    Explicit,
    Degenerate,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DeltaChoice {
    /// N = 2: a = Φ_n(0) when admissible, else the closed form; N > 2: exhaustive
    Auto,
    N2,
    Exhaustive,
    Shifted,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: Vec<i64>,
    pub lambda: LambdaSpec,
    pub q: f64,
    pub method: MethodChoice,
    pub s_max: usize,
    pub nu_cutoff: i64,
    pub shell_radius: i64,
    pub delta_mode: DeltaChoice,
    pub a: Option<f64>,
    pub k1: Option<i64>,
    pub k2: Option<i64>,
    pub a0: Option<f64>,
    pub eta_order: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub nodes: usize,
    pub oracle_cutoff: Option<i64>,
    /// coefficients are written for max_j |m_j - n_j| ≤ this
    pub coeff_radius: i64,
    pub q_grid: Vec<f64>,
    pub only: Option<Vec<String>>,
    pub n_filter: Option<usize>,
    pub seed: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let policy = TruncationPolicy::default();
        Self {
            n: vec![0, 0],
            lambda: LambdaSpec { value: 2.5, origin: "2.5".into(), fraction: None },
            q: 0.1,
            method: MethodChoice::All,
            s_max: policy.s_max,
            nu_cutoff: policy.nu_cutoff,
            shell_radius: policy.shell_radius,
            delta_mode: DeltaChoice::Auto,
            a: None,
            k1: None,
            k2: None,
            a0: None,
            eta_order: 8,
            max_iter: 200,
            tol: 1e-14,
            nodes: 64,
            oracle_cutoff: None,
            coeff_radius: 4,
            q_grid: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.1],
            only: None,
            n_filter: None,
            seed: crate::suite::SuiteConfig::default().seed,
            format: Format::Json,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.n.len(), self.lambda.value, self.q)
    }

    pub fn target(&self) -> LatticeVector {
        LatticeVector::new(self.n.clone())
    }

    pub fn policy(&self) -> Result<TruncationPolicy> {
        TruncationPolicy::new(self.s_max, self.nu_cutoff, self.shell_radius)
    }

    pub fn oracle_cutoff(&self) -> i64 {
        self.oracle_cutoff.unwrap_or(match self.n.len() {
            2 => 16,
            3 => 8,
            _ => 4,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.len() < 2 {
            return Err(EcsError::Config(format!("--n needs at least two components, got {:?}", self.n)));
        }
        self.params()?;
        self.policy()?;
        if self.eta_order < 1 || self.max_iter < 1 || !(self.tol > 0.0) || self.nodes < 8 || self.coeff_radius < 0 {
            return Err(EcsError::Config("orders, iterations, tolerance, nodes and coefficient radius must be positive".into()));
        }
        if self.q_grid.iter().any(|q| !(0.0..1.0).contains(q)) {
            return Err(EcsError::Config(format!("q grid must lie in [0, 1), got {:?}", self.q_grid)));
        }
        Ok(())
    }
}

fn parse_list<T: std::str::FromStr>(flag: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| EcsError::Config(format!("--{flag}: bad list entry '{x}'"))))
        .collect()
}

/// Flags shared by every subcommand; each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// lattice vector, e.g. 1,0
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    /// decimal, p/m or sqrtK
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodChoice>,
    #[arg(long)]
    pub smax: Option<usize>,
    #[arg(long)]
    pub nucut: Option<i64>,
    #[arg(long)]
    pub shell: Option<i64>,
    #[arg(long, value_enum)]
    pub delta_mode: Option<DeltaChoice>,
    /// expansion point for --delta-mode shifted
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k2: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a0: Option<f64>,
    /// η-series order M
    #[arg(long)]
    pub orders: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// quadrature nodes per contour
    #[arg(long)]
    pub nodes: Option<usize>,
    /// oracle box half-width
    #[arg(long)]
    pub cutoff: Option<i64>,
    #[arg(long)]
    pub coeff_radius: Option<i64>,
    /// comma-separated nomes for qseries
    #[arg(long)]
    pub q_grid: Option<String>,
    /// comma-separated check names for verify
    #[arg(long)]
    pub only: Option<String>,
    /// particle number filter for verify
    #[arg(long = "N")]
    pub n_filter: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| EcsError::Config(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| EcsError::Config(format!("bad config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:ident => $field:ident) => {
                if let Some(v) = &self.$flag {
                    cfg.$field = v.clone();
                }
            };
            ($flag:ident => some $field:ident) => {
                if let Some(v) = &self.$flag {
                    cfg.$field = Some(v.clone());
                }
            };
        }
        if let Some(v) = &self.n {
            cfg.n = parse_list("n", v)?;
        }
        if let Some(l) = &self.lambda {
            cfg.lambda = LambdaSpec::parse(l)?;
        }
        set!(q => q);
        set!(method => method);
        set!(smax => s_max);
        set!(nucut => nu_cutoff);
        set!(shell => shell_radius);
        set!(delta_mode => delta_mode);
        set!(a => some a);
        set!(k1 => some k1);
        set!(k2 => some k2);
        set!(a0 => some a0);
        set!(orders => eta_order);
        set!(max_iter => max_iter);
        set!(tol => tol);
        set!(nodes => nodes);
        set!(cutoff => some oracle_cutoff);
        set!(coeff_radius => coeff_radius);
        if let Some(v) = &self.q_grid {
            cfg.q_grid = parse_list("q-grid", v)?;
        }
        if let Some(v) = &self.only {
            cfg.only = Some(v.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect());
        }
        set!(n_filter => some n_filter);
        set!(seed => seed);
        set!(format => format);
        set!(out => some out);
        if self.a.is_some() && self.delta_mode.is_none() {
            cfg.delta_mode = DeltaChoice::Shifted;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
