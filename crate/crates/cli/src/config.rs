//! Suite configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use fraclap_core::{preset_field, AngularRule, FracParams, QuadratureSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Leibniz,
    Polarization,
    GagliardoLimit,
    HolderTransfer,
    Poisson,
    Analyticity,
    Norms,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Leibniz,
        Suite::Polarization,
        Suite::GagliardoLimit,
        Suite::HolderTransfer,
        Suite::Poisson,
        Suite::Analyticity,
        Suite::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Leibniz => "leibniz",
            Suite::Polarization => "polarization",
            Suite::GagliardoLimit => "gagliardo-limit",
            Suite::HolderTransfer => "holder-transfer",
            Suite::Poisson => "poisson",
            Suite::Analyticity => "analyticity",
            Suite::Norms => "norms",
        }
    }

    /// Presets used when the configuration names none.
    pub fn default_presets(self) -> Vec<String> {
        let v: &[&str] = match self {
            Suite::Leibniz => &["bump(1)", "bump(0.7)"],
            Suite::Polarization => &["constant", "affine", "gaussian", "bump(1)", "getoor"],
            Suite::GagliardoLimit => &["gaussian", "bump(1)", "bump(0.9)"],
            Suite::HolderTransfer => &["bump(1)"],
            Suite::Poisson => &["constant"],
            Suite::Analyticity => &["gaussian"],
            Suite::Norms => &["constant"],
        };
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Check tolerance used when the configuration gives none.
    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::Leibniz => 1e-5,
            Suite::Polarization => 3.0,
            Suite::GagliardoLimit => 0.05,
            Suite::HolderTransfer => 0.05,
            Suite::Poisson => 1e-4,
            Suite::Analyticity => 0.2,
            Suite::Norms => 1e-6,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .with_context(|| format!("unknown suite {s:?}"))
    }
}

/// One verification run. Every field except `suite` has a default.
///
/// `tolerance` is read per suite: relative to the term scale (leibniz), a
/// multiple of the combined standard error (polarization, and the
/// monotonicity records of gagliardo-limit), a relative gap
/// (gagliardo-limit), an exponent slack (holder-transfer), an absolute error
/// (poisson with constant data, norms) or a residual in log units
/// (analyticity). Poisson records against walk-on-spheres always use
/// `sigmas` standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub suite: Suite,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Grid of orders `s`; an empty grid gives an empty report.
    #[serde(default = "default_orders")]
    pub orders: Vec<f64>,
    #[serde(default)]
    pub presets: Vec<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Random evaluation points per order (leibniz).
    #[serde(default = "default_points")]
    pub points: usize,
    /// Ball radius (poisson).
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Walk-on-spheres samples for non-constant data (poisson).
    #[serde(default = "default_wos_samples")]
    pub wos_samples: usize,
    /// Cutoff parameter of η.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// δ of the radii schedule `R = 1 - δ/4`, `r₀ = 1 - δ` (analyticity).
    #[serde(default = "default_analyticity_delta")]
    pub analyticity_delta: f64,
    /// Radial cutoffs η_τ.
    #[serde(default)]
    pub taus: Vec<f64>,
    /// Hölder indices paired with `orders` (holder-transfer).
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_dim() -> usize {
    2
}
fn default_orders() -> Vec<f64> {
    vec![0.25, 0.5, 0.75]
}
fn default_sigmas() -> f64 {
    3.0
}
fn default_seed() -> u64 {
    42
}
fn default_points() -> usize {
    20
}
fn default_rho() -> f64 {
    0.5
}
fn default_wos_samples() -> usize {
    100_000
}
fn default_delta() -> f64 {
    0.1
}
fn default_analyticity_delta() -> f64 {
    0.4
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        SuiteConfig {
            suite,
            dim: default_dim(),
            orders: default_orders(),
            presets: Vec::new(),
            tolerance: None,
            sigmas: default_sigmas(),
            seed: default_seed(),
            points: default_points(),
            rho: default_rho(),
            wos_samples: default_wos_samples(),
            delta: default_delta(),
            analyticity_delta: default_analyticity_delta(),
            taus: Vec::new(),
            alphas: Vec::new(),
            quadrature: None,
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = toml::from_str(text).context("parsing suite configuration")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn presets(&self) -> Vec<String> {
        if self.presets.is_empty() {
            self.suite.default_presets()
        } else {
            self.presets.clone()
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
            .unwrap_or_else(|| self.suite.default_tolerance())
    }

    pub fn taus(&self) -> Vec<f64> {
        if !self.taus.is_empty() {
            return self.taus.clone();
        }
        match self.suite {
            Suite::GagliardoLimit => vec![0.4, 0.2, 0.1, 0.05],
            _ => vec![0.4, 0.1],
        }
    }

    /// `(α, s)` pairs of the holder-transfer suite. Without `alphas`, each
    /// order gets a default index inside `(s, min(2s, 1))`.
    pub fn holder_pairs(&self) -> Vec<(f64, f64)> {
        if !self.alphas.is_empty() {
            return self
                .alphas
                .iter()
                .copied()
                .zip(self.orders.iter().copied())
                .collect();
        }
        let alpha = |s: f64| {
            let known = [(0.25, 0.4), (0.5, 0.8), (0.75, 0.9)];
            known
                .iter()
                .find(|k| k.0 == s)
                .map_or(0.5 * (s + (2.0 * s).min(1.0)), |k| k.1)
        };
        self.orders.iter().map(|&s| (alpha(s), s)).collect()
    }

    /// The configured quadrature, or the suite's default.
    pub fn quadrature(&self) -> QuadratureSpec {
        if let Some(q) = self.quadrature {
            return q;
        }
        match self.suite {
            Suite::Polarization => QuadratureSpec::monte_carlo()
                .with_samples(32_000_000)
                .with_angular(AngularRule::Fixed(32)),
            Suite::GagliardoLimit => QuadratureSpec::monte_carlo().with_samples(32_000_000),
            Suite::HolderTransfer => QuadratureSpec::default().with_tolerance(1e-6, 1e-10),
            Suite::Analyticity => QuadratureSpec::default().with_tolerance(1e-8, 1e-14),
            _ => QuadratureSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            bail!("dim must be at least 2, got {}", self.dim);
        }
        for &s in &self.orders {
            FracParams::new(self.dim, s).with_context(|| format!("order {s}"))?;
        }
        for p in self.presets() {
            preset_field(&p).with_context(|| format!("preset {p:?}"))?;
        }
        let tol = self.tolerance();
        if !(tol > 0.0) {
            bail!("tolerance must be positive, got {tol}");
        }
        if !(self.sigmas > 0.0) {
            bail!("sigmas must be positive, got {}", self.sigmas);
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            bail!("rho must lie in (0, 1], got {}", self.rho);
        }
        if !(self.delta > 0.0 && self.delta < 0.25) {
            bail!("delta must lie in (0, 1/4), got {}", self.delta);
        }
        if !(self.analyticity_delta > 0.0 && self.analyticity_delta < 1.0) {
            bail!(
                "analyticity_delta must lie in (0, 1), got {}",
                self.analyticity_delta
            );
        }
        if self.taus.iter().any(|t| !(*t > 0.0)) {
            bail!("every tau must be positive");
        }
        if !self.alphas.is_empty() && self.alphas.len() != self.orders.len() {
            bail!(
                "alphas ({}) and orders ({}) must have the same length",
                self.alphas.len(),
                self.orders.len()
            );
        }
        if self.suite == Suite::Leibniz && self.presets().len() != 2 {
            bail!("the leibniz suite takes exactly two presets");
        }
        if let Some(q) = &self.quadrature {
            q.validate().context("quadrature")?;
        }
        Ok(())
    }
}
