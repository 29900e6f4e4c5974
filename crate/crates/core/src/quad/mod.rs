//! Quadrature engines: the three-zone radial integral for kernel-weighted
//! integrands, adaptive Gauss–Kronrod, sphere rules, and Monte-Carlo pair
//! integrals with diagonal importance sampling.

pub(crate) mod adaptive;
mod gauss;
mod pair;
mod radial;
pub(crate) mod rng;
mod sphere;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub use gauss::gauss_legendre;
pub use pair::{pair_integral, Diagonal, PairDomain, PairIntegrand, PairResult};
pub use radial::{singular_radial_integral, InnerModel, RadialIntegrand, RadialResult, TailModel};
pub use sphere::SphereRule;

/// Angular quadrature used on each sphere `|y| = r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AngularRule {
    /// Fixed product rule with the given resolution (points on the circle).
    Fixed(usize),
    /// Adaptive Gauss–Kronrod on the circle; falls back to `Fixed(128)` for `N > 2`.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Radius of the Taylor-bounded inner ball.
    pub inner_cut: f64,
    /// Radius beyond which the tail is integrated radially.
    pub outer_cut: f64,
    pub angular_rule: AngularRule,
    pub mc_samples: usize,
    pub rng_seed: u64,
    /// Evaluate quadrature nodes on the rayon pool.
    pub parallel: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
            inner_cut: 1e-3,
            outer_cut: 2.0,
            angular_rule: AngularRule::Fixed(64),
            mc_samples: 1_000_000,
            rng_seed: 42,
            parallel: false,
        }
    }
}

impl QuadratureSpec {
    /// Defaults for Monte-Carlo pair integrals (relative tolerance `1e-3`).
    pub fn monte_carlo() -> Self {
        QuadratureSpec {
            rel_tol: 1e-3,
            ..Default::default()
        }
    }

    pub fn with_tolerance(self, rel_tol: f64, abs_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            abs_tol,
            ..self
        }
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        QuadratureSpec { rng_seed, ..self }
    }

    pub fn with_samples(self, mc_samples: usize) -> Self {
        QuadratureSpec { mc_samples, ..self }
    }

    pub fn with_angular(self, angular_rule: AngularRule) -> Self {
        QuadratureSpec {
            angular_rule,
            ..self
        }
    }

    pub fn parallel(self, parallel: bool) -> Self {
        QuadratureSpec { parallel, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(domain("tolerances must be positive"));
        }
        if !(self.inner_cut > 0.0 && self.inner_cut < self.outer_cut) {
            return Err(domain(format!(
                "need 0 < inner_cut < outer_cut, got {} and {}",
                self.inner_cut, self.outer_cut
            )));
        }
        if self.mc_samples < 1000 {
            return Err(domain(format!(
                "mc_samples must be at least 1000, got {}",
                self.mc_samples
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(domain("max_subdivisions must be positive"));
        }
        if let AngularRule::Fixed(n) = self.angular_rule {
            if n < 4 {
                return Err(domain("angular rule needs at least 4 points"));
            }
        }
        Ok(())
    }

    pub(crate) fn tolerance(&self) -> adaptive::Tolerance {
        adaptive::Tolerance {
            abs: self.abs_tol,
            rel: self.rel_tol,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_is_valid() {
        QuadratureSpec::default().validate().unwrap();
        QuadratureSpec::monte_carlo().validate().unwrap();
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let base = QuadratureSpec::default();
        assert!(QuadratureSpec {
            inner_cut: 3.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec {
            rel_tol: 0.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(QuadratureSpec {
            mc_samples: 10,
            ..base
        }
        .validate()
        .is_err());
        assert!(base.with_angular(AngularRule::Fixed(2)).validate().is_err());
    }
}
