//! Cutoff constructions: the smooth spatial cutoff `η` and the radial kernel
//! cutoff `η_τ` that removes the diagonal singularity.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::field::{norm, Decay, ScalarField, Smoothness};

/// Radial cutoff with `η = 1` on `B_{1-4δ}` and `η = 0` off `B_{1-2δ}`.
///
/// The transition is the quintic smoothstep `6t^5 - 15t^4 + 10t^3` in the
/// normalized radius, which is `C^2` across both edges. Its steepest slope is
/// `15/8` over a transition of width `2δ`, giving `sup |∇η| = 15/(16δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffField {
    delta: f64,
    plateau: f64,
    support: f64,
}

pub fn make_cutoff(delta: f64) -> Result<CutoffField> {
    CutoffField::new(delta)
}

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
}

fn smoothstep_slope(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    30.0 * t * t * (1.0 - t) * (1.0 - t)
}

impl CutoffField {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.25) {
            return Err(domain(format!(
                "cutoff delta must lie in (0, 1/4), got {delta}"
            )));
        }
        Ok(CutoffField {
            delta,
            plateau: 1.0 - 4.0 * delta,
            support: 1.0 - 2.0 * delta,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Radius of the ball where `η ≡ 1`.
    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    /// Radius outside which `η ≡ 0`.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// Radial profile `η(r)`.
    pub fn profile(&self, r: f64) -> f64 {
        if r <= self.plateau {
            1.0
        } else if r >= self.support {
            0.0
        } else {
            smoothstep((self.support - r) / (self.support - self.plateau))
        }
    }

    /// `d η / d r`, nonpositive.
    pub fn profile_slope(&self, r: f64) -> f64 {
        let width = self.support - self.plateau;
        -smoothstep_slope((self.support - r) / width) / width
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.profile(norm(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let slope = self.profile_slope(r);
        x.iter().map(|v| slope * v / r).collect()
    }

    /// Analytic bound `15 / (16 δ)` on `|∇η|`.
    pub fn gradient_bound(&self) -> f64 {
        15.0 / (16.0 * self.delta)
    }

    pub fn to_field(&self) -> ScalarField {
        let eta = *self;
        ScalarField::new(
            format!("cutoff(δ={})", self.delta),
            Smoothness::C2,
            Decay::CompactSupport {
                radius: self.support,
            },
            move |x| eta.eval(x),
        )
        .with_features([self.plateau, self.support])
    }
}

/// Piecewise-linear `η_τ`: 0 on `[0, τ/2]`, `2t/τ - 1` on `[τ/2, τ]`, 1 beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    tau: f64,
}

impl RadialCutoff {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 0.5) {
            return Err(domain(format!("tau must lie in (0, 1/2), got {tau}")));
        }
        Ok(RadialCutoff { tau })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.5 * self.tau {
            0.0
        } else if t >= self.tau {
            1.0
        } else {
            2.0 * t / self.tau - 1.0
        }
    }

    /// Radius below which `η_τ` vanishes.
    pub fn dead_zone(&self) -> f64 {
        0.5 * self.tau
    }
}
