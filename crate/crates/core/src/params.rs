//! Dimension/order parameters, the normalization constant of `(-Δ)^s`, and
//! the Hölder exponent laws of the carré du champ.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::special::gamma;

/// Dimension `N ≥ 2`, order `s ∈ (0, 1)` and the cached constant `C_{N,s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FracParams {
    dim: usize,
    order: f64,
    c_ns: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    dim: usize,
    order: f64,
}

impl TryFrom<RawParams> for FracParams {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        FracParams::new(raw.dim, raw.order)
    }
}

impl From<FracParams> for RawParams {
    fn from(p: FracParams) -> Self {
        RawParams {
            dim: p.dim,
            order: p.order,
        }
    }
}

impl FracParams {
    pub fn new(dim: usize, order: f64) -> Result<Self> {
        let c_ns = normalization_constant(dim, order)?;
        Ok(FracParams { dim, order, c_ns })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The order `s`.
    pub fn order(&self) -> f64 {
        self.order
    }

    /// `C_{N,s}`.
    pub fn c_ns(&self) -> f64 {
        self.c_ns
    }

    /// Exponent `N + 2s` of the singular kernel.
    pub fn kernel_exponent(&self) -> f64 {
        self.dim as f64 + 2.0 * self.order
    }

    /// Surface area `ω_{N-1}` of the unit sphere in `R^N`.
    pub fn sphere_area(&self) -> f64 {
        sphere_area(self.dim)
    }
}

/// `s 2^{2s} Γ(N/2 + s) / (π^{N/2} Γ(1 - s))`.
pub fn normalization_constant(dim: usize, order: f64) -> Result<f64> {
    if dim < 2 {
        return Err(domain(format!("dimension must be at least 2, got {dim}")));
    }
    if !(order > 0.0 && order < 1.0) {
        return Err(domain(format!("order must lie in (0, 1), got {order}")));
    }
    let half_n = dim as f64 / 2.0;
    Ok(order * 4f64.powf(order) * gamma(half_n + order) / (PI.powf(half_n) * gamma(1.0 - order)))
}

/// Surface area of the unit sphere `S^{N-1}`: `2 π^{N/2} / Γ(N/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    let half_n = dim as f64 / 2.0;
    2.0 * PI.powf(half_n) / gamma(half_n)
}

/// Volume of the unit ball in `R^N`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

/// Hölder exponents transferred by `I_s` from Hölder-`α` × Lipschitz data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderExponents {
    /// Exponent of `I_s(f, g)`: `2α - 2s` for `s ≤ 1/2`, `α - 2s + 1` otherwise.
    pub gamma_is: f64,
    /// `α / (α + 1)`.
    pub beta: f64,
    /// Exponent of `η I_s(η, f)`: `(α - 2s + 1) β`.
    pub gamma_eta: f64,
}

pub fn holder_transfer_exponents(alpha: f64, order: f64) -> Result<HolderExponents> {
    if !(order > 0.0 && order < 1.0) {
        return Err(domain(format!("order must lie in (0, 1), got {order}")));
    }
    let upper = (2.0 * order).min(1.0);
    if !(alpha > order && alpha < upper) {
        return Err(domain(format!(
            "alpha must lie in (s, min(2s, 1)) = ({order}, {upper}), got {alpha}"
        )));
    }
    let gamma_is = if order <= 0.5 {
        2.0 * alpha - 2.0 * order
    } else {
        alpha - 2.0 * order + 1.0
    };
    let beta = alpha / (alpha + 1.0);
    Ok(HolderExponents {
        gamma_is,
        beta,
        gamma_eta: (alpha - 2.0 * order + 1.0) * beta,
    })
}
