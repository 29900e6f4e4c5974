//! Named test fields.
//!
//! | name | field | smoothness | decay |
//! |---|---|---|---|
//! | `constant` | `1` | analytic | bounded |
//! | `affine` | `1 + x₁ - x₂/2` | analytic | weighted, growth 1 |
//! | `gaussian` | `e^{-π|x|²}` | analytic | weighted, fast decay |
//! | `bump(r)` | `exp(1 - 1/(1 - |x|²/r²))` | `C^∞` | support `r` |
//! | `holder-cusp(α)` | `|x₁|^α · bump(1)` | Hölder `α` | support 1 |
//! | `halfspace-indicator` | `1{x₁ > 0}` | discontinuous | bounded |
//! | `getoor(s)` | `(1 - |x|²)_+^s` | Hölder `s` | support 1 |

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{Decay, Envelope, Hyperplane, ScalarField, Smoothness};

pub const PRESET_NAMES: [&str; 7] = [
    "constant",
    "affine",
    "gaussian",
    "bump",
    "holder-cusp",
    "halfspace-indicator",
    "getoor",
];

/// Parses `name` or `name(arg)`.
fn split(spec: &str) -> Result<(&str, Option<f64>)> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec, None));
    };
    let inner = spec[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::UnknownPreset(spec.to_string()))?;
    let arg: f64 = inner
        .trim()
        .parse()
        .map_err(|_| Error::UnknownPreset(spec.to_string()))?;
    Ok((spec[..open].trim(), Some(arg)))
}

pub fn preset_field(name: &str) -> Result<ScalarField> {
    let (base, arg) = split(name)?;
    let bad = || Error::UnknownPreset(name.to_string());
    match (base, arg) {
        ("constant", None) => Ok(constant(1.0)),
        ("affine", None) => Ok(affine()),
        ("gaussian", None) => Ok(gaussian()),
        ("bump", r) => {
            let r = r.unwrap_or(1.0);
            if !(r > 0.0) {
                return Err(bad());
            }
            Ok(bump(r))
        }
        ("holder-cusp", a) => {
            let a = a.unwrap_or(0.5);
            if !(a > 0.0 && a < 1.0) {
                return Err(bad());
            }
            Ok(holder_cusp(a))
        }
        ("halfspace-indicator", None) => Ok(halfspace_indicator()),
        ("getoor", s) => {
            let s = s.unwrap_or(0.5);
            if !(s > 0.0 && s < 1.0) {
                return Err(bad());
            }
            Ok(getoor(s))
        }
        _ => Err(bad()),
    }
}

pub fn constant(c: f64) -> ScalarField {
    ScalarField::new(
        "constant",
        Smoothness::Analytic,
        Decay::Bounded { bound: c.abs() },
        move |_| c,
    )
    .with_derivative(move |idx, _| if idx.iter().all(|&k| k == 0) { c } else { 0.0 })
}

pub fn affine() -> ScalarField {
    let decay = Decay::WeightedL1 {
        envelope: Envelope {
            scale: 1.5,
            growth: 1.0,
        },
    };
    ScalarField::new("affine", Smoothness::Analytic, decay, |x| {
        1.0 + x[0] - 0.5 * x.get(1).copied().unwrap_or(0.0)
    })
    .with_derivative(|idx, x| {
        let order: usize = idx.iter().sum();
        match order {
            0 => 1.0 + x[0] - 0.5 * x.get(1).copied().unwrap_or(0.0),
            1 if idx[0] == 1 => 1.0,
            1 if idx.get(1) == Some(&1) => -0.5,
            _ => 0.0,
        }
    })
}

/// Physicists' Hermite polynomial `H_n(t)`.
fn hermite(n: usize, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * t);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * t * b - 2.0 * k as f64 * a;
        a = b;
        b = c;
    }
    b
}

pub fn gaussian() -> ScalarField {
    // sup_r (1 + r)^8 e^{-π r²} ≈ 15.1
    let decay = Decay::WeightedL1 {
        envelope: Envelope {
            scale: 16.0,
            growth: -8.0,
        },
    };
    ScalarField::new("gaussian", Smoothness::Analytic, decay, |x| {
        (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp()
    })
    .with_derivative(|idx, x| {
        let sp = PI.sqrt();
        let mut acc = (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp();
        for (&k, &xi) in idx.iter().zip(x) {
            if k > 0 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc *= sign * sp.powi(k as i32) * hermite(k, sp * xi);
            }
        }
        acc
    })
}

pub fn bump(radius: f64) -> ScalarField {
    ScalarField::new(
        format!("bump({radius})"),
        Smoothness::CInfinity,
        Decay::CompactSupport { radius },
        move |x| {
            let t = x.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
            if t < 1.0 {
                (1.0 - 1.0 / (1.0 - t)).exp()
            } else {
                0.0
            }
        },
    )
}

fn first_axis() -> Hyperplane {
    Hyperplane {
        normal: vec![1.0, 0.0],
        offset: 0.0,
    }
}

pub fn holder_cusp(alpha: f64) -> ScalarField {
    let b = bump(1.0);
    ScalarField::new(
        format!("holder-cusp({alpha})"),
        Smoothness::Holder(alpha),
        Decay::CompactSupport { radius: 1.0 },
        move |x| x[0].abs().powf(alpha) * b.eval(x),
    )
    .with_discontinuity(first_axis())
}

pub fn halfspace_indicator() -> ScalarField {
    ScalarField::new(
        "halfspace-indicator",
        Smoothness::Discontinuous,
        Decay::Bounded { bound: 1.0 },
        |x| {
            if x[0] > 0.0 {
                1.0
            } else {
                0.0
            }
        },
    )
    .with_discontinuity(first_axis())
}

pub fn getoor(order: f64) -> ScalarField {
    ScalarField::new(
        format!("getoor({order})"),
        Smoothness::Holder(order),
        Decay::CompactSupport { radius: 1.0 },
        move |x| {
            let t = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
            if t > 0.0 {
                t.powf(order)
            } else {
                0.0
            }
        },
    )
}
