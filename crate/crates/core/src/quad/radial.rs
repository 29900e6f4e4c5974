//! Three-zone integration of `∫_{R^N} f(y) dy` in polar coordinates.
//!
//! * inner ball `|y| < inner_cut`: the shell function is assumed to follow its
//!   leading Taylor power, `shell(r) ≈ c r^q`; `c` is read off at the cut and
//!   the half-cut, and their mismatch bounds the remainder.
//! * middle annuli: globally adaptive Gauss–Kronrod, graded geometrically
//!   away from the inner cut, with caller-supplied breakpoints.
//! * tail `|y| > outer_cut`: closed form when the shell is an exact power,
//!   otherwise the substitution `r = R t^{-1/a}` maps it to `t ∈ (0, 1]`.

use serde::{Deserialize, Serialize};

use super::adaptive::{integrate, Map, Segment, Tolerance};
use super::sphere::{adaptive_circle, SphereRule};
use super::{AngularRule, QuadratureSpec};
use crate::error::{domain, Error, Result, Zone};

/// Behaviour of the integrand near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerModel {
    /// `shell(r) = r^{N-1} ∫_S f(r θ) dθ ~ c r^q` as `r → 0`, with `q > -1`.
    Power(f64),
    /// The integrand vanishes for `|y| < below`.
    Vanishing { below: f64 },
}

/// Behaviour of the integrand at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// Vanishes for `|y| > beyond`.
    Zero { beyond: f64 },
    /// `shell(r) = coef · r^{-1-rate}` exactly for `r ≥ beyond`.
    Exact { beyond: f64, coef: f64, rate: f64 },
    /// `shell(r) = O(r^{-1-rate})`; integrated numerically after substitution.
    Decaying { rate: f64 },
}

pub struct RadialIntegrand<'a> {
    pub dim: usize,
    /// `f(r, θ)`: the integrand at `y = r θ`.
    pub f: &'a (dyn Fn(f64, &[f64]) -> f64 + Sync),
    pub inner: InnerModel,
    pub tail: TailModel,
    /// Radii where the shell function may be non-smooth.
    pub breakpoints: Vec<f64>,
    /// Angles on the circle `|y| = r` where `f(r, ·)` may be rough; used by
    /// the adaptive rule in two dimensions.
    pub angular_breaks: Option<&'a (dyn Fn(f64) -> Vec<f64> + Sync)>,
}

impl<'a> RadialIntegrand<'a> {
    pub fn new(
        dim: usize,
        f: &'a (dyn Fn(f64, &[f64]) -> f64 + Sync),
        inner: InnerModel,
        tail: TailModel,
    ) -> Self {
        RadialIntegrand {
            dim,
            f,
            inner,
            tail,
            breakpoints: Vec::new(),
            angular_breaks: None,
        }
    }

    pub fn with_breakpoints(mut self, radii: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(radii);
        self
    }

    pub fn with_angular_breaks(mut self, breaks: &'a (dyn Fn(f64) -> Vec<f64> + Sync)) -> Self {
        self.angular_breaks = Some(breaks);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialResult {
    pub value: f64,
    pub err_est: f64,
    pub inner: f64,
    pub middle: f64,
    pub tail: f64,
    pub evaluations: usize,
}

enum Angular {
    Fixed(SphereRule),
    Circle(Tolerance),
}

impl Angular {
    fn new(dim: usize, spec: &QuadratureSpec) -> Self {
        match spec.angular_rule {
            AngularRule::Fixed(n) => Angular::Fixed(SphereRule::new(dim, n)),
            AngularRule::Adaptive if dim == 2 => Angular::Circle(Tolerance {
                abs: 1e-2 * spec.abs_tol,
                rel: 1e-2 * spec.rel_tol,
            }),
            AngularRule::Adaptive => Angular::Fixed(SphereRule::new(dim, 128)),
        }
    }

    fn integrate(&self, f: &(dyn Fn(&[f64]) -> f64 + Sync), breaks: &[f64]) -> f64 {
        match self {
            Angular::Fixed(rule) => rule.integrate(f),
            Angular::Circle(tol) => {
                adaptive_circle(f, breaks.first().copied().unwrap_or(0.0), breaks, *tol, 400).0
            }
        }
    }
}

/// Retries with the inner cut divided by 4 while the inner remainder alone
/// defeats the tolerance, at most [`INNER_RETRIES`] times.
pub fn singular_radial_integral(
    integrand: &RadialIntegrand<'_>,
    spec: &QuadratureSpec,
) -> Result<RadialResult> {
    let mut spec = *spec;
    let mut tries = 0;
    loop {
        match radial_once(integrand, &spec) {
            Err(Error::ConvergenceFailure {
                zone: Zone::Inner, ..
            }) if tries < INNER_RETRIES && matches!(integrand.inner, InnerModel::Power(_)) => {
                spec.inner_cut *= 0.25;
                tries += 1;
            }
            r => return r,
        }
    }
}

const INNER_RETRIES: usize = 4;

fn radial_once(integrand: &RadialIntegrand<'_>, spec: &QuadratureSpec) -> Result<RadialResult> {
    spec.validate()?;
    let dim = integrand.dim;
    if dim < 2 {
        return Err(domain("radial integrals need N >= 2"));
    }
    let angular = Angular::new(dim, spec);
    let f = integrand.f;
    let shell = |r: f64| -> f64 {
        let fr = |theta: &[f64]| f(r, theta);
        let breaks = match (&angular, integrand.angular_breaks) {
            (Angular::Circle(_), Some(b)) => b(r),
            _ => Vec::new(),
        };
        let s = angular.integrate(&fr, &breaks);
        if s == 0.0 {
            0.0
        } else {
            s * r.powi(dim as i32 - 1)
        }
    };

    let (start, inner_value, inner_err) = match integrand.inner {
        InnerModel::Power(q) => {
            if q <= -1.0 {
                return Err(domain(format!("inner power {q} is not integrable")));
            }
            let eps = spec.inner_cut;
            let c1 = shell(eps) / eps.powf(q);
            let c2 = shell(0.5 * eps) / (0.5 * eps).powf(q);
            let mass = eps.powf(q + 1.0) / (q + 1.0);
            (eps, c1 * mass, (4.0 / 3.0) * (c1 - c2).abs() * mass)
        }
        InnerModel::Vanishing { below } => (below.max(0.0), 0.0, 0.0),
    };

    let (outer, closed_tail, tail_segment) = match integrand.tail {
        TailModel::Zero { beyond } => (beyond.max(start), 0.0, None),
        TailModel::Exact { beyond, coef, rate } => {
            let o = beyond.max(spec.outer_cut).max(start);
            (o, coef * o.powf(-rate) / rate, None)
        }
        TailModel::Decaying { rate } => {
            if !(rate > 0.0) {
                return Err(Error::Divergence(format!(
                    "tail decay rate {rate} is not positive"
                )));
            }
            let o = spec.outer_cut.max(2.0 * start);
            let seg = Segment {
                a: 0.0,
                b: 1.0,
                map: Map::Tail { from: o, rate },
                zone: Zone::Tail,
            };
            (o, 0.0, Some(seg))
        }
    };

    let mut pts = vec![start];
    if matches!(integrand.inner, InnerModel::Power(_)) || start > 0.0 {
        let mut r = if start > 0.0 { 4.0 * start } else { outer };
        while r < outer {
            pts.push(r);
            r *= 4.0;
        }
    }
    pts.extend(
        integrand
            .breakpoints
            .iter()
            .copied()
            .filter(|&b| b > start && b < outer),
    );
    pts.push(outer);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));

    let mut segments: Vec<Segment> = pts
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Segment::linear(w[0], w[1], Zone::Middle))
        .collect();
    if let Some(seg) = tail_segment {
        segments.push(seg);
    }

    let tol = spec.tolerance();
    let out = integrate(
        &segments,
        &shell,
        tol,
        inner_value + closed_tail,
        inner_err,
        spec.max_subdivisions,
        spec.parallel,
    );
    let value = out.value + inner_value + closed_tail;
    let err_est = out.err + inner_err;
    if !out.converged && err_est > tol.target(value) {
        let zone = if inner_err > out.err {
            Zone::Inner
        } else {
            out.worst_zone
        };
        return Err(Error::ConvergenceFailure {
            zone,
            last_err: err_est,
        });
    }
    Ok(RadialResult {
        value,
        err_est,
        inner: inner_value,
        middle: out.middle,
        tail: out.tail + closed_tail,
        evaluations: out.evaluations
            + if matches!(integrand.inner, InnerModel::Power(_)) {
                2
            } else {
                0
            },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_integrand() {
        let f = |_: f64, _: &[f64]| 0.0;
        let res = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Power(1.0),
                tail: TailModel::Decaying { rate: 1.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(res.value, 0.0);
        assert_eq!(res.err_est, 0.0);
    }

    #[test]
    fn power_shell_tail_closed_form() {
        // ∫_{|y|>1} |y|^{-N-2s} dy = ω R^{-2s} / (2s) = 2π for N=2, s=1/2
        let f = |r: f64, _: &[f64]| r.powf(-3.0);
        let res = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Vanishing { below: 1.0 },
                tail: TailModel::Decaying { rate: 1.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((res.value - 2.0 * PI).abs() < 1e-9, "{}", res.value);
        assert!((res.value - 2.0 * PI).abs() <= 3.0 * res.err_est + 1e-12);
    }

    #[test]
    fn self_normalized_gaussian() {
        let f = |r: f64, _: &[f64]| (-PI * r * r).exp();
        let res = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Power(1.0),
                tail: TailModel::Decaying { rate: 1.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((res.value - 1.0).abs() < 1e-8, "{}", res.value);
    }

    #[test]
    fn exact_tail_is_used() {
        let f = |r: f64, _: &[f64]| if r > 0.5 { r.powf(-2.5) } else { 0.0 };
        let spec = QuadratureSpec::default();
        let res = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Vanishing { below: 0.5 },
                tail: TailModel::Exact {
                    beyond: 0.5,
                    coef: 2.0 * PI,
                    rate: 0.5,
                },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &spec,
        )
        .unwrap();
        let exact = 2.0 * PI * 0.5f64.powf(-0.5) / 0.5;
        assert!(((res.value - exact) / exact).abs() < 1e-9);
        assert!(res.tail > 0.0);
    }

    #[test]
    fn inner_power_zone() {
        // shell = 2π r^{1}·r^{-2s}·... : f = |y|^{-2s} in N=2 has shell 2π r^{1-2s}
        let s = 0.75;
        let f = move |r: f64, _: &[f64]| if r < 1.0 { r.powf(-2.0 * s) } else { 0.0 };
        let res = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Power(1.0 - 2.0 * s),
                tail: TailModel::Zero { beyond: 1.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &QuadratureSpec::default().with_tolerance(1e-10, 1e-14),
        )
        .unwrap();
        let exact = 2.0 * PI / (2.0 - 2.0 * s);
        assert!(((res.value - exact) / exact).abs() < 1e-9, "{}", res.value);
        assert!(res.inner > 0.0);
    }

    #[test]
    fn divergent_tail_rejected() {
        let f = |_: f64, _: &[f64]| 1.0;
        let err = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Power(1.0),
                tail: TailModel::Decaying { rate: 0.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &QuadratureSpec::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn convergence_failure_reports_zone() {
        let f = |r: f64, _: &[f64]| (1.0 / (r - 0.7)).sin() / (r - 0.7).abs().sqrt();
        let spec = QuadratureSpec {
            max_subdivisions: 12,
            ..QuadratureSpec::default()
        }
        .with_tolerance(1e-12, 1e-15);
        let err = singular_radial_integral(
            &RadialIntegrand {
                dim: 2,
                f: &f,
                inner: InnerModel::Vanishing { below: 0.5 },
                tail: TailModel::Zero { beyond: 1.0 },
                breakpoints: vec![],
                angular_breaks: None,
            },
            &spec,
        )
        .unwrap_err();
        match err {
            Error::ConvergenceFailure { zone, last_err } => {
                assert_eq!(zone, Zone::Middle);
                assert!(last_err > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
