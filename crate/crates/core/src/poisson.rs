//! Dirichlet problem for `(-Δ)^s` in a ball with exterior data.
//!
//! The solution is the Poisson integral
//! `u_h(x) = ∫_{|y|>ρ} P_ρ(x, y) h(y) dy`,
//! `P_ρ(x, y) = c ((ρ² - |x|²)/(|y|² - ρ²))^s |x - y|^{-N}`.
//!
//! Radial integration over `|y| = t` uses three zones: the near-boundary
//! shell `ρ < t < 2ρ - |x|` under `t = ρ + ρ σ^{1/(1-s)}`, which removes the
//! `(t² - ρ²)^{-s}` singularity; graded middle shells; and a mapped tail.
//! In two dimensions the circle `|y| = t` is parametrized by the harmonic
//! measure of `x`, in which `|x - y|^{-2} dφ` is constant, so the peak of the
//! kernel at `x/|x|` is flattened before any quadrature is applied.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result, Zone};
use crate::field::{norm, Decay, Hyperplane, ScalarField, Smoothness};
use crate::ops::{eval_shifted, frac_laplacian, second_difference, OperatorResult, Zones};
use crate::params::{sphere_area, FracParams};
use crate::quad::adaptive::{integrate, integrate_interval, Map, Segment, Tolerance};
use crate::quad::rng::stream;
use crate::quad::{
    singular_radial_integral, AngularRule, InnerModel, QuadratureSpec, RadialIntegrand, SphereRule,
    TailModel,
};
use crate::special::gamma;

/// Largest derivative order accepted by the jet evaluator.
pub const MAX_DERIVATIVE_ORDER: usize = 6;

const WOS_BATCH: usize = 4096;
const MIN_ACCEPTANCE: f64 = 1e-4;
const TRAPEZOID_START: usize = 16;
const MAX_TRAPEZOID: usize = 8192;

fn check_ball(rho: f64, x: &[f64], params: &FracParams) -> Result<f64> {
    if x.len() != params.dim() {
        return Err(domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            params.dim()
        )));
    }
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain(format!("ball radius must be positive, got {rho}")));
    }
    if x.iter().any(|c| !c.is_finite()) {
        return Err(domain("point has non-finite coordinates"));
    }
    let a = norm(x);
    if a >= rho {
        return Err(domain(format!(
            "|x| = {a} is not inside the ball of radius {rho}"
        )));
    }
    Ok(a)
}

fn check_exterior(rho: f64, y: &[f64], params: &FracParams) -> Result<f64> {
    if y.len() != params.dim() || y.iter().any(|c| !c.is_finite()) {
        return Err(domain(
            "exterior point has the wrong dimension or non-finite coordinates",
        ));
    }
    let t = norm(y);
    if t <= rho {
        return Err(domain(format!(
            "|y| = {t} is not outside the ball of radius {rho}"
        )));
    }
    Ok(t)
}

fn dist_pow(x: &[f64], y: &[f64], p: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    d2.powf(-0.5 * p)
}

/// The kernel with the printed constant `C_{N,s}` of the fractional
/// Laplacian.
pub fn poisson_kernel(rho: f64, x: &[f64], y: &[f64], params: &FracParams) -> Result<f64> {
    let a = check_ball(rho, x, params)?;
    let t = check_exterior(rho, y, params)?;
    Ok(params.c_ns() * kernel_shape(rho, a, t, x, y, params))
}

fn kernel_shape(rho: f64, a: f64, t: f64, x: &[f64], y: &[f64], params: &FracParams) -> f64 {
    let s = params.order();
    let inside = (rho - a) * (rho + a);
    let outside = (t - rho) * (t + rho);
    (inside / outside).powf(s) * dist_pow(x, y, params.dim() as f64)
}

/// The constant `Γ(N/2) sin(πs) / π^{N/2+1}` that gives the kernel unit mass.
pub fn kernel_constant(dim: usize, order: f64) -> f64 {
    let n = dim as f64;
    gamma(0.5 * n) * (PI * order).sin() / PI.powf(0.5 * n + 1.0)
}

/// The kernel with unit mass; the solver integrates against this one.
pub fn normalized_poisson_kernel(
    rho: f64,
    x: &[f64],
    y: &[f64],
    params: &FracParams,
) -> Result<f64> {
    let a = check_ball(rho, x, params)?;
    let t = check_exterior(rho, y, params)?;
    Ok(kernel_constant(params.dim(), params.order()) * kernel_shape(rho, a, t, x, y, params))
}

/// Mass of the kernel, measured by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelNormalization {
    /// `∫ P dy` with the unit-mass constant.
    pub mass: f64,
    pub err_est: f64,
    /// `∫ P dy` with the printed constant `C_{N,s}`.
    pub printed_mass: f64,
    pub printed_constant: f64,
    /// The constant that makes the measured integral equal to one.
    pub discovered_constant: f64,
}

pub fn kernel_normalization(
    rho: f64,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<KernelNormalization> {
    let a = check_ball(rho, x, params)?;
    spec.validate()?;
    let n = params.dim() as f64;
    let amp = ((rho - a) * (rho + a)).powf(params.order());
    let g = move |y: &[f64]| amp * dist_pow(x, y, n);
    let weighted = move |_: &[f64], t2a2: f64| amp / t2a2;
    let job = Exterior {
        rho,
        x,
        params,
        g: &g,
        tail_rate: 2.0 * params.order(),
        support: None,
        radial_breaks: Vec::new(),
        planes: &[],
        smooth: true,
        psi_weighted: (params.dim() == 2)
            .then_some(&weighted as &(dyn Fn(&[f64], f64) -> f64 + Sync)),
    };
    let out = job.integrate(spec, spec.abs_tol)?;
    let c = kernel_constant(params.dim(), params.order());
    Ok(KernelNormalization {
        mass: c * out.value,
        err_est: c * out.err_est,
        printed_mass: params.c_ns() * out.value,
        printed_constant: params.c_ns(),
        discovered_constant: 1.0 / out.value,
    })
}

/// Ball radius, exterior datum, order and quadrature settings.
#[derive(Debug, Clone)]
pub struct BallProblem {
    pub rho: f64,
    pub exterior: ScalarField,
    pub params: FracParams,
    pub spec: QuadratureSpec,
}

impl BallProblem {
    pub fn new(
        rho: f64,
        exterior: ScalarField,
        params: FracParams,
        spec: QuadratureSpec,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(domain(format!("ball radius must lie in (0, 1], got {rho}")));
        }
        spec.validate()?;
        if exterior.decay.support_radius().is_none()
            && exterior.decay.tail_rate(params.order()) <= 0.0
        {
            return Err(Error::Divergence(format!(
                "{}: growth {} is not below 2s = {}",
                exterior.label(),
                exterior.decay.growth(),
                2.0 * params.order()
            )));
        }
        Ok(BallProblem {
            rho,
            exterior,
            params,
            spec,
        })
    }

    pub fn with_spec(mut self, spec: QuadratureSpec) -> Self {
        self.spec = spec;
        self
    }

    fn job<'a>(
        &'a self,
        x: &'a [f64],
        g: &'a (dyn Fn(&[f64]) -> f64 + Sync),
        smooth: bool,
    ) -> Exterior<'a> {
        let h = &self.exterior;
        let mut radial_breaks: Vec<f64> = h.features.clone();
        for p in &h.discontinuities {
            radial_breaks.push(p.signed_distance(&vec![0.0; x.len()]).abs());
        }
        Exterior {
            rho: self.rho,
            x,
            params: &self.params,
            g,
            tail_rate: h.decay.tail_rate(self.params.order()),
            support: h.decay.support_radius(),
            radial_breaks,
            planes: &h.discontinuities,
            smooth: smooth && h.discontinuities.is_empty() && h.smoothness >= Smoothness::C2,
            psi_weighted: None,
        }
    }
}

/// `u_h(x)`; zones are the near-boundary shell, the middle shells and the tail.
pub fn solve_dirichlet(problem: &BallProblem, x: &[f64]) -> Result<OperatorResult> {
    let a = check_ball(problem.rho, x, &problem.params)?;
    let s = problem.params.order();
    let n = problem.params.dim() as f64;
    let rho = problem.rho;
    let amp = kernel_constant(problem.params.dim(), s) * ((rho - a) * (rho + a)).powf(s);
    let h = &problem.exterior;
    let g = move |y: &[f64]| {
        let v = h.eval(y);
        if v == 0.0 {
            0.0
        } else {
            amp * v * dist_pow(x, y, n)
        }
    };
    let weighted = move |y: &[f64], t2a2: f64| {
        let v = h.eval(y);
        if v == 0.0 {
            0.0
        } else {
            amp * v / t2a2
        }
    };
    let mut job = problem.job(x, &g, true);
    if problem.params.dim() == 2 {
        job.psi_weighted = Some(&weighted);
    }
    job.integrate(&problem.spec, problem.spec.abs_tol)
}

/// Truncated multivariate Taylor series on the box `0 ≤ β ≤ ι`.
struct Jets {
    bounds: Vec<usize>,
    digits: Vec<Vec<usize>>,
    strides: Vec<usize>,
}

impl Jets {
    fn new(iota: &[usize]) -> Self {
        let bounds: Vec<usize> = iota.to_vec();
        let mut strides = vec![1usize; bounds.len()];
        for i in 1..bounds.len() {
            strides[i] = strides[i - 1] * (bounds[i - 1] + 1);
        }
        let len = bounds.iter().map(|b| b + 1).product::<usize>();
        let digits = (0..len)
            .map(|mut k| {
                bounds
                    .iter()
                    .map(|b| {
                        let d = k % (b + 1);
                        k /= b + 1;
                        d
                    })
                    .collect()
            })
            .collect();
        Jets {
            bounds,
            digits,
            strides,
        }
    }

    fn len(&self) -> usize {
        self.digits.len()
    }

    fn mul(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0.0 {
                continue;
            }
            let di = &self.digits[i];
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0.0 {
                    continue;
                }
                let dj = &self.digits[j];
                if di
                    .iter()
                    .zip(dj)
                    .zip(&self.bounds)
                    .all(|((p, q), m)| p + q <= *m)
                {
                    out[i + j] += ai * bj;
                }
            }
        }
        out
    }

    /// `f^α` for `f` with positive constant term.
    fn pow(&self, f: &[f64], alpha: f64) -> Vec<f64> {
        let f0 = f[0];
        let mut g: Vec<f64> = f.iter().map(|v| v / f0).collect();
        g[0] = 0.0;
        let order: usize = self.bounds.iter().sum();
        let mut out = vec![0.0; self.len()];
        out[0] = 1.0;
        let mut power = out.clone();
        let mut binom = 1.0;
        for k in 1..=order {
            power = self.mul(&power, &g);
            binom *= (alpha - (k - 1) as f64) / k as f64;
            for (o, p) in out.iter_mut().zip(&power) {
                *o += binom * p;
            }
        }
        let scale = f0.powf(alpha);
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Quadratic polynomial `c0 + Σ lin_i δ_i + quad Σ δ_i²`.
    fn quadratic(&self, c0: f64, lin: &[f64], quad: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        out[0] = c0;
        for (i, &l) in lin.iter().enumerate() {
            if self.bounds[i] >= 1 {
                out[self.strides[i]] = l;
            }
            if self.bounds[i] >= 2 {
                out[2 * self.strides[i]] = quad;
            }
        }
        out
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn check_multi_index(iota: &[usize], dim: usize) -> Result<usize> {
    if iota.len() != dim {
        return Err(domain(format!(
            "multi-index has {} entries, expected {dim}",
            iota.len()
        )));
    }
    let order: usize = iota.iter().sum();
    if order > MAX_DERIVATIVE_ORDER {
        return Err(domain(format!(
            "derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"
        )));
    }
    Ok(order)
}

/// `∂^ι_x [(ρ² - |x|²)^s |x - y|^{-N}]`.
fn shape_derivative(
    jets: &Jets,
    iota: &[usize],
    rho: f64,
    x: &[f64],
    y: &[f64],
    s: f64,
    n: f64,
) -> f64 {
    let a2: f64 = x.iter().map(|v| v * v).sum();
    let lin_a: Vec<f64> = x.iter().map(|v| -2.0 * v).collect();
    let ja = jets.quadratic(rho * rho - a2, &lin_a, -1.0);
    let b2: f64 = x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum();
    let lin_b: Vec<f64> = x.iter().zip(y).map(|(p, q)| 2.0 * (p - q)).collect();
    let jb = jets.quadratic(b2, &lin_b, 1.0);
    let prod = jets.mul(&jets.pow(&ja, s), &jets.pow(&jb, -0.5 * n));
    let top = jets.len() - 1;
    prod[top] * iota.iter().map(|&k| factorial(k)).product::<f64>()
}

/// `∂^ι_x P_ρ(x, y)` for the printed kernel, by truncated Taylor arithmetic.
pub fn kernel_derivative(
    rho: f64,
    x: &[f64],
    y: &[f64],
    iota: &[usize],
    params: &FracParams,
) -> Result<f64> {
    check_multi_index(iota, params.dim())?;
    let a = check_ball(rho, x, params)?;
    let t = check_exterior(rho, y, params)?;
    let s = params.order();
    if iota.iter().all(|&k| k == 0) {
        return Ok(params.c_ns() * kernel_shape(rho, a, t, x, y, params));
    }
    let jets = Jets::new(iota);
    let outside = ((t - rho) * (t + rho)).powf(-s);
    Ok(params.c_ns() * outside * shape_derivative(&jets, iota, rho, x, y, s, params.dim() as f64))
}

/// `D^ι u_h(x) = ∫ ∂^ι_x P_ρ(x, y) h(y) dy` with the unit-mass kernel.
///
/// The absolute tolerance is raised to `rel_tol ∫ |∂^ι P h|`, since the
/// integrand changes sign and the value may vanish by symmetry.
pub fn solution_derivative(
    problem: &BallProblem,
    x: &[f64],
    iota: &[usize],
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    check_multi_index(iota, problem.params.dim())?;
    check_ball(problem.rho, x, &problem.params)?;
    spec.validate()?;
    if iota.iter().all(|&k| k == 0) {
        return solve_dirichlet(&problem.clone().with_spec(*spec), x);
    }
    let s = problem.params.order();
    let n = problem.params.dim() as f64;
    let rho = problem.rho;
    let c = kernel_constant(problem.params.dim(), s);
    let jets = Jets::new(iota);
    let h = &problem.exterior;
    let g = |y: &[f64]| {
        let v = h.eval(y);
        if v == 0.0 {
            0.0
        } else {
            c * v * shape_derivative(&jets, iota, rho, x, y, s, n)
        }
    };
    let g_abs = |y: &[f64]| g(y).abs();
    let loose = QuadratureSpec {
        rel_tol: 1e-3,
        ..*spec
    };
    let magnitude = problem
        .job(x, &g_abs, false)
        .integrate(&loose, spec.abs_tol)?
        .value;
    let abs_tol = spec.abs_tol.max(spec.rel_tol * magnitude);
    problem.job(x, &g, true).integrate(spec, abs_tol)
}

/// Integral of `g(y) (|y|² - ρ²)^{-s}` over `|y| > ρ`.
struct Exterior<'a> {
    rho: f64,
    x: &'a [f64],
    params: &'a FracParams,
    g: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    /// `t^{N-1} |g| (t² - ρ²)^{-s} = O(t^{-1-rate})`.
    tail_rate: f64,
    support: Option<f64>,
    radial_breaks: Vec<f64>,
    planes: &'a [Hyperplane],
    /// `g` is smooth on every circle, so the periodic trapezoid rule applies.
    smooth: bool,
    /// In two dimensions, `g(y) dφ/dψ` in closed form given `y` and
    /// `t² - |x|²`, for integrands `g = c h(y) |x - y|^{-2}`.
    psi_weighted: Option<&'a (dyn Fn(&[f64], f64) -> f64 + Sync)>,
}

impl Exterior<'_> {
    fn integrate(&self, spec: &QuadratureSpec, abs_tol: f64) -> Result<OperatorResult> {
        let rho = self.rho;
        let s = self.params.order();
        let dim = self.params.dim();
        let a = norm(self.x);
        let outer = match self.support {
            Some(r) if r <= rho => return Ok(OperatorResult::zero()),
            Some(r) => Some(r),
            None => None,
        };
        if outer.is_none() && self.tail_rate <= 0.0 {
            return Err(Error::Divergence(format!(
                "exterior tail rate {} is not positive",
                self.tail_rate
            )));
        }

        let angular_failures = AtomicUsize::new(0);
        // N ≥ 3: polar angle about x/|x| done adaptively, the remaining
        // sphere S^{N-2} by a fixed rule in the complement of the axis
        let (frame, rule) = if dim > 2 {
            let res = match spec.angular_rule {
                AngularRule::Fixed(n) => n,
                AngularRule::Adaptive => 32,
            };
            let axis: Vec<f64> = if a > 0.0 {
                self.x.iter().map(|c| c / a).collect()
            } else {
                unit(dim, 0)
            };
            (
                Some(PolarFrame::new(axis)),
                Some(SphereRule::new(dim - 1, res)),
            )
        } else {
            (None, None)
        };
        let m0 = TRAPEZOID_START;
        let ang_rel = 1e-2 * spec.rel_tol;
        let ang_abs = 1e-3 * abs_tol;
        let phi_x = if a > 0.0 {
            self.x[1].atan2(self.x[0])
        } else {
            0.0
        };

        let da = rho - a;
        // `tmr = t - ρ`, passed separately to keep `t - |x|` accurate
        let angular = |t: f64, tmr: f64| -> f64 {
            if let (Some(frame), Some(rule)) = (&frame, &rule) {
                let sin_pow = (dim - 2) as i32;
                let ring = |theta: f64| -> f64 {
                    let (sn, cs) = theta.sin_cos();
                    let mut y = vec![0.0; dim];
                    let v = rule.integrate(|om| {
                        frame.place(t, cs, sn, om, &mut y);
                        (self.g)(&y)
                    });
                    v * sn.powi(sin_pow)
                };
                let w = ((t - a) / t).max(1e-12);
                let breaks: Vec<f64> = (0..60)
                    .map(|k| w * 2f64.powi(k))
                    .take_while(|&b| b < PI)
                    .collect();
                let out = integrate_interval(
                    &ring,
                    0.0,
                    PI,
                    &breaks,
                    Tolerance {
                        abs: ang_abs,
                        rel: ang_rel,
                    },
                    400,
                );
                if !out.converged {
                    angular_failures.fetch_add(1, Ordering::Relaxed);
                }
                return out.value;
            }
            let tma = tmr + da;
            let k = tma / (t + a);
            let point = |psi: f64| -> f64 {
                let half = 0.5 * psi;
                let (sn, cs) = half.sin_cos();
                let phi = phi_x + 2.0 * (k * sn).atan2(cs);
                let y = [t * phi.cos(), t * phi.sin()];
                match self.psi_weighted {
                    Some(w) => w(&y, tma * (t + a)),
                    None => (self.g)(&y) * k / (cs * cs + k * k * sn * sn),
                }
            };
            let to_psi = |d: f64| 2.0 * (0.5 * d).sin().atan2(k * (0.5 * d).cos());
            if self.smooth && k >= 0.1 {
                let (v, ok) = periodic_trapezoid(&point, m0, ang_rel);
                if !ok {
                    angular_failures.fetch_add(1, Ordering::Relaxed);
                }
                v
            } else {
                // the far side of the circle is compressed into |ψ| near π
                let mut breaks: Vec<f64> = [0.5, 0.75, 0.875]
                    .iter()
                    .flat_map(|f| [to_psi(f * PI), -to_psi(f * PI)])
                    .collect();
                breaks.extend(
                    self.planes
                        .iter()
                        .flat_map(|p| p.circle_crossings(&[0.0, 0.0], t))
                        .map(|phi| to_psi((phi - phi_x + PI).rem_euclid(2.0 * PI) - PI)),
                );
                let out = integrate_interval(
                    &point,
                    -PI,
                    PI,
                    &breaks,
                    Tolerance {
                        abs: ang_abs,
                        rel: ang_rel,
                    },
                    400,
                );
                if !out.converged {
                    angular_failures.fetch_add(1, Ordering::Relaxed);
                }
                out.value
            }
        };
        let nm1 = (dim - 1) as i32;
        // near-boundary shell under t = ρ + ρ σ^p, p = 1/(1-s); its panels
        // carry the parameter as `v = -σ` so that `t - ρ = ρ σ^p` is formed
        // without cancellation
        let p = 1.0 / (1.0 - s);
        let shell = |v: f64| -> f64 {
            let (t, tmr, jac) = if v <= 0.0 {
                let sp = (-v).powf(p);
                (rho + rho * sp, rho * sp, rho * p * (-v).powf(p - 1.0))
            } else {
                (v, v - rho, 1.0)
            };
            let w = (tmr * (t + rho)).powf(-s);
            if !(w.is_finite() && jac.is_finite()) || jac == 0.0 {
                return 0.0;
            }
            let ang = angular(t, tmr);
            if ang == 0.0 {
                0.0
            } else {
                ang * w * jac * t.powi(nm1)
            }
        };

        let first = (rho - a).min(rho);
        let sigma = |t: f64| ((t - rho) / rho).powf(1.0 / p);
        let mut breaks: Vec<f64> = self
            .radial_breaks
            .iter()
            .copied()
            .filter(|&b| b > rho && b.is_finite())
            .collect();
        let cap = outer.unwrap_or(f64::INFINITY);
        let mut segments = Vec::new();
        let first_end = (rho + first).min(cap);
        let mut cuts = vec![0.0];
        cuts.extend(breaks.iter().filter(|&&b| b < first_end).map(|&b| sigma(b)));
        cuts.push(sigma(first_end));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            segments.push(Segment::linear(-w[1], -w[0], Zone::Inner));
        }

        // graded middle shells
        let tail_from = match outer {
            Some(r) => r,
            None => spec.outer_cut.max(4.0 * rho).max(2.0 * (rho + first)),
        };
        let mut pts = vec![first_end];
        let mut step = first;
        while rho + 2.0 * step < tail_from {
            step *= 2.0;
            pts.push(rho + step);
        }
        pts.push(tail_from);
        breaks.retain(|&b| b > first_end && b < tail_from);
        pts.extend(breaks);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|u, v| (*u - *v).abs() <= 1e-14 * v.abs());
        for w in pts.windows(2) {
            if w[1] > w[0] {
                segments.push(Segment::linear(w[0], w[1], Zone::Middle));
            }
        }
        if outer.is_none() {
            segments.push(Segment {
                a: 0.0,
                b: 1.0,
                map: Map::Tail {
                    from: tail_from,
                    rate: self.tail_rate,
                },
                zone: Zone::Tail,
            });
        }

        let tol = Tolerance {
            abs: abs_tol,
            rel: spec.rel_tol,
        };
        let out = integrate(
            &segments,
            &shell,
            tol,
            0.0,
            0.0,
            spec.max_subdivisions,
            spec.parallel,
        );
        if !out.converged {
            return Err(Error::ConvergenceFailure {
                zone: out.worst_zone,
                last_err: out.err,
            });
        }
        if angular_failures.load(Ordering::Relaxed) > 0 {
            return Err(Error::ConvergenceFailure {
                zone: Zone::Angular,
                last_err: out.err,
            });
        }
        Ok(OperatorResult {
            value: out.value,
            err_est: out.err,
            zones: Zones {
                inner: out.inner,
                middle: out.middle,
                tail: out.tail,
            },
        })
    }
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Polar coordinates about an axis `e`: `y = t (cos θ e + sin θ H(0, ω))`,
/// with `H` the reflection taking `e₁` to `e`.
struct PolarFrame {
    axis: Vec<f64>,
    /// Householder vector `e₁ - e`, normalized; `None` when `e = e₁`.
    v: Option<Vec<f64>>,
}

impl PolarFrame {
    fn new(axis: Vec<f64>) -> Self {
        let mut v = axis.iter().map(|c| -c).collect::<Vec<f64>>();
        v[0] += 1.0;
        let n = norm(&v);
        let v = (n > 1e-12).then(|| v.into_iter().map(|c| c / n).collect());
        PolarFrame { axis, v }
    }

    fn place(&self, t: f64, cs: f64, sn: f64, omega: &[f64], y: &mut [f64]) {
        // z = (0, ω), then y = t (cos θ e + sin θ H z)
        let dot = match &self.v {
            Some(v) => v[1..].iter().zip(omega).map(|(a, b)| a * b).sum::<f64>(),
            None => 0.0,
        };
        for i in 0..y.len() {
            let zi = if i == 0 { 0.0 } else { omega[i - 1] };
            let hz = match &self.v {
                Some(v) => zi - 2.0 * dot * v[i],
                None => zi,
            };
            y[i] = t * (cs * self.axis[i] + sn * hz);
        }
    }
}

/// Trapezoid rule on `[-π, π)` with nested doubling from `m0` nodes; the
/// difference to the half-resolution sum is the error indicator.
fn periodic_trapezoid(f: &dyn Fn(f64) -> f64, m0: usize, rel: f64) -> (f64, bool) {
    let mut m = m0;
    let mut h = 2.0 * PI / m as f64;
    let vals: Vec<f64> = (0..m).map(|j| f(-PI + j as f64 * h)).collect();
    let mut sum: f64 = vals.iter().sum();
    let mut half: f64 = vals.iter().step_by(2).sum();
    let mut mag: f64 = vals.iter().map(|v| v.abs()).sum();
    loop {
        let t = h * sum;
        let t_half = 2.0 * h * half;
        let target = rel * t.abs().max(1e-3 * h * mag);
        if (t - t_half).abs() <= target || mag == 0.0 {
            return (t, true);
        }
        if m >= MAX_TRAPEZOID {
            return (t, false);
        }
        let mut fresh = 0.0;
        let mut fresh_mag = 0.0;
        for j in 0..m {
            let v = f(-PI + (j as f64 + 0.5) * h);
            fresh += v;
            fresh_mag += v.abs();
        }
        half = sum;
        sum += fresh;
        mag += fresh_mag;
        m *= 2;
        h *= 0.5;
    }
}

/// The field equal to `u_h` inside the ball and to `h` outside, with
/// interior values computed on demand and memoized.
struct MaterializedSolution {
    field: ScalarField,
    state: Arc<CacheState>,
}

#[derive(Default)]
struct CacheState {
    values: Mutex<HashMap<Vec<u64>, f64>>,
    max_err: Mutex<f64>,
    failure: Mutex<Option<Error>>,
}

fn materialize(problem: &BallProblem) -> MaterializedSolution {
    let state = Arc::new(CacheState::default());
    let st = state.clone();
    let prob = problem.clone();
    let h = problem.exterior.clone();
    let rho = problem.rho;
    let eval = move |y: &[f64]| -> f64 {
        if norm(y) >= rho {
            return h.eval(y);
        }
        let key: Vec<u64> = y.iter().map(|c| c.to_bits()).collect();
        if let Some(&v) = st.values.lock().unwrap().get(&key) {
            return v;
        }
        match solve_dirichlet(&prob, y) {
            Ok(r) => {
                let mut worst = st.max_err.lock().unwrap();
                *worst = worst.max(r.err_est);
                drop(worst);
                st.values.lock().unwrap().insert(key, r.value);
                r.value
            }
            Err(e) => {
                st.failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let decay = match problem.exterior.decay {
        Decay::CompactSupport { radius } => Decay::CompactSupport {
            radius: radius.max(rho),
        },
        d => d,
    };
    let mut field = ScalarField::new(
        format!("u[{}]", problem.exterior.label()),
        Smoothness::C2,
        decay,
        eval,
    )
    .with_features(problem.exterior.features.iter().copied().chain([rho]));
    for p in &problem.exterior.discontinuities {
        field = field.with_discontinuity(p.clone());
    }
    MaterializedSolution { field, state }
}

/// `(-Δ)^s` of the numerically materialized solution at `x`, `|x| ≤ 0.8ρ`.
///
/// Interior values come from `solve_dirichlet` with `problem.spec`; the outer
/// integrals use `spec`. In two dimensions the operator is split at
/// `r₁ = (ρ - |x|)/2`:
///
/// `(C/2) ∫_{|y|<r₁} [2U(x) - U(x+y) - U(x-y)] |y|^{-N-2s} dy
///   + C U(x) ω r₁^{-2s}/(2s) - C ∫_{|z-x|>r₁} U(z) |x-z|^{-N-2s} dz`,
///
/// with the last integral in polar coordinates about the origin, where the
/// `(ρ - |z|)^s` boundary layer of `U` is a purely radial feature. Other
/// dimensions apply the paired operator to `U` directly. The error estimate
/// adds the effect of the largest interior solve error.
pub fn sharmonicity_residual(
    problem: &BallProblem,
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    let a = check_ball(problem.rho, x, &problem.params)?;
    if a > 0.8 * problem.rho * (1.0 + 1e-12) {
        return Err(domain(format!(
            "|x| = {a} exceeds 0.8 ρ = {}",
            0.8 * problem.rho
        )));
    }
    spec.validate()?;
    let mat = materialize(problem);
    let params = &problem.params;
    let s = params.order();
    let c = params.c_ns();
    let omega = sphere_area(params.dim());
    let (res, r1) = if params.dim() == 2 {
        let r1 = 0.5 * (problem.rho - a);
        (split_residual(problem, &mat.field, x, r1, spec), r1)
    } else {
        (frac_laplacian(&mat.field, x, params, spec), spec.inner_cut)
    };
    if let Some(e) = mat.state.failure.lock().unwrap().take() {
        return Err(e);
    }
    let res = res?;
    let delta = *mat.state.max_err.lock().unwrap();
    let propagated = c * delta * omega / (2.0 * s)
        * (2.0 * spec.inner_cut.powf(-2.0 * s) + 2.0 * r1.powf(-2.0 * s));
    Ok(OperatorResult {
        err_est: res.err_est + propagated,
        ..res
    })
}

/// Parametrization of one radial panel by `u ∈ [0, 1]`.
#[derive(Debug, Clone, Copy)]
enum Piece {
    Linear {
        a: f64,
        b: f64,
    },
    /// `t = a + (b - a) u²`: removes a square-root kink at `a`.
    SqrtLeft {
        a: f64,
        b: f64,
    },
    /// `t = b - (b - a)(1 - u)²`.
    SqrtRight {
        a: f64,
        b: f64,
    },
    /// `t = b - (b - a)(1 - u)^q`: removes `(b - t)^{1/q}`.
    PowerRight {
        a: f64,
        b: f64,
        q: f64,
    },
    /// `t = from · u^{-1/rate}`.
    Tail {
        from: f64,
        rate: f64,
    },
}

impl Piece {
    fn apply(&self, u: f64) -> (f64, f64) {
        match *self {
            Piece::Linear { a, b } => (a + (b - a) * u, b - a),
            Piece::SqrtLeft { a, b } => (a + (b - a) * u * u, 2.0 * (b - a) * u),
            Piece::SqrtRight { a, b } => {
                let w = 1.0 - u;
                (b - (b - a) * w * w, 2.0 * (b - a) * w)
            }
            Piece::PowerRight { a, b, q } => {
                let w = 1.0 - u;
                let wq = w.powf(q - 1.0);
                (b - (b - a) * wq * w, q * (b - a) * wq)
            }
            Piece::Tail { from, rate } => {
                let t = from * u.powf(-1.0 / rate);
                (t, t / (rate * u))
            }
        }
    }
}

fn split_residual(
    problem: &BallProblem,
    field: &ScalarField,
    x: &[f64],
    r1: f64,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    let params = &problem.params;
    let s = params.order();
    let c = params.c_ns();
    let kexp = params.kernel_exponent();
    let rho = problem.rho;
    let a = norm(x);
    let h = &problem.exterior;
    let ux = field.eval(x);

    // paired ball |y| < r₁, inside B_ρ where U is smooth
    let ux2 = 2.0 * ux;
    let f = |r: f64, th: &[f64]| {
        if r > r1 {
            return 0.0;
        }
        let d = second_difference(
            ux2,
            eval_shifted(field, x, r, th, 1.0),
            eval_shifted(field, x, r, th, -1.0),
        );
        if d == 0.0 {
            0.0
        } else {
            d * r.powf(-kexp)
        }
    };
    let ball_spec = QuadratureSpec {
        angular_rule: match spec.angular_rule {
            AngularRule::Fixed(n) => AngularRule::Fixed(n),
            AngularRule::Adaptive => AngularRule::Fixed(32),
        },
        ..*spec
    };
    let ball = singular_radial_integral(
        &RadialIntegrand::new(
            2,
            &f,
            InnerModel::Power(1.0 - 2.0 * s),
            TailModel::Zero { beyond: r1 },
        ),
        &ball_spec,
    )?;

    // complement |z - x| > r₁ in polar coordinates about the origin
    let phi_x = if a > 0.0 { x[1].atan2(x[0]) } else { 0.0 };
    let ang_rel = 1e-2 * spec.rel_tol;
    let failures = AtomicUsize::new(0);
    let rough_outside = !h.discontinuities.is_empty() || h.smoothness < Smoothness::C2;
    let angular = |t: f64| -> f64 {
        let q = |phi: f64| -> f64 {
            let z = [t * phi.cos(), t * phi.sin()];
            let u = field.eval(&z);
            if u == 0.0 {
                0.0
            } else {
                u * dist_pow(x, &z, kexp)
            }
        };
        // excluded arc |φ - φ_x| < β on this circle
        let beta = if a == 0.0 || (t - a).abs() >= r1 {
            if t + a <= r1 {
                return 0.0;
            }
            0.0
        } else {
            ((t * t + a * a - r1 * r1) / (2.0 * t * a))
                .clamp(-1.0, 1.0)
                .acos()
        };
        let rough = t > rho && rough_outside;
        if beta == 0.0 && !rough {
            let (v, ok) =
                periodic_trapezoid(&|psi: f64| q(phi_x + PI + psi), TRAPEZOID_START, ang_rel);
            if !ok {
                failures.fetch_add(1, Ordering::Relaxed);
            }
            return v;
        }
        let lo = phi_x + beta;
        let hi = phi_x + 2.0 * PI - beta;
        let breaks: Vec<f64> = if rough {
            h.discontinuities
                .iter()
                .flat_map(|p| p.circle_crossings(&[0.0, 0.0], t))
                .map(|phi| lo + (phi - lo).rem_euclid(2.0 * PI))
                .collect()
        } else {
            Vec::new()
        };
        let out = integrate_interval(
            &q,
            lo,
            hi,
            &breaks,
            Tolerance {
                abs: 1e-3 * spec.abs_tol,
                rel: ang_rel,
            },
            400,
        );
        if !out.converged {
            failures.fetch_add(1, Ordering::Relaxed);
        }
        out.value
    };

    let mut pieces: Vec<(Piece, Zone)> = Vec::new();
    if a > 0.0 {
        let lo = (a - r1).abs();
        if a > r1 {
            pieces.push((Piece::Linear { a: 0.0, b: lo }, Zone::Inner));
        }
        pieces.push((Piece::SqrtLeft { a: lo, b: a }, Zone::Inner));
        pieces.push((Piece::SqrtRight { a, b: a + r1 }, Zone::Inner));
    }
    let mid = 0.5 * (a + r1 + rho);
    pieces.push((Piece::Linear { a: a + r1, b: mid }, Zone::Inner));
    pieces.push((
        Piece::PowerRight {
            a: mid,
            b: rho,
            q: 1.0 / s,
        },
        Zone::Inner,
    ));
    let support = h.decay.support_radius();
    let tail_from = support.unwrap_or(spec.outer_cut.max(4.0 * rho));
    let mut pts = vec![rho];
    let mut step = rho - a;
    while rho + 2.0 * step < tail_from {
        step *= 2.0;
        pts.push(rho + step);
    }
    pts.push(tail_from);
    pts.extend(
        h.features
            .iter()
            .copied()
            .filter(|&b| b > rho && b < tail_from),
    );
    pts.extend(
        h.discontinuities
            .iter()
            .map(|p| p.signed_distance(&[0.0, 0.0]).abs())
            .filter(|&b| b > rho && b < tail_from),
    );
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|u, v| (*u - *v).abs() <= 1e-14 * v.abs());
    for w in pts.windows(2) {
        if w[1] > w[0] && support.is_none_or(|r| w[0] < r) {
            pieces.push((Piece::Linear { a: w[0], b: w[1] }, Zone::Middle));
        }
    }
    if support.is_none() {
        let rate = h.decay.tail_rate(s);
        if rate <= 0.0 {
            return Err(Error::Divergence(format!(
                "exterior tail rate {rate} is not positive"
            )));
        }
        pieces.push((
            Piece::Tail {
                from: tail_from,
                rate,
            },
            Zone::Tail,
        ));
    }
    let g = |v: f64| -> f64 {
        let k = (v.floor() as usize).min(pieces.len() - 1);
        let (t, jac) = pieces[k].0.apply(v - k as f64);
        if !(t > 0.0 && t.is_finite() && jac.is_finite()) || jac == 0.0 {
            return 0.0;
        }
        let ang = angular(t);
        if ang == 0.0 {
            0.0
        } else {
            ang * t * jac
        }
    };
    let segments: Vec<Segment> = pieces
        .iter()
        .enumerate()
        .map(|(k, (_, zone))| Segment::linear(k as f64, (k + 1) as f64, *zone))
        .collect();
    let tol = Tolerance {
        abs: spec.abs_tol / c,
        rel: spec.rel_tol,
    };
    let far = integrate(
        &segments,
        &g,
        tol,
        0.0,
        0.0,
        spec.max_subdivisions,
        spec.parallel,
    );
    if !far.converged {
        return Err(Error::ConvergenceFailure {
            zone: far.worst_zone,
            last_err: far.err,
        });
    }
    if failures.load(Ordering::Relaxed) > 0 {
        return Err(Error::ConvergenceFailure {
            zone: Zone::Angular,
            last_err: far.err,
        });
    }
    let shell = c * ux * sphere_area(2) * r1.powf(-2.0 * s) / (2.0 * s);
    let near = 0.5 * c * ball.value;
    let value = near + shell - c * far.value;
    Ok(OperatorResult {
        value,
        err_est: 0.5 * c * ball.err_est
            + c * far.err
            + ang_rel * (c * far.value.abs() + shell.abs()),
        zones: Zones {
            inner: near,
            middle: shell - c * (far.value - far.tail),
            tail: -c * far.tail,
        },
    })
}

fn uniform_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let r = norm(&v);
        if r > 1e-12 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

fn centered_sample<R: Rng + ?Sized>(
    rho: f64,
    dim: usize,
    beta: &Beta<f64>,
    rng: &mut R,
) -> Vec<f64> {
    // at the center ρ²/|y|² ~ Beta(s, 1 - s)
    let u = loop {
        let u = beta.sample(rng);
        if u > 0.0 {
            break u;
        }
    };
    let t = rho / u.sqrt();
    uniform_direction(dim, rng)
        .into_iter()
        .map(|c| c * t)
        .collect()
}

/// Acceptance probability `1/M` of the rejection sampler at `x`, where
/// `M = (1 - |x|²/ρ²)^s (ρ/(ρ - |x|))^N` bounds `P(x, ·)/P(0, ·)`.
pub fn wos_acceptance(rho: f64, x: &[f64], params: &FracParams) -> Result<f64> {
    let a = check_ball(rho, x, params)?;
    let n = params.dim() as f64;
    let q = a / rho;
    let m = ((1.0 - q) * (1.0 + q)).powf(params.order()) * (1.0 - q).powf(-n);
    Ok(1.0 / m)
}

/// One draw from the density `P_ρ(x, ·)`.
pub fn wos_sample<R: Rng + ?Sized>(
    rho: f64,
    x: &[f64],
    params: &FracParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let rate = wos_acceptance(rho, x, params)?;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::SamplerFailure { rate });
    }
    let s = params.order();
    let beta = Beta::new(s, 1.0 - s).map_err(|e| domain(e.to_string()))?;
    draw(rho, x, params, &beta, rate, rng)
}

fn draw<R: Rng + ?Sized>(
    rho: f64,
    x: &[f64],
    params: &FracParams,
    beta: &Beta<f64>,
    rate: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let dim = params.dim();
    if x.iter().all(|&c| c == 0.0) {
        return Ok(centered_sample(rho, dim, beta, rng));
    }
    let a = norm(x);
    let n = dim as f64;
    let lead = ((rho - a) * (rho + a) / (rho * rho)).powf(params.order()) * rate;
    let budget = (100.0 / rate).ceil() as usize;
    for _ in 0..budget {
        let y = centered_sample(rho, dim, beta, rng);
        let ratio = lead * (norm(&y) * dist_pow(x, &y, 1.0)).powf(n);
        if rng.random::<f64>() < ratio {
            return Ok(y);
        }
    }
    Err(Error::SamplerFailure { rate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WosResult {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Monte-Carlo estimate of `u_h(x)` from `n_samples` exit points.
///
/// Batches of 4096 draws use their own counter-based stream and are merged
/// in batch order, so the result does not depend on `problem.spec.parallel`.
pub fn wos_solve(
    problem: &BallProblem,
    x: &[f64],
    n_samples: usize,
    rng_seed: u64,
) -> Result<WosResult> {
    let params = &problem.params;
    let rate = wos_acceptance(problem.rho, x, params)?;
    if rate < MIN_ACCEPTANCE {
        return Err(Error::SamplerFailure { rate });
    }
    if n_samples < 2 {
        return Err(domain("walk-on-spheres needs at least two samples"));
    }
    let s = params.order();
    let beta = Beta::new(s, 1.0 - s).map_err(|e| domain(e.to_string()))?;
    let batches = n_samples.div_ceil(WOS_BATCH);
    let run = |b: usize| -> Result<(usize, f64, f64)> {
        let mut rng = stream(rng_seed, b as u64);
        let count = WOS_BATCH.min(n_samples - b * WOS_BATCH);
        let (mut mean, mut m2) = (0.0, 0.0);
        for k in 0..count {
            let y = draw(problem.rho, x, params, &beta, rate, &mut rng)?;
            let v = problem.exterior.eval(&y);
            let d = v - mean;
            mean += d / (k + 1) as f64;
            m2 += d * (v - mean);
        }
        Ok((count, mean, m2))
    };
    let parts: Vec<Result<(usize, f64, f64)>> = if problem.spec.parallel {
        (0..batches).into_par_iter().map(run).collect()
    } else {
        (0..batches).map(run).collect()
    };
    let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
    for part in parts {
        let (nb, mb, m2b) = part?;
        let total = n + nb;
        let d = mb - mean;
        mean += d * nb as f64 / total as f64;
        m2 += m2b + d * d * (n as f64) * (nb as f64) / total as f64;
        n = total;
    }
    let var = (m2 / (n - 1) as f64).max(0.0);
    Ok(WosResult {
        mean,
        stderr: (var / n as f64).sqrt(),
        samples: n,
    })
}

/// Radii `R = 1 - δ/4 > r = 1 - δ/2 > r₀ = 1 - δ` of the interior estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityRadii {
    pub outer: f64,
    pub middle: f64,
    pub inner: f64,
}

pub fn analyticity_radii(delta: f64) -> Result<AnalyticityRadii> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("δ must lie in (0, 1), got {delta}")));
    }
    Ok(AnalyticityRadii {
        outer: 1.0 - 0.25 * delta,
        middle: 1.0 - 0.5 * delta,
        inner: 1.0 - delta,
    })
}

/// Sup of `|D^ι u_h|/ι!` over a scan of `B_{r₀}` for `ι = k e₁`, with the
/// least-squares line through `log` of the sups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub orders: Vec<usize>,
    /// `sup |∂_1^k u_h| / k!` per order.
    pub scaled_sups: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|log value - line|`.
    pub max_residual: f64,
    /// Largest `err_est / |value|` at the maximizing points.
    pub worst_rel_err: f64,
}

/// Scan points: the center, 7 points on `|x| = r₀/2` and 12 on `|x| = r₀`.
pub fn scan_points(dim: usize, r0: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; dim]];
    for (count, r) in [(7usize, 0.5 * r0), (12, r0)] {
        for k in 0..count {
            let phi = 2.0 * PI * (k as f64 + 0.25) / count as f64;
            let mut p = vec![0.0; dim];
            p[0] = r * phi.cos();
            p[1] = r * phi.sin();
            out.push(p);
        }
    }
    out
}

pub fn factorial_growth(
    problem: &BallProblem,
    r0: f64,
    orders: &[usize],
    spec: &QuadratureSpec,
) -> Result<GrowthFit> {
    if orders.len() < 2 {
        return Err(Error::Fit("need at least two derivative orders".into()));
    }
    if !(r0 > 0.0 && r0 < problem.rho) {
        return Err(domain(format!("r₀ = {r0} must lie in (0, ρ)")));
    }
    let dim = problem.params.dim();
    let pts = scan_points(dim, r0);
    let mut scaled = Vec::new();
    let mut worst_rel = 0.0f64;
    for &k in orders {
        let mut iota = vec![0usize; dim];
        iota[0] = k;
        let mut best = (0.0f64, 0.0f64);
        for p in &pts {
            let r = solution_derivative(problem, p, &iota, spec)?;
            if r.value.abs() > best.0 {
                best = (r.value.abs(), r.err_est);
            }
        }
        if best.0 == 0.0 {
            return Err(Error::Fit(format!(
                "order {k} derivative vanishes on the scan"
            )));
        }
        worst_rel = worst_rel.max(best.1 / best.0);
        scaled.push(best.0 / factorial(k));
    }
    let xs: Vec<f64> = orders.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = scaled.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        orders: orders.to_vec(),
        scaled_sups: scaled,
        slope,
        intercept,
        max_residual,
        worst_rel_err: worst_rel,
    })
}
