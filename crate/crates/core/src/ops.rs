//! Nonlocal operators: `(-Δ)^s`, the carré du champ `I_s`, the Leibniz
//! source field, the regularized difference quotient `D^s_{η_τ,η}` and the
//! functional `G^s_{η_τ,η}`.
//!
//! Every pointwise operator is a radial integral about `x` handed to
//! [`singular_radial_integral`]. Integrands are written in paired form where
//! possible, so that odd Taylor terms cancel before quadrature.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::cutoff::{CutoffField, RadialCutoff};
use crate::error::{domain, Error, Result};
use crate::field::{norm, Decay, ScalarField};
use crate::params::FracParams;
use crate::quad::{
    pair_integral, singular_radial_integral, Diagonal, InnerModel, PairDomain, PairIntegrand,
    PairResult, QuadratureSpec, RadialIntegrand, RadialResult, TailModel,
};

/// Contributions of the three radial zones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Zones {
    pub inner: f64,
    pub middle: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub value: f64,
    pub err_est: f64,
    pub zones: Zones,
}

impl OperatorResult {
    pub fn zero() -> Self {
        OperatorResult {
            value: 0.0,
            err_est: 0.0,
            zones: Zones::default(),
        }
    }

    fn from_radial(r: RadialResult, scale: f64) -> Self {
        OperatorResult {
            value: scale * r.value,
            err_est: scale.abs() * r.err_est,
            zones: Zones {
                inner: scale * r.inner,
                middle: scale * r.middle,
                tail: scale * r.tail,
            },
        }
    }

    /// `Σ c_i · r_i`, with errors added in absolute value.
    pub fn linear_combination(terms: &[(f64, &OperatorResult)]) -> Self {
        let mut out = OperatorResult::zero();
        for (c, r) in terms {
            out.value += c * r.value;
            out.err_est += c.abs() * r.err_est;
            out.zones.inner += c * r.zones.inner;
            out.zones.middle += c * r.zones.middle;
            out.zones.tail += c * r.zones.tail;
        }
        out
    }
}

const STACK_DIM: usize = 8;

/// Second difference `2a - b - c`, flushed to zero when it is pure rounding.
#[inline]
pub(crate) fn second_difference(a2: f64, b: f64, c: f64) -> f64 {
    let d = a2 - b - c;
    if d.abs() <= 8.0 * f64::EPSILON * (a2.abs() + b.abs() + c.abs()) {
        0.0
    } else {
        d
    }
}

/// `u(x + sign · r · θ)` without a heap allocation in low dimension.
#[inline]
pub(crate) fn eval_shifted(u: &ScalarField, x: &[f64], r: f64, theta: &[f64], sign: f64) -> f64 {
    let n = x.len();
    if n <= STACK_DIM {
        let mut buf = [0.0; STACK_DIM];
        for i in 0..n {
            buf[i] = x[i] + sign * r * theta[i];
        }
        u.eval(&buf[..n])
    } else {
        let y: Vec<f64> = x.iter().zip(theta).map(|(a, t)| a + sign * r * t).collect();
        u.eval(&y)
    }
}

pub(crate) fn check_point(x: &[f64], params: &FracParams) -> Result<()> {
    if x.len() != params.dim() {
        return Err(domain(format!(
            "point has {} coordinates, expected {}",
            x.len(),
            params.dim()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain("point has non-finite coordinates"));
    }
    Ok(())
}

/// Radii about `x` where a field with the given origin-centred features and
/// hyperplane discontinuities can be non-smooth.
pub(crate) fn radial_breaks<'a>(
    x: &[f64],
    fields: impl IntoIterator<Item = &'a ScalarField>,
) -> Vec<f64> {
    let rx = norm(x);
    let mut out = Vec::new();
    for f in fields {
        for &rho in &f.features {
            out.push((rho - rx).abs());
            out.push(rho + rx);
        }
        for plane in &f.discontinuities {
            out.push(plane.signed_distance(x).abs());
        }
    }
    out.retain(|r| *r > 0.0 && r.is_finite());
    out
}

/// Angles on the circle `x ± r θ` where the fields' features are crossed;
/// `paired` also includes the reflected point `x - r θ`.
pub(crate) fn circle_breaks(x: &[f64], r: f64, fields: &[&ScalarField], paired: bool) -> Vec<f64> {
    if x.len() != 2 {
        return Vec::new();
    }
    let rx = norm(x);
    let phi_x = x[1].atan2(x[0]);
    let mut out = Vec::new();
    for f in fields {
        for &rho in &f.features {
            if rx > 0.0 {
                let c = (rho * rho - rx * rx - r * r) / (2.0 * r * rx);
                if c.abs() <= 1.0 {
                    let a = c.acos();
                    out.push(phi_x + a);
                    out.push(phi_x - a);
                }
            }
        }
        for plane in &f.discontinuities {
            out.extend(plane.circle_crossings(x, r));
        }
    }
    if paired {
        let n = out.len();
        for i in 0..n {
            out.push(out[i] + std::f64::consts::PI);
        }
    }
    out
}

/// Tail model for `2u(x) - u(x+y) - u(x-y)` against `|y|^{-N-2s}`.
fn paired_tail(u: &ScalarField, x: &[f64], params: &FracParams) -> Result<TailModel> {
    let s = params.order();
    match u.decay {
        Decay::CompactSupport { radius } => Ok(TailModel::Exact {
            beyond: norm(x) + radius,
            coef: 2.0 * u.eval(x) * params.sphere_area(),
            rate: 2.0 * s,
        }),
        d => {
            let rate = d.tail_rate(s);
            if rate <= 0.0 {
                return Err(domain(format!(
                    "{}: envelope growth {} is not below 2s = {}; the tail integral diverges",
                    u.label(),
                    d.growth(),
                    2.0 * s
                )));
            }
            Ok(TailModel::Decaying { rate })
        }
    }
}

/// `(-Δ)^s u(x) = (C_{N,s}/2) ∫ [2u(x) - u(x+y) - u(x-y)] |y|^{-N-2s} dy`.
pub fn frac_laplacian(
    u: &ScalarField,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    check_point(x, params)?;
    if !u.smoothness.is_c2() {
        return Err(domain(format!(
            "{}: the second-difference form needs a C² field, got {:?}",
            u.label(),
            u.smoothness
        )));
    }
    let s = params.order();
    let p = params.kernel_exponent();
    let ux2 = 2.0 * u.eval(x);
    let f = |r: f64, th: &[f64]| {
        let d = second_difference(
            ux2,
            eval_shifted(u, x, r, th, 1.0),
            eval_shifted(u, x, r, th, -1.0),
        );
        if d == 0.0 {
            0.0
        } else {
            d * r.powf(-p)
        }
    };
    let breaks = |r: f64| circle_breaks(x, r, &[u], true);
    let integrand = RadialIntegrand::new(
        params.dim(),
        &f,
        InnerModel::Power(1.0 - 2.0 * s),
        paired_tail(u, x, params)?,
    )
    .with_breakpoints(radial_breaks(x, [u]))
    .with_angular_breaks(&breaks);
    let res = singular_radial_integral(&integrand, spec)?;
    Ok(OperatorResult::from_radial(res, 0.5 * params.c_ns()))
}

/// Principal-value form `C_{N,s} ∫_{|y|>ε} [u(x) - u(x+y)] |y|^{-N-2s} dy`
/// with `ε = 10 · inner_cut`.
///
/// The omitted ball is replaced by its second-order Taylor term
/// `-(C/2) (Δu(x)/N) ω ε^{2-2s}/(2-2s)`, the first-order term cancelling by
/// antisymmetry. The Laplacian is analytic when the field carries
/// derivatives and a central difference otherwise; the neglected fourth-order
/// remainder is bounded by `ε² ·` the correction.
pub fn frac_laplacian_pv(
    u: &ScalarField,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    check_point(x, params)?;
    if !u.smoothness.is_c2() {
        return Err(domain(format!(
            "{}: the principal-value form needs a C² field",
            u.label()
        )));
    }
    let n = params.dim();
    let s = params.order();
    let p = params.kernel_exponent();
    let c = params.c_ns();
    let eps = 10.0 * spec.inner_cut;
    if eps >= spec.outer_cut {
        return Err(domain(
            "inner_cut too large for the principal-value truncation",
        ));
    }
    let ux = u.eval(x);
    let f = |r: f64, th: &[f64]| {
        let d = ux - eval_shifted(u, x, r, th, 1.0);
        if d == 0.0 {
            0.0
        } else {
            d * r.powf(-p)
        }
    };
    let tail = match u.decay {
        Decay::CompactSupport { radius } => TailModel::Exact {
            beyond: norm(x) + radius,
            coef: ux * params.sphere_area(),
            rate: 2.0 * s,
        },
        _ => paired_tail(u, x, params)?,
    };
    let breaks = |r: f64| circle_breaks(x, r, &[u], false);
    let integrand = RadialIntegrand::new(n, &f, InnerModel::Vanishing { below: eps }, tail)
        .with_breakpoints(radial_breaks(x, [u]))
        .with_angular_breaks(&breaks);
    let res = singular_radial_integral(&integrand, spec)?;

    let (lap, lap_err) = match u.laplacian(x) {
        Some(l) => (l, 0.0),
        None => {
            let h = 1e-3 * (1.0 + norm(x));
            let mut e = vec![0.0; n];
            let mut acc = 0.0;
            for i in 0..n {
                e[i] = 1.0;
                acc += eval_shifted(u, x, h, &e, 1.0) + eval_shifted(u, x, h, &e, -1.0) - 2.0 * ux;
                e[i] = 0.0;
            }
            let l = acc / (h * h);
            (l, 1e-6 * l.abs() + 1e-12 / (h * h))
        }
    };
    let ball =
        -0.5 * (lap / n as f64) * params.sphere_area() * eps.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s);
    let ball_err = ball.abs() * eps * eps + (ball / lap.abs().max(1e-300)).abs() * lap_err;
    let mut out = OperatorResult::from_radial(res, c);
    out.value += c * ball;
    out.err_est += c * ball_err;
    out.zones.inner = c * ball;
    Ok(out)
}

/// Distance from `x` to the declared features and discontinuity planes of a
/// field that is rougher than Lipschitz; `+∞` for Lipschitz fields.
fn roughness_distance(f: &ScalarField, x: &[f64]) -> f64 {
    if f.smoothness.holder_index() >= 1.0 {
        return f64::INFINITY;
    }
    let rx = norm(x);
    let spheres = f.features.iter().map(|&r| (rx - r).abs());
    let planes = f.discontinuities.iter().map(|p| p.signed_distance(x).abs());
    spheres.chain(planes).fold(f64::INFINITY, f64::min)
}

fn increment_growth(d: Decay) -> f64 {
    match d {
        Decay::CompactSupport { .. } => 0.0,
        d => d.growth().max(0.0),
    }
}

/// `I_s(f, g)(x) = C_{N,s} ∫ (f(x) - f(y))(g(x) - g(y)) |x-y|^{-N-2s} dy`.
pub fn carre_du_champ(
    f: &ScalarField,
    g: &ScalarField,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    check_point(x, params)?;
    let s = params.order();
    let p = params.kernel_exponent();
    let (af, ag) = (f.smoothness.holder_index(), g.smoothness.holder_index());
    if af + ag <= 2.0 * s {
        return Err(domain(format!(
            "I_s({}, {}): Hölder indices {af} + {ag} do not exceed 2s = {}",
            f.label(),
            g.label(),
            2.0 * s
        )));
    }
    let (fx, gx) = (f.eval(x), g.eval(x));
    let integrand_fn = |r: f64, th: &[f64]| {
        let df = fx - eval_shifted(f, x, r, th, 1.0);
        if df == 0.0 {
            return 0.0;
        }
        let dg = gx - eval_shifted(g, x, r, th, 1.0);
        df * dg * r.powf(-p)
    };
    let tail = match (f.decay, g.decay) {
        (Decay::CompactSupport { radius: rf }, Decay::CompactSupport { radius: rg }) => {
            TailModel::Exact {
                beyond: norm(x) + rf.max(rg),
                coef: fx * gx * params.sphere_area(),
                rate: 2.0 * s,
            }
        }
        (df, dg) => {
            let rate = 2.0 * s - increment_growth(df) - increment_growth(dg);
            if rate <= 0.0 {
                return Err(domain(format!(
                    "I_s({}, {}): combined envelope growth leaves no decay against |y|^(-N-2s)",
                    f.label(),
                    g.label()
                )));
            }
            TailModel::Decaying { rate }
        }
    };
    let breaks = |r: f64| circle_breaks(x, r, &[f, g], false);
    // roughness is taken to sit on the declared features and planes; shrink
    // the Taylor ball so it stays clear of them
    let rough = roughness_distance(f, x).min(roughness_distance(g, x));
    let spec = &QuadratureSpec {
        inner_cut: spec.inner_cut.min(0.25 * rough).max(1e-9),
        ..*spec
    };
    let q = if rough > 2.0 * spec.inner_cut {
        1.0 - 2.0 * s
    } else {
        af + ag - 1.0 - 2.0 * s
    };
    let integrand = RadialIntegrand::new(params.dim(), &integrand_fn, InnerModel::Power(q), tail)
        .with_breakpoints(radial_breaks(x, [f, g]))
        .with_angular_breaks(&breaks);
    let res = singular_radial_integral(&integrand, spec)?;
    Ok(OperatorResult::from_radial(res, params.c_ns()))
}

/// The four terms of the fractional Leibniz rule and its defect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeibnizCheck {
    /// `(-Δ)^s(fg) - f (-Δ)^s g - g (-Δ)^s f + I_s(f, g)`.
    pub residual: f64,
    /// Sum of the error estimates of the four terms.
    pub err_est: f64,
    /// Largest absolute value among the four terms.
    pub scale: f64,
    pub terms: [f64; 4],
}

pub fn leibniz_residual(
    f: &ScalarField,
    g: &ScalarField,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<LeibnizCheck> {
    let fg = ScalarField::product(f, g);
    let l_fg = frac_laplacian(&fg, x, params, spec)?;
    let l_g = frac_laplacian(g, x, params, spec)?;
    let l_f = frac_laplacian(f, x, params, spec)?;
    let i_fg = carre_du_champ(f, g, x, params, spec)?;
    let (fx, gx) = (f.eval(x), g.eval(x));
    let terms = [l_fg.value, fx * l_g.value, gx * l_f.value, i_fg.value];
    let residual = terms[0] - terms[1] - terms[2] + terms[3];
    let err_est = l_fg.err_est + fx.abs() * l_g.err_est + gx.abs() * l_f.err_est + i_fg.err_est;
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    Ok(LeibnizCheck {
        residual,
        err_est,
        scale,
        terms,
    })
}

/// Both forms of `f(x) = C_{N,s} ∫ u(y) (η²(x) - η²(y)) |x-y|^{-N-2s} dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceField {
    pub direct: OperatorResult,
    /// `2ηu (-Δ)^s η - I_s(η, ηu) - η I_s(η, u)`.
    pub decomposed: OperatorResult,
}

pub fn source_field(
    u: &ScalarField,
    eta: &CutoffField,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<SourceField> {
    check_point(x, params)?;
    let s = params.order();
    let p = params.kernel_exponent();
    let au = u.smoothness.holder_index();
    let q = (au + 1.0).min(2.0) - 1.0 - 2.0 * s;
    if q <= -1.0 {
        return Err(domain(format!(
            "{}: too rough for the source field at s = {s}",
            u.label()
        )));
    }
    let eta_field = eta.to_field();
    let e2x = eta.eval(x).powi(2);
    let direct_fn = |r: f64, th: &[f64]| {
        let up = eval_shifted(u, x, r, th, 1.0);
        let um = eval_shifted(u, x, r, th, -1.0);
        let ep = eval_shifted(&eta_field, x, r, th, 1.0);
        let em = eval_shifted(&eta_field, x, r, th, -1.0);
        let d = up * (e2x - ep * ep) + um * (e2x - em * em);
        if d == 0.0 {
            0.0
        } else {
            d * r.powf(-p)
        }
    };
    let rx = norm(x);
    let sup = eta.support();
    let tail = if e2x == 0.0 {
        TailModel::Zero { beyond: rx + sup }
    } else {
        match u.decay {
            Decay::CompactSupport { radius } => {
                // beyond both supports only u(x±y) · η²(x) survives, and u vanishes
                TailModel::Zero {
                    beyond: rx + sup.max(radius),
                }
            }
            d => {
                let rate = d.tail_rate(s);
                if rate <= 0.0 {
                    return Err(domain(format!(
                        "{}: envelope growth too large for the source field",
                        u.label()
                    )));
                }
                TailModel::Decaying { rate }
            }
        }
    };
    let breaks = |r: f64| circle_breaks(x, r, &[u, &eta_field], true);
    let integrand = RadialIntegrand::new(params.dim(), &direct_fn, InnerModel::Power(q), tail)
        .with_breakpoints(radial_breaks(x, [u, &eta_field]))
        .with_angular_breaks(&breaks);
    let direct = OperatorResult::from_radial(
        singular_radial_integral(&integrand, spec)?,
        0.5 * params.c_ns(),
    );

    let eta_u = ScalarField::product(&eta_field, u);
    let (ex, ux) = (eta.eval(x), u.eval(x));
    let l_eta = frac_laplacian(&eta_field, x, params, spec)?;
    let i_eta_etau = carre_du_champ(&eta_field, &eta_u, x, params, spec)?;
    let i_eta_u = carre_du_champ(&eta_field, u, x, params, spec)?;
    let decomposed = OperatorResult::linear_combination(&[
        (2.0 * ex * ux, &l_eta),
        (-1.0, &i_eta_etau),
        (-ex, &i_eta_u),
    ]);
    Ok(SourceField { direct, decomposed })
}

/// `D^s_{η_τ,η} u(x) = ∫ η_τ(|x-y|) (η(x)u(x) - η(y)u(y)) |x-y|^{-N-2s} dy`.
///
/// No normalization constant; the integrand vanishes for `|x - y| ≤ τ/2`, so
/// the inner zone is skipped.
pub fn diff_quotient(
    u: &ScalarField,
    eta: &CutoffField,
    tau: &RadialCutoff,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    check_point(x, params)?;
    let w = ScalarField::product(&eta.to_field(), u);
    diff_quotient_of(&w, eta.support(), tau, x, params, spec)
}

/// `D^s` for an already-multiplied field `w = ηu` supported in `B_support`.
pub(crate) fn diff_quotient_of(
    w: &ScalarField,
    support: f64,
    tau: &RadialCutoff,
    x: &[f64],
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<OperatorResult> {
    let p = params.kernel_exponent();
    let wx = w.eval(x);
    let f = |r: f64, th: &[f64]| {
        let d = second_difference(
            2.0 * wx,
            eval_shifted(w, x, r, th, 1.0),
            eval_shifted(w, x, r, th, -1.0),
        );
        if d == 0.0 {
            0.0
        } else {
            0.5 * tau.eval(r) * d * r.powf(-p)
        }
    };
    let beyond = (norm(x) + support).max(tau.tau());
    let tail = TailModel::Exact {
        beyond,
        coef: wx * params.sphere_area(),
        rate: 2.0 * params.order(),
    };
    let mut bp = radial_breaks(x, [w]);
    bp.push(tau.tau());
    let breaks = |r: f64| circle_breaks(x, r, &[w], true);
    let integrand = RadialIntegrand::new(
        params.dim(),
        &f,
        InnerModel::Vanishing {
            below: tau.dead_zone(),
        },
        tail,
    )
    .with_breakpoints(bp)
    .with_angular_breaks(&breaks);
    Ok(OperatorResult::from_radial(
        singular_radial_integral(&integrand, spec)?,
        1.0,
    ))
}

/// `G^s_{η_τ,η}(u) = ∬ η_τ(|x-y|) (η(x)u(x) - η(y)u(y))² |x-y|^{-N-2s} dx dy`
/// by Monte Carlo.
pub fn gagliardo_functional(
    u: &ScalarField,
    eta: &CutoffField,
    tau: &RadialCutoff,
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<PairResult> {
    let w = ScalarField::product(&eta.to_field(), u);
    let p = params.kernel_exponent();
    let f = |x: &[f64], y: &[f64]| {
        let d = w.eval(x) - w.eval(y);
        if d == 0.0 {
            return 0.0;
        }
        let r = x
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        tau.eval(r) * d * d * r.powf(-p)
    };
    pair_integral(
        &PairIntegrand {
            dim: params.dim(),
            f: &f,
            domain: PairDomain::Symmetric {
                radius: eta.support(),
                far_decay: 2.0 * params.order(),
            },
            diagonal: Diagonal::Cut {
                radius: tau.dead_zone(),
                exponent: p - 2.0,
            },
        },
        spec,
    )
}

/// Both sides of `∫ (ηu) D^s_{η_τ,η} u dx = ½ G^s_{η_τ,η}(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationCheck {
    pub lhs: f64,
    pub lhs_err: f64,
    pub half_g: f64,
    pub half_g_stderr: f64,
    /// `lhs - half_g`.
    pub residual: f64,
    /// `sqrt(lhs_err² + half_g_stderr²)`.
    pub combined_stderr: f64,
}

/// The left side uses nested deterministic quadrature (outer polar rule over
/// `supp η`, inner [`diff_quotient`]) at a hundredth of `spec.rel_tol`; the
/// right side is [`gagliardo_functional`] under `spec`.
pub fn polarization_check(
    u: &ScalarField,
    eta: &CutoffField,
    tau: &RadialCutoff,
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<PolarizationCheck> {
    let g = gagliardo_functional(u, eta, tau, params, spec)?;
    let w = ScalarField::product(&eta.to_field(), u);
    let det = spec.with_tolerance(1e-2 * spec.rel_tol, spec.abs_tol);
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let worst: Mutex<f64> = Mutex::new(0.0);
    let outer = |r: f64, th: &[f64]| {
        let x: Vec<f64> = th.iter().map(|t| r * t).collect();
        let wx = w.eval(&x);
        if wx == 0.0 {
            return 0.0;
        }
        match diff_quotient_of(&w, eta.support(), tau, &x, params, &det) {
            Ok(d) => {
                let mut m = worst.lock().unwrap();
                *m = m.max(d.err_est * wx.abs());
                wx * d.value
            }
            Err(e) => {
                failure.lock().unwrap().get_or_insert(e);
                0.0
            }
        }
    };
    let origin = vec![0.0; params.dim()];
    let outer_breaks = |r: f64| circle_breaks(&origin, r, &[&w], false);
    let integrand = RadialIntegrand::new(
        params.dim(),
        &outer,
        InnerModel::Vanishing { below: 0.0 },
        TailModel::Zero {
            beyond: eta.support(),
        },
    )
    .with_breakpoints(w.features.iter().copied())
    .with_angular_breaks(&outer_breaks);
    let res = singular_radial_integral(&integrand, &det)?;
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let ball = crate::params::ball_volume(params.dim()) * eta.support().powi(params.dim() as i32);
    let lhs_err = res.err_est + worst.into_inner().unwrap() * ball;
    let half_g = 0.5 * g.value;
    let half_g_stderr = 0.5 * g.stderr;
    Ok(PolarizationCheck {
        lhs: res.value,
        lhs_err,
        half_g,
        half_g_stderr,
        residual: res.value - half_g,
        combined_stderr: lhs_err.hypot(half_g_stderr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{affine, bump, constant, gaussian};
    use crate::quad::AngularRule;
    use std::f64::consts::PI;

    fn p(n: usize, s: f64) -> FracParams {
        FracParams::new(n, s).unwrap()
    }

    #[test]
    fn constant_field_vanishes() {
        let r = frac_laplacian(
            &constant(3.0),
            &[0.4, -1.0],
            &p(2, 0.3),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn affine_field_vanishes_above_half() {
        let r = frac_laplacian(
            &affine(),
            &[0.4, -1.0],
            &p(2, 0.7),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(r.value.abs() < 1e-12, "{r:?}");
        let err = frac_laplacian(
            &affine(),
            &[0.0, 0.0],
            &p(2, 0.4),
            &QuadratureSpec::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn gaussian_at_origin() {
        let r = frac_laplacian(
            &gaussian(),
            &[0.0, 0.0],
            &p(2, 0.5),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((r.value - PI).abs() < 1e-5 * PI, "{r:?}");
        let sum = r.zones.inner + r.zones.middle + r.zones.tail;
        assert!((sum - r.value).abs() < 1e-12);
    }

    #[test]
    fn rough_fields_are_rejected() {
        let cusp = crate::presets::holder_cusp(0.5);
        assert!(matches!(
            frac_laplacian(&cusp, &[0.1, 0.0], &p(2, 0.5), &QuadratureSpec::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pv_form_agrees() {
        let u = bump(0.8);
        let params = p(2, 0.5);
        let spec = QuadratureSpec::default();
        let x = [0.2, -0.1];
        let a = frac_laplacian(&u, &x, &params, &spec).unwrap();
        let b = frac_laplacian_pv(&u, &x, &params, &spec).unwrap();
        assert!(
            (a.value - b.value).abs() <= a.err_est + b.err_est + 1e-9,
            "{a:?} {b:?}"
        );
    }

    #[test]
    fn carre_du_champ_symmetric_and_nonnegative() {
        let params = p(2, 0.5);
        let spec = QuadratureSpec::default();
        let f = bump(0.9);
        let g = gaussian();
        let x = [0.3, 0.2];
        let a = carre_du_champ(&f, &g, &x, &params, &spec).unwrap();
        let b = carre_du_champ(&g, &f, &x, &params, &spec).unwrap();
        assert!((a.value - b.value).abs() <= a.err_est + b.err_est);
        assert!(carre_du_champ(&f, &f, &x, &params, &spec).unwrap().value > 0.0);
        assert_eq!(
            carre_du_champ(&constant(2.0), &g, &x, &params, &spec)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn leibniz_with_unit_factor() {
        let chk = leibniz_residual(
            &constant(1.0),
            &bump(0.7),
            &[0.1, 0.1],
            &p(2, 0.25),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(chk.residual.abs() <= 1e-12 * chk.scale.max(1.0), "{chk:?}");
    }

    #[test]
    fn leibniz_for_bumps() {
        let params = p(2, 0.75);
        let chk = leibniz_residual(
            &bump(0.9),
            &gaussian(),
            &[0.2, -0.3],
            &params,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(chk.residual.abs() <= 1e-5 * chk.scale, "{chk:?}");
    }

    #[test]
    fn source_field_forms_agree() {
        let eta = CutoffField::new(0.1).unwrap();
        let params = p(2, 0.5);
        let spec = QuadratureSpec::default();
        for x in [[0.1, 0.2], [0.65, 0.1], [0.95, 0.0]] {
            let sf = source_field(&gaussian(), &eta, &x, &params, &spec).unwrap();
            let tol = 3.0 * (sf.direct.err_est + sf.decomposed.err_est) + 1e-9;
            assert!(
                (sf.direct.value - sf.decomposed.value).abs() <= tol,
                "{x:?}: {sf:?}"
            );
        }
        let zero = source_field(&constant(0.0), &eta, &[0.3, 0.0], &params, &spec).unwrap();
        assert_eq!(zero.direct.value, 0.0);
        assert_eq!(zero.decomposed.value, 0.0);
    }

    #[test]
    fn diff_quotient_on_plateau_is_positive() {
        let eta = CutoffField::new(0.1).unwrap();
        let tau = RadialCutoff::new(0.2).unwrap();
        let params = p(2, 0.5);
        let d = diff_quotient(
            &constant(1.0),
            &eta,
            &tau,
            &[0.0, 0.0],
            &params,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!(d.value > 0.0);
        let z = diff_quotient(
            &constant(0.0),
            &eta,
            &tau,
            &[0.2, 0.0],
            &params,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn adaptive_angular_rule_handles_kinks() {
        let params = p(2, 0.5);
        let spec = QuadratureSpec::default().with_angular(AngularRule::Adaptive);
        let eta = CutoffField::new(0.1).unwrap().to_field();
        let a = frac_laplacian(&eta, &[0.5, 0.3], &params, &spec).unwrap();
        let b = frac_laplacian(
            &eta,
            &[0.5, 0.3],
            &params,
            &QuadratureSpec::default().with_angular(AngularRule::Fixed(512)),
        )
        .unwrap();
        assert!(
            (a.value - b.value).abs() < 1e-4 * a.value.abs(),
            "{} {}",
            a.value,
            b.value
        );
    }
}
