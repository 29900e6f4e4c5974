//! Weighted norms, the nonlocal tail, Gagliardo seminorms and an empirical
//! Hölder-exponent estimator.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field::{norm, Decay, ScalarField, Smoothness};
use crate::ops::{circle_breaks, eval_shifted, radial_breaks};
use crate::params::FracParams;
use crate::quad::rng::stream;
use crate::quad::{
    pair_integral, singular_radial_integral, Diagonal, InnerModel, PairDomain, PairIntegrand,
    PairResult, QuadratureSpec, RadialIntegrand, SphereRule, TailModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RadialExact,
    McPair,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormResult {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
}

fn tail_for(u: &ScalarField, order: f64, what: &str) -> Result<TailModel> {
    match u.decay {
        Decay::CompactSupport { radius } => Ok(TailModel::Zero { beyond: radius }),
        d => {
            let rate = d.tail_rate(order);
            if rate <= 0.0 {
                return Err(Error::Divergence(format!(
                    "{what} of {}: envelope growth {} against decay 2s = {}",
                    u.label(),
                    d.growth(),
                    2.0 * order
                )));
            }
            Ok(TailModel::Decaying { rate })
        }
    }
}

/// `‖u‖_{L¹_s} = ∫ |u(x)| / (1 + |x|^{N+2s}) dx`.
pub fn weighted_l1s_norm(
    u: &ScalarField,
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<SeminormResult> {
    let p = params.kernel_exponent();
    let origin = vec![0.0; params.dim()];
    let f = |r: f64, th: &[f64]| eval_shifted(u, &origin, r, th, 1.0).abs() / (1.0 + r.powf(p));
    let breaks = |r: f64| circle_breaks(&origin, r, &[u], false);
    let integrand = RadialIntegrand::new(
        params.dim(),
        &f,
        InnerModel::Vanishing { below: 0.0 },
        tail_for(u, params.order(), "weighted L¹ norm")?,
    )
    .with_breakpoints(radial_breaks(&origin, [u]))
    .with_angular_breaks(&breaks);
    let res = singular_radial_integral(&integrand, spec)?;
    Ok(SeminormResult {
        value: res.value,
        stderr: res.err_est,
        method: Method::RadialExact,
    })
}

/// `Tail(u; x0, R) = R^{2s} ∫_{|x - x0| > R} |u(x)| / |x - x0|^{N+2s} dx`.
pub fn nonlocal_tail(
    u: &ScalarField,
    x0: &[f64],
    radius: f64,
    params: &FracParams,
    spec: &QuadratureSpec,
) -> Result<SeminormResult> {
    crate::ops::check_point(x0, params)?;
    if !(radius > 0.0) {
        return Err(domain(format!(
            "tail radius must be positive, got {radius}"
        )));
    }
    let s = params.order();
    let p = params.kernel_exponent();
    let rx = norm(x0);
    let tail = match u.decay {
        Decay::CompactSupport { radius: r0 } => {
            if rx + r0 <= radius {
                return Ok(SeminormResult {
                    value: 0.0,
                    stderr: 0.0,
                    method: Method::RadialExact,
                });
            }
            TailModel::Zero { beyond: rx + r0 }
        }
        _ => tail_for(u, s, "nonlocal tail")?,
    };
    let f = |r: f64, th: &[f64]| {
        let v = eval_shifted(u, x0, r, th, 1.0).abs();
        if v == 0.0 {
            0.0
        } else {
            v * r.powf(-p)
        }
    };
    let breaks = |r: f64| circle_breaks(x0, r, &[u], false);
    let integrand = RadialIntegrand::new(
        params.dim(),
        &f,
        InnerModel::Vanishing { below: radius },
        tail,
    )
    .with_breakpoints(radial_breaks(x0, [u]))
    .with_angular_breaks(&breaks);
    let res = singular_radial_integral(&integrand, spec)?;
    let scale = radius.powf(2.0 * s);
    Ok(SeminormResult {
        value: scale * res.value,
        stderr: scale * res.err_est,
        method: Method::RadialExact,
    })
}

fn seminorm_diagonal(u: &ScalarField, params: &FracParams, p: f64) -> Result<Diagonal> {
    let s = params.order();
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("exponent p must be at least 1, got {p}")));
    }
    let lipschitz = u.smoothness >= Smoothness::Lipschitz;
    if !lipschitz && s * p >= 1.0 {
        return Err(domain(format!(
            "{} is not Lipschitz and s·p = {} ≥ 1",
            u.label(),
            s * p
        )));
    }
    let a = u.smoothness.holder_index();
    if a <= s {
        return Err(domain(format!(
            "{}: Hölder index {a} does not exceed s = {s}",
            u.label()
        )));
    }
    let exponent = (params.dim() as f64 + s * p - a * p).max(0.0);
    Ok(Diagonal::Singular { exponent })
}

fn pth_root(raw: PairResult, p: f64, method: Method) -> SeminormResult {
    if raw.value <= 0.0 {
        return SeminormResult {
            value: 0.0,
            stderr: raw.stderr.powf(1.0 / p),
            method,
        };
    }
    let value = raw.value.powf(1.0 / p);
    SeminormResult {
        value,
        stderr: raw.stderr * value / (p * raw.value),
        method,
    }
}

/// `∬_{B_R × B_R} |u(x) - u(y)|^p / |x - y|^{N+sp} dx dy` with `s = params.order()`.
pub fn gagliardo_energy(
    u: &ScalarField,
    params: &FracParams,
    radius: f64,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<PairResult> {
    let diagonal = seminorm_diagonal(u, params, p)?;
    let k = params.dim() as f64 + params.order() * p;
    let f = move |x: &[f64], y: &[f64]| gagliardo_kernel(u, x, y, p, k);
    pair_integral(
        &PairIntegrand {
            dim: params.dim(),
            f: &f,
            domain: PairDomain::BallSquare { radius },
            diagonal,
        },
        spec,
    )
}

fn gagliardo_kernel(u: &ScalarField, x: &[f64], y: &[f64], p: f64, k: f64) -> f64 {
    let d = (u.eval(x) - u.eval(y)).abs();
    if d == 0.0 {
        return 0.0;
    }
    let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    let dp = if p == 2.0 { d * d } else { d.powf(p) };
    dp * r2.powf(-0.5 * k)
}

/// `[u]_{W^{s,p}(B_R)}`.
pub fn gagliardo_seminorm(
    u: &ScalarField,
    params: &FracParams,
    radius: f64,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<SeminormResult> {
    if !(radius > 0.0) {
        return Err(domain(format!(
            "domain radius must be positive, got {radius}"
        )));
    }
    Ok(pth_root(
        gagliardo_energy(u, params, radius, p, spec)?,
        p,
        Method::McPair,
    ))
}

/// `∬_{R^N × R^N} |u(x) - u(y)|^p / |x - y|^{N+sp}` for compactly supported `u`.
pub fn gagliardo_energy_rn(
    u: &ScalarField,
    params: &FracParams,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<PairResult> {
    let Some(support) = u.decay.support_radius() else {
        return Err(domain(format!(
            "{}: whole-space seminorm needs compact support",
            u.label()
        )));
    };
    let diagonal = seminorm_diagonal(u, params, p)?;
    let k = params.dim() as f64 + params.order() * p;
    let f = move |x: &[f64], y: &[f64]| gagliardo_kernel(u, x, y, p, k);
    pair_integral(
        &PairIntegrand {
            dim: params.dim(),
            f: &f,
            domain: PairDomain::Symmetric {
                radius: support,
                far_decay: params.order() * p,
            },
            diagonal,
        },
        spec,
    )
}

/// `[u]_{W^{s,p}(R^N)}` for compactly supported `u`.
pub fn gagliardo_seminorm_rn(
    u: &ScalarField,
    params: &FracParams,
    p: f64,
    spec: &QuadratureSpec,
) -> Result<SeminormResult> {
    Ok(pth_root(
        gagliardo_energy_rn(u, params, p, spec)?,
        p,
        Method::McPair,
    ))
}

/// Polar scan used by [`weighted_linf_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub radius: f64,
    pub radial: usize,
    pub angular: usize,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec {
            radius: 4.0,
            radial: 128,
            angular: 64,
        }
    }
}

impl ScanSpec {
    pub fn refined(self) -> Self {
        ScanSpec {
            radial: 2 * self.radial,
            angular: 2 * self.angular,
            ..self
        }
    }
}

/// `‖u‖_{L^∞_s} = sup (1 + |x|^{N+2s}) |u(x)|`: a polar scan refined by
/// pattern search at the best node, plus the declared envelope beyond the
/// scan radius.
pub fn weighted_linf_norm(u: &ScalarField, params: &FracParams, scan: &ScanSpec) -> Result<f64> {
    let n = params.dim();
    let p = params.kernel_exponent();
    if scan.radial < 2 || scan.angular < 4 || !(scan.radius > 0.0) {
        return Err(domain(
            "scan needs radius > 0, at least 2 radial and 4 angular nodes",
        ));
    }
    let radius = match u.decay {
        Decay::CompactSupport { radius } => scan.radius.max(radius),
        _ => scan.radius,
    };
    let weighted = |x: &[f64]| (1.0 + norm(x).powf(p)) * u.eval(x).abs();
    let rule = SphereRule::new(n, scan.angular);
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    for i in 0..=scan.radial {
        let r = radius * i as f64 / scan.radial as f64;
        for j in 0..rule.len() {
            let x: Vec<f64> = rule.dir(j).iter().map(|t| r * t).collect();
            let v = weighted(&x);
            if v > best.0 {
                best = (v, r, j);
            }
        }
    }
    // pattern search in (r, direction)
    let (mut val, mut r, dir0) = best;
    let mut dir = rule.dir(dir0).to_vec();
    let mut step_r = radius / scan.radial as f64;
    let mut step_a = 2.0 * std::f64::consts::PI / scan.angular as f64;
    for _ in 0..60 {
        let mut moved = false;
        for dr in [-step_r, step_r] {
            let rr = (r + dr).clamp(0.0, radius);
            let x: Vec<f64> = dir.iter().map(|t| rr * t).collect();
            let v = weighted(&x);
            if v > val {
                val = v;
                r = rr;
                moved = true;
            }
        }
        if n == 2 {
            for da in [-step_a, step_a] {
                let phi = dir[1].atan2(dir[0]) + da;
                let d = vec![phi.cos(), phi.sin()];
                let x: Vec<f64> = d.iter().map(|t| r * t).collect();
                let v = weighted(&x);
                if v > val {
                    val = v;
                    dir = d;
                    moved = true;
                }
            }
        }
        if !moved {
            step_r *= 0.5;
            step_a *= 0.5;
        }
    }
    let tail = match u.decay {
        Decay::CompactSupport { .. } => 0.0,
        Decay::Bounded { .. } => {
            return Err(Error::Divergence(format!(
                "{}: bounded envelope does not decay like |x|^(-N-2s)",
                u.label()
            )))
        }
        Decay::WeightedL1 { envelope } => {
            if envelope.growth + p > 1e-12 {
                return Err(Error::Divergence(format!(
                    "{}: envelope growth {} exceeds -(N+2s) = {}",
                    u.label(),
                    envelope.growth,
                    -p
                )));
            }
            (0..=240)
                .map(|k| {
                    let t = radius * 2f64.powf(k as f64 / 8.0);
                    (1.0 + t.powf(p)) * envelope.at(t)
                })
                .fold(0.0f64, f64::max)
        }
    };
    Ok(val.max(tail))
}

/// Result of [`holder_exponent_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    /// Fitted exponent; `+∞` when every increment vanishes.
    pub exponent: f64,
    /// Standard error of the fitted slope.
    pub fit_err: f64,
    /// `(distance, max |Δf|)` of each occupied bin used in the fit.
    pub envelope: Vec<(f64, f64)>,
}

const HOLDER_BINS: usize = 24;
const HOLDER_MIN_DISTANCE: f64 = 1e-3;
const HOLDER_SEEDS: usize = 4;

fn uniform_in_ball(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = norm(&v).max(1e-300);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    v.iter_mut().for_each(|c| *c *= r / n);
    v
}

/// Empirical Hölder exponent of `f` on `B_R` from the upper envelope of
/// `|f(x) - f(y)|` over pairs binned log-uniformly in `|x - y| ∈ [1e-3, 2R]`.
///
/// Bins are visited from long to short distances. Half of each bin's base
/// points are drawn near the maximizing pairs of the previous bin, so the
/// search follows the location of worst regularity down the scales. The slope
/// is fitted on bins below a tenth of the diameter, where the increments of a
/// bounded function are not saturated.
pub fn holder_exponent_estimate(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    radius: f64,
    pairs: usize,
    seed: u64,
) -> Result<HolderFit> {
    if dim < 1 || !(radius > 0.0) {
        return Err(domain("Hölder estimation needs a positive radius"));
    }
    let diam = 2.0 * radius;
    if diam <= 10.0 * HOLDER_MIN_DISTANCE {
        return Err(domain(format!(
            "domain diameter {diam} is too small for the distance bins"
        )));
    }
    let per_bin = (pairs / HOLDER_BINS).max(8);
    let edges: Vec<f64> = (0..=HOLDER_BINS)
        .map(|k| {
            HOLDER_MIN_DISTANCE * (diam / HOLDER_MIN_DISTANCE).powf(k as f64 / HOLDER_BINS as f64)
        })
        .collect();
    let inside = |x: &[f64]| norm(x) <= radius;

    let mut seeds: Vec<Vec<f64>> = Vec::new();
    let mut envelope = Vec::new();
    let mut any_nonzero = false;
    for b in (0..HOLDER_BINS).rev() {
        let (lo, hi) = (edges[b], edges[b + 1]);
        let mut rng = stream(seed, b as u64);
        let mut cand: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(per_bin);
        for k in 0..per_bin {
            let mut placed = None;
            for _ in 0..32 {
                let x = if k % 2 == 1 && !seeds.is_empty() {
                    let c = &seeds[rng.random_range(0..seeds.len())];
                    let off = uniform_in_ball(&mut rng, dim, 2.0 * hi);
                    c.iter().zip(&off).map(|(a, o)| a + o).collect()
                } else {
                    uniform_in_ball(&mut rng, dim, radius)
                };
                if !inside(&x) {
                    continue;
                }
                let d = lo * (hi / lo).powf(rng.random::<f64>());
                let mut th: Vec<f64> = (0..dim)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let tn = norm(&th).max(1e-300);
                th.iter_mut().for_each(|c| *c /= tn);
                let y: Vec<f64> = x.iter().zip(&th).map(|(a, t)| a + d * t).collect();
                if inside(&y) {
                    placed = Some((x, y, d));
                    break;
                }
            }
            if let Some(p) = placed {
                cand.push(p);
            }
        }
        let incs: Vec<f64> = cand
            .par_iter()
            .map(|(x, y, _)| (f(x) - f(y)).abs())
            .collect();
        let mut order: Vec<usize> = (0..cand.len()).filter(|&i| incs[i].is_finite()).collect();
        order.sort_by(|&i, &j| incs[j].total_cmp(&incs[i]));
        if let Some(&top) = order.first() {
            if incs[top] > 0.0 {
                any_nonzero = true;
                if hi <= 0.1 * diam {
                    envelope.push((cand[top].2, incs[top]));
                }
                seeds = order
                    .iter()
                    .take(HOLDER_SEEDS)
                    .filter(|&&i| incs[i] > 0.0)
                    .flat_map(|&i| [cand[i].0.clone(), cand[i].1.clone()])
                    .collect();
            }
        }
    }
    if !any_nonzero {
        return Ok(HolderFit {
            exponent: f64::INFINITY,
            fit_err: 0.0,
            envelope,
        });
    }
    if envelope.len() < 8 {
        return Err(Error::Fit(format!(
            "only {} occupied distance bins",
            envelope.len()
        )));
    }
    let pts: Vec<(f64, f64)> = envelope.iter().map(|(d, v)| (d.ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let fit_err = (resid / (m - 2.0) / sxx).sqrt();
    envelope.reverse();
    Ok(HolderFit {
        exponent: slope,
        fit_err,
        envelope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{bump, constant, gaussian};
    use std::f64::consts::PI;

    fn p2(s: f64) -> FracParams {
        FracParams::new(2, s).unwrap()
    }

    #[test]
    fn constant_weighted_norm() {
        let r = weighted_l1s_norm(&constant(1.0), &p2(0.5), &QuadratureSpec::default()).unwrap();
        let exact = 4.0 * PI * PI / (3.0 * 3f64.sqrt());
        assert!((r.value - exact).abs() < 1e-6, "{r:?}");
        let z = weighted_l1s_norm(&constant(0.0), &p2(0.5), &QuadratureSpec::default()).unwrap();
        assert_eq!(z.value, 0.0);
    }

    #[test]
    fn tail_of_constant() {
        for r in [0.3, 1.0, 5.0] {
            let t = nonlocal_tail(
                &constant(1.0),
                &[0.2, -0.4],
                r,
                &p2(0.5),
                &QuadratureSpec::default(),
            )
            .unwrap();
            assert!((t.value - 2.0 * PI).abs() < 1e-6, "{t:?}");
        }
        let b = nonlocal_tail(
            &bump(0.5),
            &[0.1, 0.0],
            1.0,
            &p2(0.5),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn seminorm_domain_checks() {
        let cusp = crate::presets::holder_cusp(0.4);
        let spec = QuadratureSpec::monte_carlo();
        assert!(matches!(
            gagliardo_seminorm(&cusp, &p2(0.75), 1.0, 2.0, &spec),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            gagliardo_seminorm(&cusp, &p2(0.45), 1.0, 2.0, &spec),
            Err(Error::Domain(_))
        ));
        let c = gagliardo_seminorm(&constant(2.0), &p2(0.25), 1.0, 2.0, &spec).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn linf_of_weight_inverse() {
        let params = p2(0.5);
        let u = ScalarField::new(
            "w",
            Smoothness::Analytic,
            Decay::WeightedL1 {
                envelope: crate::field::Envelope {
                    scale: 1.0,
                    growth: -3.0,
                },
            },
            |x| 1.0 / (1.0 + norm(x).powi(3)),
        );
        let v = weighted_linf_norm(&u, &params, &ScanSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let g = weighted_linf_norm(&gaussian(), &params, &ScanSpec::default()).unwrap();
        let g2 = weighted_linf_norm(&gaussian(), &params, &ScanSpec::default().refined()).unwrap();
        assert!(((g - g2) / g2).abs() < 1e-2);
        assert!(matches!(
            weighted_linf_norm(&constant(1.0), &params, &ScanSpec::default()),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn holder_of_linear_and_cusp() {
        let lin = |x: &[f64]| x[0];
        let fit = holder_exponent_estimate(&lin, 2, 0.5, 2000, 1).unwrap();
        assert!((fit.exponent - 1.0).abs() < 0.05, "{fit:?}");
        let cusp = |x: &[f64]| x[0].abs().sqrt();
        let fit = holder_exponent_estimate(&cusp, 2, 0.5, 2000, 1).unwrap();
        assert!((fit.exponent - 0.5).abs() < 0.05, "{fit:?}");
        let flat = |_: &[f64]| 3.0;
        assert_eq!(
            holder_exponent_estimate(&flat, 2, 0.5, 2000, 1)
                .unwrap()
                .exponent,
            f64::INFINITY
        );
    }
}
