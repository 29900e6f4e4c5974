//! Monte-Carlo estimates of pair integrals `∬ F(x, y) dx dy`.
//!
//! Points are drawn as `x` uniform in a ball and `y = x + h`, where `|h|`
//! follows a power law matched to the diagonal behaviour of `F` and, for
//! unbounded domains, a Pareto tail matched to its decay. The radial uniform
//! is stratified; each stratified set gives one i.i.d. replicate.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::stream;
use super::QuadratureSpec;
use crate::error::{domain, Error, Result, Zone};
use crate::params::{ball_volume, sphere_area};

const STRATA: usize = 16;
const SETS_PER_BATCH: usize = 256;
const BATCH: usize = STRATA * SETS_PER_BATCH;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairDomain {
    /// `x, y ∈ B_R`.
    BallSquare { radius: f64 },
    /// `F` is symmetric and vanishes unless `x ∈ B_R` or `y ∈ B_R`, and
    /// decays like `|x - y|^{-N-rate}` for large separations.
    Symmetric { radius: f64, far_decay: f64 },
}

/// Behaviour of `F` as `y → x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Diagonal {
    Regular,
    /// `|F| ≲ |x - y|^{-exponent}`.
    Singular {
        exponent: f64,
    },
    /// `F = 0` for `|x - y| < radius`; `|F| ≲ |x - y|^{-exponent}` beyond.
    Cut {
        radius: f64,
        exponent: f64,
    },
}

pub struct PairIntegrand<'a> {
    pub dim: usize,
    pub f: &'a (dyn Fn(&[f64], &[f64]) -> f64 + Sync),
    pub domain: PairDomain,
    pub diagonal: Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Radial proposal: density `∝ r^{k-1}` on `[cut, rc]`, continued by
/// `∝ r^{-1-a}` on `(rc, ∞)` when `a` is present.
struct Radial {
    cut: f64,
    rc: f64,
    k: f64,
    tail_rate: Option<f64>,
    /// probability of the power part
    p_body: f64,
    /// normalized density at `rc`
    amp: f64,
}

impl Radial {
    fn new(cut: f64, rc: f64, k: f64, tail_rate: Option<f64>) -> Self {
        let body = if k.abs() < 1e-12 {
            (rc / cut).ln() * rc.powf(-k)
        } else {
            (rc.powf(k) - cut.powf(k)) / k * rc.powf(-k)
        };
        let tail = tail_rate.map_or(0.0, |a| 1.0 / a);
        let total = body + tail;
        Radial {
            cut,
            rc,
            k,
            tail_rate,
            p_body: body / total,
            amp: 1.0 / (rc * total),
        }
    }

    /// Density of `|h|` at `r`.
    fn density(&self, r: f64) -> f64 {
        if r <= self.rc {
            self.amp * (r / self.rc).powf(self.k - 1.0)
        } else {
            let a = self.tail_rate.unwrap_or(0.0);
            self.amp * (r / self.rc).powf(-1.0 - a)
        }
    }

    fn sample(&self, u: f64) -> f64 {
        if u < self.p_body || self.tail_rate.is_none() {
            let v = (u / self.p_body).min(1.0);
            if self.k.abs() < 1e-12 {
                self.cut * (self.rc / self.cut).powf(v)
            } else {
                let lo = self.cut.powf(self.k);
                let hi = self.rc.powf(self.k);
                (lo + v * (hi - lo)).powf(1.0 / self.k)
            }
        } else {
            let a = self.tail_rate.unwrap_or(1.0);
            let v = ((u - self.p_body) / (1.0 - self.p_body)).clamp(0.0, 1.0);
            self.rc * (1.0 - v).max(f64::MIN_POSITIVE).powf(-1.0 / a)
        }
    }
}

fn unit_vector(rng: &mut impl Rng, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            s += *v * *v;
        }
        if s > 1e-20 {
            let inv = 1.0 / s.sqrt();
            out.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Sum and sum of squares of the set means in batch `index`.
fn run_batch(
    p: &PairIntegrand<'_>,
    radial: &Radial,
    radius: f64,
    seed: u64,
    index: u64,
) -> (f64, f64) {
    let n = p.dim;
    let mut rng = stream(seed, index);
    let vol = ball_volume(n);
    let vol_r = vol * radius.powi(n as i32);
    let omega = sphere_area(n);
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..SETS_PER_BATCH {
        let mut set = 0.0;
        for k in 0..STRATA {
            unit_vector(&mut rng, &mut x);
            let rx = radius * rng.random::<f64>().powf(1.0 / n as f64);
            x.iter_mut().for_each(|v| *v *= rx);
            unit_vector(&mut rng, &mut dir);
            let u = (k as f64 + rng.random::<f64>()) / STRATA as f64;
            let r = radial.sample(u);
            for i in 0..n {
                y[i] = x[i] + r * dir[i];
            }
            let inside = norm_sq(&y) <= radius * radius;
            let mult = match p.domain {
                PairDomain::BallSquare { .. } => {
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                }
                PairDomain::Symmetric { .. } => {
                    if inside {
                        1.0
                    } else {
                        2.0
                    }
                }
            };
            if mult == 0.0 {
                continue;
            }
            let q = radial.density(r) / (omega * r.powi(n as i32 - 1));
            let fv = (p.f)(&x, &y);
            if fv != 0.0 {
                set += vol_r * mult * fv / q;
            }
        }
        let mean = set / STRATA as f64;
        sum += mean;
        sum_sq += mean * mean;
    }
    (sum, sum_sq)
}

/// Estimates `∬ F`; the sample count doubles until the standard error meets
/// `spec.rel_tol` (relative) or `spec.abs_tol`, up to `spec.mc_samples`.
pub fn pair_integral(p: &PairIntegrand<'_>, spec: &QuadratureSpec) -> Result<PairResult> {
    spec.validate()?;
    let n = p.dim;
    if n < 1 {
        return Err(domain("dimension must be positive"));
    }
    let (radius, tail) = match p.domain {
        PairDomain::BallSquare { radius } => (radius, None),
        PairDomain::Symmetric { radius, far_decay } => {
            if !(far_decay > 0.0) {
                return Err(Error::Divergence(format!(
                    "far-field decay rate {far_decay} is not positive"
                )));
            }
            (radius, Some(far_decay))
        }
    };
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(domain(format!(
            "pair domain radius must be positive, got {radius}"
        )));
    }
    let nf = n as f64;
    let (cut, exponent) = match p.diagonal {
        Diagonal::Regular => (0.0, 0.0),
        Diagonal::Singular { exponent } => {
            if exponent >= nf {
                return Err(Error::Singularity { exponent, dim: n });
            }
            (0.0, exponent.max(0.0))
        }
        Diagonal::Cut {
            radius: c,
            exponent,
        } => {
            if !(c > 0.0) {
                return Err(domain(format!("diagonal cut must be positive, got {c}")));
            }
            (c, exponent.max(0.0))
        }
    };
    let rc = 2.0 * radius;
    if cut >= rc && tail.is_none() {
        return Ok(PairResult {
            value: 0.0,
            stderr: 0.0,
            samples: 0,
        });
    }
    let rc = rc.max(cut * 2.0);
    let radial = Radial::new(cut, rc, nf - exponent, tail);

    let total_batches = spec.mc_samples.div_ceil(BATCH).max(1);
    let mut done = 0usize;
    let mut want = total_batches.min(4);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    loop {
        let indices: Vec<u64> = (done as u64..want as u64).collect();
        let parts: Vec<(f64, f64)> = if spec.parallel {
            indices
                .par_iter()
                .map(|&b| run_batch(p, &radial, radius, spec.rng_seed, b))
                .collect()
        } else {
            indices
                .iter()
                .map(|&b| run_batch(p, &radial, radius, spec.rng_seed, b))
                .collect()
        };
        for (s, q) in parts {
            sum += s;
            sum_sq += q;
        }
        done = want;
        let m = (done * SETS_PER_BATCH) as f64;
        let mean = sum / m;
        let var = ((sum_sq / m - mean * mean).max(0.0)) * m / (m - 1.0);
        let stderr = (var / m).sqrt();
        if !mean.is_finite() || !stderr.is_finite() {
            return Err(Error::ConvergenceFailure {
                zone: Zone::MonteCarlo,
                last_err: f64::INFINITY,
            });
        }
        if stderr <= spec.rel_tol * mean.abs() || stderr <= spec.abs_tol {
            return Ok(PairResult {
                value: mean,
                stderr,
                samples: done * BATCH,
            });
        }
        if done >= total_batches {
            return Err(Error::ConvergenceFailure {
                zone: Zone::MonteCarlo,
                last_err: stderr,
            });
        }
        want = (2 * done).min(total_batches);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::monte_carlo()
            .with_tolerance(1e-2, 1e-12)
            .with_samples(400_000)
    }

    #[test]
    fn ball_square_volume() {
        let f = |_: &[f64], _: &[f64]| 1.0;
        let res = pair_integral(
            &PairIntegrand {
                dim: 2,
                f: &f,
                domain: PairDomain::BallSquare { radius: 1.0 },
                diagonal: Diagonal::Regular,
            },
            &spec(),
        )
        .unwrap();
        assert!(
            (res.value - PI * PI).abs() < 4.0 * res.stderr + 1e-9,
            "{res:?}"
        );
    }

    #[test]
    fn singular_kernel_on_ball() {
        // ∬_{B×B} |x-y|^{-1} in N=2: 2π ∫_0^2 A(d) d^{0} dd, A = lens area
        let f = |x: &[f64], y: &[f64]| 1.0 / ((x[0] - y[0]).hypot(x[1] - y[1]));
        let lens = |d: f64| 2.0 * (d / 2.0).acos() - 0.5 * d * (4.0 - d * d).sqrt();
        let (nodes, weights) = crate::quad::gauss_legendre(64);
        let exact: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * lens(1.0 + t))
            .sum::<f64>()
            * 2.0
            * PI;
        let res = pair_integral(
            &PairIntegrand {
                dim: 2,
                f: &f,
                domain: PairDomain::BallSquare { radius: 1.0 },
                diagonal: Diagonal::Singular { exponent: 1.0 },
            },
            &spec(),
        )
        .unwrap();
        assert!(
            (res.value - exact).abs() < 4.0 * res.stderr,
            "{res:?} vs {exact}"
        );
    }

    #[test]
    fn symmetric_far_field() {
        // F = 1_{|x|<1} 1_{|y|>1} |x-y|^{-3} + sym: ∬ = 2∬_{B×B^c}
        let f = |x: &[f64], y: &[f64]| {
            let ix = x[0].hypot(x[1]) < 1.0;
            let iy = y[0].hypot(y[1]) < 1.0;
            if ix != iy {
                ((x[0] - y[0]).hypot(x[1] - y[1])).powi(-3)
            } else {
                0.0
            }
        };
        let res = pair_integral(
            &PairIntegrand {
                dim: 2,
                f: &f,
                domain: PairDomain::Symmetric {
                    radius: 1.0,
                    far_decay: 1.0,
                },
                diagonal: Diagonal::Cut {
                    radius: 0.2,
                    exponent: 3.0,
                },
            },
            &spec().with_tolerance(5e-2, 1e-12),
        )
        .unwrap();
        assert!(res.value > 0.0);
    }

    #[test]
    fn bitwise_reproducible_and_parallel() {
        let f = |x: &[f64], y: &[f64]| (x[0] - y[1]).cos();
        let p = PairIntegrand {
            dim: 2,
            f: &f,
            domain: PairDomain::BallSquare { radius: 1.0 },
            diagonal: Diagonal::Regular,
        };
        let a = pair_integral(&p, &spec()).unwrap();
        let b = pair_integral(&p, &spec()).unwrap();
        let c = pair_integral(&p, &spec().parallel(true)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.value.to_bits(), c.value.to_bits());
        let d = pair_integral(&p, &spec().with_seed(7)).unwrap();
        assert_ne!(a.value.to_bits(), d.value.to_bits());
    }

    #[test]
    fn non_integrable_diagonal() {
        let f = |_: &[f64], _: &[f64]| 1.0;
        let err = pair_integral(
            &PairIntegrand {
                dim: 2,
                f: &f,
                domain: PairDomain::BallSquare { radius: 1.0 },
                diagonal: Diagonal::Singular { exponent: 2.0 },
            },
            &spec(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn budget_exhaustion() {
        let f = |x: &[f64], _: &[f64]| x[0];
        let err = pair_integral(
            &PairIntegrand {
                dim: 2,
                f: &f,
                domain: PairDomain::BallSquare { radius: 1.0 },
                diagonal: Diagonal::Regular,
            },
            &spec().with_samples(5000).with_tolerance(1e-6, 1e-12),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::ConvergenceFailure {
                zone: Zone::MonteCarlo,
                ..
            }
        ));
    }
}
