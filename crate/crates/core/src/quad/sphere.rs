//! Quadrature on the unit sphere `S^{N-1}`.

use std::f64::consts::PI;

use super::adaptive::{integrate_interval, Tolerance};
use super::gauss::gauss_legendre;

/// A fixed, antipodally symmetric rule on `S^{N-1}`.
///
/// `N = 2` uses the trapezoid rule at half-step offsets; higher dimensions
/// combine a polar rule with a rule on `S^{N-2}`. Weights sum to the sphere area `ω_{N-1}`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    dirs: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn new(dim: usize, resolution: usize) -> Self {
        assert!(dim >= 2, "sphere rules need N >= 2");
        let resolution = resolution.max(4);
        if dim == 2 {
            let m = resolution + resolution % 2;
            let mut dirs = Vec::with_capacity(2 * m);
            for k in 0..m {
                let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                dirs.push(phi.cos());
                dirs.push(phi.sin());
            }
            return SphereRule {
                dim,
                dirs,
                weights: vec![2.0 * PI / m as f64; m],
            };
        }
        let inner = SphereRule::new(dim - 1, resolution);
        // odd N: Gauss–Legendre in t = cos θ, where the weight (1-t²)^{(N-3)/2}
        // is a polynomial; even N: midpoint rule in θ, spectrally accurate
        // for the periodic integrand sin^{N-2} θ · f
        let n_polar = (resolution / 2).max(6);
        let polar: Vec<(f64, f64)> = if dim % 2 == 1 {
            let (ts, ws) = gauss_legendre(n_polar);
            let power = (dim as i32 - 3) / 2;
            ts.iter()
                .zip(&ws)
                .map(|(&t, &w)| (t, w * (1.0 - t * t).powi(power)))
                .collect()
        } else {
            (0..n_polar)
                .map(|k| {
                    let theta = PI * (k as f64 + 0.5) / n_polar as f64;
                    (
                        theta.cos(),
                        PI / n_polar as f64 * theta.sin().powi(dim as i32 - 2),
                    )
                })
                .collect()
        };
        let mut dirs = Vec::with_capacity(n_polar * inner.len() * dim);
        let mut weights = Vec::with_capacity(n_polar * inner.len());
        for &(cos, wt) in &polar {
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            for j in 0..inner.len() {
                dirs.push(cos);
                dirs.extend(inner.dir(j).iter().map(|c| sin * c));
                weights.push(wt * inner.weight(j));
            }
        }
        SphereRule { dim, dirs, weights }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dir(&self, i: usize) -> &[f64] {
        &self.dirs[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.len() {
            acc += self.weights[i] * f(self.dir(i));
        }
        acc
    }

    /// The same rule with the first axis sent to `axis` (a unit vector).
    pub fn aligned_to(&self, axis: &[f64]) -> SphereRule {
        let n = self.dim;
        // Householder reflection e1 -> axis
        let mut v: Vec<f64> = axis.to_vec();
        v[0] -= 1.0;
        let vv: f64 = v.iter().map(|c| c * c).sum();
        if vv < 1e-28 {
            return self.clone();
        }
        let mut dirs = Vec::with_capacity(self.dirs.len());
        for i in 0..self.len() {
            let d = self.dir(i);
            let dot: f64 = d.iter().zip(&v).map(|(a, b)| a * b).sum();
            for k in 0..n {
                dirs.push(d[k] - 2.0 * dot / vv * v[k]);
            }
        }
        SphereRule {
            dim: n,
            dirs,
            weights: self.weights.clone(),
        }
    }
}

/// Adaptive Gauss–Kronrod integral over the circle `φ ∈ [φ0, φ0 + 2π)`,
/// with extra breakpoints (angles) where the integrand may be rough.
pub(crate) fn adaptive_circle(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    start: f64,
    breaks: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> (f64, f64, bool) {
    let mut pts: Vec<f64> = (0..=8).map(|k| start + 2.0 * PI * k as f64 / 8.0).collect();
    for &b in breaks {
        let shifted = start + (b - start).rem_euclid(2.0 * PI);
        pts.push(shifted);
    }
    pts.sort_by(f64::total_cmp);
    let g = |phi: f64| f(&[phi.cos(), phi.sin()]);
    let out = integrate_interval(&g, start, start + 2.0 * PI, &pts, tol, max_panels);
    (out.value, out.err, out.converged)
}
