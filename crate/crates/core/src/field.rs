//! Real-valued fields on `R^N` with declared smoothness and decay.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
/// Partial derivative `∂^ι u(x)` for a multi-index `ι`.
pub type DerivativeFn = dyn Fn(&[usize], &[f64]) -> f64 + Send + Sync;

/// Smoothness class, ordered from rough to smooth.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    /// Bounded but with jump discontinuities (indicators).
    Discontinuous,
    Holder(f64),
    Lipschitz,
    C2,
    CInfinity,
    Analytic,
}

impl Smoothness {
    /// Hölder index capped at 1: 0 for jumps, `α` for `C^{0,α}`, 1 otherwise.
    pub fn holder_index(&self) -> f64 {
        match *self {
            Smoothness::Discontinuous => 0.0,
            Smoothness::Holder(a) => a.clamp(0.0, 1.0),
            _ => 1.0,
        }
    }

    pub fn is_c2(&self) -> bool {
        matches!(
            self,
            Smoothness::C2 | Smoothness::CInfinity | Smoothness::Analytic
        )
    }

    /// Smoothness class of a product or sum.
    pub fn meet(self, other: Smoothness) -> Smoothness {
        let rank = |s: &Smoothness| match s {
            Smoothness::Discontinuous => 0.0,
            Smoothness::Holder(a) => 1.0 + a.clamp(0.0, 1.0) * 0.5,
            Smoothness::Lipschitz => 2.0,
            Smoothness::C2 => 3.0,
            Smoothness::CInfinity => 4.0,
            Smoothness::Analytic => 5.0,
        };
        if rank(&self) <= rank(&other) {
            self
        } else {
            other
        }
    }
}

/// Polynomial envelope `|u(x)| ≤ scale (1 + |x|)^growth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub scale: f64,
    pub growth: f64,
}

impl Envelope {
    pub fn at(&self, r: f64) -> f64 {
        self.scale * (1.0 + r).powf(self.growth)
    }
}

/// Behaviour at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decay {
    /// `u(x) = 0` for `|x| > radius`.
    CompactSupport { radius: f64 },
    /// `|u| ≤ bound` everywhere.
    Bounded { bound: f64 },
    /// Integrable against `(1 + |x|^{N+2s})^{-1}` with the given envelope.
    WeightedL1 { envelope: Envelope },
}

impl Decay {
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Decay::CompactSupport { radius } => Some(radius),
            _ => None,
        }
    }

    /// Polynomial growth exponent of the envelope (`-∞` for compact support).
    pub fn growth(&self) -> f64 {
        match *self {
            Decay::CompactSupport { .. } => f64::NEG_INFINITY,
            Decay::Bounded { .. } => 0.0,
            Decay::WeightedL1 { envelope } => envelope.growth,
        }
    }

    /// Upper bound for `|u(x)|` at `|x| = r`, if one is declared.
    pub fn envelope_at(&self, r: f64) -> Option<f64> {
        match *self {
            Decay::CompactSupport { radius } => (r > radius).then_some(0.0),
            Decay::Bounded { bound } => Some(bound),
            Decay::WeightedL1 { envelope } => Some(envelope.at(r)),
        }
    }

    /// Tail decay exponent `a` such that `|u(y)| |y|^{-N-2s} r^{N-1} ≲ r^{-1-a}`.
    pub(crate) fn tail_rate(&self, order: f64) -> f64 {
        2.0 * order - self.growth().max(0.0)
    }
}

/// A hyperplane `{ y : normal · y = offset }` across which a field jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    /// Signed distance `(normal · y - offset) / |normal|`.
    pub fn signed_distance(&self, y: &[f64]) -> f64 {
        let n = norm(&self.normal);
        (self.normal.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.offset) / n
    }

    /// Angles `φ` where the circle `center + r (cos φ, sin φ)` meets the line
    /// (two dimensions only).
    pub fn circle_crossings(&self, center: &[f64], r: f64) -> Vec<f64> {
        if self.normal.len() != 2 || r <= 0.0 {
            return Vec::new();
        }
        let c = -self.signed_distance(center) / r;
        if c.abs() > 1.0 {
            return Vec::new();
        }
        let phi_n = self.normal[1].atan2(self.normal[0]);
        let a = c.acos();
        vec![phi_n - a, phi_n + a]
    }
}

/// A real-valued field on `R^N`.
///
/// `features` lists radii (about the origin) where the field fails to be
/// smooth, e.g. the support edge or the plateau edge of a cutoff. Quadrature
/// engines turn them into breakpoints.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<EvalFn>,
    pub smoothness: Smoothness,
    pub decay: Decay,
    pub features: Vec<f64>,
    pub discontinuities: Vec<Hyperplane>,
    derivative: Option<Arc<DerivativeFn>>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("decay", &self.decay)
            .field("features", &self.features)
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, smoothness: Smoothness, decay: Decay, eval: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let mut features = Vec::new();
        if let Some(r) = decay.support_radius() {
            features.push(r);
        }
        ScalarField {
            eval: Arc::new(eval),
            smoothness,
            decay,
            features,
            discontinuities: Vec::new(),
            derivative: None,
            label: label.into(),
        }
    }

    pub fn with_features(mut self, radii: impl IntoIterator<Item = f64>) -> Self {
        self.features.extend(radii);
        self.features.sort_by(f64::total_cmp);
        self.features.dedup();
        self
    }

    pub fn with_discontinuity(mut self, plane: Hyperplane) -> Self {
        self.discontinuities.push(plane);
        self
    }

    pub fn with_derivative<D>(mut self, d: D) -> Self
    where
        D: Fn(&[usize], &[f64]) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(d));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    /// Analytic partial derivative, when the field carries one.
    pub fn derivative(&self, index: &[usize], x: &[f64]) -> Option<f64> {
        self.derivative.as_ref().map(|d| d(index, x))
    }

    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// Analytic Laplacian, when derivatives are available.
    pub fn laplacian(&self, x: &[f64]) -> Option<f64> {
        let d = self.derivative.as_ref()?;
        let mut idx = vec![0usize; x.len()];
        let mut acc = 0.0;
        for i in 0..x.len() {
            idx[i] = 2;
            acc += d(&idx, x);
            idx[i] = 0;
        }
        Some(acc)
    }

    /// `c · u`.
    pub fn scaled(&self, c: f64) -> ScalarField {
        let inner = self.eval.clone();
        let decay = match self.decay {
            Decay::Bounded { bound } => Decay::Bounded {
                bound: bound * c.abs(),
            },
            Decay::WeightedL1 { envelope } => Decay::WeightedL1 {
                envelope: Envelope {
                    scale: envelope.scale * c.abs(),
                    growth: envelope.growth,
                },
            },
            d => d,
        };
        let mut out = ScalarField::new(
            format!("{c}*{}", self.label),
            self.smoothness,
            decay,
            move |x| c * inner(x),
        );
        out.features = self.features.clone();
        out.discontinuities = self.discontinuities.clone();
        if let Some(d) = self.derivative.clone() {
            out = out.with_derivative(move |i, x| c * d(i, x));
        }
        out
    }

    /// `a · u + b · v`.
    pub fn combine(a: f64, u: &ScalarField, b: f64, v: &ScalarField) -> ScalarField {
        let (fu, fv) = (u.eval.clone(), v.eval.clone());
        let decay = combine_decay(&[(a, u.decay), (b, v.decay)]);
        let mut out = ScalarField::new(
            format!("{a}*{}+{b}*{}", u.label, v.label),
            u.smoothness.meet(v.smoothness),
            decay,
            move |x| a * fu(x) + b * fv(x),
        )
        .with_features(u.features.iter().chain(v.features.iter()).copied());
        out.discontinuities = u
            .discontinuities
            .iter()
            .chain(&v.discontinuities)
            .cloned()
            .collect();
        if let (Some(du), Some(dv)) = (u.derivative.clone(), v.derivative.clone()) {
            out = out.with_derivative(move |i, x| a * du(i, x) + b * dv(i, x));
        }
        out
    }

    /// Pointwise product `u · v`.
    pub fn product(u: &ScalarField, v: &ScalarField) -> ScalarField {
        let (fu, fv) = (u.eval.clone(), v.eval.clone());
        let decay = product_decay(u.decay, v.decay);
        let mut out = ScalarField::new(
            format!("{}*{}", u.label, v.label),
            u.smoothness.meet(v.smoothness),
            decay,
            move |x| fu(x) * fv(x),
        )
        .with_features(u.features.iter().chain(v.features.iter()).copied());
        out.discontinuities = u
            .discontinuities
            .iter()
            .chain(&v.discontinuities)
            .cloned()
            .collect();
        out
    }

    /// `x ↦ u(λ x)`.
    pub fn dilated(&self, lambda: f64) -> ScalarField {
        assert!(lambda > 0.0, "dilation factor must be positive");
        let inner = self.eval.clone();
        let decay = match self.decay {
            Decay::CompactSupport { radius } => Decay::CompactSupport {
                radius: radius / lambda,
            },
            Decay::WeightedL1 { envelope } => Decay::WeightedL1 {
                envelope: Envelope {
                    scale: envelope.scale * lambda.max(1.0).powf(envelope.growth.max(0.0)),
                    growth: envelope.growth,
                },
            },
            d => d,
        };
        let mut out = ScalarField::new(
            format!("{}(λ={lambda})", self.label),
            self.smoothness,
            decay,
            move |x| {
                let y: Vec<f64> = x.iter().map(|v| v * lambda).collect();
                inner(&y)
            },
        );
        out.features = self.features.iter().map(|r| r / lambda).collect();
        out.discontinuities = self
            .discontinuities
            .iter()
            .map(|h| Hyperplane {
                normal: h.normal.clone(),
                offset: h.offset / lambda,
            })
            .collect();
        out
    }

    /// `x ↦ u(x - shift)`; radial features are dropped because they no longer
    /// sit at the origin, the support radius grows by `|shift|`.
    pub fn translated(&self, shift: &[f64]) -> ScalarField {
        let inner = self.eval.clone();
        let shift = shift.to_vec();
        let norm = shift.iter().map(|v| v * v).sum::<f64>().sqrt();
        let decay = match self.decay {
            Decay::CompactSupport { radius } => Decay::CompactSupport {
                radius: radius + norm,
            },
            Decay::WeightedL1 { envelope } => Decay::WeightedL1 {
                envelope: Envelope {
                    scale: envelope.scale * (1.0 + norm).powf(envelope.growth.abs()),
                    growth: envelope.growth,
                },
            },
            d => d,
        };
        let s2 = shift.clone();
        let mut out = ScalarField::new(
            format!("{}(shifted)", self.label),
            self.smoothness,
            decay,
            move |x| {
                let y: Vec<f64> = x.iter().zip(&s2).map(|(a, b)| a - b).collect();
                inner(&y)
            },
        );
        out.discontinuities = self
            .discontinuities
            .iter()
            .map(|h| Hyperplane {
                normal: h.normal.clone(),
                offset: h.offset + h.normal.iter().zip(&shift).map(|(a, b)| a * b).sum::<f64>(),
            })
            .collect();
        if let Some(d) = self.derivative.clone() {
            out = out.with_derivative(move |i, x| {
                let y: Vec<f64> = x.iter().zip(&shift).map(|(a, b)| a - b).collect();
                d(i, &y)
            });
        }
        out
    }
}

fn combine_decay(terms: &[(f64, Decay)]) -> Decay {
    let mut support: Option<f64> = Some(0.0);
    let mut bound = 0.0;
    let mut growth = f64::NEG_INFINITY;
    let mut scale = 0.0;
    let mut bounded = true;
    for &(c, d) in terms {
        if c == 0.0 {
            continue;
        }
        match d {
            Decay::CompactSupport { radius } => {
                support = support.map(|s| s.max(radius));
            }
            Decay::Bounded { bound: b } => {
                support = None;
                bound += c.abs() * b;
                growth = growth.max(0.0);
                scale += c.abs() * b;
            }
            Decay::WeightedL1 { envelope } => {
                support = None;
                bounded = false;
                growth = growth.max(envelope.growth);
                scale += c.abs() * envelope.scale;
            }
        }
    }
    if let Some(radius) = support {
        return Decay::CompactSupport { radius };
    }
    if bounded {
        Decay::Bounded { bound }
    } else {
        // compact pieces are bounded by their own sup which is unknown here;
        // the envelope then only controls the far field
        Decay::WeightedL1 {
            envelope: Envelope { scale, growth },
        }
    }
}

fn product_decay(a: Decay, b: Decay) -> Decay {
    match (a, b) {
        (Decay::CompactSupport { radius: r1 }, Decay::CompactSupport { radius: r2 }) => {
            Decay::CompactSupport { radius: r1.min(r2) }
        }
        (Decay::CompactSupport { radius }, _) | (_, Decay::CompactSupport { radius }) => {
            Decay::CompactSupport { radius }
        }
        (Decay::Bounded { bound: b1 }, Decay::Bounded { bound: b2 }) => {
            Decay::Bounded { bound: b1 * b2 }
        }
        (Decay::Bounded { bound }, Decay::WeightedL1 { envelope })
        | (Decay::WeightedL1 { envelope }, Decay::Bounded { bound }) => Decay::WeightedL1 {
            envelope: Envelope {
                scale: envelope.scale * bound,
                growth: envelope.growth,
            },
        },
        (Decay::WeightedL1 { envelope: e1 }, Decay::WeightedL1 { envelope: e2 }) => {
            Decay::WeightedL1 {
                envelope: Envelope {
                    scale: e1.scale * e2.scale,
                    growth: e1.growth + e2.growth,
                },
            }
        }
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump() -> ScalarField {
        ScalarField::new(
            "b",
            Smoothness::CInfinity,
            Decay::CompactSupport { radius: 1.0 },
            |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            },
        )
    }

    #[test]
    fn smoothness_ordering() {
        assert!(Smoothness::Holder(0.5) < Smoothness::Lipschitz);
        assert!(Smoothness::C2 < Smoothness::Analytic);
        assert_eq!(
            Smoothness::C2.meet(Smoothness::Holder(0.3)),
            Smoothness::Holder(0.3)
        );
        assert_eq!(Smoothness::Holder(0.3).holder_index(), 0.3);
        assert_eq!(Smoothness::Analytic.holder_index(), 1.0);
        assert!(!Smoothness::Lipschitz.is_c2());
    }

    #[test]
    fn product_and_dilation_track_support() {
        let b = bump();
        let p = ScalarField::product(&b, &b.dilated(2.0));
        assert_eq!(p.decay.support_radius(), Some(0.5));
        assert!(p.features.contains(&0.5));
        assert_eq!(p.eval(&[0.6, 0.0]), 0.0);
        assert!((p.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn combine_keeps_compact_support() {
        let b = bump();
        let c = ScalarField::combine(2.0, &b, -1.0, &b.dilated(0.5));
        assert_eq!(c.decay.support_radius(), Some(2.0));
        assert!((c.eval(&[0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_crossings_lie_on_line() {
        let h = Hyperplane {
            normal: vec![1.0, 1.0],
            offset: 0.3,
        };
        let c = [0.1, -0.2];
        let r = 0.7;
        let phis = h.circle_crossings(&c, r);
        assert_eq!(phis.len(), 2);
        for phi in phis {
            let y = [c[0] + r * phi.cos(), c[1] + r * phi.sin()];
            assert!(h.signed_distance(&y).abs() < 1e-12);
        }
        assert!(h.circle_crossings(&c, 0.01).is_empty());
    }

    #[test]
    fn translated_support_grows() {
        let b = bump().translated(&[0.3, 0.4]);
        assert_eq!(b.decay.support_radius(), Some(1.5));
        assert!((b.eval(&[0.3, 0.4]) - 1.0).abs() < 1e-15);
    }
}
