//! Globally adaptive Gauss–Kronrod integration over a list of mapped segments.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use super::gauss::{kronrod_error, kronrod_nodes};
use crate::error::Zone;

/// Change of variables from the panel parameter `t` to the physical radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Map {
    Linear,
    /// `r = from · t^{-1/rate}` for `t ∈ (0, 1]`; flattens `r^{-1-rate}` decay.
    Tail {
        from: f64,
        rate: f64,
    },
}

impl Map {
    #[inline]
    pub(crate) fn apply(&self, t: f64) -> (f64, f64) {
        match *self {
            Map::Linear => (t, 1.0),
            Map::Tail { from, rate } => {
                let r = from * t.powf(-1.0 / rate);
                (r, r / (rate * t))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub map: Map,
    pub zone: Zone,
}

impl Segment {
    pub(crate) fn linear(a: f64, b: f64, zone: Zone) -> Self {
        Segment {
            a,
            b,
            map: Map::Linear,
            zone,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub(crate) fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub value: f64,
    pub err: f64,
    /// Sum over panels tagged `Zone::Inner`.
    pub inner: f64,
    pub middle: f64,
    pub tail: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub worst_zone: Zone,
}

struct Panel {
    seg: Segment,
    value: f64,
    err: f64,
    seq: usize,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

fn eval_panel(seg: &Segment, g: &(dyn Fn(f64) -> f64 + Sync), parallel: bool) -> (f64, f64) {
    let nodes = kronrod_nodes(seg.a, seg.b);
    let mut vals = [0.0; 21];
    let point = |t: f64| {
        let (r, jac) = seg.map.apply(t);
        if jac == 0.0 || !jac.is_finite() {
            return 0.0;
        }
        let v = g(r);
        if v == 0.0 {
            0.0
        } else {
            v * jac
        }
    };
    if parallel {
        vals.par_iter_mut()
            .zip(nodes.par_iter())
            .for_each(|(v, &t)| *v = point(t));
    } else {
        for (v, &t) in vals.iter_mut().zip(nodes.iter()) {
            *v = point(t);
        }
    }
    kronrod_error(&vals, 0.5 * (seg.b - seg.a))
}

/// Integrates `g(r)` over the union of `segments`, bisecting the panel with
/// the largest error until the summed error meets `tol` (applied to the
/// running total plus `fixed_value`) or `max_panels` is reached.
pub(crate) fn integrate(
    segments: &[Segment],
    g: &(dyn Fn(f64) -> f64 + Sync),
    tol: Tolerance,
    fixed_value: f64,
    fixed_err: f64,
    max_panels: usize,
    parallel: bool,
) -> Outcome {
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let initial: Vec<(f64, f64)> = if parallel {
        segments
            .par_iter()
            .map(|s| eval_panel(s, g, false))
            .collect()
    } else {
        segments.iter().map(|s| eval_panel(s, g, false)).collect()
    };
    let mut value = 0.0;
    let mut err = 0.0;
    for (seg, (v, e)) in segments.iter().zip(initial) {
        value += v;
        err += e;
        heap.push(Panel {
            seg: *seg,
            value: v,
            err: e,
            seq,
        });
        seq += 1;
    }
    let mut evaluations = 21 * segments.len();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut converged = true;

    loop {
        if err + fixed_err <= tol.target(value + fixed_value) {
            break;
        }
        if heap.len() + frozen.len() >= max_panels {
            converged = false;
            break;
        }
        let Some(worst) = heap.pop() else {
            converged = false;
            break;
        };
        let mid = 0.5 * (worst.seg.a + worst.seg.b);
        if !(mid > worst.seg.a && mid < worst.seg.b)
            || (worst.seg.b - worst.seg.a) < 1e-15 * worst.seg.b.abs()
        {
            // cannot be split further in floating point
            frozen.push(worst);
            if heap.is_empty() {
                converged = false;
                break;
            }
            continue;
        }
        let left = Segment {
            b: mid,
            ..worst.seg
        };
        let right = Segment {
            a: mid,
            ..worst.seg
        };
        let ((lv, le), (rv, re)) = if parallel {
            rayon::join(
                || eval_panel(&left, g, true),
                || eval_panel(&right, g, true),
            )
        } else {
            (eval_panel(&left, g, false), eval_panel(&right, g, false))
        };
        evaluations += 42;
        value += lv + rv - worst.value;
        err += le + re - worst.err;
        heap.push(Panel {
            seg: left,
            value: lv,
            err: le,
            seq,
        });
        heap.push(Panel {
            seg: right,
            value: rv,
            err: re,
            seq: seq + 1,
        });
        seq += 2;
    }

    // recompute sums to shed accumulated rounding from the running updates
    let panels: Vec<&Panel> = heap.iter().chain(frozen.iter()).collect();
    let mut ordered = panels.clone();
    ordered.sort_by_key(|p| p.seq);
    let mut inner = 0.0;
    let mut middle = 0.0;
    let mut tail = 0.0;
    value = 0.0;
    err = 0.0;
    let mut zone_err = [
        (Zone::Middle, 0.0),
        (Zone::Tail, 0.0),
        (Zone::Angular, 0.0),
        (Zone::Inner, 0.0),
    ];
    for p in ordered {
        value += p.value;
        err += p.err;
        match p.seg.zone {
            Zone::Tail => tail += p.value,
            Zone::Inner => inner += p.value,
            _ => middle += p.value,
        }
        if let Some(slot) = zone_err.iter_mut().find(|(z, _)| *z == p.seg.zone) {
            slot.1 += p.err;
        }
    }
    let worst_zone = zone_err
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|z| z.0)
        .unwrap_or(Zone::Middle);
    Outcome {
        value,
        err,
        inner,
        middle,
        tail,
        evaluations,
        converged,
        worst_zone,
    }
}

/// Convenience wrapper for a plain interval.
pub(crate) fn integrate_interval(
    g: &(dyn Fn(f64) -> f64 + Sync),
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
    max_panels: usize,
) -> Outcome {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let segs: Vec<Segment> = pts
        .windows(2)
        .map(|w| Segment::linear(w[0], w[1], Zone::Middle))
        .collect();
    integrate(&segs, g, tol, 0.0, 0.0, max_panels, false)
}
