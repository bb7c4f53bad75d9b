//! Parametrized curves used for parallel transport, and polyline distances.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::metric::Point;

/// Named curve families. Parameter ranges: circle `[0, 2 pi turns]`,
/// segment `[0, 1]`, polyline `[0, m]` for `m` segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Curve {
    Circle {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        turns: f64,
    },
    Segment { from: Vec<f64>, to: Vec<f64> },
    Polyline { points: Vec<Vec<f64>> },
}

fn one() -> f64 {
    1.0
}

impl Curve {
    pub fn validate(&self) -> Result<()> {
        match self {
            Curve::Circle { center, radius, turns } => {
                if center.len() != 2 || !(*radius > 0.0) || !(*turns > 0.0) {
                    return Err(FinslerError::Parse("circle needs a 2D center and positive radius/turns".into()));
                }
            }
            Curve::Segment { from, to } => {
                if from.len() != to.len() || from.is_empty() {
                    return Err(FinslerError::Parse("segment endpoints differ in dimension".into()));
                }
            }
            Curve::Polyline { points } => {
                if points.len() < 2 {
                    return Err(FinslerError::Parse("polyline needs at least two points".into()));
                }
                let n = points[0].len();
                if n == 0 || points.iter().any(|p| p.len() != n) {
                    return Err(FinslerError::Parse("polyline points differ in dimension".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            Curve::Circle { .. } => 2,
            Curve::Segment { from, .. } => from.len(),
            Curve::Polyline { points } => points[0].len(),
        }
    }

    pub fn t_end(&self) -> f64 {
        match self {
            Curve::Circle { turns, .. } => 2.0 * PI * turns,
            Curve::Segment { .. } => 1.0,
            Curve::Polyline { points } => (points.len() - 1) as f64,
        }
    }

    /// Parameters where the velocity may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Curve::Polyline { points } => (1..points.len() - 1).map(|i| i as f64).collect(),
            _ => vec![],
        }
    }

    fn poly_segment(points: &[Vec<f64>], t: f64) -> (usize, f64) {
        let m = points.len() - 1;
        let i = (t.floor().max(0.0) as usize).min(m - 1);
        (i, t - i as f64)
    }

    pub fn position(&self, t: f64) -> Point {
        match self {
            Curve::Circle { center, radius, .. } => {
                DVector::from_vec(vec![center[0] + radius * t.cos(), center[1] + radius * t.sin()])
            }
            Curve::Segment { from, to } => {
                DVector::from_iterator(from.len(), from.iter().zip(to).map(|(a, b)| a + t * (b - a)))
            }
            Curve::Polyline { points } => {
                let (i, s) = Self::poly_segment(points, t);
                let (a, b) = (&points[i], &points[i + 1]);
                DVector::from_iterator(a.len(), a.iter().zip(b).map(|(p, q)| p + s * (q - p)))
            }
        }
    }

    /// One-sided velocity; on a polyline breakpoint, the velocity of the segment starting there.
    pub fn velocity(&self, t: f64) -> DVector<f64> {
        match self {
            Curve::Circle { radius, .. } => DVector::from_vec(vec![-radius * t.sin(), radius * t.cos()]),
            Curve::Segment { from, to } => {
                DVector::from_iterator(from.len(), from.iter().zip(to).map(|(a, b)| b - a))
            }
            Curve::Polyline { points } => {
                let (i, _) = Self::poly_segment(points, t);
                let (a, b) = (&points[i], &points[i + 1]);
                DVector::from_iterator(a.len(), a.iter().zip(b).map(|(p, q)| q - p))
            }
        }
    }
}

// Component loops instead of vector arithmetic: this sits in the O(n m) Hausdorff loop.
fn point_segment_distance(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (mut len2, mut proj) = (0.0, 0.0);
    for i in 0..p.len() {
        let ab = b[i] - a[i];
        len2 += ab * ab;
        proj += (p[i] - a[i]) * ab;
    }
    let s = if len2 == 0.0 { 0.0 } else { (proj / len2).clamp(0.0, 1.0) };
    (0..p.len())
        .map(|i| {
            let d = p[i] - a[i] - s * (b[i] - a[i]);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Distance from `p` to the polyline through `line`.
pub fn distance_to_polyline(p: &DVector<f64>, line: &[DVector<f64>]) -> f64 {
    match line.len() {
        0 => f64::INFINITY,
        1 => (p - &line[0]).norm(),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

/// Symmetric Hausdorff distance between two polylines (vertices against segments).
pub fn hausdorff(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let one = |x: &[DVector<f64>], y: &[DVector<f64>]| {
        x.iter().map(|p| distance_to_polyline(p, y)).fold(0.0, f64::max)
    };
    one(a, b).max(one(b, a))
}

pub fn polyline_length(line: &[DVector<f64>]) -> f64 {
    line.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

/// Leading piece of `line` with arc length `length` (the last vertex is interpolated).
pub fn truncate_to_length(line: &[DVector<f64>], length: f64) -> Vec<DVector<f64>> {
    let mut out = Vec::new();
    let mut acc = 0.0;
    for (i, p) in line.iter().enumerate() {
        if i == 0 {
            out.push(p.clone());
            continue;
        }
        let prev = &line[i - 1];
        let seg = (p - prev).norm();
        if acc + seg >= length {
            let s = if seg > 0.0 { (length - acc) / seg } else { 0.0 };
            out.push(prev + (p - prev) * s);
            return out;
        }
        acc += seg;
        out.push(p.clone());
    }
    out
}
