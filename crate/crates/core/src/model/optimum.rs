use serde::{Deserialize, Serialize};

use crate::linalg::{dist, dot, scale, sub};
use crate::pdhg::Iterate;

/// Closed-form optimal set: a point, a segment, or a ray.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimalSet {
    Point { point: Vec<f64> },
    Segment { from: Vec<f64>, to: Vec<f64> },
    Ray { origin: Vec<f64>, direction: Vec<f64> },
}

impl OptimalSet {
    pub fn point(p: Vec<f64>) -> Self {
        OptimalSet::Point { point: p }
    }

    /// Euclidean projection of `v` onto the set.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        match self {
            OptimalSet::Point { point } => point.clone(),
            OptimalSet::Segment { from, to } => {
                let d = sub(to, from);
                let dd = dot(&d, &d);
                let t = if dd == 0.0 {
                    0.0
                } else {
                    (dot(&sub(v, from), &d) / dd).clamp(0.0, 1.0)
                };
                from.iter().zip(&d).map(|(f, di)| f + t * di).collect()
            }
            OptimalSet::Ray { origin, direction } => {
                let dd = dot(direction, direction);
                let t = if dd == 0.0 {
                    0.0
                } else {
                    (dot(&sub(v, origin), direction) / dd).max(0.0)
                };
                origin.iter().zip(direction).map(|(o, di)| o + t * di).collect()
            }
        }
    }

    pub fn distance(&self, v: &[f64]) -> f64 {
        dist(v, &self.project(v))
    }

    /// A member of the set.
    pub fn representative(&self) -> &[f64] {
        match self {
            OptimalSet::Point { point } => point,
            OptimalSet::Segment { from, .. } => from,
            OptimalSet::Ray { origin, .. } => origin,
        }
    }

    pub fn is_point(&self) -> bool {
        matches!(self, OptimalSet::Point { .. })
    }

    fn map(&self, f: impl Fn(&[f64]) -> Vec<f64>, dir: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        match self {
            OptimalSet::Point { point } => OptimalSet::Point { point: f(point) },
            OptimalSet::Segment { from, to } => OptimalSet::Segment {
                from: f(from),
                to: f(to),
            },
            OptimalSet::Ray { origin, direction } => OptimalSet::Ray {
                origin: f(origin),
                direction: dir(direction),
            },
        }
    }
}

/// Optimal primal set, dual slack set, one optimal `y`, and the optimal value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnownOptimum {
    pub x: OptimalSet,
    pub s: OptimalSet,
    pub y: Vec<f64>,
    pub objective: f64,
}

impl KnownOptimum {
    /// `(x, y)` when `𝒳⋆` is a point.
    pub fn saddle_point(&self) -> Option<Iterate> {
        match &self.x {
            OptimalSet::Point { point } => Some(Iterate::new(point.clone(), self.y.clone())),
            _ => None,
        }
    }

    pub fn representative(&self) -> Iterate {
        Iterate::new(self.x.representative().to_vec(), self.y.clone())
    }

    pub(crate) fn rescaled(&self, alpha: f64, beta: f64, gamma: f64) -> Self {
        let sx = beta / alpha;
        KnownOptimum {
            x: self.x.map(|v| scale(v, sx), |d| d.to_vec()),
            s: self.s.map(|v| scale(v, gamma), |d| d.to_vec()),
            y: scale(&self.y, gamma / alpha),
            objective: self.objective * beta * gamma / alpha,
        }
    }

    pub(crate) fn with_y(&self, y: Vec<f64>) -> Self {
        KnownOptimum { y, ..self.clone() }
    }

    pub(crate) fn with_dual_shift(&self, w: &[f64]) -> Self {
        KnownOptimum {
            y: sub(&self.y, w),
            ..self.clone()
        }
    }
}
