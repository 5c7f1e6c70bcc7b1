//! Two- and three-variable families with closed-form optima.
//!
//! Every instance has `‖A‖ = ‖c‖ = ‖q‖ = 1` and `Ac = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use super::{KnownOptimum, OptimalSet, StandardFormLP};
use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCSC;

fn row_lp(name: String, a: Vec<f64>, c: Vec<f64>, ko: KnownOptimum) -> Result<StandardFormLP> {
    let a = SparseMatrixCSC::from_dense_rows(&[a])?;
    Ok(StandardFormLP::new(name, a, vec![1.0], c)?.with_known_optimum(ko))
}

fn optimum(x: Vec<f64>, y: f64, a: &[f64], c: &[f64], objective: f64) -> KnownOptimum {
    let s = c.iter().zip(a).map(|(ci, ai)| ci - ai * y).collect();
    KnownOptimum {
        x: OptimalSet::point(x),
        s: OptimalSet::point(s),
        y: vec![y],
        objective,
    }
}

/// `min cos γ·x₁ − sin γ·x₂  s.t.  sin γ·x₁ + cos γ·x₂ = 1, x ≥ 0`.
pub fn gen_lp_gamma(gamma: f64) -> Result<StandardFormLP> {
    if !(gamma > 0.0 && gamma < FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, pi/2), got {gamma}"
        )));
    }
    let (s, c) = gamma.sin_cos();
    let a = vec![s, c];
    let cost = vec![c, -s];
    let ko = optimum(vec![0.0, 1.0 / c], -s / c, &a, &cost, -s / c);
    row_lp(format!("lp_gamma_{gamma}"), a, cost, ko)
}

/// Families 1 to 4, `γ ∈ (0, 1]`.
pub fn gen_family(k: u32, gamma: f64) -> Result<StandardFormLP> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let (s, c) = gamma.sin_cos();
    let r = FRAC_1_SQRT_2;
    let name = format!("family{k}_{gamma}");
    match k {
        1 => {
            let a = vec![s * r, c, s * r];
            let cost = vec![c * r, -s, c * r];
            let ko = optimum(vec![0.0, 1.0 / c, 0.0], -s / c, &a, &cost, -s / c);
            row_lp(name, a, cost, ko)
        }
        2 => {
            let a = vec![c * r, s, c * r];
            let cost = vec![s * r, -c, s * r];
            let ko = optimum(vec![0.0, 1.0 / s, 0.0], -c / s, &a, &cost, -c / s);
            row_lp(name, a, cost, ko)
        }
        3 => {
            let a = vec![1.0 / 3f64.sqrt(); 3];
            let u = 6f64.sqrt();
            let cost = vec![-c / u - s * r, -c / u + s * r, 2.0 * c / u];
            // the minimum cost vertex of the simplex {x ≥ 0, Σx = √3} is √3·e₁
            let r3 = 3f64.sqrt();
            let y = r3 * cost[0];
            let ko = optimum(vec![r3, 0.0, 0.0], y, &a, &cost, y);
            row_lp(name, a, cost, ko)
        }
        4 => {
            let a = vec![s, c * r, -c * r];
            let cost = vec![0.0, r, r];
            let ko = optimum(vec![1.0 / s, 0.0, 0.0], 0.0, &a, &cost, 0.0);
            row_lp(name, a, cost, ko)
        }
        _ => Err(Error::InvalidParameter(format!("family must be 1..=4, got {k}"))),
    }
}
