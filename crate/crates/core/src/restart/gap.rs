use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::trust_region::{solve_trust_region, TrustRegionSubproblem};
use crate::error::{Error, Result};
use crate::linalg::{self, SparseMatrixCSC, DENSE_THRESHOLD};
use crate::model::StandardFormLP;
use crate::pdhg::{Iterate, StepSizes};

/// Norm used for the ball in the normalized duality gap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMode {
    /// Weights `(1/τ, 1/σ)`.
    DiagonalN,
    /// The coupled `M` norm; small instances only.
    DenseM,
}

/// `g = (Aᵀy − c, b − Ax)`, so that `L(x, ŷ) − L(x̂, y) = gᵀ(ẑ − z)`.
pub fn gap_gradient(z: &Iterate, lp: &StandardFormLP) -> Vec<f64> {
    let mut g = vec![0.0; lp.n() + lp.m()];
    let (gx, gy) = g.split_at_mut(lp.n());
    lp.a().matvec_transpose_into(&z.y, gx);
    for (gi, ci) in gx.iter_mut().zip(lp.c()) {
        *gi -= ci;
    }
    lp.a().matvec_into(&z.x, gy);
    for (gi, bi) in gy.iter_mut().zip(lp.b()) {
        *gi = bi - *gi;
    }
    g
}

/// The matrix `M = [I/τ, Aᵀ; A, I/σ]`.
pub fn dense_m_matrix(a: &SparseMatrixCSC, steps: &StepSizes) -> DMatrix<f64> {
    let (m, n) = (a.n_rows(), a.n_cols());
    let mut mm = DMatrix::zeros(n + m, n + m);
    for j in 0..n {
        mm[(j, j)] = 1.0 / steps.tau;
    }
    for i in 0..m {
        mm[(n + i, n + i)] = 1.0 / steps.sigma;
    }
    for (i, j, v) in a.triplets() {
        mm[(n + i, j)] = v;
        mm[(j, n + i)] = v;
    }
    mm
}

pub(crate) fn diagonal_gap(g: Vec<f64>, z: &Iterate, r: f64, steps: &StepSizes) -> Result<f64> {
    let n = z.x.len();
    let m = z.y.len();
    let mut weights = vec![1.0 / steps.tau; n];
    weights.extend(std::iter::repeat_n(1.0 / steps.sigma, m));
    let mut lower: Vec<f64> = z.x.iter().map(|x| -x).collect();
    lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, m));
    let p = TrustRegionSubproblem {
        gradient: g,
        weights,
        lower_bounds: lower,
        radius: r,
    };
    let (_, value) = solve_trust_region(&p)?;
    Ok(value / r)
}

/// `max gᵀδ s.t. δᵀMδ ≤ r², δᵢ ≥ lᵢ` for positive definite `M`.
///
/// For a multiplier `λ` the bound-constrained concave quadratic
/// `gᵀδ − (λ/2)δᵀMδ` is maximised by cyclic coordinate ascent; `δ(λ)ᵀMδ(λ)`
/// decreases in `λ`, which is bisected until the ball constraint is tight.
pub(crate) fn dense_m_trust_region(
    mm: &DMatrix<f64>,
    g: &[f64],
    lower: &[f64],
    r: f64,
) -> Result<(Vec<f64>, f64)> {
    let k = g.len();
    if g.iter().all(|v| *v == 0.0) {
        return Ok((vec![0.0; k], 0.0));
    }
    let quad = |d: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..k {
            let mut row = 0.0;
            for j in 0..k {
                row += mm[(i, j)] * d[j];
            }
            s += d[i] * row;
        }
        s
    };
    let inner = |lambda: f64, d: &mut Vec<f64>| {
        for _sweep in 0..200_000 {
            let mut moved: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..k {
                let mut off = 0.0;
                for j in 0..k {
                    if j != i {
                        off += mm[(i, j)] * d[j];
                    }
                }
                let v = ((g[i] / lambda - off) / mm[(i, i)]).max(lower[i]);
                moved = moved.max((v - d[i]).abs());
                scale = scale.max(v.abs());
                d[i] = v;
            }
            if moved <= 1e-15 * (1.0 + scale) {
                break;
            }
        }
    };
    let r2 = r * r;
    let mut d = vec![0.0; k];
    // bracket: δ(λ) shrinks like 1/λ
    let mut hi = 1.0;
    inner(hi, &mut d);
    while quad(&d) > r2 {
        hi *= 2.0;
        inner(hi, &mut d);
    }
    let mut lo = hi;
    let mut dl = d.clone();
    let mut guard = 0;
    loop {
        lo *= 0.5;
        inner(lo, &mut dl);
        guard += 1;
        if quad(&dl) >= r2 {
            break;
        }
        if guard > 200 {
            // the unconstrained-by-ball maximiser lies inside the ball
            let val = linalg::dot(g, &dl);
            return Ok((dl, val));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        inner(mid, &mut d);
        if quad(&d) > r2 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    inner(hi, &mut d);
    let val = linalg::dot(g, &d);
    Ok((d, val))
}

/// `ρ(r; z) = (1/r) max { L(x, ŷ) − L(x̂, y) : x̂ ≥ 0, ‖ẑ − z‖ ≤ r }`.
pub fn normalized_duality_gap(
    z: &Iterate,
    r: f64,
    lp: &StandardFormLP,
    steps: &StepSizes,
    norm_mode: NormMode,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::ContractViolation(format!(
            "gap radius must be positive, got {r}"
        )));
    }
    if z.x.len() != lp.n() || z.y.len() != lp.m() {
        return Err(Error::DimensionMismatch {
            expected: lp.n() + lp.m(),
            got: z.x.len() + z.y.len(),
        });
    }
    let g = gap_gradient(z, lp);
    match norm_mode {
        NormMode::DiagonalN => diagonal_gap(g, z, r, steps),
        NormMode::DenseM => {
            let mm = checked_dense_m(lp, steps)?;
            let mut lower: Vec<f64> = z.x.iter().map(|x| -x).collect();
            lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, lp.m()));
            let (_, v) = dense_m_trust_region(&mm, &g, &lower, r)?;
            Ok(v / r)
        }
    }
}

pub(crate) fn checked_dense_m(lp: &StandardFormLP, steps: &StepSizes) -> Result<DMatrix<f64>> {
    if lp.n() + lp.m() > DENSE_THRESHOLD {
        return Err(Error::Unsupported(format!(
            "dense M-norm gap needs n + m <= {DENSE_THRESHOLD}"
        )));
    }
    let smax = lp.spectral()?.sigma_max;
    if steps.product_ratio(smax) > 1.0 - crate::pdhg::PD_MARGIN {
        return Err(Error::ContractViolation(
            "dense M-norm gap needs tau*sigma*sigma_max^2 < 1".into(),
        ));
    }
    Ok(dense_m_matrix(lp.a(), steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::families::gen_lp_gamma;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn gradient_gives_exact_lagrangian_difference() {
        let lp = gen_lp_gamma(0.4).unwrap();
        let lag = |x: &[f64], y: &[f64]| {
            let ax = lp.a().matvec(x).unwrap();
            linalg::dot(lp.c(), x) - linalg::dot(y, &ax) + linalg::dot(lp.b(), y)
        };
        let z = Iterate::new(vec![0.3, 1.2], vec![-0.7]);
        let zh = Iterate::new(vec![1.1, 0.2], vec![0.4]);
        let g = gap_gradient(&z, &lp);
        let d = [zh.x[0] - z.x[0], zh.x[1] - z.x[1], zh.y[0] - z.y[0]];
        let lin: f64 = g.iter().zip(d).map(|(a, b)| a * b).sum();
        assert!((lag(&z.x, &zh.y) - lag(&zh.x, &z.y) - lin).abs() < 1e-14);
    }

    #[test]
    fn zero_at_saddle_point() {
        for &g in &[0.1, FRAC_PI_4, 1.3] {
            let lp = gen_lp_gamma(g).unwrap();
            let zs = lp.known_optimum().unwrap().saddle_point().unwrap();
            let st = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
            for r in [0.01, 1.0, 10.0] {
                let v = normalized_duality_gap(&zs, r, &lp, &st, NormMode::DiagonalN).unwrap();
                assert!(v.abs() < 1e-9);
                let v = normalized_duality_gap(&zs, r, &lp, &st, NormMode::DenseM).unwrap();
                assert!(v.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn radius_scaled_value_nondecreasing() {
        let lp = gen_lp_gamma(FRAC_PI_4).unwrap();
        let st = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
        let z = Iterate::new(vec![0.2, 0.1], vec![0.3]);
        let mut prev = 0.0;
        for k in 0..20 {
            let r = 0.01 * 1.5f64.powi(k);
            let v = r * normalized_duality_gap(&z, r, &lp, &st, NormMode::DiagonalN).unwrap();
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn origin_example_against_closed_form() {
        // at z = 0 on LP_γ(π/4) only x₂ and y move profitably; the bound x̂ ≥ 0 blocks x₁
        let lp = gen_lp_gamma(FRAC_PI_4).unwrap();
        let st = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
        let v = normalized_duality_gap(&Iterate::zeros(2, 1), 1.0, &lp, &st, NormMode::DiagonalN)
            .unwrap();
        // g = (−c, b) = (−0.7071, 0.7071, 1); weights 2; δ ∝ (0, 0.7071, 1)
        let expect = (0.5f64 + 1.0).sqrt() / 2f64.sqrt();
        assert!((v - expect).abs() < 1e-12, "{v}");
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let lp = gen_lp_gamma(0.3).unwrap();
        let st = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
        assert!(normalized_duality_gap(&Iterate::zeros(2, 1), 0.0, &lp, &st, NormMode::DiagonalN).is_err());
    }

    #[test]
    fn dense_m_matches_ball_maximum_when_unconstrained() {
        // without active bounds the maximum is r·sqrt(gᵀM⁻¹g)
        let lp = gen_lp_gamma(0.6).unwrap();
        let st = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
        let mm = dense_m_matrix(lp.a(), &st);
        let g = vec![0.3, -0.2, 0.9];
        let lower = vec![f64::NEG_INFINITY; 3];
        let (_, v) = dense_m_trust_region(&mm, &g, &lower, 2.0).unwrap();
        let gv = nalgebra::DVector::from_column_slice(&g);
        let inv = mm.clone().try_inverse().unwrap();
        let expect = 2.0 * (gv.transpose() * inv * &gv)[(0, 0)].sqrt();
        assert!((v - expect).abs() < 1e-9 * expect);
    }
}
