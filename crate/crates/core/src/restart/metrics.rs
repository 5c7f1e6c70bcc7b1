use crate::error::{Error, Result};
use crate::linalg::{dot, neg_part_norm, norm, pos_part};
use crate::model::StandardFormLP;
use crate::pdhg::Iterate;

/// Dual slack `s = c − Aᵀy`.
pub fn dual_slack(y: &[f64], lp: &StandardFormLP) -> Vec<f64> {
    let mut s = vec![0.0; lp.n()];
    lp.a().matvec_transpose_into(y, &mut s);
    for (si, ci) in s.iter_mut().zip(lp.c()) {
        *si = ci - *si;
    }
    s
}

/// `‖Ax⁺ − b‖/(1+‖b‖) + ‖(c − Aᵀy)⁻‖/(1+‖c‖) + |cᵀx⁺ − bᵀy|/(1+|cᵀx⁺|+|bᵀy|)`.
pub fn relative_error(z: &Iterate, lp: &StandardFormLP) -> f64 {
    let xp = pos_part(&z.x);
    let mut ax = vec![0.0; lp.m()];
    lp.a().matvec_into(&xp, &mut ax);
    for (a, b) in ax.iter_mut().zip(lp.b()) {
        *a -= b;
    }
    let primal = norm(&ax) / (1.0 + norm(lp.b()));
    let dual = neg_part_norm(&dual_slack(&z.y, lp)) / (1.0 + norm(lp.c()));
    let cx = dot(lp.c(), &xp);
    let by = dot(lp.b(), &z.y);
    let gap = (cx - by).abs() / (1.0 + cx.abs() + by.abs());
    primal + dual + gap
}

/// `max{Dist(x, 𝒳⋆), Dist(s, 𝒮⋆)}` against the attached optimal sets.
pub fn distance_to_optima(z: &Iterate, lp: &StandardFormLP) -> Result<f64> {
    let ko = lp.known_optimum().ok_or_else(|| {
        Error::UnsupportedMetric("distance to optima needs an attached optimal set".into())
    })?;
    let s = dual_slack(&z.y, lp);
    Ok(ko.x.distance(&z.x).max(ko.s.distance(&s)))
}

/// `c₀ = 2‖A‖/(1+‖b‖) + 2‖c‖ + ‖q‖ + 1`, with `‖A‖` the spectral norm.
pub fn relative_error_constant(lp: &StandardFormLP) -> Result<f64> {
    let a = lp.spectral()?.sigma_max;
    Ok(2.0 * a / (1.0 + norm(lp.b())) + 2.0 * lp.norm_c() + lp.norm_q()? + 1.0)
}
