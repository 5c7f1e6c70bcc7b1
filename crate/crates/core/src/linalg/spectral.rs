use serde::{Deserialize, Serialize};

use super::dense::{conjugate_gradient, dense_singular_values};
use super::sparse::SparseMatrixCSC;
use super::{dot, norm, DENSE_ENTRY_LIMIT, DENSE_THRESHOLD, RANK_DROP_TOL};
use crate::error::{Error, Result};

/// Extreme positive singular values of a constraint matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralInfo {
    pub sigma_max: f64,
    pub sigma_min_pos: f64,
    pub kappa: f64,
    /// Upper estimate of `sigma_max` used by step-size rules. Equal to
    /// `sigma_max` when it came from a dense factorization.
    pub sigma_max_safe: f64,
    pub rank: usize,
    /// True when both values come from a dense SVD.
    pub exact: bool,
    /// Set when an estimate did not converge or rank detection was ambiguous.
    pub flagged: bool,
}

impl SpectralInfo {
    pub fn new(sigma_max: f64, sigma_min_pos: f64) -> Self {
        SpectralInfo {
            sigma_max,
            sigma_min_pos,
            kappa: sigma_max / sigma_min_pos,
            sigma_max_safe: sigma_max,
            rank: 0,
            exact: true,
            flagged: false,
        }
    }
}

/// A singular-value estimate with its convergence status.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn power_iteration(a: &SparseMatrixCSC, seed: Vec<f64>, tol: f64, max_iter: usize) -> SigmaEstimate {
    let mut v = seed;
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; a.n_rows()];
    let mut w = vec![0.0; a.n_cols()];
    let mut prev = 0.0;
    for it in 1..=max_iter {
        a.matvec_into(&v, &mut av);
        a.matvec_transpose_into(&av, &mut w);
        let wn = norm(&w);
        if wn == 0.0 {
            return SigmaEstimate {
                value: 0.0,
                converged: false,
                iterations: it,
            };
        }
        // ‖Av‖ with ‖v‖ = 1 is a Rayleigh-quotient lower estimate of sigma_max.
        let sigma = norm(&av);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        if it > 1 && (sigma - prev).abs() <= 1e-3 * tol * sigma {
            return SigmaEstimate {
                value: sigma,
                converged: true,
                iterations: it,
            };
        }
        prev = sigma;
    }
    SigmaEstimate {
        value: prev,
        converged: false,
        iterations: max_iter,
    }
}

/// Power iteration on `AᵀA` from the normalized all-ones vector.
pub fn estimate_sigma_max(a: &SparseMatrixCSC, tol: f64, max_iter: usize) -> Result<SigmaEstimate> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if a.nnz() == 0 {
        return Err(Error::ContractViolation("sigma_max of a zero matrix".into()));
    }
    let est = power_iteration(a, vec![1.0; a.n_cols()], tol, max_iter);
    if est.value > 0.0 {
        return Ok(est);
    }
    // All-ones happened to lie in Null(A); fall back to a deterministic ramp.
    let ramp: Vec<f64> = (0..a.n_cols()).map(|i| 1.0 + (i as f64 + 1.0).sqrt()).collect();
    Ok(power_iteration(a, ramp, tol, max_iter))
}

fn dense_ok(a: &SparseMatrixCSC) -> bool {
    a.n_rows().min(a.n_cols()) <= DENSE_THRESHOLD
        && a.n_rows().saturating_mul(a.n_cols()) <= DENSE_ENTRY_LIMIT
}

fn positive_part_of_spectrum(sv: &[f64]) -> (Vec<f64>, bool) {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let drop = RANK_DROP_TOL * smax;
    let ambiguous = sv.iter().any(|&s| s > drop * 1e-2 && s < drop * 1e2);
    (sv.iter().cloned().filter(|&s| s > drop).collect(), ambiguous)
}

/// Smallest positive singular value.
///
/// Dense SVD at desk scale; otherwise inverse iteration on `AAᵀ`, with every
/// solve done by CG from a right-hand side inside `Im(A)`.
pub fn estimate_sigma_min_pos(a: &SparseMatrixCSC, tol: f64) -> Result<SigmaEstimate> {
    if a.nnz() == 0 {
        return Err(Error::ContractViolation("sigma_min of a zero matrix".into()));
    }
    if dense_ok(a) {
        let sv = dense_singular_values(a);
        let (pos, ambiguous) = positive_part_of_spectrum(&sv);
        let value = pos.iter().cloned().fold(f64::INFINITY, f64::min);
        return Ok(SigmaEstimate {
            value,
            converged: !ambiguous,
            iterations: 0,
        });
    }
    inverse_iteration_sigma_min(a, tol, 500)
}

fn inverse_iteration_sigma_min(a: &SparseMatrixCSC, tol: f64, max_iter: usize) -> Result<SigmaEstimate> {
    let m = a.n_rows();
    let smax = estimate_sigma_max(a, tol, 10_000)?.value;
    let ones = vec![1.0; a.n_cols()];
    let mut v = a.matvec(&ones)?;
    let nv = norm(&v);
    if nv == 0.0 {
        return Err(Error::Unsupported("degenerate seed for inverse iteration".into()));
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let gram = |u: &[f64], out: &mut [f64]| {
        let mut t = vec![0.0; a.n_cols()];
        a.matvec_transpose_into(u, &mut t);
        a.matvec_into(&t, out);
    };
    let mut prev = f64::INFINITY;
    let mut gv = vec![0.0; m];
    for it in 1..=max_iter {
        let cg = conjugate_gradient(&gram, &v, 1e-14, 10 * m + 100);
        let w = cg.solution;
        let wn = norm(&w);
        if wn == 0.0 || !wn.is_finite() {
            break;
        }
        v = w.iter().map(|x| x / wn).collect();
        gram(&v, &mut gv);
        let lam = dot(&v, &gv).max(0.0);
        let sigma = lam.sqrt();
        if sigma <= RANK_DROP_TOL * smax {
            return Ok(SigmaEstimate {
                value: sigma,
                converged: false,
                iterations: it,
            });
        }
        if (prev - sigma).abs() <= tol * sigma {
            return Ok(SigmaEstimate {
                value: sigma,
                converged: true,
                iterations: it,
            });
        }
        prev = sigma;
    }
    Ok(SigmaEstimate {
        value: prev,
        converged: false,
        iterations: max_iter,
    })
}

/// Spectral summary used for step sizes and condition numbers.
pub fn spectral_info(a: &SparseMatrixCSC) -> Result<SpectralInfo> {
    if a.nnz() == 0 {
        return Err(Error::DegenerateInstance("constraint matrix is zero".into()));
    }
    if dense_ok(a) {
        let sv = dense_singular_values(a);
        let (pos, ambiguous) = positive_part_of_spectrum(&sv);
        let smax = pos.iter().cloned().fold(0.0, f64::max);
        let smin = pos.iter().cloned().fold(f64::INFINITY, f64::min);
        return Ok(SpectralInfo {
            sigma_max: smax,
            sigma_min_pos: smin,
            kappa: smax / smin,
            sigma_max_safe: smax,
            rank: pos.len(),
            exact: true,
            flagged: ambiguous,
        });
    }
    spectral_info_iterative(a, 1e-8)
}

pub(crate) fn spectral_info_iterative(a: &SparseMatrixCSC, tol: f64) -> Result<SpectralInfo> {
    let hi = estimate_sigma_max(a, tol, 100_000)?;
    let lo = inverse_iteration_sigma_min(a, tol, 500)?;
    Ok(SpectralInfo {
        sigma_max: hi.value,
        sigma_min_pos: lo.value,
        kappa: hi.value / lo.value,
        sigma_max_safe: hi.value * (1.0 + tol),
        rank: 0,
        exact: false,
        flagged: !(hi.converged && lo.converged),
    })
}
