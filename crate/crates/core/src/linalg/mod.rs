//! Sparse and dense kernels shared by the solver and the analysis code.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`; the helpers below keep the
//! summation order fixed so results are reproducible bit-for-bit.

mod dense;
mod sparse;
mod spectral;

pub use dense::{
    compute_q, conjugate_gradient, dense_inverse_sqrt, nullspace_basis, project_nullspace,
    RangeProjector, CgOutcome,
};
pub use sparse::SparseMatrixCSC;
pub use spectral::{
    estimate_sigma_max, estimate_sigma_min_pos, spectral_info, SigmaEstimate, SpectralInfo,
};

pub use crate::pdhg::m_norm_sq;

/// Problems with `min(m, n)` at or below this size get exact dense factorizations.
pub const DENSE_THRESHOLD: usize = 2000;

/// Upper limit on `m * n` for materialising a dense copy of a sparse matrix.
pub const DENSE_ENTRY_LIMIT: usize = 4_000_000;

/// Relative drop tolerance separating positive singular values from zero.
pub const RANK_DROP_TOL: f64 = 1e-10;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Componentwise positive part.
pub fn pos_part(a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| v.max(0.0)).collect()
}

/// Euclidean norm of the negative part, i.e. the distance to the nonnegative orthant.
pub fn neg_part_norm(a: &[f64]) -> f64 {
    a.iter()
        .map(|v| if *v < 0.0 { v * v } else { 0.0 })
        .sum::<f64>()
        .sqrt()
}
