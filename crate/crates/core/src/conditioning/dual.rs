use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{nullspace_basis, SparseMatrixCSC};
use crate::model::{KnownOptimum, StandardFormLP};

/// The dual slack problem written as a standard-form LP.
///
/// With `N` an orthonormal basis of `Null(A)`, the dual feasible slacks are
/// `{s ≥ 0 : Nᵀs = Nᵀc}` and, up to the constant `qᵀc`, the dual objective is
/// `min qᵀs`. So `(Nᵀ, Nᵀc, q)` is a primal instance whose feasible set is
/// `ℱ_d`, whose optimal set is `𝒮⋆`, and whose own dual slack set is `𝒳⋆`.
pub fn dual_standard_form(lp: &StandardFormLP) -> Result<StandardFormLP> {
    let basis = nullspace_basis(lp.a());
    if basis.ncols() == 0 {
        return Err(Error::Unsupported(
            "Null(A) is trivial; the dual slack set is all of ℝⁿ₊".into(),
        ));
    }
    let nt = basis.transpose();
    let c = DVector::from_column_slice(lp.c());
    let b_d: Vec<f64> = (&nt * &c).iter().cloned().collect();
    let q = lp.q()?.to_vec();
    let a_d = SparseMatrixCSC::from_dmatrix(&nt);
    let mut out = StandardFormLP::new(format!("{}-dual", lp.name()), a_d, b_d, q.clone())?;
    if let Some(k) = lp.known_optimum() {
        // The multiplier of the slack problem is `Nᵀ(q - x⋆)`.
        let x_star = DVector::from_column_slice(k.x.representative());
        let qv = DVector::from_column_slice(&q);
        let y_d: Vec<f64> = (&nt * (qv - x_star)).iter().cloned().collect();
        let s_star = k.s.representative();
        let objective = q.iter().zip(s_star).map(|(a, b)| a * b).sum();
        out = out.with_known_optimum(KnownOptimum {
            x: k.s.clone(),
            s: k.x.clone(),
            y: y_d,
            objective,
        });
    }
    Ok(out)
}
