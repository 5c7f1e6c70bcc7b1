use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dense_inverse_sqrt, SparseMatrixCSC, DENSE_THRESHOLD};
use crate::model::{presolve_project_c, StandardFormLP};

pub const DEFAULT_DIAGONAL_ROUNDS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreconditionKind {
    None,
    Complete,
    Diagonal { weights: Vec<f64> },
}

/// `(DA, Db, c)` together with `D`.
#[derive(Clone, Debug)]
pub struct PreconditionedInstance {
    pub lp: StandardFormLP,
    pub kind: PreconditionKind,
    d: DMatrix<f64>,
    pub kappa_before: f64,
    pub kappa_after: f64,
}

impl PreconditionedInstance {
    /// Identity wrapper, so callers can treat "no preconditioning" uniformly.
    pub fn identity(lp: &StandardFormLP) -> Result<Self> {
        let k = lp.spectral()?.kappa;
        Ok(PreconditionedInstance {
            lp: lp.clone(),
            kind: PreconditionKind::None,
            d: DMatrix::identity(lp.m(), lp.m()),
            kappa_before: k,
            kappa_after: k,
        })
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Dual solution of the original instance: `y = Dᵀy'`.
    pub fn back_map_y(&self, y_prec: &[f64]) -> Vec<f64> {
        let v = self.d.transpose() * DVector::from_column_slice(y_prec);
        v.iter().cloned().collect()
    }

    /// Inverse of [`Self::back_map_y`].
    pub fn forward_map_y(&self, y: &[f64]) -> Result<Vec<f64>> {
        let lu = self.d.transpose().lu();
        let v = lu
            .solve(&DVector::from_column_slice(y))
            .ok_or_else(|| Error::ContractViolation("preconditioner is singular".into()))?;
        Ok(v.iter().cloned().collect())
    }
}

fn build(lp: &StandardFormLP, d: DMatrix<f64>, kind: PreconditionKind) -> Result<PreconditionedInstance> {
    let da = SparseMatrixCSC::from_dmatrix(&(&d * lp.a().to_dmatrix()));
    let db: Vec<f64> = (&d * DVector::from_column_slice(lp.b())).iter().cloned().collect();
    let mut out = StandardFormLP::new(lp.name(), da, db, lp.c().to_vec())?
        .with_offset(lp.objective_offset());
    let mut wrapped = PreconditionedInstance {
        lp: out.clone(),
        kind,
        d,
        kappa_before: lp.spectral()?.kappa,
        kappa_after: 0.0,
    };
    if let Some(k) = lp.known_optimum() {
        let y = wrapped.forward_map_y(&k.y)?;
        out = out.with_known_optimum(k.with_y(y));
    }
    if lp.presolve_info().is_some() {
        out = presolve_project_c(&out)?;
    }
    wrapped.kappa_after = out.spectral()?.kappa;
    wrapped.lp = out;
    Ok(wrapped)
}

/// `D = (AAᵀ)^{-1/2}`, which makes the rows of `DA` orthonormal.
pub fn full_row_preconditioner(lp: &StandardFormLP) -> Result<PreconditionedInstance> {
    if lp.m() > DENSE_THRESHOLD {
        return Err(Error::Unsupported(format!(
            "complete preconditioner needs m <= {DENSE_THRESHOLD}, got {}",
            lp.m()
        )));
    }
    let a = lp.a().to_dmatrix();
    let gram = &a * a.transpose();
    let d = dense_inverse_sqrt(&gram)?;
    build(lp, d, PreconditionKind::Complete)
}

/// Row equilibration: each round divides every row by its current norm.
pub fn diagonal_preconditioner(lp: &StandardFormLP, rounds: usize) -> Result<PreconditionedInstance> {
    let mut weights = vec![1.0; lp.m()];
    let mut a = lp.a().clone();
    for _ in 0..rounds {
        let norms = a.row_norms();
        if let Some(i) = norms.iter().position(|&r| r == 0.0) {
            return Err(Error::ContractViolation(format!("row {i} is zero")));
        }
        let step: Vec<f64> = norms.iter().map(|r| 1.0 / r).collect();
        a = a.scale_rows(&step)?;
        weights.iter_mut().zip(&step).for_each(|(w, s)| *w *= s);
    }
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(&weights));
    build(lp, d, PreconditionKind::Diagonal { weights })
}
