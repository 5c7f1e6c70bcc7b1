//! LP instances: standard form, MPS ingestion, presolve and the test families.

pub mod families;
mod mps;
mod optimum;
mod standard;

pub use mps::{parse_mps, parse_mps_fixed, Column, GeneralFormLP, Row, RowKind, Sense};
pub use optimum::{KnownOptimum, OptimalSet};
pub use standard::{to_standard_form, ColumnRecovery, VariableMap};

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm, RangeProjector, SparseMatrixCSC, SpectralInfo};

/// Decomposition of the original objective produced by [`presolve_project_c`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PresolveInfo {
    pub c_original: Vec<f64>,
    pub c_parallel: Vec<f64>,
    pub c_perp: Vec<f64>,
    pub q: Vec<f64>,
    pub norm_q: f64,
    pub norm_c_parallel: f64,
    /// `w` with `c_perp = Aᵀw`; dual solutions of the projected instance shift by it.
    pub dual_shift: Vec<f64>,
    /// `qᵀc_perp`, constant on the feasible affine space.
    pub offset: f64,
    /// `c_parallel = 0`: every feasible point is optimal.
    pub all_feasible_optimal: bool,
}

/// `min cᵀx s.t. Ax = b, x ≥ 0`.
#[derive(Clone, Debug)]
pub struct StandardFormLP {
    name: String,
    a: SparseMatrixCSC,
    b: Vec<f64>,
    c: Vec<f64>,
    /// Added to `cᵀx` when reporting objective values.
    objective_offset: f64,
    presolve: Option<PresolveInfo>,
    known_optimum: Option<KnownOptimum>,
    spectral: OnceLock<SpectralInfo>,
    q: OnceLock<Vec<f64>>,
}

impl StandardFormLP {
    pub fn new(name: impl Into<String>, a: SparseMatrixCSC, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let (m, n) = (a.n_rows(), a.n_cols());
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "instance needs m, n >= 1, got {m}x{n}"
            )));
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: b.len() });
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        if let Some(i) = a.row_norms().iter().position(|r| *r == 0.0) {
            return Err(Error::InvalidParameter(format!("row {i} of A is all zero")));
        }
        if b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("b and c must be finite".into()));
        }
        Ok(StandardFormLP {
            name: name.into(),
            a,
            b,
            c,
            objective_offset: 0.0,
            presolve: None,
            known_optimum: None,
            spectral: OnceLock::new(),
            q: OnceLock::new(),
        })
    }

    pub fn with_known_optimum(mut self, ko: KnownOptimum) -> Self {
        self.known_optimum = Some(ko);
        self
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.objective_offset = offset;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn a(&self) -> &SparseMatrixCSC {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn m(&self) -> usize {
        self.a.n_rows()
    }

    pub fn n(&self) -> usize {
        self.a.n_cols()
    }

    pub fn objective_offset(&self) -> f64 {
        self.objective_offset
    }

    pub fn presolve_info(&self) -> Option<&PresolveInfo> {
        self.presolve.as_ref()
    }

    pub fn known_optimum(&self) -> Option<&KnownOptimum> {
        self.known_optimum.as_ref()
    }

    /// Spectral data of `A`, computed once.
    pub fn spectral(&self) -> Result<&SpectralInfo> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let s = linalg::spectral_info(&self.a)?;
        Ok(self.spectral.get_or_init(|| s))
    }

    /// `q = Aᵀ(AAᵀ)†b`, computed once.
    pub fn q(&self) -> Result<&[f64]> {
        if let Some(q) = self.q.get() {
            return Ok(q);
        }
        let q = match &self.presolve {
            Some(p) => p.q.clone(),
            None => linalg::compute_q(&self.a, &self.b)?,
        };
        Ok(self.q.get_or_init(|| q))
    }

    pub fn norm_q(&self) -> Result<f64> {
        Ok(norm(self.q()?))
    }

    pub fn norm_c(&self) -> f64 {
        norm(&self.c)
    }

    /// Reported objective `cᵀx + offset`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x) + self.objective_offset
    }

    /// Dual solution of the instance before presolve.
    pub fn recover_y(&self, y: &[f64]) -> Vec<f64> {
        match &self.presolve {
            Some(p) => linalg::add(y, &p.dual_shift),
            None => y.to_vec(),
        }
    }

    /// Reported dual objective `bᵀy + offset`.
    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        dot(&self.b, y) + self.objective_offset
    }

    /// Same instance with data `(αA, βb, γc)`; the known optimum is rescaled accordingly.
    pub fn rescaled(&self, alpha: f64, beta: f64, gamma: f64) -> Result<StandardFormLP> {
        let mut lp = StandardFormLP::new(
            self.name.clone(),
            self.a.scaled(alpha),
            linalg::scale(&self.b, beta),
            linalg::scale(&self.c, gamma),
        )?;
        lp.known_optimum = self
            .known_optimum
            .as_ref()
            .map(|k| k.rescaled(alpha, beta, gamma));
        Ok(lp)
    }

    /// Instance JSON: `{name, m, n, nnz, A, b, c, known_optimum?}` with `A` as COO triplets.
    pub fn to_json(&self) -> serde_json::Value {
        let coo: Vec<_> = self
            .a
            .triplets()
            .into_iter()
            .map(|(i, j, v)| json!([i, j, v]))
            .collect();
        let mut v = json!({
            "name": self.name,
            "m": self.m(),
            "n": self.n(),
            "nnz": self.a.nnz(),
            "A": coo,
            "b": self.b,
            "c": self.c,
        });
        if let Some(k) = &self.known_optimum {
            v["known_optimum"] = serde_json::to_value(k).expect("plain data");
        }
        v
    }
}

/// Replaces `c` by its projection onto `Null(A)` and records the decomposition.
pub fn presolve_project_c(lp: &StandardFormLP) -> Result<StandardFormLP> {
    let c_original = match &lp.presolve {
        Some(p) => p.c_original.clone(),
        None => lp.c.clone(),
    };
    let proj = RangeProjector::new(&lp.a);
    let q = proj.min_norm_solution(&lp.b)?;
    let ac = lp.a.matvec(&lp.c)?;
    let dual_shift = proj.gram_pinv_apply(&ac);
    let c_perp = lp.a.matvec_transpose(&dual_shift)?;
    let c_parallel = linalg::sub(&lp.c, &c_perp);
    let offset = dot(&q, &c_perp);
    let norm_c_parallel = norm(&c_parallel);
    let scale = norm(&c_original).max(f64::MIN_POSITIVE);
    let info = PresolveInfo {
        c_original,
        norm_q: norm(&q),
        all_feasible_optimal: norm_c_parallel <= 1e-12 * scale,
        c_parallel: c_parallel.clone(),
        c_perp,
        q: q.clone(),
        norm_c_parallel,
        dual_shift: dual_shift.clone(),
        offset,
    };
    let mut out = StandardFormLP::new(lp.name.clone(), lp.a.clone(), lp.b.clone(), c_parallel)?;
    out.objective_offset = lp.objective_offset + offset;
    out.known_optimum = lp
        .known_optimum
        .as_ref()
        .map(|k| k.with_dual_shift(&dual_shift));
    let _ = out.q.set(q);
    if let Some(s) = lp.spectral.get() {
        let _ = out.spectral.set(s.clone());
    }
    out.presolve = Some(info);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use families::gen_lp_gamma;

    fn row(a: &[f64]) -> SparseMatrixCSC {
        SparseMatrixCSC::from_dense_rows(&[a.to_vec()]).unwrap()
    }

    #[test]
    fn presolve_leaves_lp_gamma_alone() {
        let lp = gen_lp_gamma(0.7).unwrap();
        let p = presolve_project_c(&lp).unwrap();
        for (x, y) in p.c().iter().zip(lp.c()) {
            assert!((x - y).abs() < 1e-14);
        }
        assert!(p.presolve_info().unwrap().offset.abs() < 1e-14);
    }

    #[test]
    fn presolve_row_space_objective() {
        let lp = StandardFormLP::new("t", row(&[1.0, 1.0]), vec![2.0], vec![3.0, 3.0]).unwrap();
        let p = presolve_project_c(&lp).unwrap();
        assert!(linalg::norm(p.c()) < 1e-14);
        let info = p.presolve_info().unwrap();
        assert!(info.all_feasible_optimal);
        // every feasible point has objective 6
        assert!((p.objective(&[0.5, 1.5]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn presolve_projection_example() {
        let lp = StandardFormLP::new("t", row(&[1.0, 1.0]), vec![1.0], vec![1.0, 0.0]).unwrap();
        let p = presolve_project_c(&lp).unwrap();
        assert!((p.c()[0] - 0.5).abs() < 1e-14);
        assert!((p.c()[1] + 0.5).abs() < 1e-14);
        let info = p.presolve_info().unwrap();
        let sum = linalg::add(&info.c_parallel, &info.c_perp);
        assert!(linalg::dist(&sum, &info.c_original) < 1e-14);
        assert!(dot(&info.c_parallel, &info.c_perp).abs() < 1e-14);
        assert!((info.norm_q - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn rejects_zero_row_and_bad_dims() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(StandardFormLP::new("z", a, vec![1.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(StandardFormLP::new("z", row(&[1.0]), vec![1.0, 2.0], vec![0.0]).is_err());
    }

    #[test]
    fn json_export_fields() {
        let v = gen_lp_gamma(0.5).unwrap().to_json();
        assert_eq!(v["m"], 1);
        assert_eq!(v["n"], 2);
        assert_eq!(v["nnz"], 2);
        assert_eq!(v["A"].as_array().unwrap().len(), 2);
        assert!(v.get("known_optimum").is_some());
    }
}
