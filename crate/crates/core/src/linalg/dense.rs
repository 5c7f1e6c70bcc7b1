use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::sparse::SparseMatrixCSC;
use super::{dot, norm, sub, DENSE_ENTRY_LIMIT, DENSE_THRESHOLD, RANK_DROP_TOL};
use crate::error::{Error, Result};

const FEAS_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-12;

pub(crate) fn dense_singular_values(a: &SparseMatrixCSC) -> Vec<f64> {
    let d = a.to_dmatrix();
    d.singular_values().iter().cloned().collect()
}

#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric PSD operator, started from zero.
///
/// For a singular operator and a consistent right-hand side the iterates
/// stay in the operator's range, so the result is the minimum-norm solution.
pub fn conjugate_gradient<F>(op: &F, rhs: &[f64], tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let bnorm = norm(rhs);
    let mut rr = dot(&r, &r);
    if bnorm == 0.0 {
        return CgOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
            converged: true,
        };
    }
    for it in 0..max_iter {
        if rr.sqrt() <= tol * bnorm {
            return CgOutcome {
                solution: x,
                iterations: it,
                residual: rr.sqrt(),
                converged: true,
            };
        }
        op(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    let converged = rr.sqrt() <= tol * bnorm;
    CgOutcome {
        solution: x,
        iterations: max_iter,
        residual: rr.sqrt(),
        converged,
    }
}

enum Backend<'a> {
    Dense {
        /// Orthonormal basis of `Im(Aᵀ)`, n x r.
        v: DMatrix<f64>,
        /// Orthonormal basis of `Im(A)`, m x r.
        u: DMatrix<f64>,
        s: Vec<f64>,
    },
    Iterative(&'a SparseMatrixCSC),
}

/// Applies the pseudoinverse of `A` and the orthogonal projectors onto
/// `Im(Aᵀ)` and `Null(A)`.
pub struct RangeProjector<'a> {
    a: &'a SparseMatrixCSC,
    backend: Backend<'a>,
}

impl<'a> RangeProjector<'a> {
    pub fn new(a: &'a SparseMatrixCSC) -> Self {
        let use_dense = a.n_rows().min(a.n_cols()) <= DENSE_THRESHOLD
            && a.n_rows().saturating_mul(a.n_cols()) <= DENSE_ENTRY_LIMIT;
        Self::with_backend(a, use_dense)
    }

    pub(crate) fn with_backend(a: &'a SparseMatrixCSC, dense: bool) -> Self {
        if !dense {
            return RangeProjector {
                a,
                backend: Backend::Iterative(a),
            };
        }
        let d = a.to_dmatrix();
        let svd = d.svd(true, true);
        let u_full = svd.u.expect("requested U");
        let vt_full = svd.v_t.expect("requested Vᵀ");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| smax > 0.0 && svd.singular_values[i] > RANK_DROP_TOL * smax)
            .collect();
        let r = keep.len();
        let mut v = DMatrix::zeros(a.n_cols(), r);
        let mut u = DMatrix::zeros(a.n_rows(), r);
        let mut s = Vec::with_capacity(r);
        for (k, &i) in keep.iter().enumerate() {
            v.set_column(k, &vt_full.row(i).transpose());
            u.set_column(k, &u_full.column(i));
            s.push(svd.singular_values[i]);
        }
        RangeProjector {
            a,
            backend: Backend::Dense { v, u, s },
        }
    }

    pub fn rank(&self) -> Option<usize> {
        match &self.backend {
            Backend::Dense { s, .. } => Some(s.len()),
            Backend::Iterative(_) => None,
        }
    }

    fn gram_solve(a: &SparseMatrixCSC, rhs: &[f64]) -> Vec<f64> {
        let op = |u: &[f64], out: &mut [f64]| {
            let mut t = vec![0.0; a.n_cols()];
            a.matvec_transpose_into(u, &mut t);
            a.matvec_into(&t, out);
        };
        conjugate_gradient(&op, rhs, 1e-14, 20 * a.n_rows() + 200).solution
    }

    /// `Aᵀ(AAᵀ)† b` without a consistency check.
    pub fn pinv_apply(&self, b: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Dense { v, u, s } => {
                let bv = DVector::from_column_slice(b);
                let mut coef = u.transpose() * bv;
                for (c, si) in coef.iter_mut().zip(s) {
                    *c /= si;
                }
                (v * coef).iter().cloned().collect()
            }
            Backend::Iterative(a) => {
                let w = Self::gram_solve(a, b);
                a.matvec_transpose(&w).expect("length m")
            }
        }
    }

    /// `(AAᵀ)† r` for `r` in `Im(A)`.
    pub fn gram_pinv_apply(&self, r: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Dense { u, s, .. } => {
                let rv = DVector::from_column_slice(r);
                let mut coef = u.transpose() * rv;
                for (c, si) in coef.iter_mut().zip(s) {
                    *c /= si * si;
                }
                (u * coef).iter().cloned().collect()
            }
            Backend::Iterative(a) => Self::gram_solve(a, r),
        }
    }

    /// Orthogonal projection onto `Im(Aᵀ)`.
    pub fn project_row_space(&self, x: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Dense { v, .. } => {
                let xv = DVector::from_column_slice(x);
                let coef = v.transpose() * xv;
                (v * coef).iter().cloned().collect()
            }
            Backend::Iterative(a) => {
                let ax = a.matvec(x).expect("length n");
                self.pinv_apply(&ax)
            }
        }
    }

    /// Orthogonal projection onto `Null(A)`.
    pub fn project_nullspace(&self, x: &[f64]) -> Vec<f64> {
        sub(x, &self.project_row_space(x))
    }

    /// Minimum-norm solution of `Ax = b`; errors when `b ∉ Im(A)`.
    pub fn min_norm_solution(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.a.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: self.a.n_rows(),
                got: b.len(),
            });
        }
        let q = self.pinv_apply(b);
        let aq = self.a.matvec(&q)?;
        let residual = norm(&sub(&aq, b));
        let tolerance = FEAS_TOL * (1.0 + norm(b));
        if residual > tolerance {
            return Err(Error::InfeasibleEquality {
                residual,
                tolerance,
            });
        }
        Ok(q)
    }
}

/// `q = Aᵀ(AAᵀ)† b`, the least-norm point of `{x : Ax = b}`.
pub fn compute_q(a: &SparseMatrixCSC, b: &[f64]) -> Result<Vec<f64>> {
    RangeProjector::new(a).min_norm_solution(b)
}

/// `v − Aᵀ(AAᵀ)†Av`.
pub fn project_nullspace(a: &SparseMatrixCSC, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: a.n_cols(),
            got: v.len(),
        });
    }
    if a.nnz() == 0 {
        return Ok(v.to_vec());
    }
    Ok(RangeProjector::new(a).project_nullspace(v))
}

/// Orthonormal basis of `Null(A)` as the columns of an `n x (n - rank)` matrix.
pub fn nullspace_basis(a: &SparseMatrixCSC) -> DMatrix<f64> {
    let n = a.n_cols();
    if a.nnz() == 0 {
        return DMatrix::identity(n, n);
    }
    let proj = RangeProjector::with_backend(a, true);
    let v = match &proj.backend {
        Backend::Dense { v, .. } => v.clone(),
        Backend::Iterative(_) => unreachable!(),
    };
    // I - VVᵀ has eigenvalues exactly 0 or 1; the unit eigenvectors span Null(A).
    let p = DMatrix::identity(n, n) - &v * v.transpose();
    let eig = SymmetricEigen::new(p);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// `S^{-1/2}` for a symmetric positive definite `S`.
pub fn dense_inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if s.nrows() != s.ncols() {
        return Err(Error::DimensionMismatch {
            expected: s.nrows(),
            got: s.ncols(),
        });
    }
    let scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..s.nrows() {
        for j in 0..i {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::ContractViolation("matrix is not symmetric".into()));
            }
        }
    }
    let eig = SymmetricEigen::new(s.clone());
    let lmax = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tolerance = PSD_TOL * lmax.max(0.0);
    if let Some(&bad) = eig
        .eigenvalues
        .iter()
        .find(|&&l| l <= tolerance || lmax <= 0.0)
    {
        return Err(Error::NearSingular {
            eigenvalue: bad,
            tolerance,
        });
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Ok(&eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, norm};

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn m(rows: &[Vec<f64>]) -> SparseMatrixCSC {
        SparseMatrixCSC::from_dense_rows(rows).unwrap()
    }

    #[test]
    fn q_examples() {
        let q = compute_q(&m(&[vec![S, S]]), &[1.0]).unwrap();
        assert!(dist(&q, &[S, S]) < 1e-12);
        assert!((norm(&q) - 1.0).abs() < 1e-12);
        let q = compute_q(&SparseMatrixCSC::identity(3), &[1.0, -2.0, 5.0]).unwrap();
        assert!(dist(&q, &[1.0, -2.0, 5.0]) < 1e-12);
        let q = compute_q(&m(&[vec![1.0, 1.0]]), &[2.0]).unwrap();
        assert!(dist(&q, &[1.0, 1.0]) < 1e-12);
    }

    #[test]
    fn q_inconsistent_system() {
        let a = m(&[vec![1.0, 1.0], vec![2.0, 2.0]]);
        assert!(matches!(
            compute_q(&a, &[1.0, 3.0]),
            Err(Error::InfeasibleEquality { .. })
        ));
        let q = compute_q(&a, &[1.0, 2.0]).unwrap();
        assert!(dist(&q, &[0.5, 0.5]) < 1e-12);
    }

    #[test]
    fn q_iterative_backend() {
        let a = m(&[vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let dense = RangeProjector::with_backend(&a, true).min_norm_solution(&[1.0, 2.0]).unwrap();
        let iter = RangeProjector::with_backend(&a, false).min_norm_solution(&[1.0, 2.0]).unwrap();
        assert!(dist(&dense, &iter) < 1e-10);
    }

    #[test]
    fn nullspace_projection_examples() {
        let a = m(&[vec![S, S]]);
        let v = [S, -S];
        assert!(dist(&project_nullspace(&a, &v).unwrap(), &v) < 1e-12);
        let out = project_nullspace(&a, &[2.0 * S, 2.0 * S]).unwrap();
        assert!(norm(&out) < 1e-12);
        let z = SparseMatrixCSC::zeros(1, 2);
        assert_eq!(project_nullspace(&z, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn nullspace_basis_is_orthonormal_and_annihilated() {
        let a = m(&[vec![1.0, 1.0, 1.0], vec![0.0, 1.0, -1.0]]);
        let nb = nullspace_basis(&a);
        assert_eq!(nb.ncols(), 1);
        let ad = a.to_dmatrix();
        assert!((ad * &nb).norm() < 1e-12);
        assert!(((nb.transpose() * &nb)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_examples() {
        let d = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let r = dense_inverse_sqrt(&d).unwrap();
        assert!((r - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 1.0])).norm() < 1e-14);
        let i = DMatrix::<f64>::identity(3, 3);
        assert!((dense_inverse_sqrt(&i).unwrap() - &i).norm() < 1e-14);

        // eigenvalues 3 and 1 on (1,1)/√2 and (1,-1)/√2
        let s = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let r = dense_inverse_sqrt(&s).unwrap();
        let e1 = DVector::from_column_slice(&[S, S]);
        let e2 = DVector::from_column_slice(&[S, -S]);
        assert!((&r * &e1 - &e1 / 3f64.sqrt()).norm() < 1e-12);
        assert!((&r * &e2 - &e2).norm() < 1e-12);
        let check = &r * &s * &r - DMatrix::<f64>::identity(2, 2);
        assert!(check.amax() <= 1e-8);
    }

    #[test]
    fn inverse_sqrt_errors() {
        let sing = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            dense_inverse_sqrt(&sing),
            Err(Error::NearSingular { .. })
        ));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            dense_inverse_sqrt(&asym),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn cg_solves_spd_system() {
        let op = |x: &[f64], out: &mut [f64]| {
            out[0] = 4.0 * x[0] + x[1];
            out[1] = x[0] + 3.0 * x[1];
        };
        let res = conjugate_gradient(&op, &[1.0, 2.0], 1e-14, 50);
        assert!(res.converged);
        assert!(dist(&res.solution, &[1.0 / 11.0, 7.0 / 11.0]) < 1e-12);
    }
}
