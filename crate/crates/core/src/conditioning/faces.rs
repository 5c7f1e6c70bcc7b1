//! Exact geometry of small polyhedra `{z ≥ 0 : Az = b}` by enumerating faces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SparseMatrixCSC;

/// Largest dimension for which faces are enumerated.
pub const MAX_ENUM_DIM: usize = 14;

const CONSISTENCY_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-10;

struct Face {
    free: Vec<usize>,
    /// `I - A_F⁺A_F`, the projector onto `Null(A_F)`.
    null_proj: DMatrix<f64>,
    /// `A_F⁺b`, the minimum-norm point of `{A_F z = b}`.
    particular: DVector<f64>,
    /// `A_F` has full column rank, so the face holds at most one point.
    pointed: bool,
}

/// Every face `{z ≥ 0 : Az = b, z_i = 0 for i ∉ F}` whose affine hull is nonempty.
pub struct FaceEnumerator {
    n: usize,
    faces: Vec<Face>,
}

impl FaceEnumerator {
    pub fn new(a: &DMatrix<f64>, b: &[f64]) -> Result<Self> {
        let (m, n) = (a.nrows(), a.ncols());
        if n > MAX_ENUM_DIM {
            return Err(Error::Unsupported(format!(
                "face enumeration limited to n <= {MAX_ENUM_DIM}, got {n}"
            )));
        }
        if b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: b.len(),
            });
        }
        let bv = DVector::from_column_slice(b);
        let scale = 1.0 + bv.norm();
        let mut faces = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let free: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if free.is_empty() {
                if bv.norm() <= CONSISTENCY_TOL * scale {
                    faces.push(Face {
                        free,
                        null_proj: DMatrix::zeros(0, 0),
                        particular: DVector::zeros(0),
                        pointed: true,
                    });
                }
                continue;
            }
            let af = a.select_columns(&free);
            let svd = af.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&s| s > 1e-12 * smax.max(1e-300))
                .count();
            let pinv = svd
                .pseudo_inverse(1e-12 * smax.max(1e-300))
                .map_err(|e| Error::ContractViolation(e.to_string()))?;
            let particular = &pinv * &bv;
            if (&af * &particular - &bv).norm() > CONSISTENCY_TOL * scale {
                continue;
            }
            let k = free.len();
            faces.push(Face {
                null_proj: DMatrix::identity(k, k) - &pinv * &af,
                particular,
                pointed: rank == k,
                free,
            });
        }
        Ok(FaceEnumerator { n, faces })
    }

    pub fn from_sparse(a: &SparseMatrixCSC, b: &[f64]) -> Result<Self> {
        Self::new(&a.to_dmatrix(), b)
    }

    /// Euclidean projection onto the polyhedron, or `None` when it is empty.
    ///
    /// The projection lies in the relative interior of some face, where it
    /// equals the projection onto that face's affine hull; so the nearest
    /// feasible candidate among all faces is exact.
    pub fn project(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut cand = vec![0.0; self.n];
        for face in &self.faces {
            let z: DVector<f64> = if face.free.is_empty() {
                DVector::zeros(0)
            } else {
                let xf = DVector::from_iterator(face.free.len(), face.free.iter().map(|&i| x[i]));
                &face.null_proj * xf + &face.particular
            };
            if z.iter().any(|&v| v < -FEAS_TOL) {
                continue;
            }
            cand.iter_mut().for_each(|v| *v = 0.0);
            for (k, &i) in face.free.iter().enumerate() {
                cand[i] = z[k].max(0.0);
            }
            let d2: f64 = x.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum();
            if best.as_ref().is_none_or(|(bd, _)| d2 < *bd) {
                best = Some((d2, cand.clone()));
            }
        }
        best.map(|(_, p)| p)
    }

    pub fn distance(&self, x: &[f64]) -> Option<f64> {
        self.project(x)
            .map(|p| x.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }

    /// Vertices of the polyhedron, deduplicated.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for face in self.faces.iter().filter(|f| f.pointed) {
            if face.particular.iter().any(|&v| v < -FEAS_TOL) {
                continue;
            }
            let mut v = vec![0.0; self.n];
            for (k, &i) in face.free.iter().enumerate() {
                v[i] = face.particular[k].max(0.0);
            }
            let scale = 1.0 + v.iter().map(|a| a.abs()).fold(0.0, f64::max);
            let dup = out.iter().any(|w| {
                w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-9 * scale)
            });
            if !dup {
                out.push(v);
            }
        }
        out
    }
}

/// Extreme rays of `{d ≥ 0 : Ad = 0}`, normalized to `eᵀd = 1`.
pub fn extreme_rays(a: &DMatrix<f64>) -> Result<Vec<Vec<f64>>> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut aug = DMatrix::zeros(m + 1, n);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    aug.row_mut(m).fill(1.0);
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    Ok(FaceEnumerator::new(&aug, &rhs)?.vertices())
}
