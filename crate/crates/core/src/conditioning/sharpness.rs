use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dual::dual_standard_form;
use super::faces::{extreme_rays, FaceEnumerator};
use super::theta::sample_near;
use crate::error::{Error, Result};
use crate::linalg::{dist, dot, norm, nullspace_basis, project_nullspace};
use crate::model::{OptimalSet, StandardFormLP};

/// Default step along ray edges.
pub const DEFAULT_EPSILON_BAR: f64 = 1.0;

/// Basic components at or below this (relative) count as zero.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Bounded,
    Ray,
}

/// An edge of the feasible polyhedron leaving the optimal vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub kind: EdgeKind,
    pub base: Vec<f64>,
    /// The other vertex for bounded edges; the direction with `cᵀr = 1` for rays.
    pub endpoint_or_ray: Vec<f64>,
    /// Nonbasic index entering along this edge.
    pub entering: usize,
    pub sharpness: f64,
}

/// Objective growth ratio `(cᵀ(x - x⋆)/‖P c‖) / Dist(x, 𝒳⋆)`.
fn growth_ratio(c: &[f64], pc_norm: f64, x: &[f64], x_star: &[f64], dist_to_opt: f64) -> f64 {
    let gap: f64 = c.iter().zip(x).zip(x_star).map(|((ci, a), b)| ci * (a - b)).sum();
    gap / pc_norm / dist_to_opt
}

fn projected_objective_norm(lp: &StandardFormLP) -> Result<f64> {
    let pc = project_nullspace(lp.a(), lp.c())?;
    let v = norm(&pc);
    if !(v > 0.0) {
        return Err(Error::DegenerateInstance(
            "objective is constant on the feasible affine space".into(),
        ));
    }
    Ok(v)
}

/// Enumerates the edges at the vertex `x⋆` for the given basis.
pub fn edges_at_vertex(
    lp: &StandardFormLP,
    x_star: &[f64],
    basis: &[usize],
    epsilon_bar: f64,
) -> Result<Vec<Edge>> {
    let (m, n) = (lp.m(), lp.n());
    if x_star.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x_star.len(),
        });
    }
    if !(epsilon_bar > 0.0) {
        return Err(Error::InvalidParameter("epsilon_bar must be positive".into()));
    }
    if basis.len() != m || basis.iter().any(|&j| j >= n) {
        return Err(Error::Unsupported(format!(
            "basis must list {m} distinct columns; A must have full row rank"
        )));
    }
    let a = lp.a().to_dmatrix();
    let bmat = a.select_columns(basis);
    let lu = bmat.clone().lu();
    let scale = 1.0 + x_star.iter().cloned().fold(0.0, f64::max);
    let rcond = {
        let sv = bmat.singular_values();
        sv.min() / sv.max()
    };
    if !(rcond > 1e-12) {
        return Err(Error::Unsupported("basis matrix is singular".into()));
    }
    if basis.iter().any(|&j| x_star[j] <= SUPPORT_TOL * scale) {
        return Err(Error::Unsupported(
            "degenerate basis: a basic component is zero".into(),
        ));
    }
    let c = lp.c();
    let pc_norm = projected_objective_norm(lp)?;
    let cscale = norm(c);
    let mut in_basis = vec![false; n];
    basis.iter().for_each(|&j| in_basis[j] = true);
    let mut edges = Vec::new();
    for j in (0..n).filter(|&j| !in_basis[j]) {
        let aj = a.column(j).into_owned();
        let db: DVector<f64> = -lu.solve(&aj).expect("nonsingular basis");
        let mut d = vec![0.0; n];
        d[j] = 1.0;
        for (k, &bi) in basis.iter().enumerate() {
            d[bi] = db[k];
        }
        let slope = dot(c, &d);
        let tol = 1e-12 * cscale * norm(&d);
        if slope < -tol {
            return Err(Error::ContractViolation(format!(
                "x⋆ is not optimal: edge {j} decreases the objective"
            )));
        }
        if slope <= tol {
            return Err(Error::Unsupported(format!(
                "edge {j} keeps the objective constant: the optimum is not unique"
            )));
        }
        let t_max = basis
            .iter()
            .filter(|&&bi| d[bi] < 0.0)
            .map(|&bi| x_star[bi] / -d[bi])
            .fold(f64::INFINITY, f64::min);
        let (kind, target, probe) = if t_max.is_finite() {
            let end: Vec<f64> = x_star.iter().zip(&d).map(|(x, di)| (x + t_max * di).max(0.0)).collect();
            (EdgeKind::Bounded, end.clone(), end)
        } else {
            let r: Vec<f64> = d.iter().map(|v| v / slope).collect();
            let p: Vec<f64> = x_star.iter().zip(&r).map(|(x, ri)| x + epsilon_bar * ri).collect();
            (EdgeKind::Ray, r, p)
        };
        let sharpness = growth_ratio(c, pc_norm, &probe, x_star, dist(&probe, x_star));
        edges.push(Edge {
            kind,
            base: x_star.to_vec(),
            endpoint_or_ray: target,
            entering: j,
            sharpness,
        });
    }
    if edges.is_empty() {
        return Err(Error::ContractViolation("vertex has no edges".into()));
    }
    Ok(edges)
}

/// `μ_p` for a unique nondegenerate optimal vertex: the smallest growth
/// ratio over the edges leaving it. Capped at 1, its upper limit, which
/// rounding can otherwise exceed by an ulp.
pub fn sharpness_singleton(
    lp: &StandardFormLP,
    x_star: &[f64],
    basis: &[usize],
    epsilon_bar: f64,
) -> Result<f64> {
    let edges = edges_at_vertex(lp, x_star, basis, epsilon_bar)?;
    Ok(edges.iter().map(|e| e.sharpness).fold(1.0, f64::min))
}

/// Indices of the strictly positive components, the basis of a nondegenerate vertex.
pub fn support_basis(x: &[f64]) -> Vec<usize> {
    let scale = 1.0 + x.iter().cloned().fold(0.0, f64::max);
    (0..x.len()).filter(|&i| x[i] > SUPPORT_TOL * scale).collect()
}

/// Primal sharpness from the attached singleton optimum.
pub fn primal_sharpness(lp: &StandardFormLP, epsilon_bar: f64) -> Result<f64> {
    let x = singleton(lp, true)?;
    sharpness_singleton(lp, &x, &support_basis(&x), epsilon_bar)
}

/// Dual sharpness: primal sharpness of the dual slack problem.
pub fn dual_sharpness(lp: &StandardFormLP, epsilon_bar: f64) -> Result<f64> {
    let s = singleton(lp, false)?;
    let d = dual_standard_form(lp)?;
    sharpness_singleton(&d, &s, &support_basis(&s), epsilon_bar)
}

fn singleton(lp: &StandardFormLP, primal: bool) -> Result<Vec<f64>> {
    let ko = lp
        .known_optimum()
        .ok_or_else(|| Error::UnsupportedMetric("sharpness needs an attached optimum".into()))?;
    match if primal { &ko.x } else { &ko.s } {
        OptimalSet::Point { point } => Ok(point.clone()),
        _ => Err(Error::Unsupported("sharpness is computed for unique optima only".into())),
    }
}

/// Smallest sampled growth ratio over feasible, non-optimal points.
///
/// Samples lie on segments from the optimal set to every vertex, along every
/// extreme ray, at the vertices themselves, and at random feasible points
/// near the optimal set. Each is a genuine ratio, so the result can only
/// overestimate `μ_p`.
pub fn brute_force_sharpness(
    lp: &StandardFormLP,
    optimal: &OptimalSet,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = lp.n();
    if n > 10 {
        return Err(Error::Unsupported(format!("oracle limited to n <= 10, got {n}")));
    }
    let a = lp.a().to_dmatrix();
    let faces = FaceEnumerator::new(&a, lp.b())?;
    let vertices = faces.vertices();
    let rays = extreme_rays(&a)?;
    let basis: DMatrix<f64> = nullspace_basis(lp.a());
    let c = lp.c();
    let pc_norm = projected_objective_norm(lp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = optimal.representative().to_vec();
    let c_star = dot(c, &x0);

    let mut points: Vec<Vec<f64>> = vertices.clone();
    let per = (n_samples / (vertices.len() + rays.len() + 1)).max(1);
    let toward = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };
    for v in &vertices {
        for _ in 0..per {
            let t: f64 = rng.random::<f64>().max(1e-6);
            let base = optimal.project(v);
            points.push(toward(&base, v, t));
        }
    }
    for r in &rays {
        for _ in 0..per {
            let t = 10f64.powf(rng.random_range(-3.0..3.0));
            points.push(x0.iter().zip(r).map(|(a, b)| a + t * b).collect());
        }
    }
    let near = sample_near(optimal, &basis, 1.0, per, rng.random());
    points.extend(near.into_iter().filter(|x| x.iter().all(|&v| v >= 0.0)));

    let ratio = points
        .par_iter()
        .filter_map(|x| {
            let d = optimal.distance(x);
            if d <= 1e-12 * (1.0 + norm(x)) {
                return None;
            }
            let gap = dot(c, x) - c_star;
            Some(gap / pc_norm / d)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(ratio)
}

/// Dual counterpart of [`brute_force_sharpness`].
pub fn brute_force_sharpness_dual(
    lp: &StandardFormLP,
    optimal_s: &OptimalSet,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    brute_force_sharpness(&dual_standard_form(lp)?, optimal_s, n_samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrixCSC;
    use crate::model::families::{gen_family, gen_lp_gamma};

    #[test]
    fn lp_gamma_is_perfectly_sharp() {
        for g in [std::f64::consts::FRAC_PI_4, 1.0, 0.1, 0.01] {
            let lp = gen_lp_gamma(g).unwrap();
            assert!((primal_sharpness(&lp, 1.0).unwrap() - 1.0).abs() < 1e-9);
            let ko = lp.known_optimum().unwrap();
            let bf = brute_force_sharpness(&lp, &ko.x, 200, 1).unwrap();
            assert!((bf - 1.0).abs() < 1e-6, "{bf}");
        }
    }

    #[test]
    fn family_three_sharpness_is_sin_gamma() {
        for g in [0.1, 0.3, 0.05] {
            let lp = gen_family(3, g).unwrap();
            let ko = lp.known_optimum().unwrap();
            let x = ko.x.representative();
            let edges = edges_at_vertex(&lp, x, &support_basis(x), 1.0).unwrap();
            assert_eq!(edges.len(), 2);
            let mut vals: Vec<f64> = edges.iter().map(|e| e.sharpness).collect();
            vals.sort_by(f64::total_cmp);
            assert!((vals[0] - g.sin()).abs() < 1e-9, "{vals:?}");
            assert!((vals[1] - (g + std::f64::consts::FRAC_PI_3).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn brute_force_brackets_edges() {
        for k in 1..=4 {
            let lp = gen_family(k, 0.2).unwrap();
            let ko = lp.known_optimum().unwrap().clone();
            let mu = primal_sharpness(&lp, 1.0).unwrap();
            let bf = brute_force_sharpness(&lp, &ko.x, 2000, 5).unwrap();
            assert!(bf >= mu - 1e-6, "family {k}: {bf} < {mu}");
            assert!(bf <= mu + 1e-6, "family {k}: edge minimum not attained ({bf} vs {mu})");
            assert!(mu > 0.0 && mu <= 1.0 + 1e-12);
            let mud = dual_sharpness(&lp, 1.0).unwrap();
            let bfd = brute_force_sharpness_dual(&lp, &ko.s, 2000, 5).unwrap();
            assert!(bfd >= mud - 1e-6 && mud > 0.0 && mud <= 1.0 + 1e-12, "family {k}");
        }
    }

    #[test]
    fn ray_sharpness_is_nonincreasing_in_step() {
        // x1 - x2 = 1: the optimum (1, 0) has a single ray edge.
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, -1.0, 0.0]]).unwrap();
        let lp = StandardFormLP::new("ray", a, vec![1.0], vec![1.0, 0.0, 2.0]).unwrap();
        let x = [1.0, 0.0, 0.0];
        let vals: Vec<f64> = [0.1, 1.0, 10.0]
            .iter()
            .map(|&e| sharpness_singleton(&lp, &x, &[0], e).unwrap())
            .collect();
        let edges = edges_at_vertex(&lp, &x, &[0], 1.0).unwrap();
        assert!(edges.iter().all(|e| e.kind == EdgeKind::Ray));
        for e in &edges {
            assert!((dot(lp.c(), &e.endpoint_or_ray) - 1.0).abs() < 1e-12);
        }
        assert!(vals[0] >= vals[1] - 1e-12 && vals[1] >= vals[2] - 1e-12);
    }

    #[test]
    fn degenerate_and_nonunique_are_unsupported() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 1.0]]).unwrap();
        let flat = StandardFormLP::new("flat", a.clone(), vec![1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            sharpness_singleton(&flat, &[1.0, 0.0], &[0], 1.0),
            Err(Error::DegenerateInstance(_) | Error::Unsupported(_))
        ));
        let lp = StandardFormLP::new("deg", a, vec![0.0], vec![1.0, 2.0]).unwrap();
        assert!(matches!(sharpness_singleton(&lp, &[0.0, 0.0], &[0], 1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn points_on_the_optimal_face_are_excluded() {
        // min x3 s.t. x1 + x2 + x3 = 1: the optimal set is the segment x3 = 0.
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let lp = StandardFormLP::new("face", a, vec![1.0], vec![0.0, 0.0, 1.0]).unwrap();
        let seg = OptimalSet::Segment {
            from: vec![1.0, 0.0, 0.0],
            to: vec![0.0, 1.0, 0.0],
        };
        let bf = brute_force_sharpness(&lp, &seg, 500, 2).unwrap();
        assert!(bf.is_finite() && bf > 0.0 && bf <= 1.0 + 1e-12, "{bf}");
    }
}
