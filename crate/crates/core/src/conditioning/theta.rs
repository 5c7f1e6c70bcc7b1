use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dual::dual_standard_form;
use super::faces::FaceEnumerator;
use crate::error::{Error, Result};
use crate::linalg::{norm, norm1, norm_inf, nullspace_basis, RangeProjector, SparseMatrixCSC};
use crate::model::{presolve_project_c, OptimalSet, StandardFormLP};
use crate::pdhg::StepSizes;
use crate::restart::{solve, RestartConfig, Status, Target};
use crate::tuning::standard_stepsizes;

/// Norm used in place of `ℓ2` in the ball-certificate program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVariant {
    L1,
    /// `√n·‖·‖_∞`.
    ScaledLinf,
}

impl NormVariant {
    fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormVariant::L1 => norm1(v),
            NormVariant::ScaledLinf => (v.len() as f64).sqrt() * norm_inf(v),
        }
    }
}

/// An optimal point and a radius whose ball contains the whole optimal set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCertificate {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallCertificate {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("certificate needs finite data and radius >= 0".into()));
        }
        Ok(BallCertificate { center, radius })
    }

    /// Smallest ball around a closed-form bounded optimal set.
    pub fn enclosing(set: &OptimalSet) -> Result<Self> {
        match set {
            OptimalSet::Point { point } => Self::new(point.clone(), 0.0),
            OptimalSet::Segment { from, to } => {
                let mid: Vec<f64> = from.iter().zip(to).map(|(a, b)| 0.5 * (a + b)).collect();
                let half = 0.5 * crate::linalg::dist(from, to);
                Self::new(mid, half)
            }
            OptimalSet::Ray { .. } => Err(Error::Unsupported(
                "an unbounded optimal set has no enclosing ball".into(),
            )),
        }
    }

    /// Checks membership of the center in `ℱ_p` to `tol` relative.
    pub fn check_feasible(&self, lp: &StandardFormLP, tol: f64) -> Result<()> {
        if self.center.len() != lp.n() {
            return Err(Error::DimensionMismatch {
                expected: lp.n(),
                got: self.center.len(),
            });
        }
        let r = lp.a().matvec(&self.center)?;
        let res: Vec<f64> = r.iter().zip(lp.b()).map(|(a, b)| a - b).collect();
        let scale = 1.0 + norm(lp.b());
        let neg = self.center.iter().cloned().fold(0.0f64, f64::min);
        if norm(&res) > tol * scale || -neg > tol * (1.0 + norm(&self.center)) {
            return Err(Error::ContractViolation("certificate center is not feasible".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThetaMethod {
    Solver,
    Grid,
}

/// Upper bound on the limiting error ratio, with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaBound {
    /// `max(1, value of the certified feasible point)`.
    pub value: f64,
    /// Objective of the certified point before clamping at 1.
    pub raw: f64,
    pub method: ThetaMethod,
    pub variant: NormVariant,
    pub solver_steps: usize,
    pub solver_converged: bool,
    pub diagnosis: Option<String>,
}

impl ThetaBound {
    fn infinite(method: ThetaMethod, variant: NormVariant, steps: usize, why: &str) -> Self {
        ThetaBound {
            value: f64::INFINITY,
            raw: f64::INFINITY,
            method,
            variant,
            solver_steps: steps,
            solver_converged: false,
            diagnosis: Some(why.to_string()),
        }
    }
}

const NO_INTERIOR: &str = "no strictly positive feasible point found; the bound is infinite";

/// Objective of the point `(v, α)` after making it feasible.
///
/// `v` is projected onto `{Av = αb}`, then the pair is scaled so that
/// `min v = 1`. The objective is positively homogeneous, so this gives the
/// value of a feasible point and hence a valid upper bound.
fn certified_value(
    proj: &RangeProjector<'_>,
    a: &SparseMatrixCSC,
    b: &[f64],
    cert: &BallCertificate,
    variant: NormVariant,
    v: &[f64],
    alpha: f64,
) -> Result<f64> {
    let alpha = alpha.max(0.0);
    let av = a.matvec(v)?;
    let res: Vec<f64> = av.iter().zip(b).map(|(x, y)| x - alpha * y).collect();
    let corr = proj.pinv_apply(&res);
    let v: Vec<f64> = v.iter().zip(&corr).map(|(x, y)| x - y).collect();
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = 1.0 + norm_inf(&v);
    if !(vmin > 1e-12 * scale) {
        return Ok(f64::INFINITY);
    }
    let diff: Vec<f64> = v.iter().zip(&cert.center).map(|(x, c)| x - alpha * c).collect();
    Ok((cert.radius * alpha + variant.eval(&diff)) / vmin)
}

/// The program `min R·α + ‖v - α·x_a‖ s.t. Av = αb, v ≥ e, α ≥ 0` in
/// standard form, with `v = v' + e`. Returns the instance and the column of `α`.
fn relaxation_lp(lp: &StandardFormLP, cert: &BallCertificate, variant: NormVariant) -> Result<(StandardFormLP, usize)> {
    let (m, n) = (lp.m(), lp.n());
    let a = lp.a();
    let ae = a.matvec(&vec![1.0; n])?;
    let alpha = n;
    let mut trip: Vec<(usize, usize, f64)> = a.triplets();
    for (i, &bi) in lp.b().iter().enumerate() {
        if bi != 0.0 {
            trip.push((i, alpha, -bi));
        }
    }
    let mut rhs: Vec<f64> = ae.iter().map(|v| -v).collect();
    let mut cost = vec![0.0; n + 1];
    cost[alpha] = cert.radius;
    match variant {
        NormVariant::L1 => {
            // v' - α·x_a - p + q = -e
            let (p0, q0) = (n + 1, 2 * n + 1);
            for i in 0..n {
                let r = m + i;
                trip.push((r, i, 1.0));
                if cert.center[i] != 0.0 {
                    trip.push((r, alpha, -cert.center[i]));
                }
                trip.push((r, p0 + i, -1.0));
                trip.push((r, q0 + i, 1.0));
                rhs.push(-1.0);
            }
            cost.extend(std::iter::repeat_n(1.0, 2 * n));
        }
        NormVariant::ScaledLinf => {
            // ±(v' + e - α·x_a) ≤ t, with slacks u1, u2.
            let t = n + 1;
            let (u1, u2) = (n + 2, 2 * n + 2);
            for i in 0..n {
                let r = m + i;
                trip.push((r, i, 1.0));
                if cert.center[i] != 0.0 {
                    trip.push((r, alpha, -cert.center[i]));
                }
                trip.push((r, t, -1.0));
                trip.push((r, u1 + i, 1.0));
                rhs.push(-1.0);
            }
            for i in 0..n {
                let r = m + n + i;
                trip.push((r, i, -1.0));
                if cert.center[i] != 0.0 {
                    trip.push((r, alpha, cert.center[i]));
                }
                trip.push((r, t, -1.0));
                trip.push((r, u2 + i, 1.0));
                rhs.push(1.0);
            }
            cost.push((n as f64).sqrt());
            cost.extend(std::iter::repeat_n(0.0, 2 * n));
        }
    }
    let rows = rhs.len();
    let cols = cost.len();
    let mat = SparseMatrixCSC::from_triplets(rows, cols, &trip)?;
    Ok((StandardFormLP::new(format!("{}-theta", lp.name()), mat, rhs, cost)?, alpha))
}

/// Rows of `A` scaled to unit norm and `(b, x_a, R)` divided by a common
/// factor. The ratio defining the bound is unchanged by either, but the
/// relaxation becomes far better conditioned for the solver.
fn normalized(lp: &StandardFormLP, cert: &BallCertificate) -> Result<(StandardFormLP, BallCertificate)> {
    let mut row_norm = vec![0.0f64; lp.m()];
    for (i, _, v) in lp.a().triplets() {
        row_norm[i] += v * v;
    }
    let row_scale: Vec<f64> = row_norm
        .iter()
        .map(|s| if *s > 0.0 { 1.0 / s.sqrt() } else { 1.0 })
        .collect();
    let s = norm_inf(&cert.center).max(cert.radius);
    let s = if s > 0.0 && s.is_finite() { s } else { 1.0 };
    let trip: Vec<(usize, usize, f64)> = lp
        .a()
        .triplets()
        .into_iter()
        .map(|(i, j, v)| (i, j, v * row_scale[i]))
        .collect();
    let a = SparseMatrixCSC::from_triplets(lp.m(), lp.n(), &trip)?;
    let b: Vec<f64> = lp.b().iter().zip(&row_scale).map(|(b, r)| b * r / s).collect();
    let scaled = StandardFormLP::new(lp.name(), a, b, lp.c().to_vec())?;
    let center = cert.center.iter().map(|x| x / s).collect();
    Ok((scaled, BallCertificate { center, radius: cert.radius / s }))
}

/// Budget for the inner solve of the relaxation.
pub const THETA_SOLVER_STEPS: usize = 2_000_000;
pub const THETA_SOLVER_TOL: f64 = 1e-8;

/// Upper bound on `θ_p⋆` from the ball certificate, solved with the
/// restarted PDHG solver of this crate.
pub fn theta_upper_bound_primal(
    lp: &StandardFormLP,
    cert: &BallCertificate,
    variant: NormVariant,
) -> Result<ThetaBound> {
    if cert.center.len() != lp.n() {
        return Err(Error::DimensionMismatch {
            expected: lp.n(),
            got: cert.center.len(),
        });
    }
    let (lp, cert) = &normalized(lp, cert)?;
    let (aux, alpha_col) = relaxation_lp(lp, cert, variant)?;
    let aux = presolve_project_c(&aux)?;
    let steps = match standard_stepsizes(&aux) {
        Ok(s) => s,
        Err(Error::DegenerateInstance(_)) => {
            let smax = aux.spectral()?.sigma_max_safe;
            StepSizes::new(0.5 / smax, 0.5 / smax, aux.spectral()?.sigma_max)?
        }
        Err(e) => return Err(e),
    };
    let cfg = RestartConfig::default()
        .with_target(Target::RelativeError(THETA_SOLVER_TOL))
        .with_max_steps(THETA_SOLVER_STEPS);
    let (sol, stats) = match solve(&aux, &steps, &cfg) {
        Ok(r) => r,
        Err(Error::Diverged { step }) => {
            return Ok(ThetaBound::infinite(ThetaMethod::Solver, variant, step, "relaxation solve diverged"))
        }
        Err(e) => return Err(e),
    };
    let n = lp.n();
    let v: Vec<f64> = sol.x[..n].iter().map(|x| x + 1.0).collect();
    let proj = RangeProjector::new(lp.a());
    let raw = certified_value(&proj, lp.a(), lp.b(), cert, variant, &v, sol.x[alpha_col])?;
    let converged = sol.status == Status::OptimalTol;
    if !raw.is_finite() {
        return Ok(ThetaBound::infinite(ThetaMethod::Solver, variant, stats.total_steps, NO_INTERIOR));
    }
    Ok(ThetaBound {
        value: raw.max(1.0),
        raw,
        method: ThetaMethod::Solver,
        variant,
        solver_steps: stats.total_steps,
        solver_converged: converged,
        diagnosis: (!converged).then(|| format!("relaxation solve ended with {:?}", sol.status)),
    })
}

/// Upper bound on `θ_d⋆`: the primal bound applied to the dual slack problem.
pub fn theta_upper_bound_dual(
    lp: &StandardFormLP,
    cert: &BallCertificate,
    variant: NormVariant,
) -> Result<ThetaBound> {
    theta_upper_bound_primal(&dual_standard_form(lp)?, cert, variant)
}

/// Same bound by direct search, for `n ≤ 3`.
///
/// Uses the equivalent form `inf (R + ‖x - x_a‖)/min_i x_i` over `x ∈ V_p`;
/// the ratio is quasiconvex, so shrinking a grid around the incumbent converges.
pub fn theta_upper_bound_grid(
    lp: &StandardFormLP,
    cert: &BallCertificate,
    variant: NormVariant,
) -> Result<ThetaBound> {
    let n = lp.n();
    if n > 3 {
        return Err(Error::Unsupported(format!("grid search needs n <= 3, got {n}")));
    }
    let basis = nullspace_basis(lp.a());
    let k = basis.ncols();
    // Rounding noise in a zero coordinate of the center would otherwise be
    // exploited by points right next to it.
    let snap = 1e-12 * (1.0 + norm_inf(&cert.center));
    let center: Vec<f64> = cert
        .center
        .iter()
        .map(|&x| if x.abs() <= snap { 0.0 } else { x })
        .collect();
    let f = |t: &[f64]| -> f64 {
        let mut d = vec![0.0; n];
        for (j, tj) in t.iter().enumerate() {
            for (i, di) in d.iter_mut().enumerate() {
                *di += basis[(i, j)] * tj;
            }
        }
        let xmin = d
            .iter()
            .zip(&center)
            .map(|(a, b)| a + b)
            .fold(f64::INFINITY, f64::min);
        let big = d
            .iter()
            .zip(&center)
            .map(|(a, b)| (a + b).abs())
            .fold(0.0, f64::max);
        if xmin <= 1e-12 * (1.0 + big) {
            return f64::INFINITY;
        }
        (cert.radius + variant.eval(&d)) / xmin
    };
    let best = if k == 0 {
        f(&[])
    } else {
        grid_minimize(&f, k, 1.0 + norm(&cert.center))
    };
    if !best.is_finite() {
        return Ok(ThetaBound::infinite(ThetaMethod::Grid, variant, 0, NO_INTERIOR));
    }
    Ok(ThetaBound {
        value: best.max(1.0),
        raw: best,
        method: ThetaMethod::Grid,
        variant,
        solver_steps: 0,
        solver_converged: true,
        diagnosis: None,
    })
}

pub fn theta_upper_bound_dual_grid(
    lp: &StandardFormLP,
    cert: &BallCertificate,
    variant: NormVariant,
) -> Result<ThetaBound> {
    theta_upper_bound_grid(&dual_standard_form(lp)?, cert, variant)
}

fn grid_minimize(f: &dyn Fn(&[f64]) -> f64, k: usize, scale: f64) -> f64 {
    const PTS: usize = 21;
    const PATIENCE: usize = 4;
    // Each sweep uses a freshly rotated grid so the search cannot lock onto
    // a ridge that is oblique to the coordinate axes.
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e11);
    let mut best_val = f64::INFINITY;
    for width in [1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3].map(|w| w * scale) {
        let mut center = vec![0.0; k];
        let mut w = width;
        let mut center_val = f(&center);
        let mut fails = 0;
        for _ in 0..2000 {
            let g = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
            let frame = g.qr().q();
            let mut improved = false;
            let total = PTS.pow(k as u32);
            let mut t = vec![0.0; k];
            let mut step = vec![0.0; k];
            for idx in 0..total {
                let mut r = idx;
                for sj in step.iter_mut() {
                    let g = (r % PTS) as f64 / (PTS - 1) as f64;
                    *sj = w * (2.0 * g - 1.0);
                    r /= PTS;
                }
                for (i, ti) in t.iter_mut().enumerate() {
                    *ti = center[i] + (0..k).map(|j| frame[(i, j)] * step[j]).sum::<f64>();
                }
                let v = f(&t);
                if v < center_val {
                    center_val = v;
                    center.clone_from(&t);
                    improved = true;
                }
            }
            if improved {
                fails = 0;
            } else {
                fails += 1;
                if fails >= PATIENCE {
                    fails = 0;
                    w *= 0.5;
                    if w < 1e-12 * scale {
                        break;
                    }
                }
            }
        }
        best_val = best_val.min(center_val);
    }
    best_val
}

/// Largest sampled error ratio `Dist(x, ℱ_p)/Dist(x, ℝⁿ₊)` over points of
/// `V_p` within `eps` of the optimal set. Points inside the orthant count as 1.
///
/// Every sample is a genuine error ratio, so the result is a lower estimate
/// of `θ_p⋆` (for small `eps`).
pub fn brute_force_limiting_er(
    lp: &StandardFormLP,
    optimal: &OptimalSet,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    if lp.n() > 10 {
        return Err(Error::Unsupported(format!("oracle limited to n <= 10, got {}", lp.n())));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let faces = FaceEnumerator::from_sparse(lp.a(), lp.b())?;
    let basis = nullspace_basis(lp.a());
    if basis.ncols() == 0 {
        return Ok(1.0);
    }
    let samples = sample_near(optimal, &basis, eps, n_samples, seed);
    let ratio = samples
        .par_iter()
        .map(|x| {
            let neg: f64 = x.iter().map(|v| v.min(0.0).powi(2)).sum::<f64>().sqrt();
            if neg == 0.0 {
                return 1.0;
            }
            match faces.distance(x) {
                Some(d) => d / neg,
                None => f64::INFINITY,
            }
        })
        .reduce(|| 1.0, f64::max);
    Ok(ratio)
}

/// Dual counterpart: the primal oracle on the dual slack problem.
pub fn brute_force_limiting_er_dual(
    lp: &StandardFormLP,
    optimal_s: &OptimalSet,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    brute_force_limiting_er(&dual_standard_form(lp)?, optimal_s, eps, n_samples, seed)
}

/// Points `x⋆ + r·d` with `x⋆` in the set, `d` a random unit vector of the
/// column span of `basis`, and `r` uniform on `(0, eps]`.
pub(crate) fn sample_near(
    optimal: &OptimalSet,
    basis: &DMatrix<f64>,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, k) = (basis.nrows(), basis.ncols());
    (0..n_samples)
        .map(|_| {
            let u: f64 = rng.random();
            let base: Vec<f64> = match optimal {
                OptimalSet::Point { point } => point.clone(),
                OptimalSet::Segment { from, to } => {
                    from.iter().zip(to).map(|(a, b)| a + u * (b - a)).collect()
                }
                OptimalSet::Ray { origin, direction } => {
                    origin.iter().zip(direction).map(|(a, d)| a + u * d).collect()
                }
            };
            let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
            let mut d = vec![0.0; n];
            for (j, gj) in g.iter().enumerate() {
                for (i, di) in d.iter_mut().enumerate() {
                    *di += basis[(i, j)] * gj;
                }
            }
            let dn = norm(&d).max(f64::MIN_POSITIVE);
            let r = eps * (1.0 - rng.random::<f64>());
            base.iter().zip(&d).map(|(b, di)| b + r * di / dn).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::families::{gen_family, gen_lp_gamma};

    fn simple() -> (StandardFormLP, BallCertificate) {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 1.0]]).unwrap();
        let lp = StandardFormLP::new("seg", a, vec![2.0], vec![1.0, 0.0]).unwrap();
        (lp, BallCertificate::new(vec![2.0, 0.0], 0.0).unwrap())
    }

    #[test]
    fn segment_example_l1_is_two() {
        // min 2·v2 over v1 + v2 = 2α, v ≥ 1: attained at v = (1, 1), α = 1.
        let (lp, cert) = simple();
        let s = theta_upper_bound_primal(&lp, &cert, NormVariant::L1).unwrap();
        let g = theta_upper_bound_grid(&lp, &cert, NormVariant::L1).unwrap();
        assert!((s.value - 2.0).abs() < 1e-6, "{s:?}");
        assert!((g.value - 2.0).abs() < 1e-9, "{g:?}");
        assert!(s.value >= 2f64.sqrt());
    }

    #[test]
    fn segment_example_scaled_linf() {
        let (lp, cert) = simple();
        let s = theta_upper_bound_primal(&lp, &cert, NormVariant::ScaledLinf).unwrap();
        let g = theta_upper_bound_grid(&lp, &cert, NormVariant::ScaledLinf).unwrap();
        assert!((s.value - 2f64.sqrt()).abs() < 1e-6, "{s:?}");
        assert!((g.value - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn interior_center_gives_the_trivial_bound() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let lp = StandardFormLP::new("int", a, vec![3.0], vec![0.0, 0.0, 0.0]).unwrap();
        let cert = BallCertificate::new(vec![1.0, 1.5, 0.5], 0.0).unwrap();
        let s = theta_upper_bound_primal(&lp, &cert, NormVariant::L1).unwrap();
        // α = 1/min(x_a), v = α·x_a is feasible with objective 0.
        assert!(s.raw < 1e-6);
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn singleton_feasible_set_is_infinite() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let lp = StandardFormLP::new("pt", a, vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
        let cert = BallCertificate::new(vec![1.0, 0.0], 0.0).unwrap();
        let s = theta_upper_bound_primal(&lp, &cert, NormVariant::L1).unwrap();
        assert!(s.value.is_infinite() && s.diagnosis.is_some());
        let g = theta_upper_bound_grid(&lp, &cert, NormVariant::L1).unwrap();
        assert!(g.value.is_infinite());
    }

    #[test]
    fn solver_and_grid_agree_on_families() {
        for (k, g) in [(1, 0.3), (2, 0.2), (3, 0.3), (4, 0.2)] {
            let lp = gen_family(k, g).unwrap();
            let ko = lp.known_optimum().unwrap().clone();
            let cp = BallCertificate::enclosing(&ko.x).unwrap();
            let cd = BallCertificate::enclosing(&ko.s).unwrap();
            let sp = theta_upper_bound_primal(&lp, &cp, NormVariant::L1).unwrap();
            let gp = theta_upper_bound_grid(&lp, &cp, NormVariant::L1).unwrap();
            assert!((sp.value - gp.value).abs() <= 1e-5 * gp.value, "family {k}: {sp:?} {gp:?}");
            let sd = theta_upper_bound_dual(&lp, &cd, NormVariant::L1).unwrap();
            let gd = theta_upper_bound_dual_grid(&lp, &cd, NormVariant::L1).unwrap();
            assert!((sd.value - gd.value).abs() <= 1e-5 * gd.value, "family {k}: {sd:?} {gd:?}");
        }
    }

    #[test]
    fn oracle_is_below_bound() {
        let lp = gen_lp_gamma(std::f64::consts::FRAC_PI_4).unwrap();
        let ko = lp.known_optimum().unwrap().clone();
        let cd = BallCertificate::enclosing(&ko.s).unwrap();
        let up = theta_upper_bound_dual(&lp, &cd, NormVariant::L1).unwrap();
        let lo = brute_force_limiting_er_dual(&lp, &ko.s, 1e-4, 500, 3).unwrap();
        assert!(up.value.is_finite());
        assert!(lo <= up.value + 1e-9, "{lo} > {}", up.value);
    }

    #[test]
    fn oracle_on_interior_optimum_is_one() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, 1.0, 1.0]]).unwrap();
        let lp = StandardFormLP::new("int", a, vec![3.0], vec![0.0, 0.0, 0.0]).unwrap();
        let v = brute_force_limiting_er(&lp, &OptimalSet::point(vec![1.0, 1.0, 1.0]), 0.1, 200, 1).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn oracle_grows_as_family_two_degenerates() {
        let est = |g: f64| {
            let lp = gen_family(2, g).unwrap();
            let ko = lp.known_optimum().unwrap().clone();
            brute_force_limiting_er(&lp, &ko.x, 1e-6, 4000, 7).unwrap()
        };
        let (a, b) = (est(0.1), est(0.05));
        assert!(b / a > 1.6 && b / a < 2.4, "{a} {b}");
    }

    #[test]
    fn oracle_is_deterministic() {
        let lp = gen_family(3, 0.2).unwrap();
        let ko = lp.known_optimum().unwrap().clone();
        let a = brute_force_limiting_er(&lp, &ko.x, 1e-3, 300, 9).unwrap();
        let b = brute_force_limiting_er(&lp, &ko.x, 1e-3, 300, 9).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn enclosing_ball_of_segment() {
        let c = BallCertificate::enclosing(&OptimalSet::Segment {
            from: vec![0.0, 2.0],
            to: vec![2.0, 0.0],
        })
        .unwrap();
        assert_eq!(c.center, vec![1.0, 1.0]);
        assert!((c.radius - 2f64.sqrt()).abs() < 1e-15);
    }
}
