//! Condition measures of an LP instance and the iteration bounds built from them.
//!
//! The limiting error ratios are bracketed (sampled lower estimates, certified
//! upper bounds); sharpness is computed exactly on edges of a nondegenerate
//! optimal vertex and checked by sampling.

mod bounds;
mod dual;
mod faces;
mod sharpness;
mod theta;

pub use bounds::{
    assemble_bounds, iteration_bound_t, iteration_bound_t_hat, kappa, BoundInputs, Bounds,
};
pub use dual::dual_standard_form;
pub use faces::{extreme_rays, FaceEnumerator, MAX_ENUM_DIM};
pub use sharpness::{
    brute_force_sharpness, brute_force_sharpness_dual, dual_sharpness, edges_at_vertex,
    primal_sharpness, sharpness_singleton, support_basis, Edge, EdgeKind, DEFAULT_EPSILON_BAR,
};
pub use theta::{
    brute_force_limiting_er, brute_force_limiting_er_dual, theta_upper_bound_dual,
    theta_upper_bound_dual_grid, theta_upper_bound_grid, theta_upper_bound_primal,
    BallCertificate, NormVariant, ThetaBound, ThetaMethod,
};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dist;
use crate::model::{presolve_project_c, KnownOptimum, OptimalSet, StandardFormLP};
use crate::restart::{solve, RestartConfig, Status, Target};
use crate::tuning::standard_stepsizes;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub variant: NormVariant,
    pub epsilon_bar: f64,
    /// Target `ℰ_d` tolerance used for the `T` bound.
    pub eps: f64,
    /// Samples per brute-force oracle; 0 skips them.
    pub oracle_samples: usize,
    pub seed: u64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            variant: NormVariant::L1,
            epsilon_bar: DEFAULT_EPSILON_BAR,
            eps: 1e-10,
            oracle_samples: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumSource {
    /// Closed-form optimal sets attached to the instance.
    Attached,
    /// Basis read off a high-accuracy solve, then solved exactly.
    SolvedAndPolished,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// θ values are upper bounds from a norm relaxation of the ball-certificate program.
    pub theta: String,
    /// μ values are exact minima over the edges at the optimal vertex.
    pub mu: String,
    pub kappa: String,
    pub optimum: OptimumSource,
    /// Which `c` the distance `Dist(c, 𝒮⋆)` and `‖c‖` refer to.
    pub c_anchor: String,
}

/// Sampled brackets: `θ` from below, `μ` from above.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleBrackets {
    pub theta_p_lower: f64,
    pub theta_d_lower: f64,
    pub mu_p_upper: f64,
    pub mu_d_upper: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TBound {
    pub eps0: f64,
    pub eps: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "T_hat")]
    pub t_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub instance: String,
    pub theta_p_upper: f64,
    pub theta_d_upper: f64,
    pub mu_p: f64,
    pub mu_d: f64,
    pub kappa: f64,
    pub norm_q: f64,
    pub norm_c: f64,
    #[serde(rename = "dist0_Xstar")]
    pub dist0_xstar: f64,
    #[serde(rename = "distc_Sstar")]
    pub distc_sstar: f64,
    #[serde(rename = "N_bound")]
    pub n_bound: f64,
    #[serde(rename = "N_hat_bound")]
    pub n_hat_bound: f64,
    #[serde(rename = "D_bound")]
    pub d_bound: f64,
    #[serde(rename = "T_bound")]
    pub t_bound: TBound,
    pub theta_p_detail: ThetaBound,
    pub theta_d_detail: ThetaBound,
    pub provenance: Provenance,
    pub oracles: Option<OracleBrackets>,
}

impl ConditionReport {
    pub fn bound_inputs(&self) -> BoundInputs {
        BoundInputs {
            kappa: self.kappa,
            mu_p: self.mu_p,
            mu_d: self.mu_d,
            theta_p: self.theta_p_upper,
            theta_d: self.theta_d_upper,
            dist0_xstar: self.dist0_xstar,
            norm_q: self.norm_q,
            distc_sstar: self.distc_sstar,
            norm_c: self.norm_c,
        }
    }

    /// `T` for another target tolerance.
    pub fn t_bound_for(&self, eps: f64) -> Result<f64> {
        iteration_bound_t(
            self.n_bound,
            self.kappa,
            self.norm_c,
            self.norm_q,
            self.t_bound.eps0.max(eps),
            eps,
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Finds a nondegenerate optimal basis by solving, then recomputes the
/// vertex and its multipliers exactly from that basis.
pub fn polished_optimum(lp: &StandardFormLP) -> Result<KnownOptimum> {
    let steps = standard_stepsizes(lp)?;
    let cfg = RestartConfig::default()
        .with_target(Target::RelativeError(1e-10))
        .with_max_steps(5_000_000);
    let (sol, _) = solve(lp, &steps, &cfg)?;
    if sol.status != Status::OptimalTol {
        return Err(Error::Unsupported(format!(
            "high-accuracy solve ended with {:?}; no optimum to analyze",
            sol.status
        )));
    }
    let basis = support_basis(&sol.x);
    if basis.len() != lp.m() {
        return Err(Error::Unsupported(format!(
            "optimal support has {} columns for {} rows: degenerate or non-unique optimum",
            basis.len(),
            lp.m()
        )));
    }
    let a = lp.a().to_dmatrix();
    let bmat = a.select_columns(&basis);
    let lu = bmat.clone().lu();
    let xb = lu
        .solve(&DVector::from_column_slice(lp.b()))
        .ok_or_else(|| Error::Unsupported("optimal basis matrix is singular".into()))?;
    let cb = DVector::from_iterator(basis.len(), basis.iter().map(|&j| lp.c()[j]));
    let y = bmat
        .transpose()
        .lu()
        .solve(&cb)
        .ok_or_else(|| Error::Unsupported("optimal basis matrix is singular".into()))?;
    let mut x = vec![0.0; lp.n()];
    for (k, &j) in basis.iter().enumerate() {
        x[j] = xb[k];
    }
    let y: Vec<f64> = y.iter().cloned().collect();
    let s = crate::restart::dual_slack(&y, lp);
    let tol = 1e-9 * (1.0 + crate::linalg::norm(lp.c()));
    if xb.iter().any(|&v| v <= 0.0) || s.iter().any(|&v| v < -tol) {
        return Err(Error::Unsupported("polished basis is not optimal".into()));
    }
    let s: Vec<f64> = s.into_iter().map(|v| v.max(0.0)).collect();
    Ok(KnownOptimum {
        objective: crate::linalg::dot(lp.c(), &x),
        x: OptimalSet::point(x),
        s: OptimalSet::point(s),
        y,
    })
}

/// Full condition report of an instance.
pub fn analyze(lp: &StandardFormLP, opts: &AnalyzeOptions) -> Result<ConditionReport> {
    let mut lp = match lp.presolve_info() {
        Some(_) => lp.clone(),
        None => presolve_project_c(lp)?,
    };
    if lp.presolve_info().is_some_and(|p| p.all_feasible_optimal) {
        return Err(Error::DegenerateInstance(
            "objective lies in the row space: every feasible point is optimal".into(),
        ));
    }
    let norm_q = lp.norm_q()?;
    if !(norm_q > 0.0) {
        return Err(Error::DegenerateInstance("b = 0, so ‖q‖ = 0".into()));
    }
    let source = if lp.known_optimum().is_some() {
        OptimumSource::Attached
    } else {
        let ko = polished_optimum(&lp)?;
        lp = lp.with_known_optimum(ko);
        OptimumSource::SolvedAndPolished
    };
    let ko = lp.known_optimum().expect("attached above").clone();

    let cert_p = BallCertificate::enclosing(&ko.x)?;
    let cert_d = BallCertificate::enclosing(&ko.s)?;
    let theta_p = theta_upper_bound_primal(&lp, &cert_p, opts.variant)?;
    let theta_d = theta_upper_bound_dual(&lp, &cert_d, opts.variant)?;
    let mu_p = primal_sharpness(&lp, opts.epsilon_bar)?;
    let mu_d = dual_sharpness(&lp, opts.epsilon_bar)?;
    let spec = lp.spectral()?;
    let kap = kappa(spec);
    let norm_c = lp.norm_c();
    let dist0 = ko.x.distance(&vec![0.0; lp.n()]);
    let distc = ko.s.distance(lp.c());
    let inputs = BoundInputs {
        kappa: kap,
        mu_p,
        mu_d,
        theta_p: theta_p.value,
        theta_d: theta_d.value,
        dist0_xstar: dist0,
        norm_q,
        distc_sstar: distc,
        norm_c,
    };
    let (bounds, t_bound) = if theta_p.value.is_finite() && theta_d.value.is_finite() {
        let b = assemble_bounds(&inputs)?;
        let eps0 = dist0.max(distc).max(opts.eps);
        let t = iteration_bound_t(b.n, kap, norm_c, norm_q, eps0, opts.eps)?;
        let t_hat = iteration_bound_t_hat(b.n_hat, kap, mu_p, mu_d, norm_c, norm_q, eps0, opts.eps)?;
        (
            b,
            TBound {
                eps0,
                eps: opts.eps,
                t,
                t_hat,
            },
        )
    } else {
        let inf = f64::INFINITY;
        (
            Bounds {
                n: inf,
                n_hat: inf,
                d: assemble_bounds(&BoundInputs {
                    theta_p: 1.0,
                    theta_d: 1.0,
                    ..inputs
                })?
                .d,
            },
            TBound {
                eps0: dist0.max(distc),
                eps: opts.eps,
                t: inf,
                t_hat: inf,
            },
        )
    };

    let oracles = if opts.oracle_samples > 0 && lp.n() <= 10 {
        let k = opts.oracle_samples;
        Some(OracleBrackets {
            theta_p_lower: brute_force_limiting_er(&lp, &ko.x, 1e-6, k, opts.seed)?,
            theta_d_lower: brute_force_limiting_er_dual(&lp, &ko.s, 1e-6, k, opts.seed)?,
            mu_p_upper: brute_force_sharpness(&lp, &ko.x, k, opts.seed)?,
            mu_d_upper: brute_force_sharpness_dual(&lp, &ko.s, k, opts.seed)?,
            samples: k,
            seed: opts.seed,
        })
    } else {
        None
    };

    let variant = match opts.variant {
        NormVariant::L1 => "upper_bound_l1_relaxation",
        NormVariant::ScaledLinf => "upper_bound_scaled_linf_relaxation",
    };
    Ok(ConditionReport {
        instance: lp.name().to_string(),
        theta_p_upper: theta_p.value,
        theta_d_upper: theta_d.value,
        mu_p,
        mu_d,
        kappa: kap,
        norm_q,
        norm_c,
        dist0_xstar: dist0,
        distc_sstar: distc,
        n_bound: bounds.n,
        n_hat_bound: bounds.n_hat,
        d_bound: bounds.d,
        t_bound,
        theta_p_detail: theta_p,
        theta_d_detail: theta_d,
        provenance: Provenance {
            theta: variant.into(),
            mu: "exact_edge_enumeration".into(),
            kappa: if spec.exact { "exact_svd" } else { "iterative_estimate" }.into(),
            optimum: source,
            c_anchor: "objective_projected_onto_null_space".into(),
        },
        oracles,
    })
}

/// Distance between two clamped points, used when comparing reports.
pub fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    dist(&[a], &[b]) / a.abs().max(b.abs())
}
