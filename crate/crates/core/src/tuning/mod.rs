//! Step-size rules and row preconditioners.

mod precondition;

pub use precondition::{
    diagonal_preconditioner, full_row_preconditioner, PreconditionKind, PreconditionedInstance,
    DEFAULT_DIAGONAL_ROUNDS,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::StandardFormLP;
use crate::pdhg::{Iterate, StepSizes};
use crate::restart::{relative_error, solve_from, RestartConfig, Target};

pub const DEFAULT_PROBE_ITERS: usize = 5000;
pub const DEFAULT_EXPONENTS: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
/// Base of the learned step-size ratio `τ/σ = 40^{2ℓ}`.
pub const RATIO_BASE: f64 = 40.0;

/// `(‖c‖, ‖q‖)` with the projected objective when presolve information exists.
fn objective_and_q_norms(lp: &StandardFormLP) -> Result<(f64, f64)> {
    let nc = match lp.presolve_info() {
        Some(p) => p.norm_c_parallel,
        None => lp.norm_c(),
    };
    let nq = lp.norm_q()?;
    if !(nc > 0.0) {
        return Err(Error::DegenerateInstance(
            "‖c‖ = 0: every feasible point is optimal".into(),
        ));
    }
    if !(nq > 0.0) {
        return Err(Error::DegenerateInstance("‖q‖ = 0: b = 0".into()));
    }
    Ok((nc, nq))
}

/// `τ = ‖q‖/(2κ‖c‖)`, `σ = ‖c‖/(2‖q‖λ_max λ_min)`.
pub fn standard_stepsizes(lp: &StandardFormLP) -> Result<StepSizes> {
    ratio_stepsizes(lp, 1.0)
}

/// Standard rule with the primal/dual balance shifted by `μ_d/μ_p`.
pub fn sharpness_stepsizes(lp: &StandardFormLP, mu_p: f64, mu_d: f64) -> Result<StepSizes> {
    for (name, mu) in [("mu_p", mu_p), ("mu_d", mu_d)] {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::InvalidParameter(format!("{name} must lie in (0, 1], got {mu}")));
        }
    }
    ratio_stepsizes(lp, mu_d / mu_p)
}

fn ratio_stepsizes(lp: &StandardFormLP, weight: f64) -> Result<StepSizes> {
    let (nc, nq) = objective_and_q_norms(lp)?;
    let spec = lp.spectral()?;
    let lmax = spec.sigma_max_safe;
    let lmin = spec.sigma_min_pos;
    let kappa = lmax / lmin;
    let tau = weight * nq / (2.0 * kappa * nc);
    let sigma = nc / (2.0 * weight * nq * lmax * lmin);
    StepSizes::new(tau, sigma, spec.sigma_max)
}

/// One probed step-size pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizeCandidate {
    pub ell: f64,
    pub tau: f64,
    pub sigma: f64,
    /// `ℰ_r` after the probe; infinite when the probe failed.
    pub probe_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnedStepSize {
    pub steps: StepSizes,
    pub ell: f64,
    pub candidates: Vec<StepSizeCandidate>,
    /// Total PDHG steps spent on probes.
    pub probe_steps: usize,
    pub warning: Option<String>,
}

/// `(40^ℓ/(2λ_max), 40^{-ℓ}/(2λ_max))`.
pub fn candidate_pair(ell: f64, sigma_max: f64) -> (f64, f64) {
    let r = RATIO_BASE.powf(ell);
    (r / (2.0 * sigma_max), 1.0 / (r * 2.0 * sigma_max))
}

/// Probes each exponent with `probe_iters` restarted steps from the origin
/// and keeps the pair with the smallest final relative error.
pub fn learn_stepsize(
    lp: &StandardFormLP,
    probe_iters: usize,
    exponents: &[f64],
    cfg: &RestartConfig,
) -> Result<LearnedStepSize> {
    if exponents.is_empty() || probe_iters == 0 {
        return Err(Error::InvalidParameter("learn_stepsize needs exponents and a budget".into()));
    }
    let spec = lp.spectral()?;
    let lmax = spec.sigma_max_safe;
    let probe_cfg = RestartConfig {
        target: Target::None,
        max_total_steps: probe_iters,
        stall_window: usize::MAX,
        saddle_tol: 0.0,
        ..cfg.clone()
    };
    let z0 = Iterate::zeros(lp.n(), lp.m());
    let probes: Vec<(StepSizeCandidate, usize)> = exponents
        .par_iter()
        .map(|&ell| {
            let (tau, sigma) = candidate_pair(ell, lmax);
            let steps = StepSizes::new(tau, sigma, spec.sigma_max);
            let run = steps.and_then(|s| solve_from(lp, &s, &probe_cfg, z0.clone(), None));
            let (probe_error, used) = match run {
                Ok((sol, stats)) => {
                    let e = relative_error(&sol.iterate(), lp);
                    (if e.is_finite() { e } else { f64::INFINITY }, stats.total_steps)
                }
                Err(Error::Diverged { step }) => (f64::INFINITY, step),
                Err(_) => (f64::INFINITY, 0),
            };
            (
                StepSizeCandidate {
                    ell,
                    tau,
                    sigma,
                    probe_error,
                },
                used,
            )
        })
        .collect();
    let probe_steps = probes.iter().map(|p| p.1).sum();
    let candidates: Vec<StepSizeCandidate> = probes.into_iter().map(|p| p.0).collect();

    let best = candidates
        .iter()
        .map(|c| c.probe_error)
        .fold(f64::INFINITY, f64::min);
    let (chosen, warning) = if best.is_finite() {
        let tied = |c: &&StepSizeCandidate| c.probe_error <= best * (1.0 + 1e-9) + 1e-15;
        let pick = candidates
            .iter()
            .filter(tied)
            .min_by(|a, b| a.ell.abs().total_cmp(&b.ell.abs()))
            .expect("best candidate exists");
        (pick.ell, None)
    } else {
        (0.0, Some("every probe diverged; using ell = 0".to_string()))
    };
    let (tau, sigma) = candidate_pair(chosen, lmax);
    Ok(LearnedStepSize {
        steps: StepSizes::new(tau, sigma, spec.sigma_max)?,
        ell: chosen,
        candidates,
        probe_steps,
        warning,
    })
}
