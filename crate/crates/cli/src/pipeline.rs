//! Presolve, precondition, pick step sizes, solve and map the answer back.

use serde::Serialize;

use rpdhg::model::presolve_project_c;
use rpdhg::restart::{solve, RestartConfig, Solution, SolveStats, Status};
use rpdhg::tuning::{
    diagonal_preconditioner, full_row_preconditioner, learn_stepsize, sharpness_stepsizes, standard_stepsizes,
    PreconditionedInstance, StepSizeCandidate, DEFAULT_DIAGONAL_ROUNDS, DEFAULT_EXPONENTS, DEFAULT_PROBE_ITERS,
};
use rpdhg::{StandardFormLP, StepSizes};

use crate::error::{CliError, CliResult};
use crate::options::{PreconditionMode, StepSizeMode, TargetSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub stepsize: StepSizeMode,
    pub precondition: PreconditionMode,
    pub target: TargetSpec,
    pub max_steps: usize,
    pub probe_iters: usize,
    pub stall_window: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        let cfg = RestartConfig::default();
        SolveOptions {
            stepsize: StepSizeMode::Standard,
            precondition: PreconditionMode::None,
            target: TargetSpec::default(),
            max_steps: cfg.max_total_steps,
            probe_iters: DEFAULT_PROBE_ITERS,
            stall_window: cfg.stall_window,
        }
    }
}

impl SolveOptions {
    pub fn restart_config(&self) -> RestartConfig {
        RestartConfig {
            target: self.target.0,
            max_total_steps: self.max_steps,
            stall_window: self.stall_window,
            ..RestartConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepSizeRecord {
    pub mode: String,
    pub tau: f64,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ell: Option<f64>,
    /// Steps charged to probing, `5 × probe_iters` for the learned rule.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<StepSizeCandidate>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreconditionRecord {
    pub mode: PreconditionMode,
    pub kappa_before: f64,
    pub kappa_after: f64,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub instance: String,
    /// Solution of the instance actually iterated on (presolved, preconditioned).
    pub solution: Solution,
    pub stats: SolveStats,
    pub stepsize: StepSizeRecord,
    pub precondition: PreconditionRecord,
    /// Standard-form primal point.
    pub x: Vec<f64>,
    /// Dual point of the standard-form instance before presolve and preconditioning.
    pub y: Vec<f64>,
    /// Standard-form objective, offset included.
    pub objective: f64,
    pub solved: StandardFormLP,
}

impl SolveOutcome {
    /// PDHG steps including the learned rule's probes.
    pub fn total_steps(&self) -> usize {
        self.stats.total_steps + self.stepsize.probe_steps.unwrap_or(0)
    }

    pub fn status(&self) -> Status {
        self.solution.status
    }
}

pub fn precondition(lp: &StandardFormLP, mode: PreconditionMode) -> CliResult<PreconditionedInstance> {
    Ok(match mode {
        PreconditionMode::None => PreconditionedInstance::identity(lp)?,
        PreconditionMode::Complete => full_row_preconditioner(lp)?,
        PreconditionMode::Diagonal => diagonal_preconditioner(lp, DEFAULT_DIAGONAL_ROUNDS)?,
    })
}

pub fn select_stepsizes(lp: &StandardFormLP, opts: &SolveOptions) -> CliResult<(StepSizes, StepSizeRecord)> {
    let record = |steps: &StepSizes| StepSizeRecord {
        mode: opts.stepsize.to_string(),
        tau: steps.tau,
        sigma: steps.sigma,
        ell: None,
        probe_budget: None,
        probe_steps: None,
        candidates: None,
        warning: None,
    };
    Ok(match opts.stepsize {
        StepSizeMode::Standard => {
            let s = standard_stepsizes(lp)?;
            (s, record(&s))
        }
        StepSizeMode::Sharpness { mu_p, mu_d } => {
            let s = sharpness_stepsizes(lp, mu_p, mu_d)?;
            (s, record(&s))
        }
        StepSizeMode::Learn => {
            let learned = learn_stepsize(lp, opts.probe_iters, &DEFAULT_EXPONENTS, &opts.restart_config())?;
            let mut r = record(&learned.steps);
            r.ell = Some(learned.ell);
            r.probe_budget = Some(DEFAULT_EXPONENTS.len() * opts.probe_iters);
            r.probe_steps = Some(learned.probe_steps);
            r.candidates = Some(learned.candidates);
            r.warning = learned.warning;
            (learned.steps, r)
        }
    })
}

pub fn run_solve(lp: &StandardFormLP, opts: &SolveOptions) -> CliResult<SolveOutcome> {
    if opts.target.is_distance() && lp.known_optimum().is_none() {
        return Err(CliError::Input(
            "an ed: target needs an instance with a known optimal set; use er: instead".into(),
        ));
    }
    let presolved = match lp.presolve_info() {
        Some(_) => lp.clone(),
        None => presolve_project_c(lp)?,
    };
    let prec = precondition(&presolved, opts.precondition)?;
    let (steps, stepsize) = select_stepsizes(&prec.lp, opts)?;
    let (solution, stats) = solve(&prec.lp, &steps, &opts.restart_config())?;
    let y = presolved.recover_y(&prec.back_map_y(&prec.lp.recover_y(&solution.y)));
    let objective = prec.lp.objective(&solution.x);
    Ok(SolveOutcome {
        instance: lp.name().to_string(),
        x: solution.x.clone(),
        y,
        objective,
        stepsize,
        precondition: PreconditionRecord {
            mode: opts.precondition,
            kappa_before: prec.kappa_before,
            kappa_after: prec.kappa_after,
        },
        solution,
        stats,
        solved: prec.lp,
    })
}
