use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::gap::{checked_dense_m, dense_m_trust_region, diagonal_gap, gap_gradient, NormMode};
use super::metrics::{distance_to_optima, dual_slack, relative_error};
use crate::error::{Error, Result};
use crate::linalg::pos_part;
use crate::model::StandardFormLP;
use crate::pdhg::{pdhg_step_in_place, Iterate, RunningAverage, StepSizes, StepWorkspace};

/// Stopping target checked on the running average at every gap evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", content = "tol", rename_all = "snake_case")]
pub enum Target {
    RelativeError(f64),
    DistanceToOptima(f64),
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartConfig {
    pub beta: f64,
    pub gap_eval_period: usize,
    pub max_total_steps: usize,
    pub target: Target,
    pub norm_mode: NormMode,
    /// Steps without a restart or progress in the target metric before giving up.
    pub stall_window: usize,
    pub stall_tol: f64,
    /// A restart with `ρ` below this is treated as a saddle point.
    pub saddle_tol: f64,
}

impl Default for RestartConfig {
    fn default() -> Self {
        RestartConfig {
            beta: (-1.0f64).exp(),
            gap_eval_period: 64,
            max_total_steps: 10_000_000,
            target: Target::RelativeError(1e-4),
            norm_mode: NormMode::DiagonalN,
            stall_window: 100_000,
            stall_tol: 1e-12,
            saddle_tol: 1e-14,
        }
    }
}

impl RestartConfig {
    pub fn with_target(mut self, target: Target) -> Self {
        self.target = target;
        self
    }

    pub fn with_max_steps(mut self, steps: usize) -> Self {
        self.max_total_steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if self.gap_eval_period == 0 {
            return Err(Error::InvalidParameter("gap_eval_period must be positive".into()));
        }
        match self.target {
            Target::RelativeError(e) | Target::DistanceToOptima(e) if !(e > 0.0) => Err(
                Error::InvalidParameter(format!("target tolerance must be positive, got {e}")),
            ),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    OptimalTol,
    StepLimit,
    Stalled,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub status: Status,
}

impl Solution {
    pub fn iterate(&self) -> Iterate {
        Iterate::new(self.x.clone(), self.y.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub outer_restarts: usize,
    pub total_steps: usize,
    pub gap_at_restart: Vec<f64>,
    pub restart_steps: Vec<usize>,
    pub er_at_restart: Vec<f64>,
    pub ed_at_restart: Option<Vec<f64>>,
    pub er_history: Vec<(usize, f64)>,
    pub ed_history: Option<Vec<(usize, f64)>>,
    pub er_final: f64,
    pub ed_final: Option<f64>,
    /// Stopped because a restart gap fell below the saddle-point tolerance.
    pub numerical_saddle: bool,
    pub norm_mode: NormMode,
    pub wall_time: f64,
}

impl SolveStats {
    /// Stats without the wall clock, for reproducibility checks.
    pub fn without_time(&self) -> SolveStats {
        SolveStats {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

/// `rho_now ≤ beta · rho_prev`.
pub fn beta_restart_check(rho_now: f64, rho_prev: f64, beta: f64) -> bool {
    rho_now <= beta * rho_prev
}

enum GapEval {
    Diagonal,
    Dense(DMatrix<f64>),
}

impl GapEval {
    fn distance(&self, u: &Iterate, v: &Iterate, steps: &StepSizes) -> f64 {
        let d = u.sub(v);
        match self {
            GapEval::Diagonal => d.n_norm(steps),
            GapEval::Dense(mm) => {
                let flat: Vec<f64> = d.x.iter().chain(&d.y).cloned().collect();
                let v = nalgebra::DVector::from_column_slice(&flat);
                (v.transpose() * mm * &v)[(0, 0)].max(0.0).sqrt()
            }
        }
    }

    fn rho(&self, z: &Iterate, r: f64, lp: &StandardFormLP, steps: &StepSizes) -> Result<f64> {
        if r <= f64::MIN_POSITIVE {
            return Ok(0.0);
        }
        let g = gap_gradient(z, lp);
        match self {
            GapEval::Diagonal => diagonal_gap(g, z, r, steps),
            GapEval::Dense(mm) => {
                let mut lower: Vec<f64> = z.x.iter().map(|x| -x).collect();
                lower.extend(std::iter::repeat_n(f64::NEG_INFINITY, lp.m()));
                Ok(dense_m_trust_region(mm, &g, &lower, r)?.1 / r)
            }
        }
    }
}

/// Callback receiving `(step, z before, z after)` for every PDHG step.
pub type StepObserver<'a> = &'a mut dyn FnMut(usize, &Iterate, &Iterate);

/// Restarted PDHG from `z = (0, 0)`.
pub fn solve(lp: &StandardFormLP, steps: &StepSizes, cfg: &RestartConfig) -> Result<(Solution, SolveStats)> {
    solve_from(lp, steps, cfg, Iterate::zeros(lp.n(), lp.m()), None)
}

/// Restarted PDHG from `z0`, optionally reporting every step to `observer`.
///
/// The first outer loop restarts after one step. Afterwards the normalized
/// duality gap of the running average is evaluated every `gap_eval_period`
/// inner steps, and the method restarts at the average when the gap has
/// shrunk by `beta` since the previous restart.
pub fn solve_from(
    lp: &StandardFormLP,
    steps: &StepSizes,
    cfg: &RestartConfig,
    z0: Iterate,
    mut observer: Option<StepObserver<'_>>,
) -> Result<(Solution, SolveStats)> {
    let start = Instant::now();
    cfg.validate()?;
    if z0.x.len() != lp.n() || z0.y.len() != lp.m() {
        return Err(Error::DimensionMismatch {
            expected: lp.n() + lp.m(),
            got: z0.x.len() + z0.y.len(),
        });
    }
    let smax = lp.spectral()?.sigma_max;
    if steps.product_ratio(smax) > 1.0 + 1e-12 {
        return Err(Error::ContractViolation(format!(
            "tau*sigma*sigma_max^2 = {} exceeds 1",
            steps.product_ratio(smax)
        )));
    }
    let track_ed = lp.known_optimum().is_some();
    if matches!(cfg.target, Target::DistanceToOptima(_)) && !track_ed {
        return Err(Error::UnsupportedMetric(
            "distance-to-optima target needs an attached optimal set".into(),
        ));
    }
    let eval = match cfg.norm_mode {
        NormMode::DiagonalN => GapEval::Diagonal,
        NormMode::DenseM => GapEval::Dense(checked_dense_m(lp, steps)?),
    };

    let (n, m) = (lp.n(), lp.m());
    let mut z = Iterate::new(pos_part(&z0.x), z0.y);
    let mut z_restart = z.clone();
    let mut avg = RunningAverage::new(n, m);
    let mut ws = StepWorkspace::new(n, m);
    let mut prev = observer.as_ref().map(|_| z.clone());

    let mut stats = SolveStats {
        outer_restarts: 0,
        total_steps: 0,
        gap_at_restart: Vec::new(),
        restart_steps: Vec::new(),
        er_at_restart: Vec::new(),
        ed_at_restart: track_ed.then(Vec::new),
        er_history: Vec::new(),
        ed_history: track_ed.then(Vec::new),
        er_final: f64::NAN,
        ed_final: None,
        numerical_saddle: false,
        norm_mode: cfg.norm_mode,
        wall_time: 0.0,
    };
    let mut rho_prev = f64::INFINITY;
    let mut best_progress = f64::INFINITY;
    let mut best_progress_step = 0usize;
    let mut last_eval = z.clone();
    let mut last_er = relative_error(&z, lp);
    let mut last_ed = if track_ed { Some(distance_to_optima(&z, lp)?) } else { None };

    let status = loop {
        if stats.total_steps >= cfg.max_total_steps {
            break Status::StepLimit;
        }
        if let Some(p) = prev.as_mut() {
            p.clone_from(&z);
        }
        pdhg_step_in_place(&mut z, lp.a(), lp.b(), lp.c(), steps, &mut ws);
        stats.total_steps += 1;
        if let (Some(obs), Some(p)) = (observer.as_mut(), prev.as_ref()) {
            obs(stats.total_steps, p, &z);
        }
        avg.push(&z);

        let first = stats.outer_restarts == 0;
        let at_limit = stats.total_steps == cfg.max_total_steps;
        if !(first || avg.count % cfg.gap_eval_period == 0 || at_limit) {
            continue;
        }
        if !avg.mean.is_finite() {
            return Err(Error::Diverged { step: stats.total_steps });
        }
        let zbar = &avg.mean;
        let r = eval.distance(zbar, &z_restart, steps);
        let rho = eval.rho(zbar, r, lp, steps)?;
        let er = relative_error(zbar, lp);
        let ed = if track_ed { Some(distance_to_optima(zbar, lp)?) } else { None };
        stats.er_history.push((stats.total_steps, er));
        if let (Some(h), Some(e)) = (stats.ed_history.as_mut(), ed) {
            h.push((stats.total_steps, e));
        }
        last_eval.clone_from(zbar);
        last_er = er;
        last_ed = ed;

        let restart = first || beta_restart_check(rho, rho_prev, cfg.beta);
        if restart {
            debug_assert!(first || rho <= cfg.beta * rho_prev);
            stats.outer_restarts += 1;
            stats.gap_at_restart.push(rho);
            stats.restart_steps.push(stats.total_steps);
            stats.er_at_restart.push(er);
            if let (Some(h), Some(e)) = (stats.ed_at_restart.as_mut(), ed) {
                h.push(e);
            }
            z_restart.clone_from(zbar);
            z.clone_from(zbar);
            avg = RunningAverage::new(n, m);
            rho_prev = rho;
        }

        let met = match cfg.target {
            Target::RelativeError(eps) => er <= eps,
            Target::DistanceToOptima(eps) => ed.is_some_and(|e| e <= eps),
            Target::None => false,
        };
        if met {
            break Status::OptimalTol;
        }
        if restart && rho < cfg.saddle_tol {
            stats.numerical_saddle = true;
            break Status::OptimalTol;
        }
        // progress is measured in the metric being targeted
        let progress = match (cfg.target, ed) {
            (Target::DistanceToOptima(_), Some(e)) => e,
            _ => er,
        };
        if restart || progress < best_progress * (1.0 - cfg.stall_tol) {
            best_progress = best_progress.min(progress);
            best_progress_step = stats.total_steps;
        } else if stats.total_steps - best_progress_step >= cfg.stall_window {
            break Status::Stalled;
        }
    };

    stats.er_final = last_er;
    stats.ed_final = last_ed;
    stats.wall_time = start.elapsed().as_secs_f64();
    let x = pos_part(&last_eval.x);
    let s = dual_slack(&last_eval.y, lp);
    let sol = Solution {
        objective_primal: lp.objective(&x),
        objective_dual: lp.dual_objective(&last_eval.y),
        x,
        y: last_eval.y,
        s,
        status,
    };
    Ok((sol, stats))
}

/// `{status, objective_primal, objective_dual, total_steps, outer_restarts,
/// gap_at_restart, er_final, ed_final?, wall_time}`.
pub fn report_json(sol: &Solution, stats: &SolveStats) -> serde_json::Value {
    let mut v = json!({
        "status": sol.status,
        "objective_primal": sol.objective_primal,
        "objective_dual": sol.objective_dual,
        "total_steps": stats.total_steps,
        "outer_restarts": stats.outer_restarts,
        "gap_at_restart": stats.gap_at_restart,
        "er_final": stats.er_final,
        "wall_time": stats.wall_time,
    });
    if let Some(ed) = stats.ed_final {
        v["ed_final"] = json!(ed);
    }
    v
}
