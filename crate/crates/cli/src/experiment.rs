//! Grid experiments: one row per instance, condition measures next to the
//! observed step count, plus fitted log-log slopes against `1/γ`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rpdhg::conditioning::{analyze, AnalyzeOptions};
use rpdhg::restart::Status;

use crate::error::{CliError, CliResult};
use crate::instance::{Family, LoadedInstance};
use crate::options::{PreconditionMode, StepSizeMode, TargetSpec};
use crate::pipeline::{run_solve, SolveOptions};

/// Environment variable limiting the worker pool.
pub const THREADS_ENV: &str = "RLP_THREADS";

pub const CSV_HEADER: [&str; 14] = [
    "instance_id",
    "gamma",
    "mu_p",
    "mu_d",
    "theta_p_upper",
    "theta_d_upper",
    "rel_dist_x",
    "rel_dist_s",
    "kappa",
    "N_bound",
    "T_bound",
    "actual_steps",
    "status",
    "wall_time",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub family: Family,
    #[serde(default)]
    pub gamma_grid: Vec<f64>,
    #[serde(default)]
    pub stepsize_mode: StepSizeMode,
    #[serde(default)]
    pub precondition_mode: PreconditionMode,
    #[serde(default)]
    pub target: TargetSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Directory of `.mps` files, for `mps_corpus`.
    #[serde(default)]
    pub corpus_dir: Option<PathBuf>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_stall_window")]
    pub stall_window: usize,
    /// Brute-force oracle samples per measure; 0 skips them.
    #[serde(default)]
    pub oracle_samples: usize,
}

fn default_max_steps() -> usize {
    SolveOptions::default().max_steps
}

fn default_stall_window() -> usize {
    SolveOptions::default().stall_window
}

impl ExperimentSpec {
    pub fn new(family: Family, gamma_grid: Vec<f64>) -> Self {
        ExperimentSpec {
            family,
            gamma_grid,
            stepsize_mode: StepSizeMode::Standard,
            precondition_mode: PreconditionMode::None,
            target: TargetSpec::default(),
            seed: 0,
            output_dir: None,
            corpus_dir: None,
            max_steps: default_max_steps(),
            stall_window: default_stall_window(),
            oracle_samples: 0,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if let Some(g) = self.gamma_grid.iter().find(|&&g| !self.family.gamma_in_domain(g)) {
            return Err(CliError::Input(format!("gamma {g} lies outside the domain of {}", self.family)));
        }
        if self.family == Family::MpsCorpus && self.corpus_dir.is_none() {
            return Err(CliError::Input("mps_corpus needs corpus_dir".into()));
        }
        if self.max_steps == 0 {
            return Err(CliError::Input("max_steps must be positive".into()));
        }
        Ok(())
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            stepsize: self.stepsize_mode,
            precondition: self.precondition_mode,
            target: self.target,
            max_steps: self.max_steps,
            stall_window: self.stall_window,
            ..SolveOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub instance_id: String,
    pub gamma: Option<f64>,
    pub mu_p: Option<f64>,
    pub mu_d: Option<f64>,
    pub theta_p_upper: Option<f64>,
    pub theta_d_upper: Option<f64>,
    pub rel_dist_x: Option<f64>,
    pub rel_dist_s: Option<f64>,
    pub kappa: Option<f64>,
    #[serde(rename = "N_bound")]
    pub n_bound: Option<f64>,
    #[serde(rename = "T_bound")]
    pub t_bound: Option<f64>,
    pub actual_steps: Option<usize>,
    pub status: String,
    pub wall_time: f64,
}

impl ExperimentRow {
    fn failed(instance_id: String, gamma: Option<f64>, why: String, wall_time: f64) -> Self {
        ExperimentRow {
            instance_id,
            gamma,
            mu_p: None,
            mu_d: None,
            theta_p_upper: None,
            theta_d_upper: None,
            rel_dist_x: None,
            rel_dist_s: None,
            kappa: None,
            n_bound: None,
            t_bound: None,
            actual_steps: None,
            status: format!("error: {why}"),
            wall_time,
        }
    }

    pub fn is_success(&self) -> bool {
        self.status == status_name(Status::OptimalTol)
    }
}

pub fn status_name(s: Status) -> String {
    match s {
        Status::OptimalTol => "optimal_tol",
        Status::StepLimit => "step_limit",
        Status::Stalled => "stalled",
    }
    .to_string()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub family: Family,
    pub rows: usize,
    pub failures: usize,
    pub stepsize_mode: StepSizeMode,
    pub precondition_mode: PreconditionMode,
    pub target: TargetSpec,
    pub seed: u64,
    /// Least-squares slope of `log actual_steps` against `log(1/γ)`.
    pub slope_actual_steps: Option<f64>,
    pub slope_t_bound: Option<f64>,
    /// Rows where `actual_steps > T_bound`; only checked for distance targets.
    pub bound_violations: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub summary: ExperimentSummary,
}

/// Slope of the least-squares line through `(x, y)`; `None` with fewer than
/// two distinct abscissae.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log value` against `log(1/γ)` over rows where both are usable.
pub fn log_log_slope(rows: &[ExperimentRow], value: impl Fn(&ExperimentRow) -> Option<f64>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.is_success())
        .filter_map(|r| {
            let g = r.gamma?;
            let v = value(r)?;
            (g > 0.0 && v > 0.0 && v.is_finite()).then(|| ((1.0 / g).ln(), v.ln()))
        })
        .collect();
    fit_slope(&pts)
}

enum Cell {
    Generated { family: Family, gamma: f64 },
    File(PathBuf),
}

fn cells(spec: &ExperimentSpec) -> CliResult<Vec<Cell>> {
    if spec.family != Family::MpsCorpus {
        return Ok(spec
            .gamma_grid
            .iter()
            .map(|&gamma| Cell::Generated {
                family: spec.family,
                gamma,
            })
            .collect());
    }
    let dir = spec.corpus_dir.as_ref().expect("validated");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("mps")))
        .collect();
    files.sort();
    Ok(files.into_iter().map(Cell::File).collect())
}

fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> ExperimentRow {
    let start = Instant::now();
    let (id, gamma, loaded) = match cell {
        Cell::Generated { family, gamma } => (
            format!("{family}_{gamma}"),
            Some(*gamma),
            LoadedInstance::from_family(*family, *gamma),
        ),
        Cell::File(p) => (
            p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            None,
            LoadedInstance::from_mps_file(p),
        ),
    };
    let inst = match loaded {
        Ok(i) => i,
        Err(e) => return ExperimentRow::failed(id, gamma, e.to_string(), start.elapsed().as_secs_f64()),
    };
    let out = match run_solve(&inst.lp, &spec.solve_options()) {
        Ok(o) => o,
        Err(e) => return ExperimentRow::failed(id, gamma, e.to_string(), start.elapsed().as_secs_f64()),
    };
    let mut row = ExperimentRow {
        actual_steps: Some(out.total_steps()),
        status: status_name(out.status()),
        ..ExperimentRow::failed(id, gamma, String::new(), 0.0)
    };
    let opts = AnalyzeOptions {
        eps: spec.target.tolerance().unwrap_or(1e-10),
        oracle_samples: spec.oracle_samples,
        seed: spec.seed,
        ..AnalyzeOptions::default()
    };
    match analyze(&out.solved, &opts) {
        Ok(r) => {
            let inputs = r.bound_inputs();
            row.mu_p = Some(r.mu_p);
            row.mu_d = Some(r.mu_d);
            row.theta_p_upper = Some(r.theta_p_upper);
            row.theta_d_upper = Some(r.theta_d_upper);
            row.rel_dist_x = Some(inputs.rel_dist_x());
            row.rel_dist_s = Some(inputs.rel_dist_s());
            row.kappa = Some(r.kappa);
            row.n_bound = Some(r.n_bound);
            row.t_bound = Some(r.t_bound.t);
        }
        Err(e) => row.status = format!("{} (analysis failed: {e})", row.status),
    }
    row.wall_time = start.elapsed().as_secs_f64();
    row
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs every cell in a worker pool; rows come back in spec order.
pub fn run_experiment(spec: &ExperimentSpec) -> CliResult<ExperimentOutput> {
    spec.validate()?;
    let cells = cells(spec)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<ExperimentRow> = pool.install(|| cells.par_iter().map(|c| run_cell(spec, c)).collect());
    let bound_violations = if spec.target.is_distance() {
        rows.iter()
            .filter(|r| match (r.actual_steps, r.t_bound) {
                (Some(k), Some(t)) => t.is_finite() && k as f64 > t,
                _ => false,
            })
            .map(|r| r.instance_id.clone())
            .collect()
    } else {
        Vec::new()
    };
    let summary = ExperimentSummary {
        family: spec.family,
        rows: rows.len(),
        failures: rows.iter().filter(|r| r.status.starts_with("error")).count(),
        stepsize_mode: spec.stepsize_mode,
        precondition_mode: spec.precondition_mode,
        target: spec.target,
        seed: spec.seed,
        slope_actual_steps: log_log_slope(&rows, |r| r.actual_steps.map(|k| k as f64)),
        slope_t_bound: log_log_slope(&rows, |r| r.t_bound),
        bound_violations,
    };
    Ok(ExperimentOutput { rows, summary })
}

/// CSV with the fixed header; written even when there are no rows.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::io("csv output", e))?;
    Ok(())
}

pub fn csv_string(rows: &[ExperimentRow]) -> CliResult<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
}

/// Writes `rows.csv` and `summary.json` into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> CliResult<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join("rows.csv");
    let json_path = dir.join("summary.json");
    let f = std::fs::File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    write_csv(&out.rows, f)?;
    let text = serde_json::to_string_pretty(&out.summary)?;
    std::fs::write(&json_path, text).map_err(|e| CliError::io(&json_path, e))?;
    Ok((csv_path, json_path))
}
