use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rpdhg::conditioning::{analyze, AnalyzeOptions, ConditionReport, NormVariant};
use rpdhg::model::presolve_project_c;
use rpdhg::restart::{report_json, Status};
use rpdhg::tuning::{PreconditionKind, DEFAULT_PROBE_ITERS};

use crate::error::{CliError, CliResult};
use crate::experiment::{csv_string, run_experiment, status_name, write_outputs, ExperimentSpec};
use crate::instance::{Family, LoadedInstance};
use crate::options::{OutputFormat, PreconditionMode, StepSizeMode, TargetSpec};
use crate::pipeline::{precondition, run_solve, SolveOptions, SolveOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rpdhg", version, about = "Restarted PDHG for linear programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an MPS file or a generated instance.
    Solve(SolveArgs),
    /// Compute condition measures and iteration bounds.
    Analyze(AnalyzeArgs),
    /// Run a gamma grid and write one CSV row per instance.
    Experiment(ExperimentArgs),
    /// Write the preconditioned instance.
    Precondition(PreconditionArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// MPS file (free format).
    pub path: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<Family>,
    #[arg(long)]
    pub gamma: Option<f64>,
}

impl InstanceArgs {
    fn load(&self) -> CliResult<LoadedInstance> {
        LoadedInstance::resolve(self.path.as_ref(), self.family, self.gamma)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// `er:<tol>` or `ed:<tol>`.
    #[arg(long, default_value = "er:1e-4")]
    pub target: TargetSpec,
    /// `standard`, `learn` or `sharpness:<mu_p>,<mu_d>`.
    #[arg(long, default_value = "standard")]
    pub stepsize: StepSizeMode,
    #[arg(long, default_value = "none")]
    pub precondition: PreconditionMode,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_PROBE_ITERS)]
    pub probe_iters: usize,
    #[arg(long, default_value = "json")]
    pub format: OutputFormat,
    /// Directory for `<name>.solution.json` and `<name>.stats.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Target tolerance for the iteration bound.
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub oracle_samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Norm of the relaxation: `l1` or `linf`.
    #[arg(long, default_value = "l1")]
    pub norm: String,
    #[arg(long, default_value = "json")]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON experiment description; other flags override its fields.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<Family>,
    /// Comma separated, e.g. `1,0.3,0.1`.
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub stepsize: Option<StepSizeMode>,
    #[arg(long)]
    pub precondition: Option<PreconditionMode>,
    #[arg(long)]
    pub target: Option<TargetSpec>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub corpus_dir: Option<PathBuf>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct PreconditionArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value = "complete")]
    pub precondition: PreconditionMode,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { so.write_all(b"\n") })
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}

fn write_json(path: &PathBuf, v: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(v)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn stats_json(out: &SolveOutcome, target: &TargetSpec) -> serde_json::Value {
    let mut v = report_json(&out.solution, &out.stats);
    v["instance"] = json!(out.instance);
    v["target"] = json!(target.to_string());
    v["total_steps_with_probes"] = json!(out.total_steps());
    v["stepsize"] = serde_json::to_value(&out.stepsize).expect("plain data");
    v["precondition"] = serde_json::to_value(&out.precondition).expect("plain data");
    v["restart_steps"] = json!(out.stats.restart_steps);
    v
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult<i32> {
    let inst = args.instance.load()?;
    let opts = SolveOptions {
        stepsize: args.stepsize,
        precondition: args.precondition,
        target: args.target,
        max_steps: args.max_steps.unwrap_or(SolveOptions::default().max_steps),
        probe_iters: args.probe_iters,
        ..SolveOptions::default()
    };
    let out = run_solve(&inst.lp, &opts)?;
    let mut solution = json!({
        "instance": out.instance,
        "status": out.status(),
        "objective": out.objective,
        "x": out.x,
        "y": out.y,
        "s": out.solution.s,
    });
    if let Some((_, map)) = &inst.original {
        solution["x_original"] = json!(map.recover_x(&out.x));
        solution["objective_original"] = json!(map.original_objective(out.objective));
    }
    let stats = stats_json(&out, &args.target);
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        write_json(&dir.join(format!("{}.solution.json", out.instance)), &solution)?;
        write_json(&dir.join(format!("{}.stats.json", out.instance)), &stats)?;
    }
    let text = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({"solution": solution, "stats": stats}))?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["instance", "status", "objective", "total_steps", "er_final", "ed_final", "wall_time"])?;
            let ed = out.stats.ed_final.map(|e| e.to_string()).unwrap_or_default();
            w.write_record([
                out.instance.clone(),
                status_name(out.status()),
                solution
                    .get("objective_original")
                    .and_then(|v| v.as_f64())
                    .unwrap_or(out.objective)
                    .to_string(),
                out.total_steps().to_string(),
                out.stats.er_final.to_string(),
                ed,
                out.stats.wall_time.to_string(),
            ])?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).expect("utf-8")
        }
    };
    emit(&text, None)?;
    Ok(match out.status() {
        Status::OptimalTol => EXIT_OK,
        Status::StepLimit | Status::Stalled => EXIT_BUDGET,
    })
}

pub fn analyze_report(args: &AnalyzeArgs) -> CliResult<ConditionReport> {
    let inst = args.instance.load()?;
    let variant = match args.norm.as_str() {
        "l1" => NormVariant::L1,
        "linf" => NormVariant::ScaledLinf,
        other => return Err(CliError::Input(format!("unknown norm `{other}` (expected l1 or linf)"))),
    };
    let opts = AnalyzeOptions {
        variant,
        eps: args.eps,
        oracle_samples: args.oracle_samples,
        seed: args.seed,
        ..AnalyzeOptions::default()
    };
    Ok(analyze(&inst.lp, &opts)?)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<i32> {
    let r = analyze_report(args)?;
    let text = match args.format {
        OutputFormat::Json => serde_json::to_string_pretty(&r.to_json())?,
        OutputFormat::Csv => {
            let inputs = r.bound_inputs();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "instance", "mu_p", "mu_d", "theta_p_upper", "theta_d_upper", "rel_dist_x", "rel_dist_s", "kappa",
                "N_bound", "N_hat_bound", "D_bound", "T_bound",
            ])?;
            let vals = [
                r.mu_p,
                r.mu_d,
                r.theta_p_upper,
                r.theta_d_upper,
                inputs.rel_dist_x(),
                inputs.rel_dist_s(),
                r.kappa,
                r.n_bound,
                r.n_hat_bound,
                r.d_bound,
                r.t_bound.t,
            ];
            let mut rec = vec![r.instance.clone()];
            rec.extend(vals.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).expect("utf-8")
        }
    };
    emit(&text, args.out.as_ref())?;
    Ok(EXIT_OK)
}

pub fn experiment_spec(args: &ExperimentArgs) -> CliResult<ExperimentSpec> {
    let mut spec = match &args.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str(&text)?
        }
        None => {
            let family = args
                .family
                .ok_or_else(|| CliError::Input("experiment needs --spec or --family".into()))?;
            ExperimentSpec::new(family, Vec::new())
        }
    };
    if let Some(f) = args.family {
        spec.family = f;
    }
    if let Some(g) = &args.gamma_grid {
        spec.gamma_grid.clone_from(g);
    }
    if let Some(s) = args.stepsize {
        spec.stepsize_mode = s;
    }
    if let Some(p) = args.precondition {
        spec.precondition_mode = p;
    }
    if let Some(t) = args.target {
        spec.target = t;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(d) = &args.corpus_dir {
        spec.corpus_dir = Some(d.clone());
    }
    if let Some(m) = args.max_steps {
        spec.max_steps = m;
    }
    if let Some(d) = &args.out_dir {
        spec.output_dir = Some(d.clone());
    }
    Ok(spec)
}

pub fn cmd_experiment(args: &ExperimentArgs) -> CliResult<i32> {
    let spec = experiment_spec(args)?;
    let out = run_experiment(&spec)?;
    if let Some(dir) = &spec.output_dir {
        write_outputs(&out, dir)?;
    }
    let text = match args.format {
        OutputFormat::Csv => csv_string(&out.rows)?,
        OutputFormat::Json => serde_json::to_string_pretty(&json!({"rows": out.rows, "summary": out.summary}))?,
    };
    emit(&text, None)?;
    Ok(EXIT_OK)
}

pub fn cmd_precondition(args: &PreconditionArgs) -> CliResult<i32> {
    let inst = args.instance.load()?;
    let presolved = presolve_project_c(&inst.lp)?;
    let prec = precondition(&presolved, args.precondition)?;
    let mut v = json!({
        "instance": inst.lp.name(),
        "mode": args.precondition,
        "kappa_before": prec.kappa_before,
        "kappa_after": prec.kappa_after,
        "lp": prec.lp.to_json(),
    });
    if let PreconditionKind::Diagonal { weights } = &prec.kind {
        v["weights"] = json!(weights);
    }
    emit(&serde_json::to_string_pretty(&v)?, args.out.as_ref())?;
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Precondition(a) => cmd_precondition(a),
    }
}

/// Exit code of a full run; errors go to stderr.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}
