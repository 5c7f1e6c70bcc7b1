//! Normalized duality gap, the β-restart rule and the restarted PDHG driver.

mod gap;
mod metrics;
mod solver;
mod trust_region;

pub use gap::{dense_m_matrix, gap_gradient, normalized_duality_gap, NormMode};
pub use metrics::{distance_to_optima, dual_slack, relative_error, relative_error_constant};
pub use solver::{
    beta_restart_check, report_json, solve, solve_from, RestartConfig, Solution, SolveStats,
    Status, StepObserver, Target,
};
pub use trust_region::{solve_trust_region, TrustRegionSubproblem};
