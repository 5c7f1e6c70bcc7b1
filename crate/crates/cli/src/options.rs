use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use rpdhg::restart::Target;

use crate::error::{CliError, CliResult};

/// `er:<tol>` or `ed:<tol>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TargetSpec(pub Target);

impl TryFrom<String> for TargetSpec {
    type Error = CliError;

    fn try_from(s: String) -> CliResult<Self> {
        s.parse()
    }
}

impl From<TargetSpec> for String {
    fn from(t: TargetSpec) -> String {
        t.to_string()
    }
}

impl TargetSpec {
    pub fn tolerance(&self) -> Option<f64> {
        match self.0 {
            Target::RelativeError(e) | Target::DistanceToOptima(e) => Some(e),
            Target::None => None,
        }
    }

    pub fn is_distance(&self) -> bool {
        matches!(self.0, Target::DistanceToOptima(_))
    }
}

impl Default for TargetSpec {
    fn default() -> Self {
        TargetSpec(Target::RelativeError(1e-4))
    }
}

impl FromStr for TargetSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let (metric, tol) = s
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("target `{s}` must look like er:1e-4 or ed:1e-10")))?;
        let tol: f64 = tol
            .parse()
            .map_err(|_| CliError::Input(format!("bad target tolerance `{tol}`")))?;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Input(format!("target tolerance must be positive, got {tol}")));
        }
        match metric {
            "er" => Ok(TargetSpec(Target::RelativeError(tol))),
            "ed" => Ok(TargetSpec(Target::DistanceToOptima(tol))),
            other => Err(CliError::Input(format!("unknown target metric `{other}` (expected er or ed)"))),
        }
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Target::RelativeError(e) => write!(f, "er:{e:e}"),
            Target::DistanceToOptima(e) => write!(f, "ed:{e:e}"),
            Target::None => f.write_str("none"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StepSizeMode {
    #[default]
    Standard,
    Sharpness {
        mu_p: f64,
        mu_d: f64,
    },
    Learn,
}

impl TryFrom<String> for StepSizeMode {
    type Error = CliError;

    fn try_from(s: String) -> CliResult<Self> {
        s.parse()
    }
}

impl From<StepSizeMode> for String {
    fn from(m: StepSizeMode) -> String {
        m.to_string()
    }
}

impl FromStr for StepSizeMode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "standard" => Ok(StepSizeMode::Standard),
            "learn" => Ok(StepSizeMode::Learn),
            _ => {
                let rest = s.strip_prefix("sharpness:").ok_or_else(|| {
                    CliError::Input(format!(
                        "unknown step-size mode `{s}` (expected standard, learn or sharpness:<mu_p>,<mu_d>)"
                    ))
                })?;
                let (p, d) = rest
                    .split_once(',')
                    .ok_or_else(|| CliError::Input(format!("sharpness mode needs two values, got `{rest}`")))?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Input(format!("bad sharpness value `{v}`")))
                };
                Ok(StepSizeMode::Sharpness {
                    mu_p: parse(p)?,
                    mu_d: parse(d)?,
                })
            }
        }
    }
}

impl fmt::Display for StepSizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSizeMode::Standard => f.write_str("standard"),
            StepSizeMode::Learn => f.write_str("learn"),
            StepSizeMode::Sharpness { mu_p, mu_d } => write!(f, "sharpness:{mu_p},{mu_d}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreconditionMode {
    #[default]
    None,
    Complete,
    Diagonal,
}

impl FromStr for PreconditionMode {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "none" => Ok(PreconditionMode::None),
            "complete" => Ok(PreconditionMode::Complete),
            "diagonal" => Ok(PreconditionMode::Diagonal),
            other => Err(CliError::Input(format!(
                "unknown preconditioner `{other}` (expected none, complete or diagonal)"
            ))),
        }
    }
}

impl fmt::Display for PreconditionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PreconditionMode::None => "none",
            PreconditionMode::Complete => "complete",
            PreconditionMode::Diagonal => "diagonal",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(CliError::Input(format!("unknown format `{other}` (expected json or csv)"))),
        }
    }
}
