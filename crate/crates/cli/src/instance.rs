//! Instances named on the command line: a generated family member or an MPS file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use rpdhg::model::families::{gen_family, gen_lp_gamma};
use rpdhg::model::{parse_mps, to_standard_form, GeneralFormLP, VariableMap};
use rpdhg::StandardFormLP;

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    LpGamma,
    Family1,
    Family2,
    Family3,
    Family4,
    MpsCorpus,
}

impl Family {
    pub fn generate(self, gamma: f64) -> CliResult<StandardFormLP> {
        let lp = match self {
            Family::LpGamma => gen_lp_gamma(gamma)?,
            Family::Family1 => gen_family(1, gamma)?,
            Family::Family2 => gen_family(2, gamma)?,
            Family::Family3 => gen_family(3, gamma)?,
            Family::Family4 => gen_family(4, gamma)?,
            Family::MpsCorpus => {
                return Err(CliError::Input("mps_corpus instances are read from files, not generated".into()))
            }
        };
        Ok(lp)
    }

    pub fn gamma_in_domain(self, gamma: f64) -> bool {
        match self {
            Family::LpGamma => gamma > 0.0 && gamma < std::f64::consts::FRAC_PI_2,
            Family::MpsCorpus => true,
            _ => gamma > 0.0 && gamma <= 1.0,
        }
    }
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "lp_gamma" => Family::LpGamma,
            "family1" | "1" => Family::Family1,
            "family2" | "2" => Family::Family2,
            "family3" | "3" => Family::Family3,
            "family4" | "4" => Family::Family4,
            "mps_corpus" => Family::MpsCorpus,
            other => {
                return Err(CliError::Input(format!(
                    "unknown family `{other}` (expected lp_gamma, family1..family4, mps_corpus)"
                )))
            }
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::LpGamma => "lp_gamma",
            Family::Family1 => "family1",
            Family::Family2 => "family2",
            Family::Family3 => "family3",
            Family::Family4 => "family4",
            Family::MpsCorpus => "mps_corpus",
        })
    }
}

/// An instance in standard form, plus the original model when it came from MPS.
#[derive(Clone, Debug)]
pub struct LoadedInstance {
    pub lp: StandardFormLP,
    pub original: Option<(GeneralFormLP, VariableMap)>,
}

impl LoadedInstance {
    pub fn from_family(family: Family, gamma: f64) -> CliResult<Self> {
        Ok(LoadedInstance {
            lp: family.generate(gamma)?,
            original: None,
        })
    }

    pub fn from_mps_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let g = parse_mps(&text)?;
        let (lp, map) = to_standard_form(&g)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| g.name.clone());
        Ok(LoadedInstance {
            lp: lp.with_name(name),
            original: Some((g, map)),
        })
    }

    /// `--family` takes precedence; otherwise `path` must name an MPS file.
    pub fn resolve(path: Option<&PathBuf>, family: Option<Family>, gamma: Option<f64>) -> CliResult<Self> {
        match (family, path) {
            (Some(f), None) => {
                let g = gamma.ok_or_else(|| CliError::Input("--family needs --gamma".into()))?;
                Self::from_family(f, g)
            }
            (None, Some(p)) => Self::from_mps_file(p),
            (Some(_), Some(_)) => Err(CliError::Input("give either an MPS path or --family, not both".into())),
            (None, None) => Err(CliError::Input("no instance: give an MPS path or --family".into())),
        }
    }
}
