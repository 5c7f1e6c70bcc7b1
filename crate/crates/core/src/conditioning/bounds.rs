use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SpectralInfo;

/// `σ_max/σ⁺_min`.
pub fn kappa(spectral: &SpectralInfo) -> f64 {
    spectral.sigma_max / spectral.sigma_min_pos
}

/// Inputs of the iteration bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub kappa: f64,
    pub mu_p: f64,
    pub mu_d: f64,
    pub theta_p: f64,
    pub theta_d: f64,
    pub dist0_xstar: f64,
    pub norm_q: f64,
    pub distc_sstar: f64,
    pub norm_c: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("mu_p", self.mu_p),
            ("mu_d", self.mu_d),
            ("theta_p", self.theta_p),
            ("theta_d", self.theta_d),
            ("norm_q", self.norm_q),
            ("norm_c", self.norm_c),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ContractViolation(format!("{name} must be positive and finite, got {v}")));
            }
        }
        // A distance is zero when the anchor already lies in the optimal set.
        for (name, v) in [("dist0_xstar", self.dist0_xstar), ("distc_sstar", self.distc_sstar)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ContractViolation(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn rel_dist_x(&self) -> f64 {
        self.dist0_xstar / self.norm_q
    }

    pub fn rel_dist_s(&self) -> f64 {
        self.distc_sstar / self.norm_c
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "N_hat")]
    pub n_hat: f64,
    #[serde(rename = "D")]
    pub d: f64,
}

pub fn assemble_bounds(i: &BoundInputs) -> Result<Bounds> {
    i.validate()?;
    let (rx, rs) = (i.rel_dist_x(), i.rel_dist_s());
    let n = 8.5 * i.kappa * (1.0 / i.mu_p + 1.0 / i.mu_d) * (i.theta_p + i.theta_d + rx + rs);
    let n_hat = 16.0
        * i.kappa
        * (i.theta_p / i.mu_p + i.theta_d / i.mu_d + rx / i.mu_d + rs / i.mu_p);
    let ratio = i.norm_c / i.norm_q;
    let d = 32.0 * E * i.kappa * ratio.max(1.0 / ratio);
    Ok(Bounds { n, n_hat, d })
}

fn check_tolerances(eps0: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("target tolerance must be positive, got {eps}")));
    }
    if !(eps0 >= eps) {
        return Err(Error::InvalidParameter(format!("need eps0 >= eps, got {eps0} < {eps}")));
    }
    Ok(())
}

/// `5e·𝒩·ln(8e·𝒩·(ε₀/ε)(1 + κ‖c‖/‖q‖)(1 + ‖q‖/‖c‖)) + 1`.
pub fn iteration_bound_t(
    n_bound: f64,
    kappa: f64,
    norm_c: f64,
    norm_q: f64,
    eps0: f64,
    eps: f64,
) -> Result<f64> {
    check_tolerances(eps0, eps)?;
    let r = norm_c / norm_q;
    let arg = 8.0 * E * n_bound * (eps0 / eps) * (1.0 + kappa * r) * (1.0 + 1.0 / r);
    Ok(5.0 * E * n_bound * arg.ln() + 1.0)
}

/// The `𝒩̂` form, whose log factors carry the sharpness-weighted norm ratio.
pub fn iteration_bound_t_hat(
    n_hat: f64,
    kappa: f64,
    mu_p: f64,
    mu_d: f64,
    norm_c: f64,
    norm_q: f64,
    eps0: f64,
    eps: f64,
) -> Result<f64> {
    check_tolerances(eps0, eps)?;
    let r = (mu_p * norm_c) / (mu_d * norm_q);
    let arg = 8.0 * E * n_hat * (eps0 / eps) * (1.0 + kappa * r) * (1.0 + 1.0 / r);
    Ok(5.0 * E * n_hat * arg.ln() + 1.0)
}
