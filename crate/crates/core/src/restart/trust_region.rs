use crate::error::{Error, Result};

/// `max gᵀδ  s.t.  Σ wᵢδᵢ² ≤ r², δ ≥ l`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrustRegionSubproblem {
    pub gradient: Vec<f64>,
    pub weights: Vec<f64>,
    /// `-∞` marks an unbounded coordinate; finite entries must be `≤ 0`.
    pub lower_bounds: Vec<f64>,
    pub radius: f64,
}

impl TrustRegionSubproblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.gradient.len();
        for len in [self.weights.len(), self.lower_bounds.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        if !(self.radius > 0.0) {
            return Err(Error::ContractViolation(format!(
                "trust-region radius must be positive, got {}",
                self.radius
            )));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::ContractViolation("weights must be positive".into()));
        }
        if self.lower_bounds.iter().any(|l| *l > 0.0) {
            return Err(Error::ContractViolation(
                "lower bounds must be nonpositive".into(),
            ));
        }
        Ok(())
    }
}

fn delta_at(p: &TrustRegionSubproblem, lambda: f64, out: &mut [f64]) -> f64 {
    let mut nrm = 0.0;
    for i in 0..out.len() {
        let d = (p.gradient[i] / (lambda * p.weights[i])).max(p.lower_bounds[i]);
        out[i] = d;
        nrm += p.weights[i] * d * d;
    }
    nrm
}

/// Solves the subproblem; returns `(δ, gᵀδ)`.
///
/// The maximiser is `δᵢ(λ) = max(lᵢ, gᵢ/(λwᵢ))` for the multiplier `λ` that
/// puts `δ` on the sphere. `‖δ(λ)‖_w` is nonincreasing in `λ`, so `λ` is
/// bracketed and bisected, then fixed in closed form once the set of clamped
/// coordinates stops changing.
pub fn solve_trust_region(p: &TrustRegionSubproblem) -> Result<(Vec<f64>, f64)> {
    p.validate()?;
    let n = p.gradient.len();
    let r2 = p.radius * p.radius;
    if p.gradient.iter().all(|g| *g == 0.0) {
        return Ok((vec![0.0; n], 0.0));
    }

    // λ → 0 limit: finite only when every profitable direction is blocked.
    let bounded_limit = p
        .gradient
        .iter()
        .zip(&p.lower_bounds)
        .all(|(g, l)| *g == 0.0 || (*g < 0.0 && l.is_finite()));
    if bounded_limit {
        let d: Vec<f64> = p
            .gradient
            .iter()
            .zip(&p.lower_bounds)
            .map(|(g, l)| if *g < 0.0 { *l } else { 0.0 })
            .collect();
        let nrm: f64 = d.iter().zip(&p.weights).map(|(x, w)| w * x * x).sum();
        if nrm <= r2 {
            let val = dot(&p.gradient, &d);
            return Ok((d, val));
        }
    }

    let mut d = vec![0.0; n];
    let scaled: f64 = p
        .gradient
        .iter()
        .zip(&p.weights)
        .map(|(g, w)| g * g / w)
        .sum::<f64>()
        .sqrt();
    let mut hi = scaled / p.radius;
    let nrm_hi = delta_at(p, hi, &mut d);
    if (nrm_hi - r2).abs() <= 1e-14 * r2 {
        // no bound is active at the unconstrained scaled gradient
        let val = dot(&p.gradient, &d);
        return Ok((d, val));
    }
    let mut lo = hi;
    let mut guard = 0;
    while delta_at(p, lo, &mut d) < r2 {
        lo *= 0.5;
        guard += 1;
        if guard > 2000 {
            break;
        }
    }

    let mut lambda = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let nrm = delta_at(p, mid, &mut d);
        if nrm > r2 {
            lo = mid;
        } else {
            hi = mid;
        }
        lambda = hi;
        if (hi - lo) <= 1e-15 * hi {
            break;
        }
    }

    // on a fixed clamping pattern ‖δ(λ)‖² = a/λ² + b
    delta_at(p, lambda, &mut d);
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..n {
        let free = p.gradient[i] / (lambda * p.weights[i]);
        if free > p.lower_bounds[i] {
            a += p.gradient[i] * p.gradient[i] / p.weights[i];
        } else {
            b += p.weights[i] * p.lower_bounds[i] * p.lower_bounds[i];
        }
    }
    if a > 0.0 && b < r2 {
        let exact = (a / (r2 - b)).sqrt();
        let mut trial = vec![0.0; n];
        delta_at(p, exact, &mut trial);
        let same_pattern = (0..n).all(|i| {
            let f1 = p.gradient[i] / (lambda * p.weights[i]) > p.lower_bounds[i];
            let f2 = p.gradient[i] / (exact * p.weights[i]) > p.lower_bounds[i];
            f1 == f2
        });
        if same_pattern {
            d = trial;
        }
    }
    let val = dot(&p.gradient, &d);
    Ok((d, val))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    crate::linalg::dot(a, b)
}
