//! The PDHG step, running averages, and the M-norm diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, SparseMatrixCSC};
use crate::model::StandardFormLP;

/// Margin separating strictly positive definite `M` from the PSD boundary.
pub const PD_MARGIN: f64 = 1e-9;

/// Primal-dual point `z = (x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Iterate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Iterate {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        Iterate { x, y }
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Iterate {
            x: vec![0.0; n],
            y: vec![0.0; m],
        }
    }

    pub fn sub(&self, other: &Iterate) -> Iterate {
        Iterate {
            x: crate::linalg::sub(&self.x, &other.x),
            y: crate::linalg::sub(&self.y, &other.y),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }

    /// Weighted norm sqrt(‖x‖²/τ + ‖y‖²/σ).
    pub fn n_norm(&self, steps: &StepSizes) -> f64 {
        (dot(&self.x, &self.x) / steps.tau + dot(&self.y, &self.y) / steps.sigma).sqrt()
    }

    pub fn euclidean_norm(&self) -> f64 {
        (dot(&self.x, &self.x) + dot(&self.y, &self.y)).sqrt()
    }
}

/// Primal and dual step sizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub tau: f64,
    pub sigma: f64,
    /// `tau * sigma * sigma_max² <= 1 - PD_MARGIN`, i.e. `M` is positive definite.
    pub strict_pd: bool,
}

impl StepSizes {
    /// Validates `tau * sigma * sigma_max² <= 1`.
    pub fn new(tau: f64, sigma: f64, sigma_max: f64) -> Result<Self> {
        if !(tau > 0.0 && sigma > 0.0 && tau.is_finite() && sigma.is_finite()) {
            return Err(Error::ContractViolation(format!(
                "step sizes must be positive and finite, got tau={tau}, sigma={sigma}"
            )));
        }
        let prod = tau * sigma * sigma_max * sigma_max;
        if prod > 1.0 + 1e-12 {
            return Err(Error::ContractViolation(format!(
                "tau*sigma*sigma_max^2 = {prod} exceeds 1"
            )));
        }
        Ok(StepSizes {
            tau,
            sigma,
            strict_pd: prod <= 1.0 - PD_MARGIN,
        })
    }

    pub fn for_lp(tau: f64, sigma: f64, lp: &StandardFormLP) -> Result<Self> {
        Self::new(tau, sigma, lp.spectral()?.sigma_max_safe)
    }

    /// No validation; only for diagnostics that probe invalid step sizes.
    pub fn unchecked(tau: f64, sigma: f64) -> Self {
        StepSizes {
            tau,
            sigma,
            strict_pd: false,
        }
    }

    pub fn product_ratio(&self, sigma_max: f64) -> f64 {
        self.tau * self.sigma * sigma_max * sigma_max
    }
}

/// Incremental mean of pushed iterates.
#[derive(Clone, Debug, PartialEq)]
pub struct RunningAverage {
    pub count: usize,
    pub mean: Iterate,
}

impl RunningAverage {
    pub fn new(n: usize, m: usize) -> Self {
        RunningAverage {
            count: 0,
            mean: Iterate::zeros(n, m),
        }
    }

    pub fn push(&mut self, z: &Iterate) {
        self.count += 1;
        let w = 1.0 / self.count as f64;
        for (mi, zi) in self.mean.x.iter_mut().zip(&z.x) {
            *mi += (zi - *mi) * w;
        }
        for (mi, zi) in self.mean.y.iter_mut().zip(&z.y) {
            *mi += (zi - *mi) * w;
        }
    }
}

/// Functional form of [`RunningAverage::push`].
pub fn update_average(mut avg: RunningAverage, z: &Iterate) -> RunningAverage {
    avg.push(z);
    avg
}

/// Scratch buffers so the inner loop does not allocate.
#[derive(Clone, Debug)]
pub(crate) struct StepWorkspace {
    aty: Vec<f64>,
    extrap: Vec<f64>,
    ax: Vec<f64>,
}

impl StepWorkspace {
    pub(crate) fn new(n: usize, m: usize) -> Self {
        StepWorkspace {
            aty: vec![0.0; n],
            extrap: vec![0.0; n],
            ax: vec![0.0; m],
        }
    }
}

/// In-place PDHG step: two products, one with `Aᵀ` and one with `A`.
pub(crate) fn pdhg_step_in_place(
    z: &mut Iterate,
    a: &SparseMatrixCSC,
    b: &[f64],
    c: &[f64],
    steps: &StepSizes,
    ws: &mut StepWorkspace,
) {
    a.matvec_transpose_into(&z.y, &mut ws.aty);
    for j in 0..z.x.len() {
        let old = z.x[j];
        let new = (old - steps.tau * (c[j] - ws.aty[j])).max(0.0);
        ws.extrap[j] = 2.0 * new - old;
        z.x[j] = new;
    }
    a.matvec_into(&ws.extrap, &mut ws.ax);
    for i in 0..z.y.len() {
        z.y[i] += steps.sigma * (b[i] - ws.ax[i]);
    }
}

/// One PDHG step:
/// `x⁺ = max(0, x − τ(c − Aᵀy))`, `y⁺ = y + σ(b − A(2x⁺ − x))`.
pub fn pdhg_step(z: &Iterate, lp: &StandardFormLP, steps: &StepSizes) -> Iterate {
    let mut out = z.clone();
    let mut ws = StepWorkspace::new(lp.n(), lp.m());
    pdhg_step_in_place(&mut out, lp.a(), lp.b(), lp.c(), steps, &mut ws);
    out
}

/// Raw quadratic form `(1/τ)‖x‖² + (1/σ)‖y‖² + 2yᵀAx`, no sign guarantee.
///
/// The coupling sign is the one under which the step above is a proximal
/// point step, so PDHG is nonexpansive in this norm.
pub fn m_quadratic_form(z: &Iterate, a: &SparseMatrixCSC, steps: &StepSizes) -> f64 {
    let mut ax = vec![0.0; a.n_rows()];
    a.matvec_into(&z.x, &mut ax);
    dot(&z.x, &z.x) / steps.tau + dot(&z.y, &z.y) / steps.sigma + 2.0 * dot(&z.y, &ax)
}

/// `‖z‖²_M`, clamped at zero. Requires `M ⪰ 0`.
pub fn m_norm_sq(z: &Iterate, a: &SparseMatrixCSC, steps: &StepSizes) -> Result<f64> {
    let smax = if a.nnz() == 0 {
        0.0
    } else {
        crate::linalg::spectral_info(a)?.sigma_max
    };
    m_norm_sq_with_sigma(z, a, steps, smax)
}

pub(crate) fn m_norm_sq_with_sigma(
    z: &Iterate,
    a: &SparseMatrixCSC,
    steps: &StepSizes,
    sigma_max: f64,
) -> Result<f64> {
    if steps.product_ratio(sigma_max) > 1.0 + 1e-12 {
        return Err(Error::ContractViolation(
            "M-norm requires tau*sigma*sigma_max^2 <= 1".into(),
        ));
    }
    let diag = dot(&z.x, &z.x) / steps.tau + dot(&z.y, &z.y) / steps.sigma;
    let q = m_quadratic_form(z, a, steps);
    debug_assert!(q >= -1e-10 * diag.max(1e-300), "M-form {q} negative on PSD steps");
    Ok(q.max(0.0))
}

fn m_dist(u: &Iterate, v: &Iterate, a: &SparseMatrixCSC, steps: &StepSizes) -> f64 {
    m_quadratic_form(&u.sub(v), a, steps).max(0.0).sqrt()
}

/// `‖z_next − z⋆‖_M − ‖z_prev − z⋆‖_M`; nonpositive whenever PDHG is nonexpansive.
pub fn check_nonexpansive(
    z_prev: &Iterate,
    z_next: &Iterate,
    z_star: &Iterate,
    lp: &StandardFormLP,
    steps: &StepSizes,
) -> f64 {
    m_dist(z_next, z_star, lp.a(), steps) - m_dist(z_prev, z_star, lp.a(), steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::families::gen_lp_gamma;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    #[test]
    fn lp_gamma_first_step() {
        let lp = gen_lp_gamma(FRAC_PI_4).unwrap();
        let steps = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
        let z = pdhg_step(&Iterate::zeros(2, 1), &lp, &steps);
        // x⁺ = max(0, -0.5 c) = (0, 0.5·sin(π/4)); y⁺ = 0.5(1 - A·2x⁺)
        assert!((z.x[0]).abs() < 1e-15);
        assert!((z.x[1] - 0.5 * FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((z.x[1] - 0.35355).abs() < 1e-5);
        assert!((z.y[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn saddle_point_is_fixed() {
        for &g in &[0.1, 0.5, 1.0, 1.4] {
            let lp = gen_lp_gamma(g).unwrap();
            let ko = lp.known_optimum().unwrap();
            let zs = ko.saddle_point().unwrap();
            let steps = StepSizes::for_lp(0.5, 0.5, &lp).unwrap();
            let z = pdhg_step(&zs, &lp, &steps);
            assert!(z.sub(&zs).euclidean_norm() < 1e-10);
        }
    }

    #[test]
    fn zero_data_step_matches_literal_formula() {
        let a = SparseMatrixCSC::from_dense_rows(&[vec![1.0, -2.0, 0.5], vec![0.0, 1.0, 1.0]])
            .unwrap();
        let lp = StandardFormLP::new("zero", a.clone(), vec![0.0, 0.0], vec![0.0; 3]).unwrap();
        let steps = StepSizes::unchecked(0.1, 0.2);
        let z = Iterate::new(vec![0.3, 0.0, 1.0], vec![1.0, -1.0]);
        let out = pdhg_step(&z, &lp, &steps);
        // x⁺ = max(0, x + τAᵀy), y⁺ = y − σA(2x⁺ − x)
        let aty = [1.0, -2.0 - 1.0, 0.5 - 1.0];
        let xp: Vec<f64> = (0..3).map(|j| (z.x[j] + 0.1 * aty[j]).max(0.0)).collect();
        let ex: Vec<f64> = (0..3).map(|j| 2.0 * xp[j] - z.x[j]).collect();
        let a_ex = [ex[0] - 2.0 * ex[1] + 0.5 * ex[2], ex[1] + ex[2]];
        let yp = [z.y[0] - 0.2 * a_ex[0], z.y[1] - 0.2 * a_ex[1]];
        for j in 0..3 {
            assert!((out.x[j] - xp[j]).abs() < 1e-15);
        }
        for i in 0..2 {
            assert!((out.y[i] - yp[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn average_examples() {
        let z = Iterate::new(vec![1.0, 2.0], vec![3.0]);
        let mut avg = RunningAverage::new(2, 1);
        avg.push(&z);
        avg.push(&z);
        assert_eq!(avg.mean, z);
        let avg = update_average(RunningAverage::new(2, 1), &Iterate::zeros(2, 1));
        let avg = update_average(avg, &Iterate::new(vec![2.0, 2.0], vec![2.0]));
        assert_eq!(avg.mean, Iterate::new(vec![1.0, 1.0], vec![1.0]));
        assert_eq!(avg.count, 2);
    }

    #[test]
    fn average_matches_naive_sum() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut avg = RunningAverage::new(4, 2);
        let mut sum = [0.0f64; 6];
        for _ in 0..1000 {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(-5.0..5.0)).collect();
            for (s, x) in sum.iter_mut().zip(&v) {
                *s += x;
            }
            avg.push(&Iterate::new(v[..4].to_vec(), v[4..].to_vec()));
        }
        let mean: Vec<f64> = avg.mean.x.iter().chain(&avg.mean.y).cloned().collect();
        for (m, s) in mean.iter().zip(&sum) {
            let naive = s / 1000.0;
            assert!((m - naive).abs() <= 1e-10 * naive.abs().max(1e-3));
        }
    }

    #[test]
    fn m_norm_examples() {
        let z = Iterate::new(vec![1.0, 2.0], vec![3.0]);
        let zero = SparseMatrixCSC::zeros(1, 2);
        let st = StepSizes::unchecked(1.0, 1.0);
        assert!((m_norm_sq(&z, &zero, &st).unwrap() - 14.0).abs() < 1e-12);

        // with A = I and τ = σ = 1, M is singular along (1, −1)
        let one = SparseMatrixCSC::identity(1);
        let z = Iterate::new(vec![1.0], vec![-1.0]);
        assert!(m_norm_sq(&z, &one, &st).unwrap().abs() < 1e-15);
        let z = Iterate::new(vec![1.0], vec![1.0]);
        assert!((m_norm_sq(&z, &one, &st).unwrap() - 4.0).abs() < 1e-12);

        let a = SparseMatrixCSC::from_dense_rows(&[vec![0.7071, 0.7071]]).unwrap();
        let st = StepSizes::unchecked(0.5, 0.5);
        let z = Iterate::new(vec![1.0, 0.0], vec![-1.0]);
        assert!((m_norm_sq(&z, &a, &st).unwrap() - 2.5858).abs() < 1e-12);
    }

    #[test]
    fn m_norm_rejects_oversized_steps() {
        let a = SparseMatrixCSC::identity(1);
        let z = Iterate::new(vec![1.0], vec![1.0]);
        assert!(m_norm_sq(&z, &a, &StepSizes::unchecked(2.0, 1.0)).is_err());
    }

    #[test]
    fn step_sizes_validation() {
        assert!(StepSizes::new(0.5, 0.5, 1.0).unwrap().strict_pd);
        let boundary = StepSizes::new(1.0, 1.0, 1.0).unwrap();
        assert!(!boundary.strict_pd);
        assert!(StepSizes::new(1.0, 1.1, 1.0).is_err());
        assert!(StepSizes::new(-1.0, 1.0, 1.0).is_err());
    }
}
