use proptest::prelude::*;

use rpdhg::conditioning::{analyze, AnalyzeOptions, FaceEnumerator};
use rpdhg::linalg::{compute_q, dist, dot, norm, nullspace_basis, project_nullspace, spectral_info};
use rpdhg::model::families::{gen_family, gen_lp_gamma};
use rpdhg::model::presolve_project_c;
use rpdhg::pdhg::{check_nonexpansive, m_norm_sq, pdhg_step};
use rpdhg::restart::{relative_error, solve, RestartConfig, Target};
use rpdhg::tuning::standard_stepsizes;
use rpdhg::{Iterate, SparseMatrixCSC, StandardFormLP, StepSizes};

fn matrix(m: usize, n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(
        proptest::collection::vec(prop_oneof![2 => Just(0.0), 3 => -3.0..3.0f64], n),
        m,
    )
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..5, 1usize..7)
}

fn vector(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-scale..scale, n)
}

/// `(A, b)` with `b ∈ Range(A)`.
fn consistent_system() -> impl Strategy<Value = (SparseMatrixCSC, Vec<f64>)> {
    dims()
        .prop_flat_map(|(m, n)| (matrix(m, n), vector(n, 2.0)))
        .prop_filter_map("nonzero matrix", |(rows, x)| {
            let a = SparseMatrixCSC::from_dense_rows(&rows).ok()?;
            (a.nnz() > 0).then(|| {
                let b = a.matvec(&x).unwrap();
                (a, b)
            })
        })
}

fn family(k: u32, gamma: f64) -> StandardFormLP {
    if k == 0 {
        gen_lp_gamma(gamma).unwrap()
    } else {
        gen_family(k, gamma).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matvec_adjoint(rows in dims().prop_flat_map(|(m, n)| matrix(m, n)), seed in 0u64..1000) {
        let a = SparseMatrixCSC::from_dense_rows(&rows).unwrap();
        let (m, n) = (a.n_rows(), a.n_cols());
        let x: Vec<f64> = (0..n).map(|j| ((seed + j as u64) % 7) as f64 - 3.0).collect();
        let y: Vec<f64> = (0..m).map(|i| ((seed * 3 + i as u64) % 5) as f64 - 2.0).collect();
        let lhs = dot(&a.matvec(&x).unwrap(), &y);
        let rhs = dot(&x, &a.matvec_transpose(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        let at = a.transpose();
        prop_assert_eq!(at.matvec(&y).unwrap(), a.matvec_transpose(&y).unwrap());
    }

    #[test]
    fn q_is_least_norm_solution((a, b) in consistent_system(), coeffs in vector(8, 3.0)) {
        let q = compute_q(&a, &b).unwrap();
        let scale = 1.0 + norm(&b);
        prop_assert!(dist(&a.matvec(&q).unwrap(), &b) <= 1e-9 * scale);
        // q lies in the row space, so every other solution q + d is longer
        prop_assert!(norm(&project_nullspace(&a, &q).unwrap()) <= 1e-9 * (1.0 + norm(&q)));
        let basis = nullspace_basis(&a);
        let mut other = q.clone();
        for k in 0..basis.ncols() {
            for i in 0..other.len() {
                other[i] += coeffs[k % coeffs.len()] * basis[(i, k)];
            }
        }
        prop_assert!(norm(&q) <= norm(&other) + 1e-9);
    }

    #[test]
    fn nullspace_projection_is_idempotent((a, _b) in consistent_system(), v in vector(6, 5.0)) {
        let v = &v[..a.n_cols()];
        let p = project_nullspace(&a, v).unwrap();
        let pp = project_nullspace(&a, &p).unwrap();
        prop_assert!(dist(&p, &pp) <= 1e-9 * (1.0 + norm(v)));
        prop_assert!(norm(&a.matvec(&p).unwrap()) <= 1e-9 * (1.0 + norm(v)));
        // v − Pv is orthogonal to the null space
        let r: Vec<f64> = v.iter().zip(&p).map(|(x, y)| x - y).collect();
        prop_assert!(dot(&r, &p).abs() <= 1e-9 * (1.0 + norm(v) * norm(v)));
    }

    #[test]
    fn polyhedron_projection_is_idempotent((a, b) in consistent_system(), v in vector(6, 4.0)) {
        let fe = FaceEnumerator::from_sparse(&a, &b).unwrap();
        let v = &v[..a.n_cols()];
        if let Some(p) = fe.project(v) {
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!(dist(&a.matvec(&p).unwrap(), &b) <= 1e-8 * (1.0 + norm(&b)));
            let pp = fe.project(&p).unwrap();
            prop_assert!(dist(&p, &pp) <= 1e-8 * (1.0 + norm(&p)));
        }
    }

    #[test]
    fn m_norm_sandwich(
        rows in dims().prop_flat_map(|(m, n)| matrix(m, n)),
        frac in 0.01..0.999f64,
        ratio in -2.0..2.0f64,
        z in vector(12, 5.0),
    ) {
        let a = SparseMatrixCSC::from_dense_rows(&rows).unwrap();
        prop_assume!(a.nnz() > 0);
        let smax = spectral_info(&a).unwrap().sigma_max;
        // τσσ²_max = frac with τ/σ = 10^ratio
        let prod = frac / (smax * smax);
        let tau = (prod * 10f64.powf(ratio)).sqrt();
        let steps = StepSizes::unchecked(tau, prod / tau);
        let (m, n) = (a.n_rows(), a.n_cols());
        let z = Iterate::new(z[..n].to_vec(), z[n..n + m].to_vec());
        let nn = z.n_norm(&steps).powi(2);
        let mm = m_norm_sq(&z, &a, &steps).unwrap();
        let alpha2 = 1.0 - frac.sqrt();
        prop_assert!(alpha2 * nn <= mm + 1e-9 * nn);
        prop_assert!(mm <= 2.0 * nn + 1e-9 * nn);
    }

    #[test]
    fn pdhg_is_nonexpansive_for_valid_steps(
        k in 0u32..5,
        gamma in 0.02..0.9f64,
        frac in 0.05..1.0f64,
        ratio in -1.5..1.5f64,
        z in vector(4, 3.0),
    ) {
        let lp = family(k, gamma);
        let zs = lp.known_optimum().unwrap().saddle_point().unwrap();
        let smax = lp.spectral().unwrap().sigma_max;
        let prod = frac / (smax * smax);
        let tau = (prod * 10f64.powf(ratio)).sqrt();
        let steps = StepSizes::unchecked(tau, prod / tau);
        let mut cur = Iterate::new(z[..lp.n()].iter().map(|v| v.abs()).collect(), z[lp.n()..lp.n() + lp.m()].to_vec());
        for _ in 0..200 {
            let next = pdhg_step(&cur, &lp, &steps);
            prop_assert!(check_nonexpansive(&cur, &next, &zs, &lp, &steps) <= 1e-10);
            cur = next;
        }
    }

    #[test]
    fn presolve_preserves_objective_on_feasible_points((a, b) in consistent_system(), c in vector(6, 2.0), coeffs in vector(6, 2.0)) {
        let n = a.n_cols();
        let lp = StandardFormLP::new("p", a.clone(), b.clone(), c[..n].to_vec());
        prop_assume!(lp.is_ok());
        let lp = lp.unwrap();
        let pre = presolve_project_c(&lp).unwrap();
        let info = pre.presolve_info().unwrap();
        prop_assert!(norm(&a.matvec(pre.c()).unwrap()) <= 1e-9 * (1.0 + norm(lp.c())));
        let mut x = compute_q(&a, &b).unwrap();
        let basis = nullspace_basis(&a);
        for k in 0..basis.ncols() {
            for i in 0..n {
                x[i] += coeffs[k] * basis[(i, k)];
            }
        }
        let diff = lp.objective(&x) - pre.objective(&x);
        prop_assert!(diff.abs() <= 1e-9 * (1.0 + norm(lp.c()) * norm(&x)), "{}", diff);
        prop_assert_eq!(info.c_original.as_slice(), lp.c());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn condition_measures_are_scale_invariant(
        k in 1u32..5,
        gamma in 0.05..0.6f64,
        alpha in 0.2..5.0f64,
        beta in 0.2..5.0f64,
        cscale in 0.2..5.0f64,
    ) {
        let lp = family(k, gamma);
        let base = analyze(&lp, &AnalyzeOptions::default()).unwrap();
        let scaled = analyze(&lp.rescaled(alpha, beta, cscale).unwrap(), &AnalyzeOptions::default()).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1e-12);
        prop_assert!(rel(base.mu_p, scaled.mu_p) <= 1e-6);
        prop_assert!(rel(base.mu_d, scaled.mu_d) <= 1e-6);
        prop_assert!(rel(base.theta_p_upper, scaled.theta_p_upper) <= 1e-3,
            "{} vs {}", base.theta_p_upper, scaled.theta_p_upper);
        prop_assert!(rel(base.theta_d_upper, scaled.theta_d_upper) <= 1e-3,
            "{} vs {}", base.theta_d_upper, scaled.theta_d_upper);
        prop_assert!(rel(base.kappa, scaled.kappa) <= 1e-9);
    }
}

#[test]
fn presolved_solve_matches_original() {
    for k in 1..=4 {
        let lp = family(k, 0.2);
        // move c off the null space, then let presolve move it back
        let shifted: Vec<f64> = lp
            .c()
            .iter()
            .zip(lp.a().matvec_transpose(&[0.7]).unwrap())
            .map(|(c, s)| c + s)
            .collect();
        let raw = StandardFormLP::new("shifted", lp.a().clone(), lp.b().to_vec(), shifted).unwrap();
        let pre = presolve_project_c(&raw).unwrap();
        let steps = standard_stepsizes(&pre).unwrap();
        let cfg = RestartConfig::default().with_target(Target::RelativeError(1e-10));
        let (sol, _) = solve(&pre, &steps, &cfg).unwrap();
        let y = pre.recover_y(&sol.y);
        let z = Iterate::new(sol.x.clone(), y);
        assert!(relative_error(&z, &raw) < 1e-8, "family {k}");
        let want = lp.known_optimum().unwrap().objective + 0.7 * lp.b()[0];
        assert!((raw.objective(&sol.x) - want).abs() < 1e-7, "family {k}");
    }
}

#[test]
fn oversized_steps_lose_nonexpansiveness() {
    // τσσ²_max = 4, outside the PSD condition
    let lp = gen_lp_gamma(0.5).unwrap();
    let zs = lp.known_optimum().unwrap().saddle_point().unwrap();
    let smax = lp.spectral().unwrap().sigma_max;
    let big = StepSizes::unchecked(2.0 / smax, 2.0 / smax);
    assert!(StepSizes::new(big.tau, big.sigma, smax).is_err());
    let start = Iterate::new(vec![zs.x[0] + 0.1, zs.x[1] + 0.1], vec![zs.y[0] + 0.1]);
    let mut z = start.clone();
    let mut first_increase = None;
    for k in 0..100 {
        let next = pdhg_step(&z, &lp, &big);
        if check_nonexpansive(&z, &next, &zs, &lp, &big) > 1e-10 {
            first_increase = Some(k);
            break;
        }
        z = next;
    }
    assert!(first_increase.is_some());

    // with valid steps the N-distance stays within the norm-equivalence constant
    let valid = standard_stepsizes(&lp).unwrap();
    let alpha = (1.0 - (valid.tau * valid.sigma).sqrt() * smax).sqrt();
    let d0 = start.sub(&zs).n_norm(&valid);
    let mut z = start;
    for _ in 0..500 {
        z = pdhg_step(&z, &lp, &valid);
        assert!(z.sub(&zs).n_norm(&valid) <= d0 * 2f64.sqrt() / alpha + 1e-12);
    }
}
