mod oracles;

use oracles::{brute_force_min_2d, cd_lasso, fd_gradient, rel_inf, Mix};
use proptest::prelude::*;
use subbotin_core::solver::{
    fit, fit_with_loss, lambda_max, loss_gradient, objective, path, soft_threshold, Design, LassoConfig,
    RegressionLoss, SolverOptions,
};
use subbotin_core::ShapeParam;

fn nu(k: u32) -> ShapeParam {
    ShapeParam::new(k).unwrap()
}

/// `(1/N) Σ r^ν / ν + λ‖β‖₁`, evaluated directly.
fn reference_objective(cols: &[Vec<f64>], y: &[f64], beta: &[f64], lambda: f64, k: u32) -> f64 {
    let n = y.len();
    let mut loss = 0.0;
    for t in 0..n {
        let mut r = y[t];
        for (c, b) in cols.iter().zip(beta) {
            r -= c[t] * b;
        }
        loss += r.powi(k as i32) / k as f64;
    }
    loss / n as f64 + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

struct Instance {
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Instance {
    fn random(rng: &mut Mix, n: usize, k: usize) -> Self {
        let cols: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.normal()).collect()).collect();
        let truth: Vec<f64> = (0..k).map(|j| if j % 2 == 0 { rng.range(-0.8, 0.8) } else { 0.0 }).collect();
        let y = (0..n)
            .map(|t| cols.iter().zip(&truth).map(|(c, b)| c[t] * b).sum::<f64>() + 0.5 * rng.normal())
            .collect();
        Instance { cols, y }
    }

    fn design(&self) -> Design<'_> {
        Design::new(self.y.len(), self.cols.iter().map(|c| c.as_slice()).collect()).unwrap()
    }
}

#[test]
fn objective_and_threshold_examples() {
    let zero = [0.0];
    let x = [0.0];
    let d = Design::new(1, vec![&x[..]]).unwrap();
    assert_eq!(objective(&[0.0], &d, &zero, 1.0, nu(4)).unwrap(), 0.0);
    let one = [1.0];
    let d = Design::new(1, vec![&one[..]]).unwrap();
    assert!((objective(&[1.0], &d, &[2.0], 0.5, nu(2)).unwrap() - 1.0).abs() < 1e-15);

    assert_eq!(soft_threshold(3.0, 1.0), 2.0);
    assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
    assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
}

#[test]
fn lambda_max_examples() {
    let x = [1.0, 0.0];
    let y = [2.0, 0.0];
    let d = Design::new(2, vec![&x[..]]).unwrap();
    let l2 = lambda_max(&d, &y, nu(2)).unwrap();
    let l4 = lambda_max(&d, &y, nu(4)).unwrap();
    assert!((l2 - 1.0).abs() < 1e-14);
    assert!((l4 - 4.0).abs() < 1e-14);
    assert_eq!(lambda_max(&d, &[0.0, 0.0], nu(2)).unwrap(), 0.0);
    // KKT transition: zero just above, non-zero just below
    for (k, lm) in [(2, l2), (4, l4)] {
        let above = fit(&d, &y, &LassoConfig::new(lm * 1.001, nu(k)), None).unwrap();
        let below = fit(&d, &y, &LassoConfig::new(lm * 0.999, nu(k)), None).unwrap();
        assert_eq!(above.coefficients[0], 0.0);
        assert!(below.coefficients[0] > 0.0);
    }
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = Mix(100);
    for k in [2u32, 4, 6, 8] {
        for _ in 0..20 {
            let inst = Instance::random(&mut rng, 30, 4);
            let beta: Vec<f64> = (0..4).map(|_| rng.range(-0.5, 0.5)).collect();
            let g = loss_gradient(&beta, &inst.design(), &inst.y, nu(k)).unwrap();
            let f = |b: &[f64]| reference_objective(&inst.cols, &inst.y, b, 0.0, k);
            let fd = fd_gradient(&f, &beta, 1e-5);
            let err = rel_inf(&g, &fd);
            assert!(err < 1e-6, "nu={k}: {g:?} vs {fd:?}");
        }
    }
}

#[test]
fn least_squares_gradient_at_nu_two() {
    let mut rng = Mix(4);
    let inst = Instance::random(&mut rng, 25, 3);
    let beta = [0.3, -0.1, 0.2];
    let g = loss_gradient(&beta, &inst.design(), &inst.y, nu(2)).unwrap();
    for j in 0..3 {
        let expected = -(0..25)
            .map(|t| {
                let r = inst.y[t] - (0..3).map(|m| inst.cols[m][t] * beta[m]).sum::<f64>();
                inst.cols[j][t] * r
            })
            .sum::<f64>()
            / 25.0;
        assert!((g[j] - expected).abs() < 1e-14);
    }
    // zero residual gives zero gradient
    let y: Vec<f64> = (0..25).map(|t| (0..3).map(|m| inst.cols[m][t] * beta[m]).sum()).collect();
    for k in [2, 8] {
        let g = loss_gradient(&beta, &inst.design(), &y, nu(k)).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14), "{g:?}");
    }
}

#[test]
fn two_predictor_fit_matches_dense_grid_oracle() {
    // N=50, two predictors, ν=4, λ=0.1; dense grid at resolution 1e-3
    let mut rng = Mix(42);
    let inst = Instance::random(&mut rng, 50, 2);
    let r = fit(&inst.design(), &inst.y, &LassoConfig::new(0.1, nu(4)), None).unwrap();
    let f = |a: f64, b: f64| reference_objective(&inst.cols, &inst.y, &[a, b], 0.1, 4);
    let (_, _, best) = brute_force_min_2d(&f, 3.0, 1e-3);
    let got = reference_objective(&inst.cols, &inst.y, &r.coefficients, 0.1, 4);
    assert!(got <= best + 1e-6, "{got} vs oracle {best}");
    assert!((r.objective - got).abs() < 1e-12);
}

#[test]
fn two_predictor_fits_match_grid_oracle_for_all_shapes() {
    let mut rng = Mix(43);
    for case in 0..12 {
        let k = [2u32, 4, 6, 8][case % 4];
        let inst = Instance::random(&mut rng, 50, 2);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let lambda = lm * rng.range(0.05, 0.9);
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lambda, nu(k)), None).unwrap();
        assert!(r.converged);
        let f = |a: f64, b: f64| reference_objective(&inst.cols, &inst.y, &[a, b], lambda, k);
        let (_, _, best) = brute_force_min_2d(&f, 3.0, 1e-2);
        let got = reference_objective(&inst.cols, &inst.y, &r.coefficients, lambda, k);
        assert!(got <= best + 1e-6, "nu={k}: {got} vs oracle {best}");
    }
}

#[test]
fn penalty_at_or_above_lambda_max_gives_zero() {
    let mut rng = Mix(7);
    for case in 0..100 {
        let k = [2u32, 4, 6, 8][case % 4];
        let inst = Instance::random(&mut rng, 20 + case % 17, 1 + case % 6);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let lambda = lm * (1.0 + rng.range(0.0, 2.0));
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lambda, nu(k)), None).unwrap();
        assert!(r.coefficients.iter().all(|&b| b == 0.0), "case {case}: {:?}", r.coefficients);
    }
}

#[test]
fn nu_two_matches_coordinate_descent() {
    let mut rng = Mix(12);
    let mut opts = SolverOptions::default();
    opts.tol = 1e-12;
    for _ in 0..10 {
        let inst = Instance::random(&mut rng, 80, 6);
        let lm = lambda_max(&inst.design(), &inst.y, nu(2)).unwrap();
        let lambda = lm * rng.range(0.05, 0.6);
        let r = fit_with_loss(&inst.design(), &inst.y, &RegressionLoss::Power(nu(2)), lambda, &opts, None).unwrap();
        let cols: Vec<&[f64]> = inst.cols.iter().map(|c| c.as_slice()).collect();
        let reference = cd_lasso(&cols, &inst.y, lambda);
        for (a, b) in r.coefficients.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "{:?} vs {:?}", r.coefficients, reference);
        }
    }
}

#[test]
fn fit_beats_random_perturbations() {
    let mut rng = Mix(21);
    for case in 0..16 {
        let k = [2u32, 4, 6, 8][case % 4];
        let inst = Instance::random(&mut rng, 60, 5);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let lambda = lm * 0.2;
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lambda, nu(k)), None).unwrap();
        let at_fit = reference_objective(&inst.cols, &inst.y, &r.coefficients, lambda, k);
        for _ in 0..100 {
            let pert: Vec<f64> = r.coefficients.iter().map(|b| b + rng.range(-0.1, 0.1) / 5f64.sqrt()).collect();
            let v = reference_objective(&inst.cols, &inst.y, &pert, lambda, k);
            assert!(at_fit <= v + 1e-12, "nu={k}: {at_fit} > {v}");
        }
    }
}

#[test]
fn warm_path_matches_cold_fits() {
    let mut rng = Mix(55);
    for k in [2u32, 4, 8] {
        let inst = Instance::random(&mut rng, 70, 6);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let lambdas: Vec<f64> = (0..8).map(|s| lm * 0.6f64.powi(s)).collect();
        let warm = path(&inst.design(), &inst.y, nu(k), &lambdas).unwrap();
        assert!(warm[0].coefficients.iter().all(|&b| b == 0.0));
        for (w, &lambda) in warm.iter().zip(&lambdas) {
            let cold = fit(&inst.design(), &inst.y, &LassoConfig::new(lambda, nu(k)), None).unwrap();
            assert!((w.objective - cold.objective).abs() <= 1e-8 * cold.objective.abs().max(1.0));
            assert!(rel_inf(&w.coefficients, &cold.coefficients) < 1e-4, "nu={k} lambda={lambda}");
        }
    }
    let inst = Instance::random(&mut rng, 10, 2);
    assert!(path(&inst.design(), &inst.y, nu(2), &[0.1, 0.2]).is_err());
}

#[test]
fn noiseless_line_recovered_for_every_shape() {
    let x: Vec<f64> = (0..40).map(|t| (t as f64 * 0.71).cos()).collect();
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let d = Design::new(40, vec![&x[..]]).unwrap();
    for k in [2, 4, 6, 8] {
        let r = fit(&d, &y, &LassoConfig::new(0.0, nu(k)), None).unwrap();
        assert!((r.coefficients[0] - 2.0).abs() < 1e-6, "nu={k}: {:?}", r.coefficients);
    }
}

#[test]
fn smoothed_median_regression_recovers_slope() {
    let x: Vec<f64> = (0..201).map(|t| -1.0 + t as f64 / 100.0).collect();
    let y: Vec<f64> = x.iter().map(|v| 0.8 * v).collect();
    let d = Design::new(x.len(), vec![&x[..]]).unwrap();
    let loss = RegressionLoss::check(0.5).unwrap();
    let r = fit_with_loss(&d, &y, &loss, 0.0, &SolverOptions::default(), None).unwrap();
    assert!((r.coefficients[0] - 0.8).abs() < 1e-3, "{:?}", r.coefficients);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_solution_iff_above_lambda_max(seed in any::<u64>(), k in prop::sample::select(vec![2u32, 4, 6, 8]), scale in 1.0f64..3.0) {
        let mut rng = Mix(seed);
        let inst = Instance::random(&mut rng, 30, 3);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lm * scale, nu(k)), None).unwrap();
        prop_assert!(r.coefficients.iter().all(|&b| b == 0.0));
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lm / (1.0 + scale), nu(k)), None).unwrap();
        prop_assert!(r.coefficients.iter().any(|&b| b != 0.0));
    }

    #[test]
    fn objective_never_above_start(seed in any::<u64>(), k in prop::sample::select(vec![2u32, 4, 6, 8]), frac in 0.01f64..1.0) {
        let mut rng = Mix(seed);
        let inst = Instance::random(&mut rng, 40, 4);
        let lm = lambda_max(&inst.design(), &inst.y, nu(k)).unwrap();
        let lambda = lm * frac;
        let r = fit(&inst.design(), &inst.y, &LassoConfig::new(lambda, nu(k)), None).unwrap();
        let start = reference_objective(&inst.cols, &inst.y, &[0.0; 4], lambda, k);
        prop_assert!(r.objective <= start + 1e-12);
        prop_assert!(r.converged);
    }
}
