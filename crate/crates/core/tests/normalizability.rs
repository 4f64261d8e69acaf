mod oracles;

use oracles::{integrate_square, jacobi_eigenvalues, Mix};
use subbotin_core::density::log_unnormalized_density;
use subbotin_core::theta::{check_normalizable, check_normalizable_values, precision_from_theta};
use subbotin_core::{ParamMatrix, ShapeParam};

fn nu(k: u32) -> ShapeParam {
    ShapeParam::new(k).unwrap()
}

fn two_by_two(c: f64) -> ParamMatrix {
    ParamMatrix::from_precision_form(2, vec![1.0, c, c, 1.0]).unwrap()
}

#[test]
fn jacobi_oracle_sanity() {
    let e = jacobi_eigenvalues(3, &[1.0, 0.8, 0.0, 0.8, 1.0, 0.8, 0.0, 0.8, 1.0]);
    let min = e.iter().copied().fold(f64::INFINITY, f64::min);
    assert!((min - (1.0 + 1.6 * (3.0 * std::f64::consts::PI / 4.0).cos())).abs() < 1e-12);
    assert!((min + 0.131).abs() < 1e-3);
}

#[test]
fn spec_examples() {
    assert!(check_normalizable(&ParamMatrix::identity(5)));
    assert!(!check_normalizable(&two_by_two(1.0)));
    let t = ParamMatrix::from_precision_form(3, vec![1.0, 0.8, 0.0, 0.8, 1.0, 0.8, 0.0, 0.8, 1.0]).unwrap();
    assert!(!check_normalizable(&t));
    assert!(check_normalizable_values(2, &[1.0, 0.1, 0.2, 1.0]).is_err());
}

#[test]
fn agrees_with_eigen_oracle_on_random_matrices() {
    let mut rng = Mix(31337);
    let mut positives = 0;
    for _ in 0..1000 {
        let p = 2 + rng.below(6);
        let mut v = vec![0.0; p * p];
        for i in 0..p {
            v[i * p + i] = rng.range(0.2, 2.0);
            for j in (i + 1)..p {
                let a = rng.range(-0.8, 0.8);
                v[i * p + j] = a;
                v[j * p + i] = a;
            }
        }
        let eig = jacobi_eigenvalues(p, &v);
        let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let max_diag = (0..p).map(|i| v[i * p + i]).fold(0.0, f64::max);
        let expected = min > 1e-10 * max_diag;
        positives += expected as usize;
        assert_eq!(check_normalizable_values(p, &v).unwrap(), expected, "p={p} min eig {min}");
    }
    // both outcomes exercised
    assert!(positives > 100 && positives < 900, "{positives}");
}

#[test]
fn gaussian_case_matches_closed_form_integral() {
    // ν = 2: exp(Q) = exp(−xᵀΘx), whose integral is π/√det Θ.
    for c in [0.0, 0.3, -0.6, 0.9] {
        let t = two_by_two(c);
        let f = |x: f64, y: f64| log_unnormalized_density(&[x, y], &t, nu(2)).unwrap().exp();
        let z = integrate_square(&f, 20.0, 1e-9);
        let exact = std::f64::consts::PI / (1.0 - c * c).sqrt();
        assert!((z - exact).abs() < 1e-6 * exact, "c={c}: {z} vs {exact}");
    }
}

#[test]
fn positive_definite_two_node_models_integrate_finitely() {
    let mut rng = Mix(8);
    for case in 0..20 {
        let c = rng.range(-0.95, 0.95);
        let k = [2, 4, 6, 8][case % 4];
        let t = two_by_two(c);
        assert!(check_normalizable(&t));
        let f = |x: f64, y: f64| log_unnormalized_density(&[x, y], &t, nu(k)).unwrap().exp();
        let z = integrate_square(&f, 20.0, 1e-8);
        let wider = integrate_square(&f, 30.0, 1e-8);
        assert!(z.is_finite() && z > 0.0, "c={c} nu={k}: {z}");
        // widening the box adds nothing: the integral has converged
        assert!((z - wider).abs() < 1e-6 * z, "c={c} nu={k}: {z} vs {wider}");
    }
}

#[test]
fn indefinite_two_node_models_blow_up_along_negative_direction() {
    let mut rng = Mix(9);
    for case in 0..20 {
        let c = rng.range(1.05, 3.0) * if case % 2 == 0 { 1.0 } else { -1.0 };
        let k = [2, 4, 6, 8][case % 4];
        let t = two_by_two(c);
        assert!(!check_normalizable(&t));
        // eigenvector for eigenvalue 1 − |c|
        let r = 1e3 / 2f64.sqrt();
        let x = [r, -c.signum() * r];
        let q = log_unnormalized_density(&x, &t, nu(k)).unwrap();
        assert!(q > 1e10f64.ln(), "c={c} nu={k}: Q={q}");
    }
}

#[test]
fn precision_map_constants() {
    let t = ParamMatrix::identity(2);
    let m = precision_from_theta(&t, nu(2)).unwrap();
    assert!((m[(0, 0)] - 2.0).abs() < 1e-13);
    let m = precision_from_theta(&t, nu(4)).unwrap();
    assert!((m[(1, 1)] - 2.9587).abs() < 1e-4);
    assert!(precision_from_theta(&two_by_two(1.2), nu(2)).is_err());
}
