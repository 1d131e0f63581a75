//! Property-based invariants on randomized band-limited fields.

use proptest::prelude::*;

use chpair::green::{green_convolve, green_convolve_quadrature, GreenKernel};
use chpair::grid::{make_grid, spectral_derivative, state_from_uv, GridSpec};
use chpair::rhs::assemble_terms;
use chpair::util::{max_abs, sup_diff};

const N: usize = 256;
const HALF_PERIOD: f64 = 50.0;

/// Band-limited field from low-mode coefficients.
fn synth(grid: &GridSpec, coeffs: &[(f64, f64)]) -> Vec<f64> {
    let mut f = vec![0.0; grid.n_points()];
    for (j, &(a, b)) in coeffs.iter().enumerate() {
        let k = std::f64::consts::PI * (j + 1) as f64 / grid.half_period();
        for (i, &x) in grid.nodes().iter().enumerate() {
            f[i] += a * (k * x).cos() + b * (k * x).sin();
        }
    }
    f
}

fn coeff_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0_f64, -1.0..1.0_f64), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn derivative_is_linear(
        ca in coeff_strategy(),
        cb in coeff_strategy(),
        a in -3.0..3.0_f64,
        b in -3.0..3.0_f64,
    ) {
        let grid = make_grid(HALF_PERIOD, N).unwrap();
        let f = synth(&grid, &ca);
        let g = synth(&grid, &cb);
        let combo: Vec<f64> = f.iter().zip(&g).map(|(&x, &y)| a * x + b * y).collect();
        let d_combo = spectral_derivative(&combo, &grid, 1).unwrap();
        let df = spectral_derivative(&f, &grid, 1).unwrap();
        let dg = spectral_derivative(&g, &grid, 1).unwrap();
        let sum: Vec<f64> = df.iter().zip(&dg).map(|(&x, &y)| a * x + b * y).collect();
        let scale = max_abs(&sum).max(1.0);
        prop_assert!(sup_diff(&d_combo, &sum) < 1e-12 * scale);
    }

    #[test]
    fn smoothing_is_self_adjoint(ca in coeff_strategy(), cb in coeff_strategy()) {
        let grid = make_grid(HALF_PERIOD, N).unwrap();
        let kernel = GreenKernel::new(&grid);
        let f = synth(&grid, &ca);
        let g = synth(&grid, &cb);
        let lhs = grid.inner_product(&green_convolve(&f, &kernel).unwrap(), &g);
        let rhs = grid.inner_product(&f, &green_convolve(&g, &kernel).unwrap());
        let scale = lhs.abs().max(1.0);
        prop_assert!((lhs - rhs).abs() < 1e-11 * scale);
    }

    #[test]
    fn quadrature_backend_preserves_nonnegativity(ca in coeff_strategy()) {
        let grid = make_grid(HALF_PERIOD, N).unwrap();
        let kernel = GreenKernel::new(&grid);
        let f: Vec<f64> = synth(&grid, &ca).iter().map(|&v| v.max(0.0)).collect();
        let out = green_convolve_quadrature(&f, &kernel).unwrap();
        prop_assert!(out.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn swap_equivariance_on_random_fields(ca in coeff_strategy(), cb in coeff_strategy()) {
        let grid = make_grid(HALF_PERIOD, N).unwrap();
        let kernel = GreenKernel::new(&grid);
        // damp amplitudes so intermediate products stay tame
        let u: Vec<f64> = synth(&grid, &ca).iter().map(|&v| 0.2 * v).collect();
        let v: Vec<f64> = synth(&grid, &cb).iter().map(|&v| 0.2 * v).collect();
        let state = state_from_uv(u.clone(), v.clone(), &grid, 0.0).unwrap();
        let swapped = state_from_uv(v, u, &grid, 0.0).unwrap();
        let terms = assemble_terms(&state, &kernel).unwrap();
        let terms_swapped = assemble_terms(&swapped, &kernel).unwrap();
        prop_assert_eq!(&terms.u_dot, &terms_swapped.v_dot);
        prop_assert_eq!(&terms.v_dot, &terms_swapped.u_dot);
    }

    #[test]
    fn first_derivative_twice_is_second(ca in coeff_strategy()) {
        let grid = make_grid(HALF_PERIOD, N).unwrap();
        let f = synth(&grid, &ca);
        let twice =
            spectral_derivative(&spectral_derivative(&f, &grid, 1).unwrap(), &grid, 1).unwrap();
        let second = spectral_derivative(&f, &grid, 2).unwrap();
        let scale = max_abs(&second).max(1.0);
        prop_assert!(sup_diff(&twice, &second) < 1e-10 * scale);
    }
}
