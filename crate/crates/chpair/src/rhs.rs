//! Right-hand sides of the coupled system, in both equivalent forms.
//!
//! The system transports the momenta `m = u - u_xx`, `n = v - v_xx` with
//! the common speed `W/2`, `W = u v - u_x v_x`, and exchanges them through
//! the antisymmetric flux `S = u v_x - u_x v`:
//!
//! ```text
//! m_t + (m W)_x / 2 - m S / 2 = 0
//! n_t + (n W)_x / 2 + n S / 2 = 0
//! ```
//!
//! Inverting `1 - d^2/dx^2` turns this into the velocity form that the
//! time stepper actually integrates — first derivatives plus smoothing
//! convolutions only:
//!
//! ```text
//! u_t = -W u_x / 2 + G * f_smooth + d/dx (G * f_grad)
//! v_t = -W v_x / 2 + G * h_smooth + d/dx (G * h_grad)
//! ```
//!
//! with `f_smooth = -(u M - S m)/2`, `f_grad = -(u_x M)/2` and the `v`
//! sources obtained by the same formulas under the swap `u <-> v` (which
//! flips the sign of `S`). `M = u_x n + v_x m = W_x`.
//!
//! Both forms are assembled here; the momentum form serves as a
//! cross-check of the velocity form through `(1 - d^2/dx^2) u_t = m_t`.

use crate::error::{Error, Result};
use crate::green::{smooth_plus_grad, GreenKernel};
use crate::grid::{spectral_derivative, FieldState};
use crate::util::first_non_finite;

/// Assembled pieces of the velocity-form right-hand side.
#[derive(Clone, Debug)]
pub struct RhsTerms {
    /// Transport potential `W = u v - u_x v_x`.
    pub transport: Vec<f64>,
    /// Antisymmetric flux `S = u v_x - u_x v`.
    pub flux: Vec<f64>,
    /// `M = u_x n + v_x m`, the spatial gradient of `W`.
    pub transport_gradient: Vec<f64>,
    /// Source under `G*` in the `u` equation.
    pub u_source_smooth: Vec<f64>,
    /// Source under `d/dx G*` in the `u` equation.
    pub u_source_grad: Vec<f64>,
    /// Source under `G*` in the `v` equation.
    pub v_source_smooth: Vec<f64>,
    /// Source under `d/dx G*` in the `v` equation.
    pub v_source_grad: Vec<f64>,
    pub u_dot: Vec<f64>,
    pub v_dot: Vec<f64>,
}

fn ensure_finite(name: &'static str, arr: &[f64], t: f64) -> Result<()> {
    if first_non_finite(arr).is_some() {
        return Err(Error::Overflow { term: name, t });
    }
    Ok(())
}

/// Assembles the velocity-form right-hand side for one state.
pub fn assemble_terms(state: &FieldState, kernel: &GreenKernel) -> Result<RhsTerms> {
    let t = state.t();
    let transport = state.transport_potential();
    ensure_finite("transport potential W", &transport, t)?;
    let flux = state.antisymmetric_flux();
    ensure_finite("antisymmetric flux S", &flux, t)?;
    let gradient = state.momentum_coupling();
    ensure_finite("transport gradient M", &gradient, t)?;

    let n_pts = transport.len();
    let mut u_source_smooth = vec![0.0; n_pts];
    let mut u_source_grad = vec![0.0; n_pts];
    let mut v_source_smooth = vec![0.0; n_pts];
    let mut v_source_grad = vec![0.0; n_pts];
    for i in 0..n_pts {
        let (u, v) = (state.u()[i], state.v()[i]);
        let (ux, vx) = (state.u_x()[i], state.v_x()[i]);
        let (m, n) = (state.m()[i], state.n()[i]);
        let big_m = gradient[i];
        let s = flux[i];
        u_source_smooth[i] = -0.5 * (u * big_m - s * m);
        u_source_grad[i] = -0.5 * (ux * big_m);
        v_source_smooth[i] = -0.5 * (v * big_m + s * n);
        v_source_grad[i] = -0.5 * (vx * big_m);
    }
    ensure_finite("u smooth source", &u_source_smooth, t)?;
    ensure_finite("u gradient source", &u_source_grad, t)?;
    ensure_finite("v smooth source", &v_source_smooth, t)?;
    ensure_finite("v gradient source", &v_source_grad, t)?;

    let nonlocal_u = smooth_plus_grad(&u_source_smooth, &u_source_grad, kernel)?;
    let nonlocal_v = smooth_plus_grad(&v_source_smooth, &v_source_grad, kernel)?;

    let u_dot: Vec<f64> = (0..n_pts)
        .map(|i| -0.5 * transport[i] * state.u_x()[i] + nonlocal_u[i])
        .collect();
    let v_dot: Vec<f64> = (0..n_pts)
        .map(|i| -0.5 * transport[i] * state.v_x()[i] + nonlocal_v[i])
        .collect();
    ensure_finite("u_t", &u_dot, t)?;
    ensure_finite("v_t", &v_dot, t)?;

    Ok(RhsTerms {
        transport,
        flux,
        transport_gradient: gradient,
        u_source_smooth,
        u_source_grad,
        v_source_smooth,
        v_source_grad,
        u_dot,
        v_dot,
    })
}

/// Momentum-form time derivatives `(m_t, n_t)` for the same state.
pub fn momentum_rhs(state: &FieldState) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = state.t();
    let grid = state.grid();
    let transport = state.transport_potential();
    ensure_finite("transport potential W", &transport, t)?;
    let flux = state.antisymmetric_flux();
    ensure_finite("antisymmetric flux S", &flux, t)?;

    let mw: Vec<f64> = state
        .m()
        .iter()
        .zip(&transport)
        .map(|(&m, &w)| m * w)
        .collect();
    let nw: Vec<f64> = state
        .n()
        .iter()
        .zip(&transport)
        .map(|(&n, &w)| n * w)
        .collect();
    ensure_finite("m*W", &mw, t)?;
    ensure_finite("n*W", &nw, t)?;
    let d_mw = spectral_derivative(&mw, grid, 1)?;
    let d_nw = spectral_derivative(&nw, grid, 1)?;

    let m_dot: Vec<f64> = (0..mw.len())
        .map(|i| -0.5 * d_mw[i] + 0.5 * state.m()[i] * flux[i])
        .collect();
    let n_dot: Vec<f64> = (0..nw.len())
        .map(|i| -0.5 * d_nw[i] - 0.5 * state.n()[i] * flux[i])
        .collect();
    ensure_finite("m_t", &m_dot, t)?;
    ensure_finite("n_t", &n_dot, t)?;
    Ok((m_dot, n_dot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::green_convolve;
    use crate::grid::{make_grid, spectral_derivative, state_from_uv, GridSpec};
    use crate::util::{max_abs, sup_diff};
    use rustfft::num_complex::Complex64;

    fn gaussian(grid: &GridSpec, amp: f64, center: f64, width: f64) -> Vec<f64> {
        grid.nodes()
            .iter()
            .map(|&x| amp * (-((x - center) / width).powi(2)).exp())
            .collect()
    }

    fn test_state(n: usize) -> (GridSpec, GreenKernel, FieldState) {
        let g = make_grid(50.0, n).unwrap();
        let k = GreenKernel::new(&g);
        let u = gaussian(&g, 1.0, 0.0, 2.0);
        let v = gaussian(&g, 0.7, 1.5, 1.5);
        let st = state_from_uv(u, v, &g, 0.0).unwrap();
        (g, k, st)
    }

    /// The dispersionless Camassa-Holm right-hand side,
    /// `-u u_x - d/dx G*(u^2 + u_x^2 / 2)`, coded against raw transforms.
    fn ch_rhs(u: &[f64], grid: &GridSpec) -> Vec<f64> {
        let u_x = spectral_derivative(u, grid, 1).unwrap();
        let src: Vec<f64> = u
            .iter()
            .zip(&u_x)
            .map(|(&a, &b)| a * a + 0.5 * b * b)
            .collect();
        let mut spec = grid.forward(&src);
        let n = grid.n_points();
        for (j, c) in spec.iter_mut().enumerate() {
            let k = grid.wavenumber(j);
            let ik = if j == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            };
            *c *= ik / (1.0 + k * k);
        }
        let nonlocal = grid.inverse_real(spec);
        (0..u.len()).map(|i| -u[i] * u_x[i] - nonlocal[i]).collect()
    }

    #[test]
    fn zero_state_gives_zero_rhs() {
        let g = make_grid(50.0, 256).unwrap();
        let k = GreenKernel::new(&g);
        let z = vec![0.0; g.n_points()];
        let st = state_from_uv(z.clone(), z, &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        assert_eq!(max_abs(&terms.u_dot), 0.0);
        assert_eq!(max_abs(&terms.v_dot), 0.0);
        let (m_dot, n_dot) = momentum_rhs(&st).unwrap();
        assert_eq!(max_abs(&m_dot), 0.0);
        assert_eq!(max_abs(&n_dot), 0.0);
    }

    #[test]
    fn gradient_identity_two_routes() {
        let (g, k, st) = test_state(2048);
        let terms = assemble_terms(&st, &k).unwrap();
        let via_derivative = spectral_derivative(&terms.transport, &g, 1).unwrap();
        assert!(sup_diff(&terms.transport_gradient, &via_derivative) < 1e-9);
    }

    #[test]
    fn flux_negates_under_swap() {
        let (g, _, st) = test_state(512);
        let swapped = state_from_uv(st.v().to_vec(), st.u().to_vec(), &g, 0.0).unwrap();
        let s = st.antisymmetric_flux();
        let s_swapped = swapped.antisymmetric_flux();
        for (a, b) in s.iter().zip(&s_swapped) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn swap_equivariance_is_exact() {
        let (g, k, st) = test_state(512);
        let swapped = state_from_uv(st.v().to_vec(), st.u().to_vec(), &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        let terms_swapped = assemble_terms(&swapped, &k).unwrap();
        assert_eq!(terms.u_dot, terms_swapped.v_dot);
        assert_eq!(terms.v_dot, terms_swapped.u_dot);
        let (m_dot, n_dot) = momentum_rhs(&st).unwrap();
        let (m_dot_s, n_dot_s) = momentum_rhs(&swapped).unwrap();
        assert_eq!(m_dot, n_dot_s);
        assert_eq!(n_dot, m_dot_s);
    }

    #[test]
    fn constant_v_reduces_to_camassa_holm() {
        let g = make_grid(50.0, 2048).unwrap();
        let k = GreenKernel::new(&g);
        let u = gaussian(&g, 0.8, 0.0, 2.0);
        let v = vec![2.0; g.n_points()];
        let st = state_from_uv(u.clone(), v, &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        let oracle = ch_rhs(&u, &g);
        assert!(
            sup_diff(&terms.u_dot, &oracle) < 1e-10,
            "deviation {}",
            sup_diff(&terms.u_dot, &oracle)
        );
        // v stays frozen: its sources cancel identically
        assert_eq!(max_abs(&terms.v_dot), 0.0);
    }

    #[test]
    fn equal_components_collapse() {
        let g = make_grid(50.0, 1024).unwrap();
        let k = GreenKernel::new(&g);
        let u = gaussian(&g, 1.0, 0.5, 2.0);
        let st = state_from_uv(u.clone(), u, &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        assert_eq!(max_abs(&terms.flux), 0.0);
        assert_eq!(terms.u_dot, terms.v_dot);
    }

    #[test]
    fn equal_components_momentum_form() {
        // with v = u the momentum equation is a perfect spatial derivative
        let g = make_grid(50.0, 2048).unwrap();
        let u = gaussian(&g, 1.0, 0.0, 2.0);
        let st = state_from_uv(u.clone(), u.clone(), &g, 0.0).unwrap();
        let (m_dot, _) = momentum_rhs(&st).unwrap();

        let u_x = spectral_derivative(&u, &g, 1).unwrap();
        let w: Vec<f64> = u.iter().zip(&u_x).map(|(&a, &b)| a * a - b * b).collect();
        let mw: Vec<f64> = st.m().iter().zip(&w).map(|(&m, &w)| m * w).collect();
        let expect: Vec<f64> = spectral_derivative(&mw, &g, 1)
            .unwrap()
            .iter()
            .map(|&d| -0.5 * d)
            .collect();
        assert!(sup_diff(&m_dot, &expect) < 1e-10 * max_abs(&expect).max(1.0));

        // quadrature of m_t vanishes
        assert!(g.quadrature(&m_dot).abs() < 1e-10);
    }

    #[test]
    fn velocity_and_momentum_forms_agree() {
        let (g, k, st) = test_state(2048);
        let terms = assemble_terms(&st, &k).unwrap();
        let (m_dot, n_dot) = momentum_rhs(&st).unwrap();
        let udot_xx = spectral_derivative(&terms.u_dot, &g, 2).unwrap();
        let vdot_xx = spectral_derivative(&terms.v_dot, &g, 2).unwrap();
        let helm_u: Vec<f64> = terms
            .u_dot
            .iter()
            .zip(&udot_xx)
            .map(|(&a, &b)| a - b)
            .collect();
        let helm_v: Vec<f64> = terms
            .v_dot
            .iter()
            .zip(&vdot_xx)
            .map(|(&a, &b)| a - b)
            .collect();
        assert!(
            sup_diff(&helm_u, &m_dot) < 1e-8,
            "u deviation {}",
            sup_diff(&helm_u, &m_dot)
        );
        assert!(
            sup_diff(&helm_v, &n_dot) < 1e-8,
            "v deviation {}",
            sup_diff(&helm_v, &n_dot)
        );
    }

    #[test]
    fn recovering_velocity_rhs_from_momentum_rhs() {
        let (g, k, st) = test_state(2048);
        let terms = assemble_terms(&st, &k).unwrap();
        let (m_dot, _) = momentum_rhs(&st).unwrap();
        let back = green_convolve(&m_dot, &k).unwrap();
        assert!(sup_diff(&back, &terms.u_dot) < 1e-10);
        let _ = g;
    }

    #[test]
    fn dealias_flag_keeps_forms_consistent_on_resolved_data() {
        let g = GridSpec::new(50.0, 1024, true).unwrap();
        let k = GreenKernel::new(&g);
        let u = gaussian(&g, 0.8, 0.0, 2.5);
        let v = gaussian(&g, 0.6, 1.0, 2.0);
        let st = state_from_uv(u, v, &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        let (m_dot, _) = momentum_rhs(&st).unwrap();
        let udot_xx = spectral_derivative(&terms.u_dot, &g, 2).unwrap();
        let helm_u: Vec<f64> = terms
            .u_dot
            .iter()
            .zip(&udot_xx)
            .map(|(&a, &b)| a - b)
            .collect();
        assert!(sup_diff(&helm_u, &m_dot) < 1e-8);
    }

    #[test]
    fn translation_equivariance() {
        let (g, k, st) = test_state(1024);
        let rot = |f: &[f64]| -> Vec<f64> {
            let mut r = f.to_vec();
            r.rotate_right(1);
            r
        };
        let shifted = state_from_uv(rot(st.u()), rot(st.v()), &g, 0.0).unwrap();
        let terms = assemble_terms(&st, &k).unwrap();
        let terms_shifted = assemble_terms(&shifted, &k).unwrap();
        let scale = max_abs(&terms.u_dot).max(max_abs(&terms.v_dot));
        assert!(sup_diff(&rot(&terms.u_dot), &terms_shifted.u_dot) < 1e-11 * scale);
        assert!(sup_diff(&rot(&terms.v_dot), &terms_shifted.v_dot) < 1e-11 * scale);
    }

    #[test]
    fn overflow_reports_term_name() {
        let g = make_grid(50.0, 256).unwrap();
        let k = GreenKernel::new(&g);
        let huge = vec![1e200; g.n_points()];
        let st = state_from_uv(huge.clone(), huge, &g, 0.5).unwrap();
        match assemble_terms(&st, &k) {
            Err(Error::Overflow { term, t }) => {
                assert!(!term.is_empty());
                assert_eq!(t, 0.5);
            }
            other => panic!("expected overflow, got {other:?}"),
        }
    }
}
