//! Weighted norms, exponential-tail regression, and the Sobolev-type
//! solution bound.
//!
//! Decay is always measured on the interior trusted window `|x| <= L/2`;
//! beyond it the periodic images of fast-decaying data would contaminate
//! the tail. Tail fits additionally respect a relative noise floor of
//! `1e-13`, roughly where double-precision spectral solutions bottom out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec};
use crate::util::max_abs;

/// Relative noise floor for log-linear tail fits.
pub const FIT_NOISE_FLOOR: f64 = 1e-13;

/// Minimum usable samples for a tail fit.
pub const FIT_MIN_SAMPLES: usize = 16;

/// The capped exponential weight `e^{theta * min(|x|, cap)}`.
///
/// Bounded, even, nondecreasing in `|x|`, and `|phi'| <= phi` almost
/// everywhere, which is what the convolution estimates require.
pub fn capped_weight(theta: f64, cap: f64, x: f64) -> f64 {
    (theta * x.abs().min(cap)).exp()
}

/// Which side of the origin a tail fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Plus => write!(f, "+"),
            Side::Minus => write!(f, "-"),
        }
    }
}

/// Parameters of the weight family used by the sup- and p-norm
/// diagnostics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct WeightSpec {
    /// Exponential rate, in `(0, 1)`.
    pub theta: f64,
    /// Cap radius: the weight is constant beyond `|x| = cap`.
    pub cap: u32,
    /// Momentum weight exponent is `1 + lambda`.
    pub lambda: f64,
}

impl WeightSpec {
    pub fn new(theta: f64, cap: u32, lambda: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!(
                "weight theta must lie in (0, 1), got {theta}"
            )));
        }
        if cap == 0 {
            return Err(Error::Domain("weight cap must be at least 1".into()));
        }
        if !(lambda >= 0.0) {
            return Err(Error::Domain(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        Ok(Self { theta, cap, lambda })
    }

    pub fn phi(&self, x: f64) -> f64 {
        capped_weight(self.theta, self.cap as f64, x)
    }
}

/// Result of a log-linear tail fit.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DecayFit {
    /// Estimated decay index: positive means the data behave like
    /// `e^{-slope * |x|}` on the window.
    pub slope: f64,
    /// Intercept of the regression line at `|x| = 0`.
    pub intercept: f64,
    pub window: (f64, f64),
    pub side: Side,
    pub r_squared: f64,
    pub n_points_used: usize,
}

/// `max |f(x)| * phi(x)` over the trusted window `|x| <= L/2`.
pub fn weighted_sup_norm(f: &[f64], w: &WeightSpec, grid: &GridSpec) -> Result<f64> {
    grid.check_len(f)?;
    let half_window = grid.half_period() / 2.0;
    Ok(grid
        .nodes()
        .iter()
        .zip(f)
        .filter(|(&x, _)| x.abs() <= half_window)
        .map(|(&x, &v)| v.abs() * w.phi(x))
        .fold(0.0, f64::max))
}

/// Discrete `L^{2q}` norm of `f * e^{(1+lambda) * min(|x|, L/2)}` over the
/// trusted window.
pub fn weighted_p_norm(f: &[f64], two_q: u32, lambda: f64, grid: &GridSpec) -> Result<f64> {
    grid.check_len(f)?;
    if two_q < 2 || two_q % 2 != 0 {
        return Err(Error::Domain(format!(
            "exponent must be even and >= 2, got {two_q}"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let half_window = grid.half_period() / 2.0;
    if (1.0 + lambda) * half_window > 700.0 {
        return Err(Error::WeightOverflow(format!(
            "weight e^{{(1+{lambda})|x|}} overflows on |x| <= {half_window}; \
             reduce lambda or the window"
        )));
    }
    // midpoint-rule cells clipped to the window, so a node sitting
    // exactly on the window edge contributes half a cell
    let half_dx = 0.5 * grid.dx();
    let mut acc = 0.0;
    for (&x, &v) in grid.nodes().iter().zip(f) {
        if x.abs() > half_window {
            continue;
        }
        let cell = (x + half_dx).min(half_window) - (x - half_dx).max(-half_window);
        let weighted = v * ((1.0 + lambda) * x.abs().min(half_window)).exp();
        acc += cell * weighted.powi(two_q as i32);
    }
    let norm = acc.powf(1.0 / two_q as f64);
    if !norm.is_finite() {
        return Err(Error::WeightOverflow(
            "weighted p-norm overflowed; reduce lambda or the window".into(),
        ));
    }
    Ok(norm)
}

/// Least-squares line through `(|x|, log |f|)` on one side of the origin.
///
/// Only samples above the noise floor participate; fewer than
/// [`FIT_MIN_SAMPLES`] of them is an error.
pub fn fit_decay_index(
    f: &[f64],
    grid: &GridSpec,
    window: (f64, f64),
    side: Side,
) -> Result<DecayFit> {
    grid.check_len(f)?;
    let (lo, hi) = window;
    let half_window = grid.half_period() / 2.0;
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::Domain(format!(
            "fit window must satisfy 0 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if hi > half_window {
        return Err(Error::WindowEscape {
            position: hi,
            lo: 0.0,
            hi: half_window,
        });
    }
    let floor = FIT_NOISE_FLOOR * max_abs(f);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&x, &v) in grid.nodes().iter().zip(f) {
        let ax = x.abs();
        let in_side = match side {
            Side::Plus => x >= lo && x <= hi,
            Side::Minus => x <= -lo && x >= -hi,
        };
        if in_side && v.abs() > floor {
            xs.push(ax);
            ys.push(v.abs().ln());
        }
    }
    if xs.len() < FIT_MIN_SAMPLES {
        return Err(Error::InsufficientTailData {
            usable: xs.len(),
            needed: FIT_MIN_SAMPLES,
        });
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let b = sxy / sxx;
    let intercept = mean_y - b * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + b * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(DecayFit {
        slope: -b,
        intercept,
        window,
        side,
        r_squared,
        n_points_used: xs.len(),
    })
}

/// Discrete `H^3 x H^3` bound `||u||_{H^3} + ||v||_{H^3}` computed with
/// the Fourier multiplier `(1 + k^2)^3`.
pub fn solution_bound(state: &FieldState) -> f64 {
    let grid = state.grid();
    let n = grid.n_points() as f64;
    let norm_h3 = |f: &[f64]| -> f64 {
        let spec = grid.forward(f);
        let mut acc = 0.0;
        for (j, c) in spec.iter().enumerate() {
            let k = grid.wavenumber(j);
            let w = 1.0 + k * k;
            acc += w * w * w * c.norm_sqr();
        }
        (2.0 * grid.half_period() * acc / (n * n)).sqrt()
    };
    norm_h3(state.u()) + norm_h3(state.v())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, state_from_uv};
    use std::f64::consts::PI;

    #[test]
    fn weight_satisfies_derivative_bound() {
        let w = WeightSpec::new(0.7, 12, 0.0).unwrap();
        let h = 1e-6;
        for i in -4000..4000 {
            let x = i as f64 * 0.011;
            let fd = (w.phi(x + h) - w.phi(x - h)) / (2.0 * h);
            assert!(fd.abs() <= w.phi(x) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn weight_spec_validation() {
        assert!(WeightSpec::new(0.0, 5, 0.0).is_err());
        assert!(WeightSpec::new(1.0, 5, 0.0).is_err());
        assert!(WeightSpec::new(0.5, 0, 0.0).is_err());
        assert!(WeightSpec::new(0.5, 5, -1.0).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let g = make_grid(50.0, 2048).unwrap();
        let w = WeightSpec::new(0.5, 30, 0.0).unwrap();

        let zero = vec![0.0; g.n_points()];
        assert_eq!(weighted_sup_norm(&zero, &w, &g).unwrap(), 0.0);

        // exact cancellation: f = e^{-theta |x|} against phi = e^{theta |x|}
        let f: Vec<f64> = g.nodes().iter().map(|&x| (-0.5 * x.abs()).exp()).collect();
        let s = weighted_sup_norm(&f, &w, &g).unwrap();
        assert!((s - 1.0).abs() < 1e-10);

        // monotone product peaks at the origin
        let w2 = WeightSpec::new(0.5, 20, 0.0).unwrap();
        let f2: Vec<f64> = g.nodes().iter().map(|&x| (-0.8 * x.abs()).exp()).collect();
        let s2 = weighted_sup_norm(&f2, &w2, &g).unwrap();
        assert!((s2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_monotone_in_cap_and_theta() {
        let g = make_grid(50.0, 2048).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|&x| (-0.6 * x.abs()).exp()).collect();
        let mut prev = 0.0;
        for cap in [5, 10, 20] {
            let w = WeightSpec::new(0.5, cap, 0.0).unwrap();
            let s = weighted_sup_norm(&f, &w, &g).unwrap();
            assert!(s >= prev);
            prev = s;
        }
        let mut prev = 0.0;
        for theta in [0.2, 0.3, 0.5] {
            let w = WeightSpec::new(theta, 20, 0.0).unwrap();
            let s = weighted_sup_norm(&f, &w, &g).unwrap();
            assert!(s >= prev);
            prev = s;
        }
    }

    #[test]
    fn p_norm_closed_forms() {
        let g = make_grid(50.0, 8192).unwrap();
        let half = g.half_period() / 2.0;

        let zero = vec![0.0; g.n_points()];
        assert_eq!(weighted_p_norm(&zero, 2, 0.0, &g).unwrap(), 0.0);

        // f = e^{-2|x|} with total weight e^{|x|} (lambda = 0):
        // the squared integrand is e^{-2|x|}, integral 1 - e^{-2W}.
        let f: Vec<f64> = g.nodes().iter().map(|&x| (-2.0 * x.abs()).exp()).collect();
        let got = weighted_p_norm(&f, 2, 0.0, &g).unwrap();
        let expect = (1.0 - (-2.0 * half).exp()).sqrt();
        assert!(
            (got - expect).abs() < 1e-4 * expect,
            "got {got}, expect {expect}"
        );

        // lambda = 1 doubles the weight exponent: integrand becomes 1,
        // so the norm is sqrt(2W) up to the kink-cell quadrature error.
        let got = weighted_p_norm(&f, 2, 1.0, &g).unwrap();
        let expect = (2.0 * half).sqrt();
        assert!(
            (got - expect).abs() < 1e-4 * expect,
            "got {got}, expect {expect}"
        );
    }

    #[test]
    fn p_norm_rejects_overflowing_weight() {
        let g = make_grid(50.0, 256).unwrap();
        let f = vec![1.0; g.n_points()];
        assert!(matches!(
            weighted_p_norm(&f, 2, 40.0, &g),
            Err(Error::WeightOverflow(_))
        ));
    }

    #[test]
    fn fit_exact_exponentials() {
        let g = make_grid(50.0, 4096).unwrap();
        let f: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| 3.0 * (-0.5 * x.abs()).exp())
            .collect();
        for side in [Side::Plus, Side::Minus] {
            let fit = fit_decay_index(&f, &g, (7.0, 25.0), side).unwrap();
            assert!((fit.slope - 0.5).abs() < 1e-10, "slope {}", fit.slope);
            assert!(fit.r_squared >= 1.0 - 1e-12);
            assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-9);
        }

        let green_tail: Vec<f64> = g.nodes().iter().map(|&x| 0.5 * (-x.abs()).exp()).collect();
        let fit = fit_decay_index(&green_tail, &g, (7.0, 25.0), Side::Plus).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_perturbed_tail() {
        let g = make_grid(50.0, 4096).unwrap();
        let f: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| (-0.5 * x.abs()).exp() * (1.0 + 0.1 * x.cos()))
            .collect();
        let fit = fit_decay_index(&f, &g, (7.0, 25.0), Side::Plus).unwrap();
        assert!((fit.slope - 0.5).abs() < 0.02, "slope {}", fit.slope);
        assert!(fit.r_squared >= 0.99, "r^2 {}", fit.r_squared);
    }

    #[test]
    fn fit_errors() {
        let g = make_grid(50.0, 1024).unwrap();
        let f = vec![0.0; g.n_points()];
        assert!(matches!(
            fit_decay_index(&f, &g, (7.0, 25.0), Side::Plus),
            Err(Error::InsufficientTailData { .. })
        ));
        let f: Vec<f64> = g.nodes().iter().map(|&x| (-0.5 * x.abs()).exp()).collect();
        assert!(matches!(
            fit_decay_index(&f, &g, (7.0, 30.0), Side::Plus),
            Err(Error::WindowEscape { .. })
        ));
    }

    #[test]
    fn fit_respects_noise_floor() {
        let g = make_grid(50.0, 4096).unwrap();
        // decays through the noise floor well before x = 25
        let f: Vec<f64> = g.nodes().iter().map(|&x| (-3.0 * x.abs()).exp()).collect();
        let fit = fit_decay_index(&f, &g, (7.0, 25.0), Side::Plus).unwrap();
        // usable samples stop near |x| ~ 10 where e^{-3|x|} ~ 1e-13
        assert!(fit.n_points_used < 900);
        assert!((fit.slope - 3.0).abs() < 1e-6);
    }

    #[test]
    fn solution_bound_closed_forms() {
        let g = make_grid(50.0, 1024).unwrap();
        let zero = vec![0.0; g.n_points()];
        let st = state_from_uv(zero.clone(), zero.clone(), &g, 0.0).unwrap();
        assert_eq!(solution_bound(&st), 0.0);

        let k = 6.0 * PI / g.half_period();
        let u: Vec<f64> = g.nodes().iter().map(|&x| (k * x).cos()).collect();
        let st = state_from_uv(u.clone(), zero, &g, 0.0).unwrap();
        let expect = (g.half_period() * (1.0 + k * k).powi(3)).sqrt();
        let got = solution_bound(&st);
        assert!(
            (got - expect).abs() < 1e-9 * expect,
            "got {got}, expect {expect}"
        );

        // v = u doubles the bound exactly (same computation on both parts)
        let st2 = state_from_uv(u.clone(), u, &g, 0.0).unwrap();
        assert_eq!(solution_bound(&st2), 2.0 * got);
    }
}
