//! Flow map, momentum-transport exponents, and the exponentially
//! weighted tail functionals.
//!
//! Characteristics follow the transport speed of the velocity form,
//! `q' = W(t, q) / 2`. Two exponents accumulate along each path:
//! `A = int M ds` with `M = W_x`, and `B = int S ds` with the
//! antisymmetric flux `S`. They encode the local geometry of the flow:
//!
//! ```text
//! q_x(t, x0)            = exp(A / 2)
//! m(t, q) q_x exp(-B/2) = m0(x0)
//! n(t, q) q_x exp(+B/2) = n0(x0)
//! ```
//!
//! The module reports relative residuals of the last two identities,
//! which double as a conserved-quantity drift meter for the whole
//! PDE-ODE coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::GreenKernel;
use crate::grid::{FieldState, Interpolant};
use crate::stepper::{step_stages, StageStates, StepControl};
use crate::util::max_abs;

/// Relative cutoff below which an initial momentum sample counts as zero
/// and its transport residual is excluded. Two effects motivate it:
/// labels seeded exactly on a compact support edge carry only spectral
/// ringing there (~1e-6 of the peak at coarse desk resolutions), and the
/// residual divides an accumulated absolute quadrature noise of roughly
/// 1e-10 of the peak by the initial sample, so samples below 1e-4 of the
/// peak cannot meet a 1e-6 relative identity even when everything is
/// working.
const RESIDUAL_EXCLUSION: f64 = 1e-4;

/// Record of a characteristic leaving the trusted interior window.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EscapeEvent {
    pub label: f64,
    pub position: f64,
    pub t: f64,
}

/// Labeled characteristic positions with Jacobians and transport
/// exponents, advanced alongside the PDE.
#[derive(Clone, Debug)]
pub struct CharacteristicSet {
    labels: Vec<f64>,
    positions: Vec<f64>,
    /// Accumulated `int M ds` per characteristic.
    exponent_a: Vec<f64>,
    /// Accumulated `int S ds` per characteristic.
    exponent_b: Vec<f64>,
    initial_m: Vec<f64>,
    initial_n: Vec<f64>,
    frozen: Vec<bool>,
    escapes: Vec<EscapeEvent>,
    t: f64,
}

impl CharacteristicSet {
    /// Seeds `interior` equally spaced labels strictly inside `[a, b]`
    /// plus the two endpoints.
    pub fn seed(state: &FieldState, a: f64, b: f64, interior: usize) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Config(format!(
                "support interval must satisfy a < b, got [{a}, {b}]"
            )));
        }
        let step = (b - a) / (interior + 1) as f64;
        let labels: Vec<f64> = (0..interior + 2).map(|i| a + i as f64 * step).collect();
        Self::seed_with_labels(state, labels)
    }

    /// Seeds characteristics at explicit label positions (sorted
    /// internally).
    pub fn seed_with_labels(state: &FieldState, mut labels: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Config("no characteristic labels given".into()));
        }
        labels.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let half_window = state.grid().half_period() / 2.0;
        for &x in &labels {
            if !(x > -half_window && x < half_window) {
                return Err(Error::WindowEscape {
                    position: x,
                    lo: -half_window,
                    hi: half_window,
                });
            }
        }
        let m_interp = Interpolant::new(state.grid(), state.m())?;
        let n_interp = Interpolant::new(state.grid(), state.n())?;
        let initial_m: Vec<f64> = labels.iter().map(|&x| m_interp.eval(x)).collect();
        let initial_n: Vec<f64> = labels.iter().map(|&x| n_interp.eval(x)).collect();
        let count = labels.len();
        Ok(Self {
            positions: labels.clone(),
            labels,
            exponent_a: vec![0.0; count],
            exponent_b: vec![0.0; count],
            initial_m,
            initial_n,
            frozen: vec![false; count],
            escapes: Vec::new(),
            t: state.t(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Flow-map Jacobians `q_x = exp(A / 2)`.
    pub fn jacobians(&self) -> Vec<f64> {
        self.exponent_a.iter().map(|&a| (0.5 * a).exp()).collect()
    }

    pub fn exponent_a(&self) -> &[f64] {
        &self.exponent_a
    }

    pub fn exponent_b(&self) -> &[f64] {
        &self.exponent_b
    }

    pub fn initial_m(&self) -> &[f64] {
        &self.initial_m
    }

    pub fn initial_n(&self) -> &[f64] {
        &self.initial_n
    }

    pub fn escapes(&self) -> &[EscapeEvent] {
        &self.escapes
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    /// Positions of the first and last label (the support endpoints when
    /// seeded from one).
    pub fn endpoint_positions(&self) -> (f64, f64) {
        (self.positions[0], self.positions[self.len() - 1])
    }

    /// Label order equals position order (the flow map stays a
    /// monotone rearrangement).
    pub fn is_ordered(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] < w[1])
    }

    /// Advances positions and exponents through one RK4 step using the
    /// PDE stage states. Characteristics that leave the trusted window
    /// `[-L/2, L/2]` are frozen and recorded, and the run continues.
    pub fn advance(&mut self, state: &FieldState, stages: &StageStates, dt: f64) {
        let grid = state.grid();
        let stage_fields = [state, &stages.mid1, &stages.mid2, &stages.end];
        let interp: Vec<(Interpolant, Interpolant, Interpolant)> = stage_fields
            .iter()
            .map(|st| {
                let w = Interpolant::from_spectrum(grid, &grid.forward(&st.transport_potential()));
                let m = w.derivative();
                let s = Interpolant::from_spectrum(grid, &grid.forward(&st.antisymmetric_flux()));
                (w, m, s)
            })
            .collect();

        let half_window = grid.half_period() / 2.0;
        let t_next = self.t + dt;
        for j in 0..self.len() {
            if self.frozen[j] {
                continue;
            }
            let q0 = self.positions[j];
            let eval = |stage: usize, q: f64| -> (f64, f64, f64) {
                let (w, m, s) = &interp[stage];
                (0.5 * w.eval(q), m.eval(q), s.eval(q))
            };
            let (kq1, ka1, kb1) = eval(0, q0);
            let (kq2, ka2, kb2) = eval(1, q0 + 0.5 * dt * kq1);
            let (kq3, ka3, kb3) = eval(2, q0 + 0.5 * dt * kq2);
            let (kq4, ka4, kb4) = eval(3, q0 + dt * kq3);
            let sixth = dt / 6.0;
            self.positions[j] = q0 + sixth * (kq1 + 2.0 * kq2 + 2.0 * kq3 + kq4);
            self.exponent_a[j] += sixth * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4);
            self.exponent_b[j] += sixth * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4);
            if self.positions[j].abs() > half_window {
                self.frozen[j] = true;
                self.escapes.push(EscapeEvent {
                    label: self.labels[j],
                    position: self.positions[j],
                    t: t_next,
                });
            }
        }
        self.t = t_next;
    }
}

/// Advances a characteristic set through one step, computing the PDE
/// stage states internally. Convenience wrapper over
/// [`CharacteristicSet::advance`] for callers that do not run the full
/// integrator loop.
pub fn advance_characteristics(
    chars: &mut CharacteristicSet,
    state: &FieldState,
    kernel: &GreenKernel,
    dt: f64,
) -> Result<FieldState> {
    let control = StepControl::new(dt, state.t() + dt)?;
    let (next, stages) = step_stages(state, kernel, &control)?;
    chars.advance(state, &stages, dt);
    Ok(next)
}

/// Per-characteristic relative residuals of the two transport
/// identities; `None` where the initial momentum vanishes.
pub fn transport_residual(
    chars: &CharacteristicSet,
    state: &FieldState,
) -> Result<(Vec<Option<f64>>, Vec<Option<f64>>)> {
    let m_interp = Interpolant::new(state.grid(), state.m())?;
    let n_interp = Interpolant::new(state.grid(), state.n())?;
    let m_floor = RESIDUAL_EXCLUSION * max_abs(chars.initial_m());
    let n_floor = RESIDUAL_EXCLUSION * max_abs(chars.initial_n());
    let mut rm = Vec::with_capacity(chars.len());
    let mut rn = Vec::with_capacity(chars.len());
    for j in 0..chars.len() {
        let qx = (0.5 * chars.exponent_a[j]).exp();
        let q = chars.positions[j];
        if chars.initial_m[j].abs() > m_floor {
            let carried = m_interp.eval(q) * qx * (-0.5 * chars.exponent_b[j]).exp();
            rm.push(Some(carried / chars.initial_m[j] - 1.0));
        } else {
            rm.push(None);
        }
        if chars.initial_n[j].abs() > n_floor {
            let carried = n_interp.eval(q) * qx * (0.5 * chars.exponent_b[j]).exp();
            rn.push(Some(carried / chars.initial_n[j] - 1.0));
        } else {
            rn.push(None);
        }
    }
    Ok((rm, rn))
}

/// Largest absolute residual in a residual vector, ignoring exclusions.
pub fn max_residual(res: &[Option<f64>]) -> f64 {
    res.iter()
        .flatten()
        .fold(0.0_f64, |acc, &r| acc.max(r.abs()))
}

/// The four tail functionals at one time, with the support endpoints
/// they were integrated over.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TailFunctionals {
    pub t: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub q_a: f64,
    pub q_b: f64,
}

/// Trapezoid integral of `e^{sign * y} f(y)` over `[q_a, q_b]`, with
/// linearly interpolated partial cells at the off-grid endpoints.
fn weighted_interval_integral(
    state: &FieldState,
    values: &[f64],
    q_a: f64,
    q_b: f64,
    sign: f64,
) -> f64 {
    let grid = state.grid();
    let nodes = grid.nodes();
    let dx = grid.dx();
    let half = grid.half_period();
    let at = |x: f64, v: f64| (sign * x).exp() * v;
    let idx_of = |x: f64| ((x + half) / dx).ceil() as usize;
    let i0 = idx_of(q_a).min(nodes.len() - 1);
    let i1 = (((q_b + half) / dx).floor() as usize).min(nodes.len() - 1);
    if i0 > i1 {
        // interval shorter than one cell: single trapezoid on
        // interpolated endpoint values
        let lerp = |x: f64| {
            let s = (x + half) / dx;
            let i = (s.floor() as usize).min(nodes.len() - 2);
            let frac = s - i as f64;
            values[i] * (1.0 - frac) + values[i + 1] * frac
        };
        return 0.5 * (q_b - q_a) * (at(q_a, lerp(q_a)) + at(q_b, lerp(q_b)));
    }
    let mut acc = 0.0;
    for i in i0..i1 {
        acc += 0.5 * dx * (at(nodes[i], values[i]) + at(nodes[i + 1], values[i + 1]));
    }
    // partial end cells
    if nodes[i0] > q_a && i0 > 0 {
        let frac = (nodes[i0] - q_a) / dx;
        let v_a = values[i0] * (1.0 - frac) + values[i0 - 1] * frac;
        acc += 0.5 * (nodes[i0] - q_a) * (at(q_a, v_a) + at(nodes[i0], values[i0]));
    }
    if nodes[i1] < q_b && i1 + 1 < nodes.len() {
        let frac = (q_b - nodes[i1]) / dx;
        let v_b = values[i1] * (1.0 - frac) + values[i1 + 1] * frac;
        acc += 0.5 * (q_b - nodes[i1]) * (at(nodes[i1], values[i1]) + at(q_b, v_b));
    }
    acc
}

/// Exponentially weighted integrals of the momenta over `[q_a, q_b]`.
pub fn tail_functionals(state: &FieldState, q_a: f64, q_b: f64) -> Result<TailFunctionals> {
    let half_window = state.grid().half_period() / 2.0;
    if !(q_a < q_b) {
        return Err(Error::Config(format!(
            "support interval must satisfy q_a < q_b, got [{q_a}, {q_b}]"
        )));
    }
    for x in [q_a, q_b] {
        if !(x > -half_window && x < half_window) {
            return Err(Error::WindowEscape {
                position: x,
                lo: -half_window,
                hi: half_window,
            });
        }
    }
    Ok(TailFunctionals {
        t: state.t(),
        e_plus: weighted_interval_integral(state, state.m(), q_a, q_b, 1.0),
        e_minus: weighted_interval_integral(state, state.m(), q_a, q_b, -1.0),
        f_plus: weighted_interval_integral(state, state.n(), q_a, q_b, 1.0),
        f_minus: weighted_interval_integral(state, state.n(), q_a, q_b, -1.0),
        q_a,
        q_b,
    })
}

/// Pointwise minima of the momenta over the trusted window.
pub fn sign_census(state: &FieldState) -> (f64, f64) {
    let half_window = state.grid().half_period() / 2.0;
    let mut min_m = f64::INFINITY;
    let mut min_n = f64::INFINITY;
    for (i, &x) in state.grid().nodes().iter().enumerate() {
        if x.abs() <= half_window {
            min_m = min_m.min(state.m()[i]);
            min_n = min_n.min(state.n()[i]);
        }
    }
    (min_m, min_n)
}
