//! Fixed-step fourth-order Runge-Kutta time integration with advective
//! CFL and blow-up guards.
//!
//! The scheme is deliberately plain: a pre-step CFL check against the
//! transport speed `W/2`, four stages, and a gradient guard on the
//! accepted state. Fixed steps keep runs deterministic and make
//! convergence studies trivial to set up.

use crate::error::{Error, Result};
use crate::flow::CharacteristicSet;
use crate::green::GreenKernel;
use crate::grid::{state_from_uv, FieldState};
use crate::rhs::assemble_terms;
use crate::util::max_abs;

/// Step-size and guard parameters for a run.
#[derive(Clone, Copy, Debug)]
pub struct StepControl {
    pub dt: f64,
    /// Safety factor in the CFL bound `dt <= cfl_safety * dx / max(1, |W/2|)`.
    pub cfl_safety: f64,
    /// Blow-up guard on `max(|u_x|, |v_x|)`.
    pub max_gradient: f64,
    pub t_end: f64,
    /// Observer cadence in steps; 0 means initial and final only.
    pub snapshot_every: usize,
}

impl StepControl {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            dt,
            cfl_safety: 0.3,
            max_gradient: 1e3,
            t_end,
            snapshot_every: 0,
        })
    }

    pub fn with_cfl_safety(mut self, s: f64) -> Self {
        self.cfl_safety = s;
        self
    }

    pub fn with_max_gradient(mut self, g: f64) -> Self {
        self.max_gradient = g;
        self
    }

    pub fn with_snapshot_every(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }
}

/// The three non-initial stage states of one RK4 step, exposed so that
/// co-integrated quantities (the characteristic set) can sample the
/// fields at the stage times.
#[derive(Debug)]
pub struct StageStates {
    /// State at `t + dt/2` built from the first slope.
    pub mid1: FieldState,
    /// State at `t + dt/2` built from the second slope.
    pub mid2: FieldState,
    /// State at `t + dt` built from the third slope.
    pub end: FieldState,
}

fn updated_state(
    base: &FieldState,
    du: &[f64],
    dv: &[f64],
    scale: f64,
    t: f64,
) -> Result<FieldState> {
    let u: Vec<f64> = base
        .u()
        .iter()
        .zip(du)
        .map(|(&a, &b)| a + scale * b)
        .collect();
    let v: Vec<f64> = base
        .v()
        .iter()
        .zip(dv)
        .map(|(&a, &b)| a + scale * b)
        .collect();
    state_from_uv(u, v, base.grid(), t).map_err(|e| match e {
        Error::Validation(_) => Error::Overflow {
            term: "stage update",
            t,
        },
        other => other,
    })
}

/// One RK4 step, also returning the intermediate stage states.
pub fn step_stages(
    state: &FieldState,
    kernel: &GreenKernel,
    control: &StepControl,
) -> Result<(FieldState, StageStates)> {
    let dt = control.dt;
    let t = state.t();

    let k1 = assemble_terms(state, kernel)?;

    // CFL against the current transport speed
    let speed = 0.5 * max_abs(&k1.transport);
    let limit = control.cfl_safety * state.grid().dx() / speed.max(1.0);
    if dt > limit {
        return Err(Error::StepTooLarge { dt, limit, t });
    }

    let mid1 = updated_state(state, &k1.u_dot, &k1.v_dot, 0.5 * dt, t + 0.5 * dt)?;
    let k2 = assemble_terms(&mid1, kernel)?;
    let mid2 = updated_state(state, &k2.u_dot, &k2.v_dot, 0.5 * dt, t + 0.5 * dt)?;
    let k3 = assemble_terms(&mid2, kernel)?;
    let end = updated_state(state, &k3.u_dot, &k3.v_dot, dt, t + dt)?;
    let k4 = assemble_terms(&end, kernel)?;

    let n = state.u().len();
    let sixth = dt / 6.0;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for i in 0..n {
        u.push(
            state.u()[i]
                + sixth * (k1.u_dot[i] + 2.0 * k2.u_dot[i] + 2.0 * k3.u_dot[i] + k4.u_dot[i]),
        );
        v.push(
            state.v()[i]
                + sixth * (k1.v_dot[i] + 2.0 * k2.v_dot[i] + 2.0 * k3.v_dot[i] + k4.v_dot[i]),
        );
    }
    let next = state_from_uv(u, v, state.grid(), t + dt).map_err(|e| match e {
        Error::Validation(_) => Error::Overflow {
            term: "step update",
            t: t + dt,
        },
        other => other,
    })?;

    let grad = max_abs(next.u_x()).max(max_abs(next.v_x()));
    if grad > control.max_gradient {
        return Err(Error::BlowUpSuspected {
            t: t + dt,
            diagnostic: format!(
                "max gradient {grad:.3e} exceeds guard {:.3e}",
                control.max_gradient
            ),
        });
    }

    Ok((next, StageStates { mid1, mid2, end }))
}

/// One RK4 step.
pub fn step(state: &FieldState, kernel: &GreenKernel, control: &StepControl) -> Result<FieldState> {
    step_stages(state, kernel, control).map(|(next, _)| next)
}

/// Why a run stopped.
#[derive(Clone, Debug, PartialEq)]
pub enum TerminationReason {
    Completed,
    BlowUpSuspected { t: f64, diagnostic: String },
    NumericalOverflow { t: f64, term: &'static str },
}

impl TerminationReason {
    pub fn label(&self) -> &'static str {
        match self {
            TerminationReason::Completed => "completed",
            TerminationReason::BlowUpSuspected { .. } => "blow-up-suspected",
            TerminationReason::NumericalOverflow { .. } => "numerical-overflow",
        }
    }
}

/// Outcome of [`run`].
#[derive(Debug)]
pub struct RunResult {
    pub final_state: FieldState,
    pub steps_taken: usize,
    pub snapshots_emitted: usize,
    pub reason: TerminationReason,
}

/// What an observer sees at each snapshot.
pub struct SnapshotCtx<'a> {
    pub index: usize,
    pub step: usize,
    pub state: &'a FieldState,
    pub chars: Option<&'a CharacteristicSet>,
}

/// Integrates `initial` to `control.t_end`, invoking `observers` at
/// snapshot intervals and co-advancing an optional characteristic set.
///
/// Step failures terminate the run and are reported in the result, never
/// panicked or returned as `Err`; `Err` is reserved for configuration
/// problems (e.g. a horizon that is not a whole number of steps).
pub fn run(
    initial: FieldState,
    kernel: &GreenKernel,
    control: &StepControl,
    mut chars: Option<&mut CharacteristicSet>,
    observers: &mut [&mut dyn FnMut(&SnapshotCtx<'_>)],
) -> Result<RunResult> {
    let span = control.t_end - initial.t();
    if span < 0.0 {
        return Err(Error::Config(format!(
            "t_end {} precedes initial time {}",
            control.t_end,
            initial.t()
        )));
    }
    let n_steps = (span / control.dt).round() as usize;
    if (n_steps as f64 * control.dt - span).abs() > 1e-9 * span.max(control.dt) {
        return Err(Error::Config(format!(
            "horizon {span} is not a whole number of steps of dt = {}",
            control.dt
        )));
    }

    let mut snapshots = 0usize;
    let emit = |state: &FieldState,
                chars: Option<&CharacteristicSet>,
                step: usize,
                idx: &mut usize,
                obs: &mut [&mut dyn FnMut(&SnapshotCtx<'_>)]| {
        let ctx = SnapshotCtx {
            index: *idx,
            step,
            state,
            chars,
        };
        for o in obs.iter_mut() {
            o(&ctx);
        }
        *idx += 1;
    };

    emit(&initial, chars.as_deref(), 0, &mut snapshots, observers);

    let mut state = initial;
    for i in 0..n_steps {
        match step_stages(&state, kernel, control) {
            Ok((next, stages)) => {
                if let Some(ch) = chars.as_deref_mut() {
                    ch.advance(&state, &stages, control.dt);
                }
                state = next;
            }
            Err(err) => {
                let reason = match err {
                    Error::BlowUpSuspected { t, diagnostic } => {
                        TerminationReason::BlowUpSuspected { t, diagnostic }
                    }
                    Error::Overflow { term, t } => TerminationReason::NumericalOverflow { t, term },
                    Error::StepTooLarge { dt, limit, t } => TerminationReason::BlowUpSuspected {
                        t,
                        diagnostic: format!("CFL violation: dt {dt} exceeds limit {limit}"),
                    },
                    other => return Err(other),
                };
                return Ok(RunResult {
                    final_state: state,
                    steps_taken: i,
                    snapshots_emitted: snapshots,
                    reason,
                });
            }
        }
        let done = i + 1 == n_steps;
        let periodic = control.snapshot_every > 0 && (i + 1) % control.snapshot_every == 0;
        if done || periodic {
            emit(&state, chars.as_deref(), i + 1, &mut snapshots, observers);
        }
    }

    Ok(RunResult {
        final_state: state,
        steps_taken: n_steps,
        snapshots_emitted: snapshots,
        reason: TerminationReason::Completed,
    })
}
