//! Property verification suites.
//!
//! Each suite runs a canned scenario and evaluates a fixed list of
//! checks with pinned tolerances, returning one [`CheckLine`] per check.
//! The CLI prints them as a table; the acceptance test suite asserts
//! them. Heavy runs are computed once per process and shared between
//! suites.
//!
//! The module also hosts independent reference implementations (a
//! dispersionless Camassa-Holm integrator, direct line-kernel
//! quadrature) coded against raw transforms rather than the solver
//! modules, so that agreement checks compare two genuinely different
//! routes.

use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::decay::{fit_decay_index, Side};
use crate::error::{Error, Result};
use crate::flow::{
    max_residual, sign_census, tail_functionals, transport_residual, CharacteristicSet,
    TailFunctionals,
};
use crate::green::{green_convolve, weighted_kernel_bound, GreenKernel};
use crate::grid::{make_grid, spectral_derivative, state_from_uv, FieldState};
use crate::rhs::{assemble_terms, momentum_rhs};
use crate::scenario::{build_initial, builtin, bump_support_on_default_grid, RunConfig};
use crate::stepper::{run, SnapshotCtx, StepControl, TerminationReason};
use crate::util::{max_abs, sup_diff};

/// Outcome of a single check.
#[derive(Clone, Debug)]
pub struct CheckLine {
    /// Criterion tag, e.g. `C3`.
    pub criterion: &'static str,
    pub name: String,
    /// Measured value, threshold text, etc.
    pub detail: String,
    pub passed: bool,
}

impl CheckLine {
    fn bound(criterion: &'static str, name: impl Into<String>, measured: f64, limit: f64) -> Self {
        Self {
            criterion,
            name: name.into(),
            detail: format!("measured {measured:.3e}, limit {limit:.3e}"),
            passed: measured <= limit && measured.is_finite(),
        }
    }

    fn range(
        criterion: &'static str,
        name: impl Into<String>,
        measured: f64,
        lo: f64,
        hi: f64,
    ) -> Self {
        Self {
            criterion,
            name: name.into(),
            detail: format!("measured {measured:.4}, expected in [{lo}, {hi}]"),
            passed: (lo..=hi).contains(&measured),
        }
    }

    fn flag(
        criterion: &'static str,
        name: impl Into<String>,
        detail: String,
        passed: bool,
    ) -> Self {
        Self {
            criterion,
            name: name.into(),
            detail,
            passed,
        }
    }
}

/// Prints one pass/fail line per check; returns overall success.
pub fn print_report(lines: &[CheckLine]) -> bool {
    let mut ok = true;
    for line in lines {
        let mark = if line.passed { "PASS" } else { "FAIL" };
        println!(
            "[{mark}] {:>3} {:<52} {}",
            line.criterion, line.name, line.detail
        );
        ok &= line.passed;
    }
    ok
}

// ---------------------------------------------------------------------
// Independent reference implementations
// ---------------------------------------------------------------------

/// Dispersionless Camassa-Holm reference solver,
/// `u_t = -u u_x - d/dx G*(u^2 + u_x^2/2)`, built directly on raw FFTs.
pub struct ChOracle {
    n: usize,
    wavenumbers: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl ChOracle {
    pub fn new(half_period: f64, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..n)
            .map(|j| {
                let js = if j <= n / 2 {
                    j as i64
                } else {
                    j as i64 - n as i64
                };
                std::f64::consts::PI * js as f64 / half_period
            })
            .collect();
        Self {
            n,
            wavenumbers,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn apply(&self, f: &[f64], mult: impl Fn(f64, usize) -> Complex64) -> Vec<f64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (j, c) in buf.iter_mut().enumerate() {
            *c *= mult(self.wavenumbers[j], j);
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn derivative(&self, f: &[f64]) -> Vec<f64> {
        let half = self.n / 2;
        self.apply(f, |k, j| {
            if j == half {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            }
        })
    }

    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let u_x = self.derivative(u);
        let src: Vec<f64> = u
            .iter()
            .zip(&u_x)
            .map(|(&a, &b)| a * a + 0.5 * b * b)
            .collect();
        let half = self.n / 2;
        let nonlocal = self.apply(&src, |k, j| {
            let ik = if j == half {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, k)
            };
            ik / (1.0 + k * k)
        });
        (0..self.n).map(|i| -u[i] * u_x[i] - nonlocal[i]).collect()
    }

    fn rk4(&self, u: &[f64], dt: f64) -> (Vec<f64>, [Vec<f64>; 3]) {
        let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
        };
        let k1 = self.rhs(u);
        let s2 = add(u, &k1, 0.5 * dt);
        let k2 = self.rhs(&s2);
        let s3 = add(u, &k2, 0.5 * dt);
        let k3 = self.rhs(&s3);
        let s4 = add(u, &k3, dt);
        let k4 = self.rhs(&s4);
        let next = (0..self.n)
            .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        (next, [s2, s3, s4])
    }

    pub fn integrate(&self, u0: &[f64], dt: f64, steps: usize) -> Vec<f64> {
        let mut u = u0.to_vec();
        for _ in 0..steps {
            u = self.rk4(&u, dt).0;
        }
        u
    }

    /// Integrates the solution and a set of characteristics
    /// `q' = u(t, q)` together, using sixth-order local Lagrange
    /// interpolation for off-grid speeds.
    pub fn integrate_with_characteristics(
        &self,
        u0: &[f64],
        half_period: f64,
        dt: f64,
        steps: usize,
        labels: &[f64],
    ) -> (Vec<f64>, Vec<f64>) {
        let mut u = u0.to_vec();
        let mut q: Vec<f64> = labels.to_vec();
        for _ in 0..steps {
            let (next, [s2, s3, s4]) = self.rk4(&u, dt);
            for pos in q.iter_mut() {
                let k1 = lagrange6(&u, half_period, *pos);
                let k2 = lagrange6(&s2, half_period, *pos + 0.5 * dt * k1);
                let k3 = lagrange6(&s3, half_period, *pos + 0.5 * dt * k2);
                let k4 = lagrange6(&s4, half_period, *pos + dt * k3);
                *pos += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            u = next;
        }
        (u, q)
    }
}

/// Sixth-order local Lagrange interpolation on a uniform periodic grid.
pub fn lagrange6(f: &[f64], half_period: f64, x: f64) -> f64 {
    let n = f.len();
    let dx = 2.0 * half_period / n as f64;
    let s = (x + half_period) / dx;
    let base = s.floor() as i64;
    let frac = s - base as f64;
    let mut acc = 0.0;
    for (idx, offset) in (-2i64..=3).enumerate() {
        let mut w = 1.0;
        for (jdx, other) in (-2i64..=3).enumerate() {
            if idx != jdx {
                w *= (frac - other as f64) / (offset - other) as f64;
            }
        }
        let node = ((base + offset).rem_euclid(n as i64)) as usize;
        acc += w * f[node];
    }
    acc
}

// ---------------------------------------------------------------------
// Shared heavy runs
// ---------------------------------------------------------------------

/// Snapshot-level record of the flow diagnostics during the bump run.
#[derive(Clone, Debug)]
struct FlowRecord {
    tails: TailFunctionals,
    min_m: f64,
    min_n: f64,
    max_m: f64,
    max_n: f64,
    ordered: bool,
}

struct RunArtifacts {
    config: RunConfig,
    snapshots: Vec<FieldState>,
    flow_records: Vec<FlowRecord>,
    chars: Option<CharacteristicSet>,
    reason: TerminationReason,
}

fn execute(config: &RunConfig, chars: Option<CharacteristicSet>) -> RunArtifacts {
    let grid = config.grid().expect("scenario grid");
    let kernel = GreenKernel::new(&grid);
    let initial = build_initial(config, &grid).expect("scenario initial data");
    let control = StepControl::new(config.dt, config.t_end)
        .expect("step control")
        .with_cfl_safety(config.cfl_safety)
        .with_max_gradient(config.max_gradient)
        .with_snapshot_every(config.snapshot_every);

    let mut chars = chars;
    let mut snapshots = Vec::new();
    let mut flow_records = Vec::new();
    let outcome = {
        let mut observer = |ctx: &SnapshotCtx<'_>| {
            snapshots.push(ctx.state.clone());
            if let Some(ch) = ctx.chars {
                let (q_a, q_b) = ch.endpoint_positions();
                let tails =
                    tail_functionals(ctx.state, q_a, q_b).expect("tail functionals inside window");
                let (min_m, min_n) = sign_census(ctx.state);
                flow_records.push(FlowRecord {
                    tails,
                    min_m,
                    min_n,
                    max_m: max_abs(ctx.state.m()),
                    max_n: max_abs(ctx.state.n()),
                    ordered: ch.is_ordered(),
                });
            }
        };
        run(
            initial,
            &kernel,
            &control,
            chars.as_mut(),
            &mut [&mut observer],
        )
        .expect("scenario run")
    };

    RunArtifacts {
        config: config.clone(),
        snapshots,
        flow_records,
        chars,
        reason: outcome.reason,
    }
}

/// Exponential-tail persistence run (index 0.5), 11 snapshots.
fn exp_tail_run() -> &'static RunArtifacts {
    static CELL: OnceLock<RunArtifacts> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = builtin("thm22").expect("thm22 scenario");
        execute(&config, None)
    })
}

const CLUSTER_CENTERS: [f64; 3] = [-1.2, 0.3, 1.4];

/// Compact nonnegative momentum run with characteristics: the standard
/// 34 labels plus three 5-label probe clusters (spacing 0.1) used for
/// the finite-difference Jacobian check.
fn bump_run() -> &'static RunArtifacts {
    static CELL: OnceLock<RunArtifacts> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = builtin("thm41").expect("thm41 scenario");
        let grid = config.grid().expect("grid");
        let initial = build_initial(&config, &grid).expect("initial");
        let (a, b) = config.support;
        let step = (b - a) / 33.0;
        let mut labels: Vec<f64> = (0..34).map(|i| a + i as f64 * step).collect();
        for center in CLUSTER_CENTERS {
            for offset in [-0.2, -0.1, 0.0, 0.1, 0.2] {
                labels.push(center + offset);
            }
        }
        let chars = CharacteristicSet::seed_with_labels(&initial, labels).expect("seed");
        execute(&config, Some(chars))
    })
}

/// Momentum tail-index-2 run for the optimality dichotomy.
fn momentum_tail_run() -> &'static RunArtifacts {
    static CELL: OnceLock<RunArtifacts> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = builtin("thm31").expect("thm31 scenario");
        execute(&config, None)
    })
}

fn snapshot_at(artifacts: &RunArtifacts, t: f64) -> Option<&FieldState> {
    artifacts
        .snapshots
        .iter()
        .find(|s| (s.t() - t).abs() < 1e-9)
}

// ---------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------

/// C1: the smoothing operator is exact on Fourier modes and inverts
/// `1 - d^2/dx^2` on smooth fields.
pub fn criterion_helmholtz_exactness() -> Vec<CheckLine> {
    let grid = make_grid(50.0, 8192).expect("grid");
    let kernel = GreenKernel::new(&grid);
    let mut lines = Vec::new();

    let mut worst_mode = 0.0_f64;
    for j in [1usize, 5, 64, 1000] {
        let k = std::f64::consts::PI * j as f64 / grid.half_period();
        let f: Vec<f64> = grid.nodes().iter().map(|&x| (k * x).cos()).collect();
        let expect: Vec<f64> = f.iter().map(|&c| c / (1.0 + k * k)).collect();
        let got = green_convolve(&f, &kernel).expect("convolve");
        worst_mode = worst_mode.max(sup_diff(&got, &expect));
    }
    lines.push(CheckLine::bound(
        "C1",
        "Fourier modes scaled by 1/(1+k^2)",
        worst_mode,
        1e-12,
    ));

    let u: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| {
            0.8 * (-0.5 * (x * x + 1.0).sqrt()).exp() + 0.4 * (-0.25 * (x - 2.0) * (x - 2.0)).exp()
        })
        .collect();
    let u_xx = spectral_derivative(&u, &grid, 2).expect("derivative");
    let m: Vec<f64> = u.iter().zip(&u_xx).map(|(&a, &b)| a - b).collect();
    let back = green_convolve(&m, &kernel).expect("convolve");
    lines.push(CheckLine::bound(
        "C1",
        "G*(u - u_xx) recovers u",
        sup_diff(&back, &u),
        1e-11,
    ));
    lines
}

/// C2: the weighted kernel bound `4/(1-theta)` over the theta x cap
/// matrix.
pub fn criterion_kernel_bound() -> Vec<CheckLine> {
    let grid = make_grid(50.0, 8192).expect("grid");
    let mut lines = Vec::new();
    for theta in [0.25, 0.5, 0.75] {
        for cap in [5u32, 10, 20] {
            let c0 = 4.0 / (1.0 - theta);
            let value = weighted_kernel_bound(theta, cap, &grid).expect("bound");
            lines.push(CheckLine::bound(
                "C2",
                format!("theta={theta}, cap={cap}: bound 4/(1-theta)"),
                value,
                c0 + 1e-3 * c0,
            ));
        }
    }
    lines
}

/// C3: with `v = 2` the right-hand side and the trajectory match an
/// independently coded dispersionless Camassa-Holm solver.
pub fn criterion_ch_reduction() -> Vec<CheckLine> {
    let config = builtin("reduction-ch").expect("scenario");
    let grid = config.grid().expect("grid");
    let kernel = GreenKernel::new(&grid);
    let state = build_initial(&config, &grid).expect("initial");
    let oracle = ChOracle::new(grid.half_period(), grid.n_points());
    let mut lines = Vec::new();

    let terms = assemble_terms(&state, &kernel).expect("rhs");
    let reference = oracle.rhs(state.u());
    lines.push(CheckLine::bound(
        "C3",
        "u_t matches Camassa-Holm RHS at t=0",
        sup_diff(&terms.u_dot, &reference),
        1e-10,
    ));
    lines.push(CheckLine::bound(
        "C3",
        "v_t vanishes identically at t=0",
        max_abs(&terms.v_dot),
        0.0,
    ));

    let control = StepControl::new(config.dt, config.t_end)
        .expect("control")
        .with_snapshot_every(0);
    let out = run(state.clone(), &kernel, &control, None, &mut []).expect("run");
    let steps = (config.t_end / config.dt).round() as usize;
    let reference_final = oracle.integrate(state.u(), config.dt, steps);
    lines.push(CheckLine::flag(
        "C3",
        "system run completed",
        format!("reason {}", out.reason.label()),
        out.reason == TerminationReason::Completed,
    ));
    lines.push(CheckLine::bound(
        "C3",
        "trajectories agree at t=1",
        sup_diff(out.final_state.u(), &reference_final),
        1e-8,
    ));
    let v_drift = out
        .final_state
        .v()
        .iter()
        .fold(0.0_f64, |a, &v| a.max((v - 2.0).abs()));
    lines.push(CheckLine::bound("C3", "v stays at 2", v_drift, 1e-12));
    lines
}

/// C4: `u0 = v0` stays symmetric and conserves the momentum quadrature.
pub fn criterion_forq_symmetry() -> Vec<CheckLine> {
    let config = builtin("reduction-forq").expect("scenario");
    let grid = config.grid().expect("grid");
    let kernel = GreenKernel::new(&grid);
    let state = build_initial(&config, &grid).expect("initial");
    let mass0 = grid.quadrature(state.m());

    let control = StepControl::new(config.dt, config.t_end)
        .expect("control")
        .with_snapshot_every(config.snapshot_every);
    let mut worst_asym = 0.0_f64;
    let mut worst_mass = 0.0_f64;
    let out = {
        let mut observer = |ctx: &SnapshotCtx<'_>| {
            worst_asym = worst_asym.max(sup_diff(ctx.state.u(), ctx.state.v()));
            let mass = ctx.state.grid().quadrature(ctx.state.m());
            worst_mass = worst_mass.max((mass - mass0).abs() / mass0.abs());
        };
        run(state, &kernel, &control, None, &mut [&mut observer]).expect("run")
    };

    vec![
        CheckLine::flag(
            "C4",
            "run completed",
            format!("reason {}", out.reason.label()),
            out.reason == TerminationReason::Completed,
        ),
        CheckLine::bound("C4", "sup |u - v| over the run", worst_asym, 1e-10),
        CheckLine::bound(
            "C4",
            "relative drift of the momentum quadrature",
            worst_mass,
            1e-8,
        ),
    ]
}

/// C5: fourth-order self-convergence in time; spatial self-convergence
/// between 4096 and 8192 nodes.
pub fn criterion_convergence() -> Vec<CheckLine> {
    let mut lines = Vec::new();

    // temporal order on a coarse grid where larger steps satisfy the CFL
    let grid = make_grid(50.0, 1024).expect("grid");
    let kernel = GreenKernel::new(&grid);
    let u: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| 1.2 * (-(x * x) / 4.0).exp())
        .collect();
    let v: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| 0.9 * (-((x - 1.0) * (x - 1.0)) / 4.0).exp())
        .collect();
    let state = state_from_uv(u, v, &grid, 0.0).expect("state");
    let mut finals = Vec::new();
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let control = StepControl::new(dt, 0.4).expect("control");
        let out = run(state.clone(), &kernel, &control, None, &mut []).expect("run");
        finals.push(out.final_state);
    }
    let d1 = sup_diff(finals[0].u(), finals[1].u()).max(sup_diff(finals[0].v(), finals[1].v()));
    let d2 = sup_diff(finals[1].u(), finals[2].u()).max(sup_diff(finals[1].v(), finals[2].v()));
    let order = (d1 / d2).log2();
    lines.push(CheckLine::range(
        "C5",
        "Richardson order from dt, dt/2, dt/4",
        order,
        3.5,
        4.5,
    ));

    // spatial: same scenario as the persistence run on half the nodes
    let fine = exp_tail_run();
    let mut coarse_config = fine.config.clone();
    coarse_config.n_points = 4096;
    coarse_config.snapshot_every = 0;
    let coarse_grid = coarse_config.grid().expect("grid");
    let coarse_kernel = GreenKernel::new(&coarse_grid);
    let coarse_initial = build_initial(&coarse_config, &coarse_grid).expect("initial");
    let control = StepControl::new(coarse_config.dt, coarse_config.t_end).expect("control");
    let coarse_out = run(coarse_initial, &coarse_kernel, &control, None, &mut []).expect("run");
    let fine_final = fine.snapshots.last().expect("snapshots");
    let mut worst = 0.0_f64;
    for i in 0..coarse_grid.n_points() {
        worst = worst.max((coarse_out.final_state.u()[i] - fine_final.u()[2 * i]).abs());
        worst = worst.max((coarse_out.final_state.v()[i] - fine_final.v()[2 * i]).abs());
    }
    lines.push(CheckLine::bound(
        "C5",
        "spatial self-convergence 4096 vs 8192",
        worst,
        1e-9,
    ));
    lines
}

/// C6: the velocity and momentum forms stay equivalent along a
/// trajectory: `(1 - d^2/dx^2) u_t = m_t` at the sampled times.
pub fn criterion_formulation_equivalence() -> Vec<CheckLine> {
    let artifacts = exp_tail_run();
    let grid = artifacts.config.grid().expect("grid");
    let kernel = GreenKernel::new(&grid);
    let mut worst = 0.0_f64;
    let mut sampled = 0;
    for state in &artifacts.snapshots {
        if state.t() < artifacts.config.dt {
            continue; // sample the 10 positive snapshot times
        }
        let terms = assemble_terms(state, &kernel).expect("rhs");
        let (m_dot, n_dot) = momentum_rhs(state).expect("momentum rhs");
        let udot_xx = spectral_derivative(&terms.u_dot, &grid, 2).expect("derivative");
        let vdot_xx = spectral_derivative(&terms.v_dot, &grid, 2).expect("derivative");
        for i in 0..grid.n_points() {
            worst = worst.max((terms.u_dot[i] - udot_xx[i] - m_dot[i]).abs());
            worst = worst.max((terms.v_dot[i] - vdot_xx[i] - n_dot[i]).abs());
        }
        sampled += 1;
    }
    vec![
        CheckLine::flag(
            "C6",
            "trajectory sampled at 10 times",
            format!("{sampled} samples"),
            sampled == 10,
        ),
        CheckLine::bound(
            "C6",
            "max |(1 - d^2/dx^2) u_t - m_t| along the run",
            worst,
            1e-8,
        ),
    ]
}

/// C7: flow-map ordering, Jacobian identity, and transport residuals.
pub fn criterion_flow_identities() -> Vec<CheckLine> {
    let artifacts = bump_run();
    let mut lines = Vec::new();
    lines.push(CheckLine::flag(
        "C7",
        "run completed",
        format!("reason {}", artifacts.reason.label()),
        artifacts.reason == TerminationReason::Completed,
    ));
    let ordered = artifacts.flow_records.iter().all(|r| r.ordered);
    lines.push(CheckLine::flag(
        "C7",
        "ordering of the characteristics preserved",
        format!("{} snapshots checked", artifacts.flow_records.len()),
        ordered && !artifacts.flow_records.is_empty(),
    ));

    let chars = artifacts.chars.as_ref().expect("characteristics");
    lines.push(CheckLine::flag(
        "C7",
        "no characteristic left the trusted window",
        format!("{} escapes", chars.escapes().len()),
        chars.escapes().is_empty(),
    ));

    // fourth-order finite-difference Jacobian on the probe clusters
    // (cluster labels interleave with the standard ones after sorting,
    // so look each one up by value)
    let labels = chars.labels();
    let positions = chars.positions();
    let jacobians = chars.jacobians();
    let position_of = |label: f64| -> f64 {
        let idx = labels
            .iter()
            .position(|&l| (l - label).abs() < 1e-9)
            .expect("cluster label seeded");
        positions[idx]
    };
    let mut worst_fd = 0.0_f64;
    for center in CLUSTER_CENTERS {
        let idx = labels
            .iter()
            .position(|&l| (l - center).abs() < 1e-9)
            .expect("cluster center seeded");
        let h = 0.1;
        let fd = (position_of(center - 2.0 * h) - 8.0 * position_of(center - h)
            + 8.0 * position_of(center + h)
            - position_of(center + 2.0 * h))
            / (12.0 * h);
        worst_fd = worst_fd.max((fd - jacobians[idx]).abs() / jacobians[idx]);
    }
    lines.push(CheckLine::bound(
        "C7",
        "exp(A/2) vs finite-difference Jacobian",
        worst_fd,
        1e-4,
    ));

    let final_state = artifacts.snapshots.last().expect("snapshots");
    let (rm, rn) = transport_residual(chars, final_state).expect("residuals");
    lines.push(CheckLine::bound(
        "C7",
        "momentum transport residual |rm| at t=1",
        max_residual(&rm),
        1e-6,
    ));
    lines.push(CheckLine::bound(
        "C7",
        "momentum transport residual |rn| at t=1",
        max_residual(&rn),
        1e-6,
    ));
    let mut worst_product = 0.0_f64;
    for (a, b) in rm.iter().zip(&rn) {
        if let (Some(a), Some(b)) = (a, b) {
            worst_product = worst_product.max(((a + 1.0) * (b + 1.0) - 1.0).abs());
        }
    }
    lines.push(CheckLine::bound(
        "C7",
        "product identity m n q_x^2 = m0 n0",
        worst_product,
        1e-6,
    ));
    lines
}

/// C8: compact-support behavior — vanishing initial functionals for
/// compactly supported velocities, exponential tails with the
/// functionals as coefficients, strict monotonicity, sign preservation.
pub fn criterion_compact_support() -> Vec<CheckLine> {
    let mut lines = Vec::new();

    // (a) compactly supported velocities: all four functionals vanish at
    // t = 0 when integrated over the exact support. The profile here is
    // flatter at its support edge than the scenario bump (squared
    // denominator), so its spectral tail sits below rounding at this
    // resolution and the quadrature can actually resolve "zero".
    let grid = make_grid(50.0, 8192).expect("grid");
    let (a, b) = bump_support_on_default_grid();
    let flat_bump = |x: f64, c: f64, w: f64| {
        let s = (x - c) / w;
        if s.abs() < 1.0 {
            let q = 1.0 - s * s;
            (-1.0 / (q * q)).exp()
        } else {
            0.0
        }
    };
    let u0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| 0.3 * flat_bump(x, 0.0, b))
        .collect();
    let v0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| 0.25 * flat_bump(x, 0.2, 2.2))
        .collect();
    let state0 = state_from_uv(u0, v0, &grid, 0.0).expect("state");
    let tf0 = tail_functionals(&state0, a, b).expect("tails");
    for (name, value) in [
        ("E+(0)", tf0.e_plus),
        ("E-(0)", tf0.e_minus),
        ("F+(0)", tf0.f_plus),
        ("F-(0)", tf0.f_minus),
    ] {
        lines.push(CheckLine::bound(
            "C8",
            format!("compact velocities: {name} vanishes"),
            value.abs(),
            1e-12,
        ));
    }

    // (b) compact nonnegative momenta: tails, monotonicity, sign
    let artifacts = bump_run();
    lines.push(CheckLine::flag(
        "C8",
        "momentum-bump run completed",
        format!("reason {}", artifacts.reason.label()),
        artifacts.reason == TerminationReason::Completed,
    ));

    for record in &artifacts.flow_records {
        let t = record.tails.t;
        if t == 0.0 {
            continue;
        }
        let state = snapshot_at(artifacts, t).expect("snapshot");
        let grid = state.grid();
        // flat rescaled tail 2 e^x u(t, x) beyond the support
        let lo = record.tails.q_b + 2.0;
        let hi = 20.0;
        let mut values = Vec::new();
        for (i, &x) in grid.nodes().iter().enumerate() {
            if x >= lo && x <= hi {
                values.push(2.0 * x.exp() * state.u()[i]);
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var =
            values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        let rel_std = var.sqrt() / mean.abs();
        lines.push(CheckLine::bound(
            "C8",
            format!("t={t:.2}: rescaled u-tail flat beyond q_b"),
            rel_std,
            1e-4,
        ));
        lines.push(CheckLine::bound(
            "C8",
            format!("t={t:.2}: tail coefficient matches E+"),
            (mean - record.tails.e_plus).abs() / record.tails.e_plus.abs(),
            1e-6,
        ));
    }

    let tails: Vec<&TailFunctionals> = artifacts.flow_records.iter().map(|r| &r.tails).collect();
    let strictly = |sel: fn(&TailFunctionals) -> f64, increasing: bool| -> bool {
        tails.windows(2).all(|w| {
            let (a, b) = (sel(w[0]), sel(w[1]));
            if increasing {
                b > a
            } else {
                b < a
            }
        })
    };
    lines.push(CheckLine::flag(
        "C8",
        "E+ and F+ strictly increasing",
        format!(
            "E+ {:.6} -> {:.6}",
            tails.first().unwrap().e_plus,
            tails.last().unwrap().e_plus
        ),
        strictly(|t| t.e_plus, true) && strictly(|t| t.f_plus, true),
    ));
    lines.push(CheckLine::flag(
        "C8",
        "E- and F- strictly decreasing",
        format!(
            "E- {:.6} -> {:.6}",
            tails.first().unwrap().e_minus,
            tails.last().unwrap().e_minus
        ),
        strictly(|t| t.e_minus, false) && strictly(|t| t.f_minus, false),
    ));

    let mut worst_sign = 0.0_f64;
    for record in &artifacts.flow_records {
        worst_sign = worst_sign.max((-record.min_m / record.max_m).max(0.0));
        worst_sign = worst_sign.max((-record.min_n / record.max_n).max(0.0));
    }
    lines.push(CheckLine::bound(
        "C8",
        "momenta stay nonnegative (relative dip)",
        worst_sign,
        1e-8,
    ));
    lines
}

/// C9: the decay index of the initial data persists along the run.
pub fn criterion_persistence() -> Vec<CheckLine> {
    let artifacts = exp_tail_run();
    let grid = artifacts.config.grid().expect("grid");
    let window = artifacts.config.fit_window;
    let mut lines = Vec::new();
    lines.push(CheckLine::flag(
        "C9",
        "run completed",
        format!("reason {}", artifacts.reason.label()),
        artifacts.reason == TerminationReason::Completed,
    ));
    let mut worst: f64 = 0.0;
    let mut sampled = 0;
    for state in &artifacts.snapshots {
        let snap_t = state.t();
        let is_sample = [0.2, 0.4, 0.6, 0.8, 1.0]
            .iter()
            .any(|&t| (snap_t - t).abs() < 1e-9);
        if !is_sample {
            continue;
        }
        sampled += 1;
        for (field, name) in [
            (state.u(), "u"),
            (state.v(), "v"),
            (state.u_x(), "u_x"),
            (state.v_x(), "v_x"),
        ] {
            for side in [Side::Plus, Side::Minus] {
                match fit_decay_index(field, &grid, window, side) {
                    Ok(fit) => worst = worst.max((fit.slope - 0.5).abs()),
                    Err(e) => {
                        lines.push(CheckLine::flag(
                            "C9",
                            format!("fit {name} side {side} at t={snap_t}"),
                            format!("{e}"),
                            false,
                        ));
                    }
                }
            }
        }
    }
    lines.push(CheckLine::flag(
        "C9",
        "five snapshot times sampled",
        format!("{sampled} samples"),
        sampled == 5,
    ));
    lines.push(CheckLine::bound(
        "C9",
        "decay indices of u, v, u_x, v_x stay at 0.5",
        worst,
        0.05,
    ));
    lines
}

/// C10: the momenta keep their faster tail index while the velocities
/// settle on the kernel tail index 1.
pub fn criterion_optimality_dichotomy() -> Vec<CheckLine> {
    let artifacts = momentum_tail_run();
    let grid = artifacts.config.grid().expect("grid");
    let final_state = artifacts.snapshots.last().expect("snapshots");
    let mut lines = Vec::new();
    lines.push(CheckLine::flag(
        "C10",
        "run completed",
        format!("reason {}", artifacts.reason.label()),
        artifacts.reason == TerminationReason::Completed,
    ));

    // the momenta fall through the fit noise floor past |x| ~ 14, so
    // their window stops early; the velocity window starts past the
    // crossover where the kernel tail e^{-x} overtakes the momentum
    // tail e^{-2x}
    let momentum_window = (7.0, 12.0);
    let velocity_window = (10.0, 21.0);
    let mut worst_momentum: f64 = 0.0;
    let mut worst_velocity: f64 = 0.0;
    for side in [Side::Plus, Side::Minus] {
        for field in [final_state.m(), final_state.n()] {
            match fit_decay_index(field, &grid, momentum_window, side) {
                Ok(fit) => worst_momentum = worst_momentum.max((fit.slope - 2.0).abs()),
                Err(e) => lines.push(CheckLine::flag(
                    "C10",
                    format!("momentum fit side {side}"),
                    format!("{e}"),
                    false,
                )),
            }
        }
        for field in [final_state.u(), final_state.v()] {
            match fit_decay_index(field, &grid, velocity_window, side) {
                Ok(fit) => worst_velocity = worst_velocity.max((fit.slope - 1.0).abs()),
                Err(e) => lines.push(CheckLine::flag(
                    "C10",
                    format!("velocity fit side {side}"),
                    format!("{e}"),
                    false,
                )),
            }
        }
    }
    lines.push(CheckLine::bound(
        "C10",
        "momentum tail index stays at 2",
        worst_momentum,
        0.1,
    ));
    lines.push(CheckLine::bound(
        "C10",
        "velocity tail index settles at 1",
        worst_velocity,
        0.05,
    ));
    lines
}

// ---------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------

pub const SUITE_NAMES: [&str; 8] = [
    "kernelbound",
    "reductions",
    "convergence",
    "thm22",
    "lemmas4",
    "thm41",
    "thm31",
    "all",
];

/// Runs the named verification suite.
///
/// The six canonical names mirror the result each suite exercises;
/// `convergence` and `all` are provided on top.
pub fn suite(name: &str) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    match name {
        "kernelbound" => {
            lines.extend(criterion_helmholtz_exactness());
            lines.extend(criterion_kernel_bound());
        }
        "reductions" => {
            lines.extend(criterion_ch_reduction());
            lines.extend(criterion_forq_symmetry());
        }
        "convergence" => lines.extend(criterion_convergence()),
        "thm22" => {
            lines.extend(criterion_formulation_equivalence());
            lines.extend(criterion_persistence());
        }
        "lemmas4" => lines.extend(criterion_flow_identities()),
        "thm41" => lines.extend(criterion_compact_support()),
        "thm31" => lines.extend(criterion_optimality_dichotomy()),
        "all" => {
            for s in SUITE_NAMES {
                if s != "all" {
                    lines.extend(suite(s)?);
                }
            }
        }
        other => {
            return Err(Error::Config(format!(
                "unknown suite `{other}`; known: {}",
                SUITE_NAMES.join(", ")
            )))
        }
    }
    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_interpolation_reproduces_smooth_samples() {
        let n = 256;
        let half = 50.0;
        let dx = 2.0 * half / n as f64;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = -half + i as f64 * dx;
                (-0.05 * x * x).exp() * (0.3 * x).sin()
            })
            .collect();
        for i in (0..n).step_by(13) {
            let x = -half + i as f64 * dx;
            assert!((lagrange6(&f, half, x) - f[i]).abs() < 1e-14);
            let mid = x + 0.5 * dx;
            let exact = (-0.05 * mid * mid).exp() * (0.3 * mid).sin();
            assert!((lagrange6(&f, half, mid) - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn ch_oracle_preserves_zero() {
        let oracle = ChOracle::new(50.0, 128);
        let z = vec![0.0; 128];
        let out = oracle.integrate(&z, 1e-2, 10);
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(suite("bogus").is_err());
    }
}
