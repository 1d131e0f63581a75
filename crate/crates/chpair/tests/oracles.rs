//! Heavier cross-checks against independent reference routes: the
//! Camassa-Holm characteristics oracle, the one-sided quadrature
//! identities behind sign preservation, and a full-resolution smoke run.

use chpair::flow::CharacteristicSet;
use chpair::green::{green_convolve, GreenKernel};
use chpair::grid::{state_with_momenta, FieldState, GridSpec};
use chpair::scenario::{build_initial, builtin, RunConfig};
use chpair::stepper::{run, SnapshotCtx, StepControl, TerminationReason};
use chpair::util::max_abs;
use chpair::verify::ChOracle;

fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn bump_state(grid: &GridSpec, kernel: &GreenKernel) -> FieldState {
    let m0: Vec<f64> = grid.nodes().iter().map(|&x| 2.0 * bump(x / 2.5)).collect();
    let n0: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| 1.5 * bump((x - 0.2) / 2.2))
        .collect();
    let u = green_convolve(&m0, kernel).unwrap();
    let v = green_convolve(&n0, kernel).unwrap();
    state_with_momenta(u, v, m0, n0, grid, 0.0).unwrap()
}

/// With `v = 2` the characteristic speed collapses to `u`, so the flow
/// map must match characteristics of the scalar Camassa-Holm oracle.
#[test]
fn characteristics_match_camassa_holm_oracle() {
    let config = RunConfig {
        kind: chpair::scenario::InitialKind::ChReduction,
        amplitude: 0.6,
        n_points: 2048,
        dt: 1e-3,
        t_end: 0.5,
        ..RunConfig::default()
    };
    let grid = config.grid().unwrap();
    let kernel = GreenKernel::new(&grid);
    let initial = build_initial(&config, &grid).unwrap();

    let labels: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.5).collect();
    let mut chars = CharacteristicSet::seed_with_labels(&initial, labels.clone()).unwrap();
    let control = StepControl::new(config.dt, config.t_end).unwrap();
    let out = run(
        initial.clone(),
        &kernel,
        &control,
        Some(&mut chars),
        &mut [],
    )
    .unwrap();
    assert_eq!(out.reason, TerminationReason::Completed);

    let oracle = ChOracle::new(grid.half_period(), grid.n_points());
    let steps = (config.t_end / config.dt).round() as usize;
    let (_, q_oracle) = oracle.integrate_with_characteristics(
        initial.u(),
        grid.half_period(),
        config.dt,
        steps,
        &labels,
    );

    let mut worst = 0.0_f64;
    for (a, b) in chars.positions().iter().zip(&q_oracle) {
        worst = worst.max((a - b).abs());
    }
    assert!(worst < 1e-7, "characteristic deviation {worst}");
}

/// For nonnegative momenta the one-sided weighted integrals reproduce
/// `u + u_x` and `u - u_x`, which therefore stay nonnegative.
#[test]
fn one_sided_quadrature_identities() {
    // fine grid: the end-corrected trapezoid leaves an O(h^4) remainder
    let grid = GridSpec::new(50.0, 8192, false).unwrap();
    let kernel = GreenKernel::new(&grid);
    let initial = bump_state(&grid, &kernel);
    let control = StepControl::new(1e-3, 0.3).unwrap();
    let out = run(initial, &kernel, &control, None, &mut []).unwrap();
    assert_eq!(out.reason, TerminationReason::Completed);
    let st = &out.final_state;

    let nodes = grid.nodes();
    let dx = grid.dx();
    let half_window = grid.half_period() / 2.0;
    let window: Vec<usize> = (0..nodes.len())
        .filter(|&i| nodes[i].abs() <= 20.0)
        .collect();

    // One-sided integrals of e^{-y} m (suffix) and e^{y} m (prefix) over
    // the trusted window. The integrand does not vanish at the inner
    // endpoint, so the trapezoid rule is end-corrected to fourth order
    // with one-sided slope estimates.
    let windowed = |j: usize| -> (f64, f64) {
        let y = nodes[j];
        if y.abs() > half_window {
            (0.0, 0.0)
        } else {
            ((-y).exp() * st.m()[j], y.exp() * st.m()[j])
        }
    };
    let slope = |j: usize, dir: i64, pick: fn((f64, f64)) -> f64| -> f64 {
        let at = |o: i64| pick(windowed((j as i64 + dir * o) as usize));
        dir as f64 * (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * dx)
    };
    let scale_u = max_abs(st.u());
    let mut worst_plus = 0.0_f64;
    let mut worst_minus = 0.0_f64;
    let mut min_quadrant: f64 = 0.0;
    for &i in &window {
        let x = nodes[i];
        let mut suffix = 0.0;
        let mut prefix = 0.0;
        for j in 0..nodes.len() {
            let (s, p) = windowed(j);
            let w = if nodes[j] == x { 0.5 } else { 1.0 };
            if nodes[j] >= x {
                suffix += w * dx * s;
            }
            if nodes[j] <= x {
                prefix += w * dx * p;
            }
        }
        // end corrections at the interior endpoint y = x (the outer
        // endpoints sit where the integrand has already decayed away)
        suffix -= dx * dx / 12.0 * (-slope(i, 1, |v| v.0));
        prefix -= dx * dx / 12.0 * slope(i, -1, |v| v.1);
        let plus = st.u()[i] + st.u_x()[i];
        let minus = st.u()[i] - st.u_x()[i];
        worst_plus = worst_plus.max((plus - x.exp() * suffix).abs());
        worst_minus = worst_minus.max((minus - (-x).exp() * prefix).abs());
        min_quadrant = min_quadrant.min(plus).min(minus);
    }
    assert!(
        worst_plus < 1e-6 * scale_u,
        "u + u_x identity deviation {worst_plus}"
    );
    assert!(
        worst_minus < 1e-6 * scale_u,
        "u - u_x identity deviation {worst_minus}"
    );
    assert!(
        min_quadrant >= -1e-8 * scale_u,
        "one-sided quantity dipped to {min_quadrant}"
    );
}

/// Full-resolution smoke run with every diagnostic attached: completes
/// with finite observer records.
#[test]
fn bump_smoke_run_at_4096() {
    let config = RunConfig {
        kind: chpair::scenario::InitialKind::CompactBump,
        amplitude: 2.0,
        support: builtin("thm41").unwrap().support,
        v_amplitude: Some(1.5),
        v_center: Some(0.2),
        v_width: Some(2.2),
        n_points: 4096,
        dt: 5e-4,
        t_end: 1.0,
        snapshot_every: 500,
        characteristics: 34,
        ..RunConfig::default()
    };
    let grid = config.grid().unwrap();
    let kernel = GreenKernel::new(&grid);
    let initial = build_initial(&config, &grid).unwrap();
    let (a, b) = config.support;
    let mut chars = CharacteristicSet::seed(&initial, a, b, 32).unwrap();
    let control = StepControl::new(config.dt, config.t_end)
        .unwrap()
        .with_snapshot_every(config.snapshot_every);

    let mut all_finite = true;
    let mut snapshots = 0;
    let out = {
        let mut observer = |ctx: &SnapshotCtx<'_>| {
            snapshots += 1;
            all_finite &= ctx.state.u().iter().all(|v| v.is_finite());
            all_finite &= ctx.state.v().iter().all(|v| v.is_finite());
            if let Some(ch) = ctx.chars {
                all_finite &= ch.positions().iter().all(|v| v.is_finite());
                all_finite &= ch.jacobians().iter().all(|v| v.is_finite() && *v > 0.0);
            }
        };
        run(
            initial,
            &kernel,
            &control,
            Some(&mut chars),
            &mut [&mut observer],
        )
        .unwrap()
    };
    assert_eq!(out.reason, TerminationReason::Completed);
    assert_eq!(snapshots, 5);
    assert!(all_finite);
    assert!(chars.is_ordered());
}
