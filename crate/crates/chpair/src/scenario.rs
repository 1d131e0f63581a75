//! Scenario library, experiment configuration, and persistent output.
//!
//! A run is described by a flat key-value configuration (JSON syntax,
//! dotted keys). The runner writes three kinds of artifact into its
//! output directory, all plain text and byte-reproducible on a fixed
//! platform:
//!
//! - `manifest.json` — the full configuration echo plus version,
//!   platform, and termination reason;
//! - `series.csv` — one row of scalar diagnostics per snapshot;
//! - `snapshot_NNNN.csv` — field columns `x, u, v, m, n`.
//!
//! Floats are rendered with 17 significant digits so that re-ingesting a
//! snapshot reproduces the state bit for bit.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::decay::{fit_decay_index, solution_bound, weighted_sup_norm, Side, WeightSpec};
use crate::error::{Error, Result};
use crate::flow::{
    max_residual, sign_census, tail_functionals, transport_residual, CharacteristicSet,
};
use crate::green::{green_convolve, GreenKernel};
use crate::grid::{state_from_uv, state_with_momenta, FieldState, GridSpec};
use crate::stepper::{run, SnapshotCtx, StepControl, TerminationReason};
use crate::util::max_abs;

/// Environment variable naming the output root; defaults to `./out`.
pub const OUTPUT_ROOT_ENV: &str = "CHPAIR_OUT";

/// Initial-condition families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialKind {
    /// `u0 = A exp(-((x-c)/w)^2)`, `v0` the mirrored Gaussian.
    Gaussian,
    /// `u0 = A exp(-theta sqrt((x-c)^2 + 1))`: smooth with exact
    /// `e^{-theta |x|}` tails.
    ExpTail,
    /// Smooth bumps placed in the *momenta*, compactly supported on
    /// `[support_a, support_b]`; velocities recovered by smoothing.
    CompactBump,
    /// `v0 = 2` identically: the Camassa-Holm reduction.
    ChReduction,
    /// `v0 = u0`: the cubic (FORQ-type) reduction.
    ForqReduction,
    /// Re-ingest a previously written snapshot file.
    FromFile,
}

impl InitialKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "exp_tail" => Ok(Self::ExpTail),
            "compact_bump" => Ok(Self::CompactBump),
            "ch_reduction" => Ok(Self::ChReduction),
            "forq_reduction" => Ok(Self::ForqReduction),
            "from_file" => Ok(Self::FromFile),
            other => Err(Error::Config(format!("unknown initial kind `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::ExpTail => "exp_tail",
            Self::CompactBump => "compact_bump",
            Self::ChReduction => "ch_reduction",
            Self::ForqReduction => "forq_reduction",
            Self::FromFile => "from_file",
        }
    }
}

/// Complete description of one experiment.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub name: String,
    // grid
    pub half_period: f64,
    pub n_points: usize,
    pub dealias: bool,
    // initial condition
    pub kind: InitialKind,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub theta: f64,
    pub lambda: f64,
    pub support: (f64, f64),
    pub v_amplitude: Option<f64>,
    pub v_center: Option<f64>,
    pub v_width: Option<f64>,
    pub file: Option<PathBuf>,
    pub perturb: f64,
    // stepping
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub max_gradient: f64,
    pub snapshot_every: usize,
    // diagnostics
    pub weight_theta: f64,
    pub weight_cap: u32,
    pub diag_lambda: f64,
    pub fit_window: (f64, f64),
    pub characteristics: usize,
    // output
    pub output_dir: Option<PathBuf>,
    pub decimate: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            half_period: 50.0,
            n_points: 8192,
            dealias: false,
            kind: InitialKind::Gaussian,
            amplitude: 1.0,
            center: 0.0,
            width: 2.0,
            theta: 0.5,
            lambda: 0.0,
            support: (-2.5, 2.5),
            v_amplitude: None,
            v_center: None,
            v_width: None,
            file: None,
            perturb: 0.0,
            dt: 2e-4,
            t_end: 1.0,
            cfl_safety: 0.3,
            max_gradient: 1e3,
            snapshot_every: 1250,
            weight_theta: 0.5,
            weight_cap: 20,
            diag_lambda: 0.0,
            fit_window: (7.0, 25.0),
            characteristics: 0,
            output_dir: None,
            decimate: 1,
            seed: 0,
        }
    }
}

fn num(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Parse(format!("key `{key}` must be a number, got {v}")))
}

fn int(v: &Value, key: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| {
        Error::Parse(format!(
            "key `{key}` must be a nonnegative integer, got {v}"
        ))
    })
}

fn text(v: &Value, key: &str) -> Result<String> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::Parse(format!("key `{key}` must be a string, got {v}")))
}

fn boolean(v: &Value, key: &str) -> Result<bool> {
    v.as_bool()
        .ok_or_else(|| Error::Parse(format!("key `{key}` must be a boolean, got {v}")))
}

impl RunConfig {
    /// Builds a config from the flat key-value map, starting from
    /// defaults. Unknown keys are rejected.
    pub fn from_flat(map: &BTreeMap<String, Value>) -> Result<Self> {
        let mut c = RunConfig::default();
        for (key, v) in map {
            match key.as_str() {
                "name" => c.name = text(v, key)?,
                "grid.L" => c.half_period = num(v, key)?,
                "grid.n" => c.n_points = int(v, key)? as usize,
                "grid.dealias" => c.dealias = boolean(v, key)?,
                "initial.kind" => c.kind = InitialKind::parse(&text(v, key)?)?,
                "initial.amplitude" => c.amplitude = num(v, key)?,
                "initial.center" => c.center = num(v, key)?,
                "initial.width" => c.width = num(v, key)?,
                "initial.theta" => c.theta = num(v, key)?,
                "initial.lambda" => c.lambda = num(v, key)?,
                "initial.support_a" => c.support.0 = num(v, key)?,
                "initial.support_b" => c.support.1 = num(v, key)?,
                "initial.v_amplitude" => c.v_amplitude = Some(num(v, key)?),
                "initial.v_center" => c.v_center = Some(num(v, key)?),
                "initial.v_width" => c.v_width = Some(num(v, key)?),
                "initial.file" => c.file = Some(PathBuf::from(text(v, key)?)),
                "initial.perturb" => c.perturb = num(v, key)?,
                "step.dt" => c.dt = num(v, key)?,
                "step.t_end" => c.t_end = num(v, key)?,
                "step.cfl_safety" => c.cfl_safety = num(v, key)?,
                "step.max_gradient" => c.max_gradient = num(v, key)?,
                "step.snapshot_every" => c.snapshot_every = int(v, key)? as usize,
                "diag.weight_theta" => c.weight_theta = num(v, key)?,
                "diag.weight_cap" => c.weight_cap = int(v, key)? as u32,
                "diag.lambda" => c.diag_lambda = num(v, key)?,
                "diag.fit_lo" => c.fit_window.0 = num(v, key)?,
                "diag.fit_hi" => c.fit_window.1 = num(v, key)?,
                "diag.characteristics" => c.characteristics = int(v, key)? as usize,
                "output.dir" => c.output_dir = Some(PathBuf::from(text(v, key)?)),
                "output.decimate" => c.decimate = (int(v, key)? as usize).max(1),
                "seed" => c.seed = int(v, key)?,
                other => {
                    return Err(Error::Parse(format!("unknown config key `{other}`")));
                }
            }
        }
        Ok(c)
    }

    /// Full flat echo of every field, defaults included.
    pub fn to_flat(&self) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        let f = Value::from;
        m.insert("name".to_string(), Value::from(self.name.clone()));
        m.insert("grid.L".into(), f(self.half_period));
        m.insert("grid.n".into(), Value::from(self.n_points as u64));
        m.insert("grid.dealias".into(), Value::from(self.dealias));
        m.insert("initial.kind".into(), Value::from(self.kind.name()));
        m.insert("initial.amplitude".into(), f(self.amplitude));
        m.insert("initial.center".into(), f(self.center));
        m.insert("initial.width".into(), f(self.width));
        m.insert("initial.theta".into(), f(self.theta));
        m.insert("initial.lambda".into(), f(self.lambda));
        m.insert("initial.support_a".into(), f(self.support.0));
        m.insert("initial.support_b".into(), f(self.support.1));
        if let Some(x) = self.v_amplitude {
            m.insert("initial.v_amplitude".into(), f(x));
        }
        if let Some(x) = self.v_center {
            m.insert("initial.v_center".into(), f(x));
        }
        if let Some(x) = self.v_width {
            m.insert("initial.v_width".into(), f(x));
        }
        if let Some(p) = &self.file {
            m.insert(
                "initial.file".into(),
                Value::from(p.to_string_lossy().into_owned()),
            );
        }
        m.insert("initial.perturb".into(), f(self.perturb));
        m.insert("step.dt".into(), f(self.dt));
        m.insert("step.t_end".into(), f(self.t_end));
        m.insert("step.cfl_safety".into(), f(self.cfl_safety));
        m.insert("step.max_gradient".into(), f(self.max_gradient));
        m.insert(
            "step.snapshot_every".into(),
            Value::from(self.snapshot_every as u64),
        );
        m.insert("diag.weight_theta".into(), f(self.weight_theta));
        m.insert("diag.weight_cap".into(), Value::from(self.weight_cap));
        m.insert("diag.lambda".into(), f(self.diag_lambda));
        m.insert("diag.fit_lo".into(), f(self.fit_window.0));
        m.insert("diag.fit_hi".into(), f(self.fit_window.1));
        m.insert(
            "diag.characteristics".into(),
            Value::from(self.characteristics as u64),
        );
        if let Some(p) = &self.output_dir {
            m.insert(
                "output.dir".into(),
                Value::from(p.to_string_lossy().into_owned()),
            );
        }
        m.insert("output.decimate".into(), Value::from(self.decimate as u64));
        m.insert("seed".into(), Value::from(self.seed));
        m
    }

    /// Applies `key=value` override strings (values parsed as JSON
    /// scalars, falling back to bare strings).
    pub fn apply_overrides(map: &mut BTreeMap<String, Value>, overrides: &[String]) -> Result<()> {
        for ov in overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| {
                Error::Config(format!("override `{ov}` is not of the form key=value"))
            })?;
            let value =
                serde_json::from_str::<Value>(raw).unwrap_or_else(|_| Value::from(raw.to_owned()));
            map.insert(key.to_owned(), value);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.half_period, self.n_points, self.dealias)
    }
}

/// Reads a flat JSON config file.
pub fn load_config_map(path: &Path) -> Result<BTreeMap<String, Value>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Smooth bump vanishing with all derivatives outside `|s| >= 1`.
fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn seeded_perturbation(config: &RunConfig, grid: &GridSpec, phase_salt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ phase_salt);
    let mut field = vec![0.0; grid.n_points()];
    let envelope_width = 4.0 * config.width.max(1.0);
    for j in 1..=6 {
        let k = std::f64::consts::PI * j as f64 / grid.half_period();
        let amp: f64 = config.perturb * rng.gen::<f64>();
        let phase: f64 = std::f64::consts::TAU * rng.gen::<f64>();
        for (i, &x) in grid.nodes().iter().enumerate() {
            field[i] += amp * (k * x + phase).cos() * (-(x / envelope_width).powi(2)).exp();
        }
    }
    field
}

/// Materializes the configured initial condition on `grid`.
///
/// For `compact_bump` the returned state stores the bump momenta exactly;
/// for `from_file` the snapshot must match the grid.
pub fn build_initial(config: &RunConfig, grid: &GridSpec) -> Result<FieldState> {
    let kernel = GreenKernel::new(grid);
    let a = config.amplitude;
    let (c, w) = (config.center, config.width);
    let av = config.v_amplitude.unwrap_or(a);
    let cv = config.v_center.unwrap_or(-c);
    let wv = config.v_width.unwrap_or(w);
    if !(w > 0.0 && wv > 0.0) {
        return Err(Error::Config("widths must be positive".into()));
    }

    let mut state = match config.kind {
        InitialKind::Gaussian => {
            let u: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| a * (-((x - c) / w).powi(2)).exp())
                .collect();
            let v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| av * (-((x - cv) / wv).powi(2)).exp())
                .collect();
            state_from_uv(u, v, grid, 0.0)?
        }
        InitialKind::ExpTail => {
            if !(config.theta > 0.0) {
                return Err(Error::Config(format!(
                    "exp_tail needs a positive theta, got {}",
                    config.theta
                )));
            }
            let th = config.theta;
            let u: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| a * (-th * ((x - c) * (x - c) + 1.0).sqrt()).exp())
                .collect();
            let v: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| av * (-th * ((x - cv) * (x - cv) + 1.0).sqrt()).exp())
                .collect();
            state_from_uv(u, v, grid, 0.0)?
        }
        InitialKind::CompactBump => {
            let (sa, sb) = config.support;
            let quarter = grid.half_period() / 4.0;
            if !(sa < sb && sa > -quarter && sb < quarter) {
                return Err(Error::Config(format!(
                    "compact support [{sa}, {sb}] must sit inside (-L/4, L/4) = \
                     ({:.1}, {:.1})",
                    -quarter, quarter
                )));
            }
            let (mid, half) = (0.5 * (sa + sb), 0.5 * (sb - sa));
            // secondary bump defaults to the same interval; must stay inside
            let (mid_v, half_v) = match (config.v_center, config.v_width) {
                (None, None) => (mid, half),
                _ => (cv, wv),
            };
            if mid_v - half_v < sa - 1e-12 || mid_v + half_v > sb + 1e-12 {
                return Err(Error::Config(format!(
                    "secondary bump [{}, {}] leaves the support [{sa}, {sb}]",
                    mid_v - half_v,
                    mid_v + half_v
                )));
            }
            let m0: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| a * bump((x - mid) / half))
                .collect();
            let n0: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| av * bump((x - mid_v) / half_v))
                .collect();
            let u = green_convolve(&m0, &kernel)?;
            let v = green_convolve(&n0, &kernel)?;
            state_with_momenta(u, v, m0, n0, grid, 0.0)?
        }
        InitialKind::ChReduction => {
            let u: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| a * (-((x - c) / w).powi(2)).exp())
                .collect();
            let v = vec![2.0; grid.n_points()];
            state_from_uv(u, v, grid, 0.0)?
        }
        InitialKind::ForqReduction => {
            let u: Vec<f64> = grid
                .nodes()
                .iter()
                .map(|&x| a * (-((x - c) / w).powi(2)).exp())
                .collect();
            state_from_uv(u.clone(), u, grid, 0.0)?
        }
        InitialKind::FromFile => {
            let path = config
                .file
                .as_ref()
                .ok_or_else(|| Error::Config("from_file needs initial.file".into()))?;
            return read_snapshot(path, grid);
        }
    };

    if config.perturb > 0.0 {
        let du = seeded_perturbation(config, grid, 0x75);
        let dv = seeded_perturbation(config, grid, 0x76);
        let u: Vec<f64> = state.u().iter().zip(&du).map(|(&x, &d)| x + d).collect();
        let v: Vec<f64> = state.v().iter().zip(&dv).map(|(&x, &d)| x + d).collect();
        state = state_from_uv(u, v, grid, 0.0)?;
    }
    Ok(state)
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a field snapshot as CSV columns `x, u, v, m, n`.
pub fn write_snapshot(path: &Path, state: &FieldState, decimate: usize) -> Result<()> {
    let step = decimate.max(1);
    let mut out = String::with_capacity(state.u().len() * 100 / step + 64);
    out.push_str("x,u,v,m,n\n");
    let nodes = state.grid().nodes();
    for i in (0..nodes.len()).step_by(step) {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(nodes[i]),
            fmt_float(state.u()[i]),
            fmt_float(state.v()[i]),
            fmt_float(state.m()[i]),
            fmt_float(state.n()[i])
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Re-ingests a snapshot written by [`write_snapshot`] (undecimated).
pub fn read_snapshot(path: &Path, grid: &GridSpec) -> Result<FieldState> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty snapshot", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    let col = |name: &str| -> Result<usize> {
        cols.iter()
            .position(|&c| c == name)
            .ok_or_else(|| Error::Parse(format!("{}: missing column `{name}`", path.display())))
    };
    let (ix, iu, iv) = (col("x")?, col("u")?, col("v")?);
    let mut xs = Vec::new();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let parse = |idx: usize| -> Result<f64> {
            fields
                .get(idx)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::Parse(format!(
                        "{}: bad float on data line {}",
                        path.display(),
                        lineno + 1
                    ))
                })
        };
        xs.push(parse(ix)?);
        us.push(parse(iu)?);
        vs.push(parse(iv)?);
    }
    grid.check_len(&us)?;
    for (a, b) in xs.iter().zip(grid.nodes()) {
        if (a - b).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "snapshot nodes do not match the configured grid (found {a}, expected {b})"
            )));
        }
    }
    state_from_uv(us, vs, grid, 0.0)
}

/// One row of the scalar diagnostics series.
#[derive(Clone, Debug, Default)]
pub struct SnapshotRecord {
    pub t: f64,
    pub sup_u: f64,
    pub sup_v: f64,
    pub h3_bound: f64,
    pub wsup_u: f64,
    pub wsup_v: f64,
    pub fit_u_plus: f64,
    pub fit_u_plus_r2: f64,
    pub fit_v_plus: f64,
    pub fit_v_plus_r2: f64,
    pub fit_u_minus: f64,
    pub fit_u_minus_r2: f64,
    pub fit_v_minus: f64,
    pub fit_v_minus_r2: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub min_m: f64,
    pub min_n: f64,
    pub max_rm: f64,
    pub max_rn: f64,
}

impl SnapshotRecord {
    pub const HEADER: &'static str = "t,sup_u,sup_v,h3_bound,wsup_u,wsup_v,\
fit_u_plus,fit_u_plus_r2,fit_v_plus,fit_v_plus_r2,fit_u_minus,fit_u_minus_r2,\
fit_v_minus,fit_v_minus_r2,e_plus,e_minus,f_plus,f_minus,q_a,q_b,min_m,min_n,max_rm,max_rn";

    fn csv_row(&self) -> String {
        [
            self.t,
            self.sup_u,
            self.sup_v,
            self.h3_bound,
            self.wsup_u,
            self.wsup_v,
            self.fit_u_plus,
            self.fit_u_plus_r2,
            self.fit_v_plus,
            self.fit_v_plus_r2,
            self.fit_u_minus,
            self.fit_u_minus_r2,
            self.fit_v_minus,
            self.fit_v_minus_r2,
            self.e_plus,
            self.e_minus,
            self.f_plus,
            self.f_minus,
            self.q_a,
            self.q_b,
            self.min_m,
            self.min_n,
            self.max_rm,
            self.max_rn,
        ]
        .iter()
        .map(|&x| fmt_float(x))
        .collect::<Vec<_>>()
        .join(",")
    }

    /// Collects the diagnostics for one snapshot. Diagnostics that do not
    /// apply (no characteristics, fit window starved of samples) are
    /// recorded as NaN.
    pub fn collect(config: &RunConfig, ctx: &SnapshotCtx<'_>) -> Self {
        let state = ctx.state;
        let mut rec = SnapshotRecord {
            t: state.t(),
            sup_u: max_abs(state.u()),
            sup_v: max_abs(state.v()),
            h3_bound: solution_bound(state),
            ..Default::default()
        };
        match WeightSpec::new(config.weight_theta, config.weight_cap, config.diag_lambda) {
            Ok(w) => {
                rec.wsup_u = weighted_sup_norm(state.u(), &w, state.grid()).unwrap_or(f64::NAN);
                rec.wsup_v = weighted_sup_norm(state.v(), &w, state.grid()).unwrap_or(f64::NAN);
            }
            Err(_) => {
                rec.wsup_u = f64::NAN;
                rec.wsup_v = f64::NAN;
            }
        }
        let fit = |f: &[f64], side: Side| -> (f64, f64) {
            match fit_decay_index(f, state.grid(), config.fit_window, side) {
                Ok(fit) => (fit.slope, fit.r_squared),
                Err(_) => (f64::NAN, f64::NAN),
            }
        };
        (rec.fit_u_plus, rec.fit_u_plus_r2) = fit(state.u(), Side::Plus);
        (rec.fit_v_plus, rec.fit_v_plus_r2) = fit(state.v(), Side::Plus);
        (rec.fit_u_minus, rec.fit_u_minus_r2) = fit(state.u(), Side::Minus);
        (rec.fit_v_minus, rec.fit_v_minus_r2) = fit(state.v(), Side::Minus);
        let (min_m, min_n) = sign_census(state);
        rec.min_m = min_m;
        rec.min_n = min_n;
        if let Some(chars) = ctx.chars {
            let (q_a, q_b) = chars.endpoint_positions();
            rec.q_a = q_a;
            rec.q_b = q_b;
            match tail_functionals(state, q_a, q_b) {
                Ok(tf) => {
                    rec.e_plus = tf.e_plus;
                    rec.e_minus = tf.e_minus;
                    rec.f_plus = tf.f_plus;
                    rec.f_minus = tf.f_minus;
                }
                Err(_) => {
                    rec.e_plus = f64::NAN;
                    rec.e_minus = f64::NAN;
                    rec.f_plus = f64::NAN;
                    rec.f_minus = f64::NAN;
                }
            }
            match transport_residual(chars, state) {
                Ok((rm, rn)) => {
                    rec.max_rm = max_residual(&rm);
                    rec.max_rn = max_residual(&rn);
                }
                Err(_) => {
                    rec.max_rm = f64::NAN;
                    rec.max_rn = f64::NAN;
                }
            }
        } else {
            rec.e_plus = f64::NAN;
            rec.e_minus = f64::NAN;
            rec.f_plus = f64::NAN;
            rec.f_minus = f64::NAN;
            rec.q_a = f64::NAN;
            rec.q_b = f64::NAN;
            rec.max_rm = f64::NAN;
            rec.max_rn = f64::NAN;
        }
        rec
    }
}

/// Everything `run_experiment` leaves behind.
#[derive(Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub reason: TerminationReason,
    pub steps_taken: usize,
    pub records: Vec<SnapshotRecord>,
    pub files: Vec<String>,
}

impl ExperimentReport {
    /// CLI exit status for this outcome.
    pub fn exit_code(&self) -> i32 {
        match self.reason {
            TerminationReason::Completed => 0,
            TerminationReason::BlowUpSuspected { .. } => 2,
            TerminationReason::NumericalOverflow { .. } => 3,
        }
    }
}

/// Resolves the output directory: explicit config path, else
/// `$CHPAIR_OUT/<name>`, else `./out/<name>`.
pub fn resolve_out_dir(config: &RunConfig) -> PathBuf {
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    let root = std::env::var(OUTPUT_ROOT_ENV).unwrap_or_else(|_| "./out".into());
    Path::new(&root).join(&config.name)
}

/// Runs one configured experiment and writes its artifacts.
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentReport> {
    // validate the whole configuration before touching the filesystem
    let grid = config.grid()?;
    let kernel = GreenKernel::new(&grid);
    let initial = build_initial(config, &grid)?;
    let out_dir = resolve_out_dir(config);
    std::fs::create_dir_all(&out_dir)?;

    let mut chars = if config.characteristics > 0 {
        let (a, b) = if config.kind == InitialKind::CompactBump {
            config.support
        } else {
            (
                config.center - 2.0 * config.width,
                config.center + 2.0 * config.width,
            )
        };
        let interior = config.characteristics.saturating_sub(2).max(1);
        Some(CharacteristicSet::seed(&initial, a, b, interior)?)
    } else {
        None
    };

    let control = StepControl::new(config.dt, config.t_end)?
        .with_cfl_safety(config.cfl_safety)
        .with_max_gradient(config.max_gradient)
        .with_snapshot_every(config.snapshot_every);

    let mut records: Vec<SnapshotRecord> = Vec::new();
    let mut files: Vec<String> = Vec::new();
    let mut io_error: Option<Error> = None;
    let outcome = {
        let mut observer = |ctx: &SnapshotCtx<'_>| {
            records.push(SnapshotRecord::collect(config, ctx));
            let fname = format!("snapshot_{:04}.csv", ctx.index);
            if io_error.is_none() {
                match write_snapshot(&out_dir.join(&fname), ctx.state, config.decimate) {
                    Ok(()) => files.push(fname),
                    Err(e) => io_error = Some(e),
                }
            }
        };
        run(
            initial,
            &kernel,
            &control,
            chars.as_mut(),
            &mut [&mut observer],
        )?
    };
    if let Some(e) = io_error {
        return Err(e);
    }

    let mut series = String::new();
    series.push_str(SnapshotRecord::HEADER);
    series.push('\n');
    for r in &records {
        series.push_str(&r.csv_row());
        series.push('\n');
    }
    std::fs::write(out_dir.join("series.csv"), series)?;
    files.push("series.csv".into());

    let manifest = manifest_json(config, &outcome.reason, outcome.steps_taken, &files);
    std::fs::write(out_dir.join("manifest.json"), manifest)?;
    files.push("manifest.json".into());

    Ok(ExperimentReport {
        out_dir,
        reason: outcome.reason,
        steps_taken: outcome.steps_taken,
        records,
        files,
    })
}

fn manifest_json(
    config: &RunConfig,
    reason: &TerminationReason,
    steps: usize,
    files: &[String],
) -> String {
    let mut root = BTreeMap::new();
    root.insert(
        "config".to_string(),
        Value::Object(config.to_flat().into_iter().collect()),
    );
    root.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    let mut platform = serde_json::Map::new();
    platform.insert("os".into(), Value::from(std::env::consts::OS));
    platform.insert("arch".into(), Value::from(std::env::consts::ARCH));
    root.insert("platform".into(), Value::Object(platform));
    root.insert("reason".into(), Value::from(reason.label()));
    root.insert("steps".into(), Value::from(steps as u64));
    root.insert(
        "files".into(),
        Value::from(
            files
                .iter()
                .map(|f| Value::from(f.as_str()))
                .collect::<Vec<_>>(),
        ),
    );
    let obj = Value::Object(root.into_iter().collect());
    let mut text = serde_json::to_string_pretty(&obj).expect("manifest serialization");
    text.push('\n');
    text
}

/// Reads the `config` block back out of a manifest file.
pub fn config_from_manifest(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    let root: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let config = root
        .get("config")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse(format!("{}: no config block", path.display())))?;
    let map: BTreeMap<String, Value> = config.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    RunConfig::from_flat(&map)
}

/// Support endpoints aligned exactly with nodes of the default
/// `L = 50, n = 8192` grid (205 cells on each side of the origin).
pub fn bump_support_on_default_grid() -> (f64, f64) {
    let dx = 100.0 / 8192.0;
    (-205.0 * dx, 205.0 * dx)
}

/// Named, ready-to-run scenario configurations.
pub fn builtin_scenarios() -> Vec<(&'static str, &'static str, RunConfig)> {
    let mut list = Vec::new();

    let thm22 = RunConfig {
        name: "thm22".into(),
        kind: InitialKind::ExpTail,
        amplitude: 0.5,
        theta: 0.5,
        v_amplitude: Some(0.5),
        v_center: Some(1.0),
        snapshot_every: 500,
        ..RunConfig::default()
    };
    list.push((
        "thm22",
        "exponential-tail data (index 0.5): decay persistence run",
        thm22,
    ));

    let thm31 = RunConfig {
        name: "thm31".into(),
        kind: InitialKind::ExpTail,
        amplitude: 2.0,
        theta: 2.0,
        lambda: 1.0,
        v_amplitude: Some(1.6),
        v_center: Some(0.8),
        ..RunConfig::default()
    };
    list.push((
        "thm31",
        "momenta with tail index 2: optimal-decay dichotomy run",
        thm31,
    ));

    let thm41 = RunConfig {
        name: "thm41".into(),
        kind: InitialKind::CompactBump,
        amplitude: 2.0,
        support: bump_support_on_default_grid(),
        v_amplitude: Some(1.5),
        v_center: Some(0.2),
        v_width: Some(2.2),
        characteristics: 34,
        ..RunConfig::default()
    };
    list.push((
        "thm41",
        "compact nonnegative momenta: tail functionals and sign census",
        thm41.clone(),
    ));

    let lemmas4 = RunConfig {
        name: "lemmas4".into(),
        ..thm41
    };
    list.push((
        "lemmas4",
        "compact nonnegative momenta: flow map and transport identities",
        lemmas4,
    ));

    let ch = RunConfig {
        name: "reduction-ch".into(),
        kind: InitialKind::ChReduction,
        amplitude: 0.6,
        snapshot_every: 2500,
        ..RunConfig::default()
    };
    list.push(("reduction-ch", "v = 2: Camassa-Holm reduction run", ch));

    let forq = RunConfig {
        name: "reduction-forq".into(),
        kind: InitialKind::ForqReduction,
        amplitude: 0.75,
        snapshot_every: 2500,
        ..RunConfig::default()
    };
    list.push(("reduction-forq", "v = u: cubic-flow reduction run", forq));

    let demo = RunConfig {
        name: "gaussian-demo".into(),
        kind: InitialKind::Gaussian,
        amplitude: 0.8,
        center: 1.0,
        n_points: 2048,
        dt: 1e-3,
        t_end: 0.5,
        snapshot_every: 100,
        ..RunConfig::default()
    };
    list.push((
        "gaussian-demo",
        "small Gaussian pair on a coarse grid (quick smoke run)",
        demo,
    ));

    list
}

pub fn builtin(name: &str) -> Result<RunConfig> {
    builtin_scenarios()
        .into_iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, c)| c)
        .ok_or_else(|| Error::Config(format!("unknown scenario `{name}`")))
}
