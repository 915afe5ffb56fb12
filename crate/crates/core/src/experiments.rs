//! Experiment suites: configuration, constraint transcripts, checks and
//! reports. Each `cmd_*` function runs one suite and returns a [`Report`];
//! when an output directory is given it also writes CSV and field files.
//!
//! Reports contain no timings or paths, so identical configs give
//! byte-identical JSON.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::duhamel::{
    build_propagator, fit_norm_decay, pde_residual, time_shift_fit, FixedPointProblem, FixedPointSolution,
    SpectralPropagator,
};
use crate::error::{Error, Result};
use crate::evolver::{
    classify, data_support, evolve, write_csv, Classification, Direction, Dynamics, EvolverConfig,
};
use crate::grid::{h1dot_norm, lebesgue_norm, Field, RadialGrid, State};
use crate::ground_state::{
    energy, j_function, nonlinearity, power_integral, scale, scaling_direction, sobolev_ratio, h1dot_inner,
    GroundState,
};
use crate::inequalities::{
    bilinear_ratio, embedding_cases, embedding_ratio, gain_of_decay_ratio, logspace, loglog_slope,
    power_weight_min_order, power_weight_ratio, superlinearity_samples, uniform_constant, Tail, UniformConstant,
    TAIL_EXPONENT,
};
use crate::io::FieldFile;
use crate::linearized::{assemble_l, ground_eigenpair, negative_count, zero_mode_rayleigh, DiscreteOperator, Eigenpair};
use crate::profiles::{build_profiles, taylor_coeffs, ProfileSet};
use crate::rates::{fit_decay_rate, linspace};
use crate::suite::{degenerating_family, gaussian_bump, smooth_bump_suite, Degeneration};
use crate::trajectory::TimeGrid;

pub const REPORT_VERSION: u32 = 1;

pub const COMMANDS: [&str; 6] = ["groundstate", "spectrum", "profiles", "fixedpoint", "dichotomy", "inequalities"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Dimension of the reference runs.
    pub d: usize,
    /// Reference grid.
    pub radius: f64,
    pub nodes: usize,
    /// Dimensions swept by the ground-state and spectrum suites.
    pub dims: Vec<usize>,
    pub cfl: f64,
    /// Order of the weighted norms in the Σ-norm.
    pub m: usize,
    pub seed: u64,
    pub suite_size: usize,
    /// Write field files next to the reports.
    pub write_fields: bool,
    pub profiles: ProfilesConfig,
    pub fixedpoint: FixedPointConfig,
    pub dichotomy: DichotomyConfig,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            d: 6,
            radius: 60.0,
            nodes: 6000,
            dims: vec![6, 7, 8],
            cfl: 0.5,
            m: 2,
            seed: 20240611,
            suite_size: 100,
            write_fields: true,
            profiles: ProfilesConfig::default(),
            fixedpoint: FixedPointConfig::default(),
            dichotomy: DichotomyConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesConfig {
    pub amplitudes: Vec<f64>,
    pub orders: Vec<usize>,
    /// Residual rates are fitted on `[window_start, window_end]`.
    pub window_start: f64,
    pub window_end: f64,
    pub samples: usize,
}

impl Default for ProfilesConfig {
    fn default() -> Self {
        ProfilesConfig {
            amplitudes: vec![1.0, -1.0, 0.0],
            orders: vec![1, 2, 3],
            window_start: 0.0,
            window_end: 4.0,
            samples: 17,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointConfig {
    pub radius: f64,
    pub nodes: usize,
    pub order: usize,
    /// Amplitudes that get the full contraction and decay checks.
    pub amplitudes: Vec<f64>,
    /// `|a|` values for the energy and gradient-side checks; both signs run.
    pub threshold_amplitudes: Vec<f64>,
    /// Lower order solved for `a = amplitudes[0]` to compare reconstructions.
    pub compare_order: usize,
    pub t_start: f64,
    /// `T_max = t_start + horizon / e0`
    pub horizon: f64,
    /// `Δτ = 1 / (steps_per_unit e0)`
    pub steps_per_unit: f64,
    pub tol: f64,
    /// Minimum overlap of shifted trajectories.
    pub min_overlap: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            radius: 40.0,
            nodes: 800,
            order: 3,
            amplitudes: vec![1.0, -1.0],
            threshold_amplitudes: vec![1e-3, 1e-2, 1e-1],
            compare_order: 2,
            t_start: 2.0,
            horizon: 10.0,
            steps_per_unit: 40.0,
            tol: 1e-10,
            min_overlap: 5.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DichotomyConfig {
    pub radius: f64,
    pub nodes: usize,
    pub order: usize,
    pub amplitudes: Vec<f64>,
    pub t_start: f64,
    pub t_run: f64,
    pub blowup_threshold: f64,
    pub diagnostic_stride: usize,
    /// Repeat every run with `N → 2N` and with `dt → dt/2`.
    pub refine: bool,
    /// Length of the `(W, 0)` runs on the reference grid.
    pub static_time: f64,
    /// Linear-mode comparison with the spectral propagator.
    pub linear_radius: f64,
    pub linear_nodes: usize,
    pub linear_time: f64,
}

impl Default for DichotomyConfig {
    fn default() -> Self {
        DichotomyConfig {
            radius: 100.0,
            nodes: 10000,
            order: 3,
            amplitudes: vec![1e-3, 1e-2, -1e-3, -1e-2, 0.0],
            t_start: 0.0,
            t_run: 40.0,
            blowup_threshold: 100.0,
            diagnostic_stride: 20,
            refine: true,
            static_time: 20.0,
            linear_radius: 24.0,
            linear_nodes: 480,
            linear_time: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub static_residual: f64,
    pub refinement_ratio: [f64; 2],
    pub pohozaev: f64,
    pub e0_stability: f64,
    pub e0_order: f64,
    pub eigen_residual: f64,
    pub rate: f64,
    pub rate_fit_rms: f64,
    pub contraction_ratio: f64,
    pub pde_residual_factor: f64,
    pub threshold_energy: f64,
    pub shift: f64,
    /// Used instead of `shift` when the expected shift is 0.
    pub shift_absolute: f64,
    pub cross_sign_factor: f64,
    pub energy_drift: f64,
    pub static_deviation: f64,
    pub time_order: f64,
    pub superlinear_margin: f64,
    pub cross_validation: f64,
    pub order_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            static_residual: 1e-4,
            refinement_ratio: [3.0, 5.0],
            pohozaev: 1e-3,
            e0_stability: 0.01,
            e0_order: 1.8,
            eigen_residual: 1e-8,
            rate: 0.05,
            rate_fit_rms: 0.05,
            contraction_ratio: 0.5,
            pde_residual_factor: 10.0,
            threshold_energy: 1e-4,
            shift: 0.02,
            shift_absolute: 0.02,
            cross_sign_factor: 10.0,
            energy_drift: 1e-5,
            static_deviation: 1e-3,
            time_order: 1.9,
            superlinear_margin: 0.1,
            cross_validation: 1e-3,
            order_agreement: 1e-2,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Static constraints, checked before any run.
    pub fn constraints(&self) -> Vec<Constraint> {
        let fp = &self.fixedpoint;
        let dy = &self.dichotomy;
        let pr = &self.profiles;
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        vec![
            Constraint::new("dimension", self.d >= 3 && self.dims.iter().all(|&d| d >= 3), format!("d = {}, dims = {:?}; need d >= 3", self.d, self.dims)),
            Constraint::new("reference grid", finite_pos(self.radius) && self.nodes >= 16, format!("R = {}, N = {}", self.radius, self.nodes)),
            Constraint::new("CFL", self.cfl > 0.0 && self.cfl <= 1.0, format!("dt/h = {}; need 0 < cfl <= 1", self.cfl)),
            Constraint::new("Sigma-norm order", self.m <= crate::grid::M_MAX, format!("m = {} <= {}", self.m, crate::grid::M_MAX)),
            Constraint::new("suite size", self.suite_size >= 2, format!("{} fields", self.suite_size)),
            Constraint::new(
                "profile window",
                pr.window_end > pr.window_start && pr.samples >= crate::rates::MIN_SAMPLES && !pr.orders.is_empty() && pr.orders.iter().all(|&k| k >= 1),
                format!("[{}, {}] with {} samples, orders {:?}", pr.window_start, pr.window_end, pr.samples, pr.orders),
            ),
            Constraint::new(
                "fixed-point grid",
                finite_pos(fp.radius) && fp.nodes >= 16 && fp.order >= 1 && fp.compare_order >= 1 && !fp.amplitudes.is_empty(),
                format!("R = {}, N = {}, k = {}", fp.radius, fp.nodes, fp.order),
            ),
            Constraint::new(
                "fixed-point time grid",
                fp.horizon >= 5.0 && finite_pos(fp.steps_per_unit) && finite_pos(fp.tol),
                format!("T_max - t_start = {}/e0 >= 5/e0, dtau = 1/({} e0)", fp.horizon, fp.steps_per_unit),
            ),
            Constraint::new(
                "dichotomy run",
                finite_pos(dy.radius) && dy.nodes >= 16 && finite_pos(dy.t_run) && dy.blowup_threshold > 1.0 && dy.diagnostic_stride >= 1,
                format!("R = {}, N = {}, T_run = {}", dy.radius, dy.nodes, dy.t_run),
            ),
            Constraint::new(
                "linear comparison window",
                finite_pos(dy.linear_time) && dy.linear_time < dy.linear_radius,
                format!("T = {} < R = {}", dy.linear_time, dy.linear_radius),
            ),
        ]
    }
}

/// One line of the constraint transcript.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

impl Constraint {
    pub fn new(name: &str, satisfied: bool, detail: String) -> Self {
        Constraint {
            name: name.to_string(),
            satisfied,
            detail,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
            detail: format!("{value:.6e} <= {threshold:e}"),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
            detail: format!("{value:.6e} >= {threshold:e}"),
        }
    }

    pub fn between(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= lo && value <= hi,
            value,
            threshold: hi,
            detail: format!("{value:.6} in [{lo}, {hi}]"),
        }
    }

    /// `|value/target - 1| <= tol`
    pub fn relative(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        let err = (value / target - 1.0).abs();
        Check {
            name: name.into(),
            passed: err <= tol,
            value,
            threshold: tol,
            detail: format!("{value:.6} vs {target:.6}, relative error {err:.3e} <= {tol}"),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Check {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            threshold: 1.0,
            detail,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub command: String,
    pub config: ExperimentConfig,
    pub constraints: Vec<Constraint>,
    pub checks: Vec<Check>,
    pub data: Value,
}

impl Report {
    /// Starts a report; fails if any static constraint is violated.
    fn start(command: &str, cfg: &ExperimentConfig) -> Result<Self> {
        let report = Report {
            format_version: REPORT_VERSION,
            command: command.to_string(),
            config: cfg.clone(),
            constraints: cfg.constraints(),
            checks: Vec::new(),
            data: json!({}),
        };
        report.ensure_constraints()?;
        Ok(report)
    }

    fn ensure_constraints(&self) -> Result<()> {
        match self.constraints.iter().find(|c| !c.satisfied) {
            Some(c) => Err(Error::Config(format!("{}: {}", c.name, c.detail))),
            None => Ok(()),
        }
    }

    /// Record a run-time constraint; a violation rejects the run.
    fn require(&mut self, name: &str, satisfied: bool, detail: String) -> Result<()> {
        self.constraints.push(Constraint::new(name, satisfied, detail));
        self.ensure_constraints()
    }

    fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    fn put(&mut self, key: &str, value: Value) {
        self.data[key] = value;
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Artifact writer for one suite; a no-op without an output directory.
struct Sink {
    dir: Option<PathBuf>,
    fields: bool,
}

impl Sink {
    fn new(out: Option<&Path>, command: &str, cfg: &ExperimentConfig) -> Result<Self> {
        let dir = match out {
            Some(root) => {
                let dir = root.join(command);
                fs::create_dir_all(&dir)?;
                Some(dir)
            }
            None => None,
        };
        Ok(Sink {
            dir,
            fields: cfg.write_fields,
        })
    }

    fn text(&self, name: &str, text: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }

    fn field(&self, name: &str, file: impl FnOnce() -> Result<FieldFile>) -> Result<()> {
        if let (Some(dir), true) = (&self.dir, self.fields) {
            file()?.save(dir.join(name))?;
        }
        Ok(())
    }
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Filename-safe label of an amplitude, e.g. `+1e-3`.
fn amp_label(a: f64) -> String {
    if a == 0.0 {
        "0".into()
    } else {
        format!("{a:+e}")
    }
}

fn rel_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Reference {
    gs: Arc<GroundState>,
    l: DiscreteOperator,
    eig: Eigenpair,
}

impl Reference {
    fn new(d: usize, radius: f64, nodes: usize) -> Result<Self> {
        let grid = RadialGrid::new(d, radius, nodes)?;
        let gs = GroundState::new(&grid)?;
        let l = assemble_l(&gs);
        let eig = ground_eigenpair(&l)?;
        Ok(Reference { gs, l, eig })
    }

    fn grid(&self) -> &Arc<RadialGrid> {
        self.gs.grid()
    }

    fn profiles(&self, a: f64, k: usize, t_check: f64) -> Result<ProfileSet> {
        let coeffs = taylor_coeffs(self.gs.params(), k.max(2))?;
        build_profiles(a, k, &self.gs, &self.l, &self.eig, &coeffs, t_check)
    }
}

fn static_relative_residual(d: usize, radius: f64, nodes: usize) -> Result<f64> {
    let grid = RadialGrid::new(d, radius, nodes)?;
    let gs = GroundState::new(&grid)?;
    let scale = lebesgue_norm(&nonlinearity(gs.field(), gs.params()), 2.0);
    Ok(lebesgue_norm(&gs.static_residual(), 2.0) / scale)
}

// ----------------------------------------------------------------------------
// groundstate

#[derive(Serialize)]
struct Identities {
    d: usize,
    grad_sq: f64,
    potential: f64,
    pohozaev_defect: f64,
    energy: f64,
    energy_defect: f64,
}

fn identities(d: usize, radius: f64, nodes: usize) -> Result<Identities> {
    let grid = RadialGrid::new(d, radius, nodes)?;
    let gs = GroundState::new(&grid)?;
    let w = gs.field();
    let grad_sq = h1dot_norm(w).powi(2);
    let potential = power_integral(w, gs.params().sobolev_exponent());
    let e = energy(&State::at_rest(0.0, w.clone())).total;
    Ok(Identities {
        d,
        grad_sq,
        potential,
        pohozaev_defect: (grad_sq - potential).abs() / grad_sq,
        energy: e,
        energy_defect: (e - grad_sq / d as f64).abs() / e,
    })
}

pub fn cmd_groundstate(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("groundstate", cfg)?;
    let sink = Sink::new(out, "groundstate", cfg)?;
    let tol = &cfg.tolerances;

    let coarse = static_relative_residual(cfg.d, cfg.radius, cfg.nodes)?;
    let fine = static_relative_residual(cfg.d, cfg.radius, 2 * cfg.nodes)?;
    rep.check(Check::at_most("static residual", coarse, tol.static_residual));
    let [lo, hi] = tol.refinement_ratio;
    rep.check(Check::between("static residual refinement ratio", coarse / fine, lo, hi));
    rep.put("static_residual", json!({ "N": cfg.nodes, "relative": coarse, "relative_2N": fine, "ratio": coarse / fine }));

    let rows = cfg
        .dims
        .par_iter()
        .map(|&d| identities(d, cfg.radius, cfg.nodes))
        .collect::<Result<Vec<_>>>()?;
    for row in &rows {
        rep.check(Check::at_most(format!("pohozaev d={}", row.d), row.pohozaev_defect, tol.pohozaev));
        rep.check(Check::at_most(format!("energy d={}", row.d), row.energy_defect, tol.pohozaev));
        rep.check(Check::at_least(format!("energy positive d={}", row.d), row.energy, 0.0));
    }
    sink.text(
        "identities.csv",
        &csv(
            "d,grad_sq,potential,pohozaev_defect,energy,energy_defect",
            rows.iter().map(|r| {
                vec![r.d.to_string(), num(r.grad_sq), num(r.potential), num(r.pohozaev_defect), num(r.energy), num(r.energy_defect)]
            }),
        ),
    )?;
    rep.put("identities", serde_json::to_value(&rows)?);

    let reference = RadialGrid::new(cfg.d, cfg.radius, cfg.nodes)?;
    let gs = GroundState::new(&reference)?;
    let w = gs.field();
    let params = gs.params();
    let p = params.p_c();
    let e_w = energy(&State::at_rest(0.0, w.clone()));

    // Scaling invariance of the energy. The tail of W only fits in [0, R]
    // after compression, so dilations are tested on a localized pulse.
    let pulse = State::new(
        0.0,
        Field::from_fn(&reference, |r| 2.0 * (-r * r / 4.0).exp()),
        Field::from_fn(&reference, |r| r * (-r * r / 4.0).exp()),
    )?;
    let mut scaling = Vec::new();
    for (label, state, lambda) in [("W", State::at_rest(0.0, w.clone()), 0.8), ("pulse", pulse.clone(), 0.5), ("pulse", pulse, 2.0)] {
        let before = energy(&state);
        let after = energy(&scale(&state, lambda)?);
        let defect = rel_error(after.total, before.total).max(rel_error(after.kinetic_x, before.kinetic_x));
        rep.check(Check::at_most(format!("scaling invariance {label} lambda={lambda}"), defect, tol.pohozaev));
        scaling.push(json!({ "state": label, "lambda": lambda, "energy": after.total, "defect": defect }));
    }
    rep.put("scaling", Value::Array(scaling));

    // Pointwise identities of R(v) on |v| < W/2.
    let scale_wp = nonlinearity(w, params).max_abs();
    let suite = smooth_bump_suite(&reference, cfg.suite_size, cfg.seed);
    let (mut def_r, mut def_j) = (0.0_f64, 0.0_f64);
    for g in suite.iter().take(10) {
        let gmax = g.max_abs();
        let v = w.zip_map(g, |w, g| 0.49 * w * g / gmax);
        let rem = gs.remainder(&v);
        let direct = w.zip_map(&v, |w, v| params.power(w + v) - params.power(w) - p * w.powf(p - 1.0) * v);
        def_r = def_r.max((&rem - &direct).max_abs() / scale_wp);
        let split = w.zip_map(&v, |w, v| w.powf(p) * j_function(v / w, p) + params.power(v));
        def_j = def_j.max((&rem - &split).max_abs() / scale_wp);
    }
    rep.check(Check::at_most("remainder identity", def_r, 1e-12));
    rep.check(Check::at_most("remainder decomposition", def_j, 1e-12));

    // Local maximality of the Sobolev quotient at W.
    let lw = scaling_direction(&reference);
    let lw_sq = h1dot_inner(&lw, &lw);
    let grad_w = h1dot_norm(w);
    let base = sobolev_ratio(w)?;
    let ratios = suite
        .par_iter()
        .map(|g| {
            let mut g = g.clone();
            g.axpy(-h1dot_inner(&g, &lw) / lw_sq, &lw);
            let g = g.scaled(grad_w / h1dot_norm(&g));
            let mut u = w.clone();
            u.axpy(0.1, &g);
            sobolev_ratio(&u)
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let mut check = Check::at_most("sobolev local maximality", worst / base, 1.0);
    check.passed = worst < base;
    rep.check(check);
    rep.put("sobolev", json!({ "ratio_w": base, "max_perturbed": worst, "fields": ratios.len() }));

    sink.field("ground_state.field", || Ok(FieldFile::from_field(w, "ground_state").with_meta("energy", e_w.total)))?;
    Ok(rep)
}

// ----------------------------------------------------------------------------
// spectrum

#[derive(Serialize)]
struct SpectrumRow {
    d: usize,
    nodes: usize,
    radius: f64,
    e0: f64,
    negative_count: usize,
    residual: f64,
    gap: f64,
    zero_mode_rayleigh: f64,
}

fn spectrum_row(d: usize, radius: f64, nodes: usize) -> Result<(SpectrumRow, Reference)> {
    let r = Reference::new(d, radius, nodes)?;
    let e0 = r.eig.e0;
    let second = r.l.symmetric().eigenvalue(1);
    let row = SpectrumRow {
        d,
        nodes,
        radius,
        e0,
        negative_count: negative_count(&r.l),
        residual: r.eig.residual,
        gap: (second + e0 * e0) / (e0 * e0),
        zero_mode_rayleigh: zero_mode_rayleigh(&r.l),
    };
    Ok((row, r))
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("spectrum", cfg)?;
    let sink = Sink::new(out, "spectrum", cfg)?;
    let tol = &cfg.tolerances;
    let (r, n) = (cfg.radius, cfg.nodes);
    let wide_nodes = (1.5 * n as f64).round() as usize;
    let results = cfg
        .dims
        .par_iter()
        .map(|&d| -> Result<_> {
            let (base, reference) = spectrum_row(d, r, n)?;
            let (fine, _) = spectrum_row(d, r, 2 * n)?;
            let (coarse, _) = spectrum_row(d, r, n / 2)?;
            let (wide, _) = spectrum_row(d, 1.5 * r, wide_nodes)?;
            let free = negative_count(&DiscreteOperator::free(reference.grid()));
            // Decay of 𝒴 over the middle of the domain.
            let y = &reference.eig.y;
            let samples: Vec<(f64, f64)> = y
                .grid()
                .radii()
                .iter()
                .zip(y.values())
                .filter(|(r0, _)| **r0 >= 0.25 * r && **r0 <= 0.5 * r)
                .step_by(10)
                .map(|(&r0, &v)| (r0, v.abs()))
                .collect();
            let decay = fit_decay_rate(&samples, 0.0)?;
            Ok((base, fine, coarse, wide, free, decay.rate, reference))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Vec::new();
    let mut summary = Vec::new();
    for (base, fine, coarse, wide, free, decay, reference) in &results {
        let d = base.d;
        let e0 = base.e0;
        rep.check(Check::flag(
            format!("negative count d={d}"),
            base.negative_count == 1,
            format!("{} negative eigenvalue(s)", base.negative_count),
        ));
        rep.check(Check::at_most(format!("e0 stability N->2N d={d}"), rel_error(fine.e0, e0), tol.e0_stability));
        rep.check(Check::at_most(format!("e0 stability R->1.5R d={d}"), rel_error(wide.e0, e0), tol.e0_stability));
        rep.check(Check::at_most(format!("eigen residual d={d}"), base.residual, tol.eigen_residual));
        let order = ((coarse.e0 - e0).abs() / (e0 - fine.e0).abs()).log2();
        rep.check(Check::at_least(format!("e0 convergence order d={d}"), order, tol.e0_order));
        rep.check(Check::at_least(format!("spectral gap d={d}"), base.gap, 0.1));
        rep.check(Check::flag(
            format!("potential-off count d={d}"),
            *free == 0,
            format!("{free} negative eigenvalue(s) of -Δ"),
        ));
        rep.check(Check::flag(
            format!("zero mode shrinks d={d}"),
            fine.zero_mode_rayleigh.abs() < base.zero_mode_rayleigh.abs(),
            format!("{:.3e} -> {:.3e}", base.zero_mode_rayleigh, fine.zero_mode_rayleigh),
        ));
        rep.check(Check::at_least(format!("eigenfunction decay d={d}"), *decay, 0.9 * e0));
        summary.push(json!({ "d": d, "e0": e0, "order": order, "decay_rate": decay }));
        for row in [coarse, base, fine, wide] {
            table.push(serde_json::to_value(row)?);
        }
        let eig = &reference.eig;
        sink.field(&format!("eigenfunction_d{d}.field"), || {
            Ok(FieldFile::from_field(&eig.y, "eigenfunction").with_meta("e0", eig.e0))
        })?;
    }
    sink.text(
        "refinement.csv",
        &csv(
            "d,N,R,e0,negative_count,residual,gap,zero_mode_rayleigh",
            table.iter().map(|row| {
                ["d", "nodes", "radius", "e0", "negative_count", "residual", "gap", "zero_mode_rayleigh"]
                    .iter()
                    .map(|k| row[*k].to_string())
                    .collect()
            }),
        ),
    )?;
    rep.put("summary", Value::Array(summary));
    rep.put("refinement", Value::Array(table));
    Ok(rep)
}

// ----------------------------------------------------------------------------
// profiles

pub fn cmd_profiles(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("profiles", cfg)?;
    let sink = Sink::new(out, "profiles", cfg)?;
    let tol = &cfg.tolerances;
    let pc = &cfg.profiles;
    let reference = Reference::new(cfg.d, cfg.radius, cfg.nodes)?;
    let e0 = reference.eig.e0;
    let floor = lebesgue_norm(&reference.gs.static_residual(), 2.0);
    let times = linspace(pc.window_start, pc.window_end, pc.samples);

    let jobs: Vec<(f64, usize)> = pc
        .amplitudes
        .iter()
        .flat_map(|&a| pc.orders.iter().map(move |&k| (a, k)))
        .collect();
    let built = jobs
        .par_iter()
        .map(|&(a, k)| reference.profiles(a, k, pc.window_start))
        .collect::<Result<Vec<_>>>()?;
    for (ps, &(a, k)) in built.iter().zip(&jobs) {
        let (ratio, at) = ps.max_ratio(pc.window_start);
        rep.require(
            &format!("expansion validity a={a} k={k}"),
            ratio < crate::profiles::EXPANSION_LIMIT,
            format!("max |v/W| = {ratio:.4} at r = {at:.3}, t = {}", pc.window_start),
        )?;
    }

    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for (ps, &(a, k)) in built.iter().zip(&jobs) {
        let defect = ps.cancellation_defects(&reference.l).iter().copied().fold(0.0, f64::max);
        let raw: Vec<(f64, f64)> = times.iter().map(|&t| (t, lebesgue_norm(&ps.residual(t), 2.0))).collect();
        if a == 0.0 {
            let worst = raw.iter().map(|s| (s.1 - floor).abs()).fold(0.0, f64::max);
            rep.check(Check::at_most(format!("zero amplitude residual is the floor k={k}"), worst, 1e-12 * floor.max(1.0)));
            rows.push(json!({ "a": a, "k": k, "rate": null, "floor": floor }));
            csv_rows.push(vec![num(a), k.to_string(), "nan".into(), num((k + 1) as f64), "nan".into(), num(floor)]);
            continue;
        }
        // ε_k minus its t → ∞ limit (the static residual).
        let samples: Vec<(f64, f64)> = times
            .iter()
            .map(|&t| (t, lebesgue_norm(&ps.dynamic_residual(t, &reference.l), 2.0)))
            .collect();
        let target = (k + 1) as f64 * e0;
        let fit = fit_decay_rate(&samples, defect)?;
        let raw_fit = fit_decay_rate(&raw, 0.0).ok();
        rep.check(Check::relative(format!("residual rate a={a} k={k}"), fit.rate, target, tol.rate));
        rep.check(Check::at_most(format!("residual fit rms a={a} k={k}"), fit.residual, tol.rate_fit_rms));
        rep.check(Check::at_most(format!("cancellation a={a} k={k}"), defect, 1e-8));
        // ‖v_k(t)‖ decays at e0.
        let vk_samples: Vec<(f64, f64)> = linspace(pc.window_end, pc.window_end + 10.0 / e0, pc.samples)
            .into_iter()
            .map(|t| (t, lebesgue_norm(&ps.eval_vk(t), 2.0)))
            .collect();
        let vk_fit = fit_decay_rate(&vk_samples, 0.0)?;
        rep.check(Check::relative(format!("v_k rate a={a} k={k}"), vk_fit.rate, e0, tol.rate));
        rows.push(json!({
            "a": a, "k": k, "rate": fit.rate, "target": target, "rate_over_e0": fit.rate / e0,
            "fit_rms": fit.residual, "cancellation_defect": defect,
            "raw_rate": raw_fit.map(|f| f.rate), "raw_samples": raw, "floor": floor,
            "vk_rate": vk_fit.rate, "tail_ratios": ps.tail_ratios(), "truncation": ps.truncation(),
        }));
        csv_rows.push(vec![num(a), k.to_string(), num(fit.rate), num(target), num(fit.residual), num(floor)]);
        sink.field(&format!("profiles_a{}_k{k}.field", amp_label(a)), || {
            Ok(FieldFile::from_fields(ps.profiles(), "profiles")?
                .with_meta("a", a)
                .with_meta("k", k)
                .with_meta("e0", e0))
        })?;
    }

    // Monotone in k at the end of the window.
    for &a in pc.amplitudes.iter().filter(|a| **a != 0.0) {
        let t = pc.window_end;
        let norms: Vec<(usize, f64)> = built
            .iter()
            .zip(&jobs)
            .filter(|(_, j)| j.0 == a)
            .map(|(ps, j)| (j.1, lebesgue_norm(&ps.dynamic_residual(t, &reference.l), 2.0)))
            .collect();
        let mut sorted = norms.clone();
        sorted.sort_by_key(|n| n.0);
        let monotone = sorted.windows(2).all(|w| w[1].1 < w[0].1);
        rep.check(Check::flag(format!("residual monotone in k a={a}"), monotone, format!("{sorted:?} at t = {t}")));
    }

    // Parity Φ_j(-a) = (-1)^j Φ_j(a).
    let mut parity = Vec::new();
    for (ps, &(a, k)) in built.iter().zip(&jobs) {
        if a <= 0.0 {
            continue;
        }
        let Some(mirror) = built.iter().zip(&jobs).find(|(_, j)| j.0 == -a && j.1 == k).map(|p| p.0) else {
            continue;
        };
        for j in 1..=k {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let expected = ps.profile(j).scaled(sign);
            let defect = lebesgue_norm(&(mirror.profile(j) - &expected), 2.0) / lebesgue_norm(ps.profile(j), 2.0);
            parity.push(json!({ "a": a, "k": k, "j": j, "defect": defect }));
            rep.check(Check::at_most(format!("parity a={a} k={k} j={j}"), defect, 1e-10));
        }
    }
    sink.text("rates.csv", &csv("a,k,rate,target,fit_rms,floor", csv_rows))?;
    rep.put("e0", json!(e0));
    rep.put("rates", Value::Array(rows));
    rep.put("parity", Value::Array(parity));
    Ok(rep)
}

// ----------------------------------------------------------------------------
// fixedpoint

/// Everything shared by the fixed-point runs on one grid.
pub struct FixedPointSetup {
    pub reference: Arc<GroundState>,
    l: DiscreteOperator,
    eig: Eigenpair,
    pub prop: Arc<SpectralPropagator>,
    pub time_grid: TimeGrid,
    pub m: usize,
}

impl FixedPointSetup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let fp = &cfg.fixedpoint;
        let r = Reference::new(cfg.d, fp.radius, fp.nodes)?;
        let e0 = r.eig.e0;
        let prop = Arc::new(build_propagator(r.grid())?);
        let time_grid = TimeGrid::with_max_step(fp.t_start, fp.t_start + fp.horizon / e0, 1.0 / (fp.steps_per_unit * e0))?;
        Ok(FixedPointSetup {
            reference: r.gs,
            l: r.l,
            eig: r.eig,
            prop,
            time_grid,
            m: cfg.m,
        })
    }

    pub fn e0(&self) -> f64 {
        self.eig.e0
    }

    pub fn problem(&self, a: f64, k: usize) -> Result<FixedPointProblem> {
        let coeffs = taylor_coeffs(self.reference.params(), k.max(2))?;
        let ps = build_profiles(a, k, &self.reference, &self.l, &self.eig, &coeffs, self.time_grid.t_start())?;
        FixedPointProblem::new(ps, self.prop.clone(), self.time_grid.clone(), self.m)
    }

    pub fn solve(&self, a: f64, k: usize, tol: f64) -> Result<(FixedPointProblem, FixedPointSolution)> {
        let problem = self.problem(a, k)?;
        let sol = problem.solve(tol)?;
        Ok((problem, sol))
    }
}

pub fn cmd_fixedpoint(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("fixedpoint", cfg)?;
    let sink = Sink::new(out, "fixedpoint", cfg)?;
    let tol = &cfg.tolerances;
    let fp = &cfg.fixedpoint;
    let setup = FixedPointSetup::new(cfg)?;
    let e0 = setup.e0();
    let k = fp.order;
    let tg = &setup.time_grid;
    let gs = setup.reference.clone();
    let w = gs.field();
    let e_w = energy(&State::at_rest(0.0, w.clone())).total;
    let grad_w = h1dot_norm(w);

    let main_a = fp.amplitudes[0];
    let mut jobs: Vec<(f64, usize)> = fp.amplitudes.iter().map(|&a| (a, k)).collect();
    let shift_amps = [(-e0).exp(), e0.exp()].map(|x| x * main_a.signum());
    jobs.extend(shift_amps.iter().map(|&a| (a, k)));
    for &m in &fp.threshold_amplitudes {
        jobs.push((m, k));
        jobs.push((-m, k));
    }
    jobs.push((main_a, fp.compare_order));
    jobs.dedup();

    let problems = jobs
        .par_iter()
        .map(|&(a, k)| setup.problem(a, k))
        .collect::<Result<Vec<_>>>()?;
    for (p, &(a, k)) in problems.iter().zip(&jobs) {
        let wc = p.window_check()?;
        rep.require(
            &format!("light cone a={a:e} k={k}"),
            wc.span <= wc.room,
            format!("span {:.3} <= R - support = {:.3}", wc.span, wc.room),
        )?;
    }
    let solutions = problems
        .par_iter()
        .map(|p| p.solve(fp.tol))
        .collect::<Result<Vec<_>>>()?;
    let find = |a: f64, kk: usize| {
        jobs.iter()
            .position(|&(b, kb)| b == a && kb == kk)
            .map(|i| (&problems[i], &solutions[i]))
            .expect("job was scheduled")
    };

    let t_fit_hi = tg.t_max() - 3.0 / e0;
    let mut runs = Vec::new();
    for &a in &fp.amplitudes {
        let (problem, sol) = find(a, k);
        let ratios = sol.ratios();
        let worst_ratio = ratios.iter().skip(1).copied().fold(0.0, f64::max);
        rep.check(Check::at_most(format!("contraction ratio a={a}"), worst_ratio, tol.contraction_ratio));
        let interior = 1..sol.h.len() - 1;
        let worst_pde = interior
            .clone()
            .into_par_iter()
            .map(|n| {
                let (res, floor) = pde_residual(problem, sol, n);
                res / floor
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(0.0, f64::max);
        rep.check(Check::at_most(format!("PDE residual over floor a={a}"), worst_pde, tol.pde_residual_factor));
        let wa = sol.wa(problem);
        let wa_fit = fit_norm_decay(&wa, tg.t_start(), t_fit_hi)?;
        let h_fit = fit_norm_decay(&sol.h, tg.t_start(), t_fit_hi)?;
        rep.check(Check::relative(format!("w^a rate a={a}"), wa_fit.rate, e0, tol.rate));
        let h_floor = (k as f64 + 0.5) * e0 * (1.0 - tol.rate);
        rep.check(Check::at_least(format!("w^a - v_k rate a={a}"), h_fit.rate, h_floor));

        // Cross-validation against the evolver over one unit of time. The
        // Picard forcing leaves out the static residual of the discrete W, so
        // the matching evolution is the well-balanced one.
        let n1 = (1.0 / tg.step()).round() as usize;
        let start = sol.state(problem, 0);
        let target = sol.state(problem, n1);
        let dynamics = Dynamics::about_ground_state(&gs, true);
        let evolver_cfg = EvolverConfig {
            cfl: cfg.cfl,
            t_run: target.t - start.t,
            track_distance: false,
            ..EvolverConfig::default()
        };
        let outcome = evolve(&start, &evolver_cfg, &dynamics)?;
        let cross = h1dot_norm(&(&outcome.final_state.u - &target.u)) / h1dot_norm(&(&target.u - w));
        rep.check(Check::at_most(format!("evolver cross-validation a={a}"), cross, tol.cross_validation));

        runs.push(json!({
            "a": a, "k": k, "t_start": tg.t_start(), "T_max": tg.t_max(), "iterations": sol.iterations,
            "sigma_history": sol.history, "ratios": ratios, "sigma": sol.sigma.value, "alpha": sol.alpha,
            "fitted_rates": { "w_a": wa_fit.rate / e0, "h": h_fit.rate / e0, "w_a_rms": wa_fit.residual, "h_rms": h_fit.residual },
            "tail_estimate": sol.tail_estimate, "pde_residual_over_floor": worst_pde,
            "cross_validation": cross,
        }));
        sink.field(&format!("wa_a{}_k{k}.field", amp_label(a)), || {
            Ok(FieldFile::from_fields(wa.fields(), "trajectory")?
                .with_meta("a", a)
                .with_meta("k", k)
                .with_meta("e0", e0)
                .with_meta("t_start", tg.t_start())
                .with_meta("dt", tg.step()))
        })?;
        sink.text(
            &format!("sigma_a{}_k{k}.csv", amp_label(a)),
            &csv("iteration,difference", sol.history.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), num(*d)])),
        )?;
    }

    // Threshold properties of the data W^a(t_start).
    let mut threshold = Vec::new();
    for &m in &fp.threshold_amplitudes {
        for a in [m, -m] {
            let (problem, sol) = find(a, k);
            let data = sol.state(problem, 0);
            let e = energy(&data).total;
            let defect = (e - e_w).abs() / e_w;
            let side = h1dot_norm(&data.u) - grad_w;
            rep.check(Check::at_most(format!("threshold energy a={a:e}"), defect, tol.threshold_energy));
            rep.check(Check::flag(
                format!("gradient side a={a:e}"),
                side.signum() == a.signum() && side != 0.0,
                format!("|grad W^a| - |grad W| = {side:.3e}"),
            ));
            threshold.push(json!({ "a": a, "energy_defect": defect, "gradient_excess": side }));
        }
    }

    // Shift law against a = main_a.
    let (pref, sref) = find(main_a, k);
    let wref = sref.wa(pref);
    let mut shifts = Vec::new();
    let mut same_sign_residual: f64 = 0.0;
    for &a in [shift_amps[0], main_a, shift_amps[1]].iter() {
        let (p, s) = find(a, k);
        let fit = time_shift_fit(&s.wa(p), &wref, fp.min_overlap)?;
        let expected = (a.abs()).ln() / e0;
        let check = if expected.abs() < 1e-12 {
            Check::at_most(format!("shift law a={a:.6}"), fit.shift.abs(), tol.shift_absolute)
        } else {
            Check::relative(format!("shift law a={a:.6}"), fit.shift, expected, tol.shift)
        };
        rep.check(check);
        if a != main_a {
            same_sign_residual = same_sign_residual.max(fit.residual);
        }
        shifts.push(json!({ "a": a, "expected": expected, "shift": fit.shift, "residual": fit.residual, "overlap": fit.overlap }));
    }
    if let Some(&opposite) = fp.amplitudes.iter().find(|b| b.signum() != main_a.signum()) {
        let (p, s) = find(opposite, k);
        let fit = time_shift_fit(&s.wa(p), &wref, fp.min_overlap)?;
        rep.check(Check::at_least(
            format!("cross-sign residual a={opposite}"),
            fit.residual / same_sign_residual,
            tol.cross_sign_factor,
        ));
        shifts.push(json!({ "a": opposite, "expected": null, "shift": fit.shift, "residual": fit.residual, "overlap": fit.overlap }));
    }
    sink.text(
        "shifts.csv",
        &csv(
            "a,expected,shift,residual",
            shifts.iter().map(|s| ["a", "expected", "shift", "residual"].iter().map(|k| s[*k].to_string()).collect()),
        ),
    )?;

    // The reconstruction does not depend on k.
    let (p2, s2) = find(main_a, fp.compare_order);
    let w2 = s2.wa(p2);
    let agreement = wref
        .fields()
        .iter()
        .zip(w2.fields())
        .map(|(a, b)| lebesgue_norm(&(a - b), 2.0) / lebesgue_norm(a, 2.0))
        .fold(0.0, f64::max);
    rep.check(Check::at_most(
        format!("order independence k={} vs k={}", fp.compare_order, k),
        agreement,
        tol.order_agreement,
    ));

    rep.put("e0", json!(e0));
    rep.put("runs", Value::Array(runs));
    rep.put("threshold", Value::Array(threshold));
    rep.put("shifts", Value::Array(shifts));
    rep.put("order_agreement", json!(agreement));
    Ok(rep)
}

// ----------------------------------------------------------------------------
// dichotomy

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
enum Variant {
    Base,
    DoubleNodes,
    HalfStep,
}

impl Variant {
    fn label(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::DoubleNodes => "2N",
            Variant::HalfStep => "dt/2",
        }
    }
}

struct SweepRun {
    a: f64,
    variant: Variant,
    class: Classification,
    outcome: crate::evolver::EvolutionOutcome,
    support: f64,
}

fn dichotomy_run(cfg: &ExperimentConfig, a: f64, variant: Variant) -> Result<SweepRun> {
    let dc = &cfg.dichotomy;
    let nodes = if variant == Variant::DoubleNodes { 2 * dc.nodes } else { dc.nodes };
    let cfl = if variant == Variant::HalfStep { cfg.cfl / 2.0 } else { cfg.cfl };
    let r = Reference::new(cfg.d, dc.radius, nodes)?;
    let ps = r.profiles(a, dc.order, dc.t_start)?;
    let t0 = dc.t_start;
    let data = State::new(t0, ps.eval_wka(t0), ps.eval_vk_derivative(t0, 1))?;
    let dynamics = Dynamics::about_ground_state(&r.gs, true);
    let support = data_support(&data, &dynamics);
    let ecfg = EvolverConfig {
        cfl,
        t_run: dc.t_run,
        direction: Direction::Backward,
        blowup_threshold: dc.blowup_threshold,
        diagnostic_stride: dc.diagnostic_stride * if variant == Variant::HalfStep { 2 } else { 1 },
        track_distance: false,
    };
    let outcome = evolve(&data, &ecfg, &dynamics)?;
    let class = classify(&outcome, h1dot_norm(r.gs.field()), dc.t_run);
    Ok(SweepRun {
        a,
        variant,
        class,
        outcome,
        support,
    })
}

pub fn cmd_dichotomy(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("dichotomy", cfg)?;
    let sink = Sink::new(out, "dichotomy", cfg)?;
    let dc = &cfg.dichotomy;

    evolver_quality(cfg, &mut rep, &sink)?;

    let mut variants = vec![Variant::Base];
    if dc.refine {
        variants.extend([Variant::DoubleNodes, Variant::HalfStep]);
    }
    let jobs: Vec<(f64, Variant)> = dc
        .amplitudes
        .iter()
        .flat_map(|&a| variants.iter().map(move |&v| (a, v)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(a, v)| dichotomy_run(cfg, a, v))
        .collect::<Result<Vec<_>>>()?;
    for run in &runs {
        rep.constraints.push(Constraint::new(
            &format!("light cone a={:e} {}", run.a, run.variant.label()),
            dc.t_run <= dc.radius - run.support,
            format!("T_run = {} <= R - support = {:.3}", dc.t_run, dc.radius - run.support),
        ));
    }

    let mut rows = Vec::new();
    for &a in &dc.amplitudes {
        let of = |v: Variant| runs.iter().find(|r| r.a == a && r.variant == v);
        let base = of(Variant::Base).expect("base run exists");
        let expected = if a > 0.0 {
            "blowup"
        } else if a < 0.0 {
            "dispersal"
        } else {
            "undecided"
        };
        rep.check(Check::flag(
            format!("classification a={a:e}"),
            base.class.label() == expected,
            format!("{} (expected {expected})", describe(&base.class)),
        ));
        for v in variants.iter().skip(1) {
            let other = of(*v).expect("refined run exists");
            rep.check(Check::flag(
                format!("classification stable a={a:e} {}", v.label()),
                other.class.label() == base.class.label(),
                format!("{} vs {}", describe(&other.class), describe(&base.class)),
            ));
            if let (Classification::Blowup { t: t1 }, Classification::Blowup { t: t2 }) = (&base.class, &other.class) {
                let spread = (t1 - t2).abs() / t1.abs();
                rep.check(Check::at_most(format!("blow-up time stable a={a:e} {}", v.label()), spread, 0.1));
            }
        }
        for run in runs.iter().filter(|r| r.a == a) {
            let last = run.outcome.series.last();
            rows.push(json!({
                "a": a, "variant": run.variant.label(), "class": run.class.label(),
                "time": class_time(&run.class), "steps": run.outcome.steps, "dt": run.outcome.dt,
                "final_grad_norm": last.map(|r| r.grad_norm), "final_sup_u": last.map(|r| r.sup_u),
            }));
            let mut bytes = Vec::new();
            write_csv(&run.outcome.series, &mut bytes)?;
            let name = format!("run_a{}_{}.csv", amp_label(a), run.variant.label().replace('/', "_"));
            sink.text(&name, &String::from_utf8(bytes).expect("csv is utf-8"))?;
        }
    }
    rep.put("runs", Value::Array(rows));
    Ok(rep)
}

fn describe(c: &Classification) -> String {
    match c {
        Classification::Undecided { t_run } => format!("undecided within {t_run}"),
        other => format!("{} at t = {:.4}", other.label(), class_time(other)),
    }
}

fn class_time(c: &Classification) -> f64 {
    match *c {
        Classification::Blowup { t } | Classification::Dispersal { t } => t,
        Classification::Undecided { t_run } => t_run,
    }
}

/// Energy drift and stillness of `(W, 0)`, and the time order of the
/// leapfrog scheme against the exact spectral propagator.
fn evolver_quality(cfg: &ExperimentConfig, rep: &mut Report, sink: &Sink) -> Result<()> {
    let tol = &cfg.tolerances;
    let dc = &cfg.dichotomy;
    let grid = RadialGrid::new(cfg.d, cfg.radius, cfg.nodes)?;
    let gs = GroundState::new(&grid)?;
    let w = gs.field();
    let data = State::at_rest(0.0, w.clone());
    let ecfg = EvolverConfig {
        cfl: cfg.cfl,
        t_run: dc.static_time,
        track_distance: true,
        diagnostic_stride: 100,
        ..EvolverConfig::default()
    };
    let grad_w = h1dot_norm(w);
    let outcomes = [false, true]
        .par_iter()
        .map(|&wb| evolve(&data, &ecfg, &Dynamics::about_ground_state(&gs, wb)))
        .collect::<Result<Vec<_>>>()?;
    let (plain, balanced) = (&outcomes[0], &outcomes[1]);
    let drift = plain.energy_drift() / dc.static_time;
    rep.check(Check::at_most("energy drift per unit time", drift, tol.energy_drift));
    let deviation = |o: &crate::evolver::EvolutionOutcome| h1dot_norm(&(&o.final_state.u - w)) / grad_w;
    let (dev_plain, dev_balanced) = (deviation(plain), deviation(balanced));
    rep.check(Check::at_most("static solution deviation", dev_balanced, tol.static_deviation));
    let mut bytes = Vec::new();
    write_csv(&plain.series, &mut bytes)?;
    sink.text("static_W.csv", &String::from_utf8(bytes).expect("csv is utf-8"))?;

    // Linear mode: leapfrog against the exact semi-discrete propagator.
    let lgrid = RadialGrid::new(cfg.d, dc.linear_radius, dc.linear_nodes)?;
    let prop = build_propagator(&lgrid)?;
    let bump = Field::from_fn(&lgrid, |r| (-(r / 1.5).powi(2)).exp());
    let zero = Field::zeros(&lgrid);
    let exact = prop.free_evolve(&bump, &zero, dc.linear_time)?;
    let free = Dynamics::free(&lgrid)?;
    let cfls = [cfg.cfl, cfg.cfl / 2.0, cfg.cfl / 4.0];
    let errors = cfls
        .par_iter()
        .map(|&c| -> Result<f64> {
            let ecfg = EvolverConfig {
                cfl: c,
                t_run: dc.linear_time,
                track_distance: false,
                diagnostic_stride: 1000,
                ..EvolverConfig::default()
            };
            let o = evolve(&State::at_rest(0.0, bump.clone()), &ecfg, &free)?;
            Ok(h1dot_norm(&(&o.final_state.u - &exact.u)) / h1dot_norm(&bump))
        })
        .collect::<Result<Vec<_>>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    rep.check(Check::at_least("leapfrog time order", order, tol.time_order));
    rep.put(
        "evolver_quality",
        json!({
            "energy_drift_total": plain.energy_drift(), "energy_drift_per_time": drift,
            "deviation_plain": dev_plain, "deviation_well_balanced": dev_balanced,
            "linear_cfl": cfls, "linear_errors": errors, "linear_orders": orders,
        }),
    );
    Ok(())
}

// ----------------------------------------------------------------------------
// inequalities

/// Bumps per degenerating family.
const FAMILY_STEPS: usize = 9;

fn suite_constant(rep: &mut Report, name: &str, uc: UniformConstant) -> Result<Value> {
    if let Some(refined) = uc.refined_max {
        rep.check(Check::at_most(format!("{name} refined suite"), refined, uc.constant));
    }
    rep.check(Check::at_most(format!("{name} tail growth"), uc.worst_exponent(), TAIL_EXPONENT));
    Ok(serde_json::to_value(uc)?)
}

/// Uniform constant of `ratio(field, partner)` over the seeded suite on
/// `(d, R, N)`, the suite rebuilt on `2N`, and the degenerating families.
/// Suite partners come from the suite seeded `seed + 1`; the families are
/// partnered with their common starting bump, a unit Gaussian at the origin.
fn field_constant<F>(d: usize, cfg: &ExperimentConfig, partnered: bool, ratio: F) -> Result<UniformConstant>
where
    F: Fn(&Field, Option<&Field>) -> Result<f64> + Sync,
{
    let suite_ratios = |grid: &Arc<RadialGrid>| -> Result<Vec<f64>> {
        let fields = smooth_bump_suite(grid, cfg.suite_size, cfg.seed);
        let partners = partnered.then(|| smooth_bump_suite(grid, cfg.suite_size, cfg.seed.wrapping_add(1)));
        fields
            .par_iter()
            .enumerate()
            .map(|(i, f)| ratio(f, partners.as_ref().map(|p| &p[i])))
            .collect()
    };
    let grid = RadialGrid::new(d, cfg.radius, cfg.nodes)?;
    let ratios = suite_ratios(&grid)?;
    let refined = suite_ratios(&RadialGrid::new(d, cfg.radius, 2 * cfg.nodes)?)?;
    let partner = partnered.then(|| gaussian_bump(&grid, 0.0, 1.0));
    let tails = Degeneration::ALL
        .iter()
        .map(|&kind| {
            let points = degenerating_family(&grid, kind, FAMILY_STEPS)
                .par_iter()
                .map(|(param, f)| Ok((*param, ratio(f, partner.as_ref())?)))
                .collect::<Result<Vec<_>>>()?;
            Tail::new(serde_json::to_value(kind)?.as_str().unwrap_or_default(), &points)
        })
        .collect::<Result<Vec<_>>>()?;
    uniform_constant(&ratios, Some(&refined), tails)
}

pub fn cmd_inequalities(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    let mut rep = Report::start("inequalities", cfg)?;
    let sink = Sink::new(out, "inequalities", cfg)?;
    let tol = &cfg.tolerances;
    let n = cfg.suite_size;
    let mut summary = serde_json::Map::new();

    // Superlinearity of R: perturbations sφ with ‖φ‖_{Ḣ¹} = ‖W‖_{Ḣ¹}, so s is
    // the relative size of the perturbation.
    let mut slopes = Vec::new();
    for &d in &cfg.dims {
        let grid = RadialGrid::new(d, cfg.radius, cfg.nodes)?;
        let gs = GroundState::new(&grid)?;
        let p = gs.params().p_c();
        let w_norm = h1dot_norm(gs.field());
        let s_values = logspace(1e-4, 1e-1, 13);
        let fields = smooth_bump_suite(&grid, n, cfg.seed);
        let worst = fields
            .par_iter()
            .map(|phi| {
                let phi = phi.scaled(w_norm / h1dot_norm(phi));
                loglog_slope(&superlinearity_samples(&gs, &phi, &s_values))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        rep.check(Check::at_least(format!("superlinearity slope d={d}"), worst, p - tol.superlinear_margin));
        slopes.push(json!({ "d": d, "p_c": p, "min_slope": worst }));
    }
    summary.insert("superlinearity".into(), Value::Array(slopes));

    // Gain of decay along the fixed point.
    let setup = FixedPointSetup::new(cfg)?;
    let e0 = setup.e0();
    let (problem, sol) = setup.solve(cfg.fixedpoint.amplitudes[0], cfg.fixedpoint.order, cfg.fixedpoint.tol)?;
    let wa = sol.wa(&problem);
    let stride = (wa.len() / 8).max(1);
    let samples: Vec<(f64, &Field)> = wa.times().iter().copied().zip(wa.fields()).step_by(stride).collect();
    let fp_grid = setup.prop.grid().clone();
    let units: Vec<Field> = smooth_bump_suite(&fp_grid, n, cfg.seed)
        .iter()
        .map(|g| g.scaled(1.0 / h1dot_norm(g)))
        .collect();
    let gs = setup.reference.clone();
    let gain = units
        .par_iter()
        .map(|unit| -> Result<Vec<f64>> {
            let mut out = Vec::new();
            for eps in [1e-3, 1e-2, 1e-1] {
                let h = unit.scaled(eps);
                for &(t, w) in &samples {
                    out.push(gain_of_decay_ratio(&gs, &h, w, t, e0)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    // Tail: the worst (field, time) pair as the perturbation shrinks.
    let per_field = 3 * samples.len();
    let worst = gain
        .iter()
        .flatten()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (t, w) = samples[(worst % per_field) % samples.len()];
    let unit = &units[worst / per_field];
    let shrinking = logspace(1e-1, 1e-5, FAMILY_STEPS)
        .into_iter()
        .map(|eps| Ok((1.0 / eps, gain_of_decay_ratio(&gs, &unit.scaled(eps), w, t, e0)?)))
        .collect::<Result<Vec<_>>>()?;
    let gain = gain.concat();
    let uc = uniform_constant(&gain, None, vec![Tail::new("vanishing", &shrinking)?])?;
    summary.insert("gain_of_decay".into(), suite_constant(&mut rep, "gain of decay", uc)?);

    // Embedding H^{m,m} ⊂ weighted W^{k,∞}.
    let mut embedding = Vec::new();
    let mut dims: Vec<usize> = vec![3, cfg.d];
    dims.dedup();
    for d in dims {
        for (k1, k2, m) in embedding_cases(d) {
            let uc = field_constant(d, cfg, false, |f, _| embedding_ratio(f, k1, k2, m))?;
            let value = suite_constant(&mut rep, &format!("embedding d={d} k1={k1} k2={k2} m={m}"), uc)?;
            embedding.push(json!({ "d": d, "k1": k1, "k2": k2, "m": m, "constant": value }));
        }
    }
    summary.insert("embedding".into(), Value::Array(embedding));

    // Bilinear estimate; the H^{m,m} factor runs through the families.
    let m = crate::grid::M_MAX;
    let uc = field_constant(cfg.d, cfg, true, |g, f| {
        bilinear_ratio(f.expect("partnered suite"), g, m)
    })?;
    summary.insert("bilinear".into(), suite_constant(&mut rep, &format!("bilinear m={m}"), uc)?);

    // Powers with polynomial weights, d = 3, C = 1/2.
    let mut powers = Vec::new();
    for j in [2usize, 3] {
        let c = 0.5;
        let min_m = power_weight_min_order(3, j, c);
        rep.require(&format!("power weight order j={j}"), (m as f64) >= min_m, format!("m = {m} >= {min_m:.3}"))?;
        let uc = field_constant(3, cfg, false, |h, _| power_weight_ratio(h, j, c, m))?;
        let value = suite_constant(&mut rep, &format!("power weight j={j}"), uc)?;
        powers.push(json!({ "j": j, "C": c, "m": m, "constant": value }));
    }
    summary.insert("power_weight".into(), Value::Array(powers));

    sink.text(
        "gain_of_decay.csv",
        &csv("index,ratio", gain.iter().enumerate().map(|(i, r)| vec![i.to_string(), num(*r)])),
    )?;
    rep.data = Value::Object(summary);
    Ok(rep)
}

// ----------------------------------------------------------------------------

/// Run one suite by name.
pub fn run_command(command: &str, cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Report> {
    match command {
        "groundstate" => cmd_groundstate(cfg, out),
        "spectrum" => cmd_spectrum(cfg, out),
        "profiles" => cmd_profiles(cfg, out),
        "fixedpoint" => cmd_fixedpoint(cfg, out),
        "dichotomy" => cmd_dichotomy(cfg, out),
        "inequalities" => cmd_inequalities(cfg, out),
        other => Err(Error::InvalidArgument(format!("unknown command `{other}`"))),
    }
}

/// Run a suite and write `<out>/<command>/report.json`.
pub fn execute(command: &str, cfg: &ExperimentConfig, out: &Path) -> Result<Report> {
    let report = run_command(command, cfg, Some(out))?;
    fs::write(out.join(command).join("report.json"), report.to_json()?)?;
    Ok(report)
}

/// Outcome of one suite inside `all`.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub command: &'static str,
    pub result: Result<Report>,
}

/// Every suite in order; writes `<out>/all.json` with one status per suite.
pub fn execute_all(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<SuiteOutcome>> {
    fs::create_dir_all(out)?;
    let outcomes: Vec<SuiteOutcome> = COMMANDS
        .iter()
        .map(|&command| SuiteOutcome {
            command,
            result: execute(command, cfg, out),
        })
        .collect();
    let status: serde_json::Map<String, Value> = outcomes
        .iter()
        .map(|o| {
            let v = match &o.result {
                Ok(r) => json!({ "passed": r.passed(), "checks": r.checks.len(), "failures": r.failures().len() }),
                Err(e) => json!({ "fault": e.to_string() }),
            };
            (o.command.to_string(), v)
        })
        .collect();
    let summary = json!({ "format_version": REPORT_VERSION, "command": "all", "config": cfg, "suites": status });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    fs::write(out.join("all.json"), text)?;
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        let partial = ExperimentConfig::from_json(r#"{"d": 7, "dichotomy": {"t_run": 5.0}}"#).unwrap();
        assert_eq!(partial.d, 7);
        assert_eq!(partial.dichotomy.t_run, 5.0);
        assert_eq!(partial.dichotomy.nodes, 10000);
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn low_dimension_is_rejected() {
        let cfg = ExperimentConfig {
            d: 2,
            ..ExperimentConfig::default()
        };
        assert!(matches!(cmd_groundstate(&cfg, None), Err(Error::Config(_))));
        let cfg = ExperimentConfig {
            cfl: 1.5,
            ..ExperimentConfig::default()
        };
        assert!(matches!(cmd_spectrum(&cfg, None), Err(Error::Config(_))));
    }

    #[test]
    fn coarse_grid_fails_the_residual_check() {
        let cfg = ExperimentConfig {
            nodes: 100,
            dims: vec![6],
            suite_size: 4,
            ..ExperimentConfig::default()
        };
        let rep = cmd_groundstate(&cfg, None).unwrap();
        let check = rep.check_named("static residual").unwrap();
        assert!(!check.passed);
        assert!(check.value > 1e-4);
        assert!(!rep.passed());
    }

    #[test]
    fn amplitude_labels() {
        assert_eq!(amp_label(1e-3), "+1e-3");
        assert_eq!(amp_label(-1.0), "-1e0");
        assert_eq!(amp_label(0.0), "0");
    }
}
