//! Subcommand execution and table/summary output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use shg_core::analysis::{fit_deff_in, matched_power_search, sweep_power};
use shg_core::physics::{cavity_eigenmode, single_pass_coefficient_with};
use shg_core::{CavityModel, ShgError, SteadyStateResult};
use thiserror::Error;

use crate::config::{write_config, ConfigError, RunConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Sweep,
    Scan,
    Fit,
    Match,
    Eigenmode,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Scan => "scan",
            Command::Fit => "fit",
            Command::Match => "match",
            Command::Eigenmode => "eigenmode",
        }
    }
}

/// Inclusive linear grid given on the command line as `start:stop:n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k == self.points - 1 {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / last
                }
            })
            .collect()
    }

    /// Like [`Grid::values`] but exactly antisymmetric when start = −stop.
    fn symmetric_values(&self) -> Vec<f64> {
        let v = self.values();
        if self.start != -self.stop {
            return v;
        }
        let n = v.len();
        (0..n)
            .map(|k| match (2 * k + 1).cmp(&n) {
                std::cmp::Ordering::Less => -v[n - 1 - k],
                std::cmp::Ordering::Equal => 0.0,
                std::cmp::Ordering::Greater => v[k],
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(format!("expected start:stop:n, got {s:?}"));
        };
        let start: f64 = a.parse().map_err(|e| format!("start {a:?}: {e}"))?;
        let stop: f64 = b.parse().map_err(|e| format!("stop {b:?}: {e}"))?;
        let points: usize = n.parse().map_err(|e| format!("count {n:?}: {e}"))?;
        if !(start.is_finite() && stop.is_finite()) || points == 0 {
            return Err(format!("invalid grid {s:?}"));
        }
        Ok(Grid { start, stop, points })
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver: {0}")]
    Solver(#[from] ShgError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },
}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
    /// Directory that relative paths inside the configuration refer to.
    pub base_dir: PathBuf,
    pub out: PathBuf,
    pub power_w: Option<f64>,
    pub grid: Option<Grid>,
}

pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// Where the summary of a run writing `out` goes.
pub fn summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

pub fn render_table(meta: &[(&str, String)], table: &Table) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}: {v}");
    }
    let _ = writeln!(s, "{}", table.columns.join(","));
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.10e}")).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

/// Runs one subcommand, writes `out` and its summary, and returns the summary.
pub fn run(inv: &Invocation) -> Result<Value, RunError> {
    let specs = inv.config.specs();
    let sim = inv.config.sim_config();
    specs.validate()?;
    sim.validate()?;

    let (table, mut summary) = match inv.command {
        Command::Simulate => simulate(inv)?,
        Command::Sweep => sweep(inv)?,
        Command::Scan => scan(inv)?,
        Command::Fit => fit(inv)?,
        Command::Match => matched(inv)?,
        Command::Eigenmode => eigenmode(inv)?,
    };

    let specs_hash = specs.fingerprint(&sim);
    let config_hash: String = Sha256::digest(write_config(&inv.config).as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    let meta = [
        ("tool", format!("shgsim {VERSION}")),
        ("command", inv.command.name().to_string()),
        ("specs_sha256", specs_hash.clone()),
        ("config_sha256", config_hash.clone()),
    ];
    write(&inv.out, &render_table(&meta, &table))?;

    summary.insert("tool".into(), json!(format!("shgsim {VERSION}")));
    summary.insert("command".into(), json!(inv.command.name()));
    summary.insert("specs_sha256".into(), json!(specs_hash));
    summary.insert("config_sha256".into(), json!(config_hash));
    summary.insert("rows".into(), json!(table.rows.len()));
    let summary = Value::Object(summary);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write(&summary_path(&inv.out), &text)?;
    Ok(summary)
}

fn write(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Output {
        path: path.to_path_buf(),
        source,
    })
}

fn missing(section: &str, flag: &str) -> RunError {
    RunError::Usage(format!("no [{section}] section in the configuration and no {flag} given"))
}

const STATE_COLUMNS: [&str; 9] = [
    "p_input_W",
    "detuning_rad",
    "efficiency",
    "p_harmonic_W",
    "p_harmonic_detected_W",
    "p_reflected_W",
    "p_circulating_W",
    "depletion",
    "iterations",
];

fn state_row(r: &SteadyStateResult) -> Vec<f64> {
    vec![
        r.p_input,
        r.detuning,
        r.external_efficiency,
        r.p_harmonic_out,
        r.p_harmonic_detected,
        r.p_reflected_fundamental,
        r.p_circulating_fundamental,
        r.depletion,
        r.iterations as f64,
    ]
}

fn state_summary(r: &SteadyStateResult) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("p_input_W".into(), json!(r.p_input));
    m.insert("detuning_rad".into(), json!(r.detuning));
    m.insert("efficiency".into(), json!(r.external_efficiency));
    m.insert("p_harmonic_W".into(), json!(r.p_harmonic_out));
    m.insert("p_harmonic_detected_W".into(), json!(r.p_harmonic_detected));
    m.insert("p_reflected_W".into(), json!(r.p_reflected_fundamental));
    m.insert("p_circulating_W".into(), json!(r.p_circulating_fundamental));
    m.insert("p_lost_W".into(), json!(r.losses.total()));
    m.insert("depletion".into(), json!(r.depletion));
    m.insert("coupling_regime".into(), json!(r.coupling_regime.as_str()));
    m.insert("iterations".into(), json!(r.iterations));
    m.insert("converged".into(), json!(r.converged));
    m.insert("final_residual".into(), json!(r.final_residual));
    m
}

type Output = (Table, Map<String, Value>);

fn model(inv: &Invocation) -> Result<CavityModel, RunError> {
    Ok(CavityModel::new(&inv.config.specs(), &inv.config.sim_config())?)
}

fn simulate(inv: &Invocation) -> Result<Output, RunError> {
    let section = inv.config.simulate.as_ref();
    let power = inv
        .power_w
        .or(section.map(|s| s.power_W))
        .ok_or_else(|| missing("simulate", "--power-W"))?;
    let model = model(inv)?;
    let r = match section.and_then(|s| s.detuning_rad) {
        Some(d) => model.solve_steady_state(power, d)?,
        None => model.on_resonance(power)?,
    };
    let table = Table {
        columns: STATE_COLUMNS.to_vec(),
        rows: vec![state_row(&r)],
    };
    Ok((table, state_summary(&r)))
}

fn sweep(inv: &Invocation) -> Result<Output, RunError> {
    let grid = inv
        .grid
        .or(inv.config.sweep.as_ref().map(|s| Grid {
            start: s.power_start_W,
            stop: s.power_stop_W,
            points: s.points,
        }))
        .ok_or_else(|| missing("sweep", "--grid"))?;
    let curve = sweep_power(&grid.values(), &inv.config.specs(), &inv.config.sim_config())?;
    if let Some(f) = curve.failures.first() {
        return Err(RunError::Solver(ShgError::Domain(format!(
            "{} of {} sweep points failed, first at {} W: {}",
            curve.failures.len(),
            grid.points,
            f.p_input,
            f.error
        ))));
    }
    let rows = curve
        .points
        .iter()
        .map(|p| vec![p.p_input, p.efficiency, p.p_harmonic, p.depletion])
        .collect();
    let mut summary = Map::new();
    if let Some(peak) = curve.peak() {
        summary.insert("peak_efficiency".into(), json!(peak.efficiency));
        summary.insert("peak_p_input_W".into(), json!(peak.p_input));
    }
    summary.insert(
        "max_iterations".into(),
        json!(curve.points.iter().map(|p| p.iterations).max().unwrap_or(0)),
    );
    let table = Table {
        columns: vec!["p_input_W", "efficiency", "p_harmonic_W", "depletion"],
        rows,
    };
    Ok((table, summary))
}

fn scan(inv: &Invocation) -> Result<Output, RunError> {
    let section = inv.config.scan.as_ref();
    let power = inv
        .power_w
        .or(section.map(|s| s.power_W))
        .ok_or_else(|| missing("scan", "--power-W"))?;
    let grid = inv
        .grid
        .or(section.map(|s| Grid {
            start: s.detuning_start_rad,
            stop: s.detuning_stop_rad,
            points: s.points,
        }))
        .ok_or_else(|| missing("scan", "--grid"))?;
    let model = model(inv)?;
    let trace = model.scan_detuning(power, &grid.symmetric_values())?;
    let relative = |r: &SteadyStateResult| if power > 0.0 { r.p_reflected_fundamental / power } else { 0.0 };
    let rows = trace
        .iter()
        .map(|r| {
            vec![
                r.detuning,
                relative(r),
                r.p_reflected_fundamental,
                r.p_harmonic_out,
                r.external_efficiency,
            ]
        })
        .collect();
    let mut summary = Map::new();
    summary.insert("p_input_W".into(), json!(power));
    let min = trace.iter().map(relative).fold(f64::INFINITY, f64::min);
    summary.insert("min_relative_reflection".into(), json!(min));
    summary.insert(
        "max_efficiency".into(),
        json!(trace.iter().map(|r| r.external_efficiency).fold(0.0, f64::max)),
    );
    let table = Table {
        columns: vec!["detuning_rad", "relative_reflection", "p_reflected_W", "p_harmonic_W", "efficiency"],
        rows,
    };
    Ok((table, summary))
}

/// Reads `p_input_W,depletion` rows; `#` lines and a header are skipped.
pub fn read_depletion_data(path: &Path) -> Result<Vec<(f64, f64)>, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Data {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut data = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("p_input") {
            continue;
        }
        let bad = |reason: String| RunError::Data {
            path: path.to_path_buf(),
            reason: format!("line {}: {reason}", i + 1),
        };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let [p, d] = cells.as_slice() else {
            return Err(bad(format!("expected 2 columns, got {}", cells.len())));
        };
        let p: f64 = p.parse().map_err(|e| bad(format!("{p:?}: {e}")))?;
        let d: f64 = d.parse().map_err(|e| bad(format!("{d:?}: {e}")))?;
        data.push((p, d));
    }
    Ok(data)
}

fn fit(inv: &Invocation) -> Result<Output, RunError> {
    let section = inv
        .config
        .fit
        .as_ref()
        .ok_or_else(|| RunError::Usage("no [fit] section in the configuration".into()))?;
    let data = read_depletion_data(&inv.base_dir.join(&section.data_path))?;
    let bracket = (section.d_eff_min_pm_per_v / 1e12, section.d_eff_max_pm_per_v / 1e12);
    let specs = inv.config.specs();
    let result = fit_deff_in(&data, &specs, &inv.config.sim_config(), bracket)?;
    let rows = data
        .iter()
        .zip(&result.residuals)
        .map(|(&(p, d), res)| vec![p, d, d + res, *res])
        .collect();
    let mut summary = Map::new();
    summary.insert("d_eff_pm_per_V".into(), json!(result.d_eff * 1e12));
    summary.insert("single_pass_coefficient_per_W".into(), json!(result.single_pass_coefficient));
    summary.insert("objective".into(), json!(result.objective));
    summary.insert("points".into(), json!(data.len()));
    let table = Table {
        columns: vec!["p_input_W", "measured_depletion", "model_depletion", "residual"],
        rows,
    };
    Ok((table, summary))
}

fn matched(inv: &Invocation) -> Result<Output, RunError> {
    let bracket = inv
        .grid
        .map(|g| (g.start, g.stop))
        .or(inv.config.matching.as_ref().map(|m| (m.power_low_W, m.power_high_W)))
        .ok_or_else(|| missing("match", "--grid"))?;
    let specs = inv.config.specs();
    let sim = inv.config.sim_config();
    let p = matched_power_search(&specs, &sim, bracket)?;
    let r = CavityModel::new(&specs, &sim)?.on_resonance(p)?;
    let reflectivity = r.matched_reflectivity(specs.cavity.mode_matching);
    let mut summary = state_summary(&r);
    summary.insert("p_matched_W".into(), json!(p));
    summary.insert("matched_reflectivity".into(), json!(reflectivity));
    let table = Table {
        columns: vec!["p_matched_W", "matched_reflectivity", "efficiency", "p_harmonic_W"],
        rows: vec![vec![p, reflectivity, r.external_efficiency, r.p_harmonic_out]],
    };
    Ok((table, summary))
}

fn eigenmode(inv: &Invocation) -> Result<Output, RunError> {
    let specs = inv.config.specs();
    let mode = cavity_eigenmode(&specs.cavity, &specs.crystal, specs.beam.wavelength_fundamental)?;
    let xi = specs.beam.focusing_parameter(&specs.crystal);
    let e_nl = single_pass_coefficient_with(&specs.crystal, &specs.beam, inv.config.sim_config().focusing)?;
    let mut summary = Map::new();
    summary.insert("waist_um".into(), json!(mode.waist_radius * 1e6));
    summary.insert("waist_position_mm".into(), json!(mode.waist_position * 1e3));
    summary.insert("half_trace".into(), json!(mode.half_trace));
    summary.insert("coupler_spot_um".into(), json!(mode.coupler_spot_radius * 1e6));
    summary.insert("focusing_parameter".into(), json!(xi));
    summary.insert("single_pass_coefficient_per_W".into(), json!(e_nl));
    let table = Table {
        columns: vec!["waist_um", "waist_position_mm", "half_trace", "coupler_spot_um", "focusing_parameter", "single_pass_coefficient_per_W"],
        rows: vec![vec![
            mode.waist_radius * 1e6,
            mode.waist_position * 1e3,
            mode.half_trace,
            mode.coupler_spot_radius * 1e6,
            xi,
            e_nl,
        ]],
    };
    Ok((table, summary))
}
