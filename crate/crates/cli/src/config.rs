//! Run configuration: TOML with one table per component and the unit in
//! every key name.
//!
//! Values are stored exactly as written (mm, %, pm/V, ...) so that writing a
//! configuration and reading it back is lossless; conversion to SI happens in
//! [`RunConfig::specs`] and [`RunConfig::sim_config`].

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use shg_core::physics::{BeamSpec, CrystalSpec};
use shg_core::{CavitySpec, Execution, FocusingModel, SimConfig, Specs};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Syntax(String),
    #[error("missing section [{section}]")]
    MissingSection { section: &'static str },
    #[error("{key} (line {line}, unit {unit}): {reason}")]
    Field {
        key: String,
        line: usize,
        unit: &'static str,
        reason: String,
    },
}

impl ConfigError {
    /// Dotted key of a field error, e.g. `crystal.length_mm`.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Field { key, .. } => Some(key),
            _ => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Field { line, .. } => Some(*line),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Focusing {
    BoydKleinman,
    PlaneWave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrystalConfig {
    pub length_mm: f64,
    #[serde(rename = "d_eff_pm_per_V")]
    pub d_eff_pm_per_v: f64,
    pub n_fundamental: f64,
    pub n_harmonic: f64,
    /// Attenuation coefficient in %/cm, i.e. α = value · 1/m.
    pub alpha_fundamental_percent_per_cm: f64,
    pub alpha_harmonic_percent_per_cm: f64,
    /// Charged at every crossing of a crystal face.
    pub ar_residual_reflectivity_percent: f64,
    pub hr_reflectivity_fundamental_percent: f64,
    pub hr_reflectivity_harmonic_percent: f64,
    pub hr_radius_mm: f64,
    pub delta_k_per_m: f64,
    #[serde(rename = "qpm_temperature_C")]
    pub qpm_temperature_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CavityConfig {
    pub coupler_reflectivity_fundamental_percent: f64,
    pub coupler_reflectivity_harmonic_percent: f64,
    pub coupler_radius_mm: f64,
    pub air_gap_mm: f64,
    pub mode_matching_percent: f64,
    pub dbs_transmission_harmonic_percent: f64,
    pub harmonic_rephase_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamConfig {
    pub wavelength_nm: f64,
    pub waist_um: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focus_position_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSection {
    pub segments: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub stable_iterations: usize,
    pub relaxation: f64,
    pub focusing: Focusing,
    pub execution: Schedule,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            segments: d.segments,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            stable_iterations: d.stable_iterations,
            relaxation: d.relaxation,
            focusing: Focusing::BoydKleinman,
            execution: Schedule::Parallel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct SweepConfig {
    pub power_start_W: f64,
    pub power_stop_W: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct ScanConfig {
    pub power_W: f64,
    pub detuning_start_rad: f64,
    pub detuning_stop_rad: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct SimulateConfig {
    pub power_W: f64,
    /// Fixed detuning; absent means lock on resonance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detuning_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    /// CSV with columns p_input_W, depletion. Relative paths are resolved
    /// against the configuration file.
    pub data_path: String,
    #[serde(rename = "d_eff_min_pm_per_V")]
    pub d_eff_min_pm_per_v: f64,
    #[serde(rename = "d_eff_max_pm_per_V")]
    pub d_eff_max_pm_per_v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct MatchConfig {
    pub power_low_W: f64,
    pub power_high_W: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub cavity: CavityConfig,
    pub beam: BeamConfig,
    pub sim: SimSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
    #[serde(rename = "match", skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchConfig>,
}

impl RunConfig {
    pub fn specs(&self) -> Specs {
        let c = &self.crystal;
        let k = &self.cavity;
        let b = &self.beam;
        Specs {
            crystal: CrystalSpec {
                length: c.length_mm / 1e3,
                d_eff: c.d_eff_pm_per_v / 1e12,
                n_fundamental: c.n_fundamental,
                n_harmonic: c.n_harmonic,
                alpha_fundamental: c.alpha_fundamental_percent_per_cm,
                alpha_harmonic: c.alpha_harmonic_percent_per_cm,
                ar_residual_reflectivity: c.ar_residual_reflectivity_percent / 100.0,
                hr_reflectivity_fundamental: c.hr_reflectivity_fundamental_percent / 100.0,
                hr_reflectivity_harmonic: c.hr_reflectivity_harmonic_percent / 100.0,
                hr_radius_of_curvature: c.hr_radius_mm / 1e3,
                delta_k: c.delta_k_per_m,
                qpm_temperature: c.qpm_temperature_c,
            },
            cavity: CavitySpec {
                coupler_reflectivity_fundamental: k.coupler_reflectivity_fundamental_percent / 100.0,
                coupler_reflectivity_harmonic: k.coupler_reflectivity_harmonic_percent / 100.0,
                coupler_radius_of_curvature: k.coupler_radius_mm / 1e3,
                air_gap: k.air_gap_mm / 1e3,
                mode_matching: k.mode_matching_percent / 100.0,
                dbs_transmission_harmonic: k.dbs_transmission_harmonic_percent / 100.0,
                harmonic_rephase: k.harmonic_rephase_rad,
            },
            beam: BeamSpec {
                wavelength_fundamental: b.wavelength_nm / 1e9,
                waist_radius: b.waist_um / 1e6,
                focus_position: b.focus_position_mm.map(|z| z / 1e3),
            },
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            segments: s.segments,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            stable_iterations: s.stable_iterations,
            relaxation: s.relaxation,
            focusing: match s.focusing {
                Focusing::BoydKleinman => FocusingModel::BoydKleinman,
                Focusing::PlaneWave => FocusingModel::PlaneWave,
            },
            execution: match s.execution {
                Schedule::Parallel => Execution::Parallel,
                Schedule::Sequential => Execution::Sequential,
            },
        }
    }
}

pub fn write_config(config: &RunConfig) -> String {
    toml::to_string(config).expect("configuration serializes to TOML")
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    Reader { text }.build(raw)
}

type Num = Option<Spanned<f64>>;
type Int = Option<Spanned<i64>>;
type Text = Option<Spanned<String>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    crystal: Option<Spanned<RawCrystal>>,
    cavity: Option<Spanned<RawCavity>>,
    beam: Option<Spanned<RawBeam>>,
    sim: Option<Spanned<RawSim>>,
    simulate: Option<Spanned<RawSimulate>>,
    sweep: Option<Spanned<RawSweep>>,
    scan: Option<Spanned<RawScan>>,
    fit: Option<Spanned<RawFit>>,
    #[serde(rename = "match")]
    matching: Option<Spanned<RawMatch>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrystal {
    length_mm: Num,
    #[serde(rename = "d_eff_pm_per_V")]
    d_eff_pm_per_v: Num,
    n_fundamental: Num,
    n_harmonic: Num,
    alpha_fundamental_percent_per_cm: Num,
    alpha_harmonic_percent_per_cm: Num,
    ar_residual_reflectivity_percent: Num,
    hr_reflectivity_fundamental_percent: Num,
    hr_reflectivity_harmonic_percent: Num,
    hr_radius_mm: Num,
    delta_k_per_m: Num,
    #[serde(rename = "qpm_temperature_C")]
    qpm_temperature_c: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    coupler_reflectivity_fundamental_percent: Num,
    coupler_reflectivity_harmonic_percent: Num,
    coupler_radius_mm: Num,
    air_gap_mm: Num,
    mode_matching_percent: Num,
    dbs_transmission_harmonic_percent: Num,
    harmonic_rephase_rad: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBeam {
    wavelength_nm: Num,
    waist_um: Num,
    focus_position_mm: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    segments: Int,
    tolerance: Num,
    max_iterations: Int,
    stable_iterations: Int,
    relaxation: Num,
    focusing: Text,
    execution: Text,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSimulate {
    power_W: Num,
    detuning_rad: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawSweep {
    power_start_W: Num,
    power_stop_W: Num,
    points: Int,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawScan {
    power_W: Num,
    detuning_start_rad: Num,
    detuning_stop_rad: Num,
    points: Int,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFit {
    data_path: Text,
    #[serde(rename = "d_eff_min_pm_per_V")]
    d_eff_min_pm_per_v: Num,
    #[serde(rename = "d_eff_max_pm_per_V")]
    d_eff_max_pm_per_v: Num,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct RawMatch {
    power_low_W: Num,
    power_high_W: Num,
}

#[derive(Clone, Copy)]
enum Rule {
    Finite,
    Positive,
    NonNegative,
    Percent,
    Index,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Finite => "must be finite",
            Rule::Positive => "must be positive",
            Rule::NonNegative => "must be non-negative",
            Rule::Percent => "must lie in [0, 100]",
            Rule::Index => "must exceed 1",
        })
    }
}

impl Rule {
    fn admits(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Rule::Finite => true,
                Rule::Positive => v > 0.0,
                Rule::NonNegative => v >= 0.0,
                Rule::Percent => (0.0..=100.0).contains(&v),
                Rule::Index => v > 1.0,
            }
    }
}

#[derive(Clone, Copy)]
struct Section {
    name: &'static str,
    line: usize,
}

struct Reader<'a> {
    text: &'a str,
}

impl Reader<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn section<T>(&self, name: &'static str, raw: Option<Spanned<T>>) -> Result<Option<(Section, T)>, ConfigError> {
        Ok(raw.map(|s| {
            let line = self.line(s.span().start);
            (Section { name, line }, s.into_inner())
        }))
    }

    fn required<T>(&self, name: &'static str, raw: Option<Spanned<T>>) -> Result<(Section, T), ConfigError> {
        self.section(name, raw)?
            .ok_or(ConfigError::MissingSection { section: name })
    }

    fn field_error(&self, sec: Section, key: &str, line: usize, unit: &'static str, reason: String) -> ConfigError {
        ConfigError::Field {
            key: format!("{}.{key}", sec.name),
            line,
            unit,
            reason,
        }
    }

    fn optional(&self, sec: Section, key: &str, unit: &'static str, v: &Num, rule: Rule) -> Result<Option<f64>, ConfigError> {
        match v {
            None => Ok(None),
            Some(s) => {
                let value = *s.get_ref();
                if rule.admits(value) {
                    Ok(Some(value))
                } else {
                    let line = self.line(s.span().start);
                    Err(self.field_error(sec, key, line, unit, format!("{rule}, got {value}")))
                }
            }
        }
    }

    fn num(&self, sec: Section, key: &str, unit: &'static str, v: &Num, rule: Rule) -> Result<f64, ConfigError> {
        self.optional(sec, key, unit, v, rule)?
            .ok_or_else(|| self.field_error(sec, key, sec.line, unit, "missing".into()))
    }

    fn count(&self, sec: Section, key: &str, v: &Int, min: i64) -> Result<Option<usize>, ConfigError> {
        match v {
            None => Ok(None),
            Some(s) if *s.get_ref() >= min => Ok(Some(*s.get_ref() as usize)),
            Some(s) => {
                let line = self.line(s.span().start);
                Err(self.field_error(sec, key, line, "count", format!("must be at least {min}, got {}", s.get_ref())))
            }
        }
    }

    fn choice<T: Copy>(&self, sec: Section, key: &str, v: &Text, options: &[(&str, T)]) -> Result<Option<T>, ConfigError> {
        let Some(s) = v else { return Ok(None) };
        options
            .iter()
            .find(|(name, _)| name == s.get_ref())
            .map(|(_, t)| Some(*t))
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                let line = self.line(s.span().start);
                self.field_error(sec, key, line, "keyword", format!("expected one of {names:?}, got {:?}", s.get_ref()))
            })
    }

    fn build(&self, raw: RawFile) -> Result<RunConfig, ConfigError> {
        let (s, c) = self.required("crystal", raw.crystal)?;
        let crystal = CrystalConfig {
            length_mm: self.num(s, "length_mm", "mm", &c.length_mm, Rule::Positive)?,
            d_eff_pm_per_v: self.num(s, "d_eff_pm_per_V", "pm/V", &c.d_eff_pm_per_v, Rule::NonNegative)?,
            n_fundamental: self.num(s, "n_fundamental", "1", &c.n_fundamental, Rule::Index)?,
            n_harmonic: self.num(s, "n_harmonic", "1", &c.n_harmonic, Rule::Index)?,
            alpha_fundamental_percent_per_cm: self.num(
                s,
                "alpha_fundamental_percent_per_cm",
                "%/cm",
                &c.alpha_fundamental_percent_per_cm,
                Rule::NonNegative,
            )?,
            alpha_harmonic_percent_per_cm: self.num(
                s,
                "alpha_harmonic_percent_per_cm",
                "%/cm",
                &c.alpha_harmonic_percent_per_cm,
                Rule::NonNegative,
            )?,
            ar_residual_reflectivity_percent: self.num(
                s,
                "ar_residual_reflectivity_percent",
                "%",
                &c.ar_residual_reflectivity_percent,
                Rule::Percent,
            )?,
            hr_reflectivity_fundamental_percent: self.num(
                s,
                "hr_reflectivity_fundamental_percent",
                "%",
                &c.hr_reflectivity_fundamental_percent,
                Rule::Percent,
            )?,
            hr_reflectivity_harmonic_percent: self.num(
                s,
                "hr_reflectivity_harmonic_percent",
                "%",
                &c.hr_reflectivity_harmonic_percent,
                Rule::Percent,
            )?,
            hr_radius_mm: self.num(s, "hr_radius_mm", "mm", &c.hr_radius_mm, Rule::Positive)?,
            delta_k_per_m: self.optional(s, "delta_k_per_m", "1/m", &c.delta_k_per_m, Rule::Finite)?.unwrap_or(0.0),
            qpm_temperature_c: self.num(s, "qpm_temperature_C", "°C", &c.qpm_temperature_c, Rule::Finite)?,
        };

        let (s, k) = self.required("cavity", raw.cavity)?;
        let cavity = CavityConfig {
            coupler_reflectivity_fundamental_percent: self.num(
                s,
                "coupler_reflectivity_fundamental_percent",
                "%",
                &k.coupler_reflectivity_fundamental_percent,
                Rule::Percent,
            )?,
            coupler_reflectivity_harmonic_percent: self.num(
                s,
                "coupler_reflectivity_harmonic_percent",
                "%",
                &k.coupler_reflectivity_harmonic_percent,
                Rule::Percent,
            )?,
            coupler_radius_mm: self.num(s, "coupler_radius_mm", "mm", &k.coupler_radius_mm, Rule::Positive)?,
            air_gap_mm: self.num(s, "air_gap_mm", "mm", &k.air_gap_mm, Rule::Positive)?,
            mode_matching_percent: self.num(s, "mode_matching_percent", "%", &k.mode_matching_percent, Rule::Percent)?,
            dbs_transmission_harmonic_percent: self.num(
                s,
                "dbs_transmission_harmonic_percent",
                "%",
                &k.dbs_transmission_harmonic_percent,
                Rule::Percent,
            )?,
            harmonic_rephase_rad: self
                .optional(s, "harmonic_rephase_rad", "rad", &k.harmonic_rephase_rad, Rule::Finite)?
                .unwrap_or(0.0),
        };

        let (s, b) = self.required("beam", raw.beam)?;
        let beam = BeamConfig {
            wavelength_nm: self.num(s, "wavelength_nm", "nm", &b.wavelength_nm, Rule::Positive)?,
            waist_um: self.num(s, "waist_um", "µm", &b.waist_um, Rule::Positive)?,
            focus_position_mm: self.optional(s, "focus_position_mm", "mm", &b.focus_position_mm, Rule::Finite)?,
        };

        let mut sim = SimSection::default();
        if let Some((s, m)) = self.section("sim", raw.sim)? {
            let d = SimSection::default();
            sim = SimSection {
                segments: self.count(s, "segments", &m.segments, 8)?.unwrap_or(d.segments),
                tolerance: self.optional(s, "tolerance", "1", &m.tolerance, Rule::Positive)?.unwrap_or(d.tolerance),
                max_iterations: self.count(s, "max_iterations", &m.max_iterations, 1)?.unwrap_or(d.max_iterations),
                stable_iterations: self
                    .count(s, "stable_iterations", &m.stable_iterations, 1)?
                    .unwrap_or(d.stable_iterations),
                relaxation: d.relaxation,
                focusing: self
                    .choice(
                        s,
                        "focusing",
                        &m.focusing,
                        &[("boyd-kleinman", Focusing::BoydKleinman), ("plane-wave", Focusing::PlaneWave)],
                    )?
                    .unwrap_or(d.focusing),
                execution: self
                    .choice(
                        s,
                        "execution",
                        &m.execution,
                        &[("parallel", Schedule::Parallel), ("sequential", Schedule::Sequential)],
                    )?
                    .unwrap_or(d.execution),
            };
            if let Some(r) = self.optional(s, "relaxation", "1", &m.relaxation, Rule::Positive)? {
                if r > 1.0 {
                    let line = self.line(m.relaxation.as_ref().unwrap().span().start);
                    return Err(self.field_error(s, "relaxation", line, "1", format!("must lie in (0, 1], got {r}")));
                }
                sim.relaxation = r;
            }
        }

        let simulate = match self.section("simulate", raw.simulate)? {
            Some((s, m)) => Some(SimulateConfig {
                power_W: self.num(s, "power_W", "W", &m.power_W, Rule::NonNegative)?,
                detuning_rad: self.optional(s, "detuning_rad", "rad", &m.detuning_rad, Rule::Finite)?,
            }),
            None => None,
        };

        let sweep = match self.section("sweep", raw.sweep)? {
            Some((s, m)) => Some(SweepConfig {
                power_start_W: self.num(s, "power_start_W", "W", &m.power_start_W, Rule::NonNegative)?,
                power_stop_W: self.num(s, "power_stop_W", "W", &m.power_stop_W, Rule::NonNegative)?,
                points: self
                    .count(s, "points", &m.points, 1)?
                    .ok_or_else(|| self.field_error(s, "points", s.line, "count", "missing".into()))?,
            }),
            None => None,
        };

        let scan = match self.section("scan", raw.scan)? {
            Some((s, m)) => Some(ScanConfig {
                power_W: self.num(s, "power_W", "W", &m.power_W, Rule::NonNegative)?,
                detuning_start_rad: self.num(s, "detuning_start_rad", "rad", &m.detuning_start_rad, Rule::Finite)?,
                detuning_stop_rad: self.num(s, "detuning_stop_rad", "rad", &m.detuning_stop_rad, Rule::Finite)?,
                points: self
                    .count(s, "points", &m.points, 1)?
                    .ok_or_else(|| self.field_error(s, "points", s.line, "count", "missing".into()))?,
            }),
            None => None,
        };

        let fit = match self.section("fit", raw.fit)? {
            Some((s, m)) => {
                let data_path = match &m.data_path {
                    Some(p) if !p.get_ref().trim().is_empty() => p.get_ref().clone(),
                    Some(p) => {
                        let line = self.line(p.span().start);
                        return Err(self.field_error(s, "data_path", line, "path", "empty path".into()));
                    }
                    None => return Err(self.field_error(s, "data_path", s.line, "path", "missing".into())),
                };
                let (lo, hi) = shg_core::analysis::DEFAULT_DEFF_BRACKET;
                Some(FitConfig {
                    data_path,
                    d_eff_min_pm_per_v: self
                        .optional(s, "d_eff_min_pm_per_V", "pm/V", &m.d_eff_min_pm_per_v, Rule::Positive)?
                        .unwrap_or(lo * 1e12),
                    d_eff_max_pm_per_v: self
                        .optional(s, "d_eff_max_pm_per_V", "pm/V", &m.d_eff_max_pm_per_v, Rule::Positive)?
                        .unwrap_or(hi * 1e12),
                })
            }
            None => None,
        };

        let matching = match self.section("match", raw.matching)? {
            Some((s, m)) => Some(MatchConfig {
                power_low_W: self.num(s, "power_low_W", "W", &m.power_low_W, Rule::Positive)?,
                power_high_W: self.num(s, "power_high_W", "W", &m.power_high_W, Rule::Positive)?,
            }),
            None => None,
        };

        Ok(RunConfig {
            crystal,
            cavity,
            beam,
            sim,
            simulate,
            sweep,
            scan,
            fit,
            matching,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[crystal]
length_mm = 9.3
d_eff_pm_per_V = 7.3
n_fundamental = 1.8
n_harmonic = 1.85
alpha_fundamental_percent_per_cm = 0.01
alpha_harmonic_percent_per_cm = 0.028
ar_residual_reflectivity_percent = 0.025
hr_reflectivity_fundamental_percent = 99.95
hr_reflectivity_harmonic_percent = 99.95
hr_radius_mm = 12
qpm_temperature_C = 45

[cavity]
coupler_reflectivity_fundamental_percent = 90
coupler_reflectivity_harmonic_percent = 0.2
coupler_radius_mm = 25
air_gap_mm = 24
mode_matching_percent = 98
dbs_transmission_harmonic_percent = 99.3

[beam]
wavelength_nm = 1550
waist_um = 37.6
"#;

    #[test]
    fn defaults_fill_optional_keys() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.cavity.harmonic_rephase_rad, 0.0);
        assert_eq!(c.crystal.delta_k_per_m, 0.0);
        assert_eq!(c.sim, SimSection::default());
        assert!(c.sweep.is_none() && c.fit.is_none());
        assert_eq!(c.specs().beam.focus_position, None);
    }

    #[test]
    fn error_names_key_line_and_unit() {
        let text = MINIMAL.replace("length_mm = 9.3", "length_mm = -9.3");
        let err = parse_config_str(&text).unwrap_err();
        assert_eq!(err.key(), Some("crystal.length_mm"));
        assert_eq!(err.line(), Some(3));
        let msg = err.to_string();
        assert!(msg.contains("crystal.length_mm") && msg.contains("line 3") && msg.contains("mm"), "{msg}");
    }

    #[test]
    fn missing_key_points_at_section() {
        let text = MINIMAL.replace("waist_um = 37.6\n", "");
        let err = parse_config_str(&text).unwrap_err();
        assert_eq!(err.key(), Some("beam.waist_um"));
        assert!(err.to_string().contains("missing"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("[beam]\n", "[beam]\nwaist_mm = 0.04\n");
        let err = parse_config_str(&text).unwrap_err();
        assert!(err.to_string().contains("waist_mm"), "{err}");
        assert!(parse_config_str(&format!("{MINIMAL}\n[extra]\nx = 1\n")).is_err());
    }

    #[test]
    fn bad_keyword_lists_choices() {
        let err = parse_config_str(&format!("{MINIMAL}\n[sim]\nfocusing = \"tight\"\n")).unwrap_err();
        assert_eq!(err.key(), Some("sim.focusing"));
        assert!(err.to_string().contains("plane-wave"));
    }

    #[test]
    fn missing_section() {
        let text = MINIMAL.split("[beam]").next().unwrap();
        assert!(matches!(parse_config_str(text), Err(ConfigError::MissingSection { section: "beam" })));
    }

    #[test]
    fn percent_range_enforced() {
        let text = MINIMAL.replace("mode_matching_percent = 98", "mode_matching_percent = 101");
        assert_eq!(parse_config_str(&text).unwrap_err().key(), Some("cavity.mode_matching_percent"));
    }
}
