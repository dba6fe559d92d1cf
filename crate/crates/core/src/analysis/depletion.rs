use std::f64::consts::PI;

use crate::cavity::{CavityModel, SimConfig, Specs};
use crate::error::{Result, ShgError};

pub const MIN_TRACE_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub detuning: f64,
    /// Reflected fundamental over input power.
    pub relative_reflection: f64,
}

/// Reflected-power trace of a slow cavity-length scan over one free
/// spectral range, with the two reference levels and the level reached when
/// the length is held at maximum conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct DepletionTrace {
    pub p_input: f64,
    pub samples: Vec<TraceSample>,
    /// No light on the detector: full conversion.
    pub reference_zero: f64,
    /// Input power fully reflected: no conversion.
    pub reference_full: f64,
    /// Relative reflection with the length locked at maximum conversion.
    pub locked_level: f64,
    /// Relative reflection half a free spectral range from resonance.
    pub off_resonant_level: f64,
}

impl DepletionTrace {
    pub fn depletion(&self) -> f64 {
        1.0 - self.locked_level
    }
}

/// `n` detunings spanning [−π, π], exactly antisymmetric about zero.
pub fn symmetric_detuning_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|k| PI * (2.0 * k as f64 - last) / last)
        .collect()
}

pub fn depletion_trace(p_pump: f64, specs: &Specs, config: &SimConfig, n_samples: usize) -> Result<DepletionTrace> {
    if n_samples < MIN_TRACE_SAMPLES {
        return Err(ShgError::Domain(format!(
            "a trace needs at least {MIN_TRACE_SAMPLES} samples, got {n_samples}"
        )));
    }
    if !(p_pump > 0.0 && p_pump.is_finite()) {
        return Err(ShgError::Domain(format!(
            "relative reflection is undefined for pump power {p_pump}"
        )));
    }
    let model = CavityModel::new(specs, config)?;
    let grid = symmetric_detuning_grid(n_samples);
    let scan = model.scan_detuning(p_pump, &grid)?;
    let samples = scan
        .iter()
        .map(|r| TraceSample {
            detuning: r.detuning,
            relative_reflection: r.p_reflected_fundamental / p_pump,
        })
        .collect();
    let locked = model.on_resonance(p_pump)?;
    let off = model.solve_steady_state(p_pump, PI)?;
    Ok(DepletionTrace {
        p_input: p_pump,
        samples,
        reference_zero: 0.0,
        reference_full: 1.0,
        locked_level: locked.p_reflected_fundamental / p_pump,
        off_resonant_level: off.p_reflected_fundamental / p_pump,
    })
}
