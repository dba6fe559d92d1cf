use crate::cavity::{CavityModel, SimConfig, Specs};
use crate::error::{Result, ShgError};
use crate::exec;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub p_input: f64,
    pub efficiency: f64,
    pub p_harmonic: f64,
    pub depletion: f64,
    pub iterations: usize,
}

/// A grid point whose solve failed; the sweep carries on without it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub p_input: f64,
    pub error: ShgError,
}

/// On-resonance conversion efficiency versus input power.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyCurve {
    pub points: Vec<CurvePoint>,
    pub failures: Vec<SweepFailure>,
    pub specs: Specs,
    pub fingerprint: String,
}

impl EfficiencyCurve {
    /// Point of highest efficiency.
    pub fn peak(&self) -> Option<&CurvePoint> {
        self.points
            .iter()
            .max_by(|a, b| a.efficiency.total_cmp(&b.efficiency))
    }
}

pub fn sweep_power(p_grid: &[f64], specs: &Specs, config: &SimConfig) -> Result<EfficiencyCurve> {
    if p_grid.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(ShgError::Domain("power grid must be non-negative".into()));
    }
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ShgError::Domain("power grid must be strictly increasing".into()));
    }
    let model = CavityModel::new(specs, config)?;
    let solved = exec::map(p_grid, config.execution, |&p| model.on_resonance(p));

    let mut points = Vec::with_capacity(p_grid.len());
    let mut failures = Vec::new();
    for (&p_input, outcome) in p_grid.iter().zip(solved) {
        match outcome {
            Ok(r) => points.push(CurvePoint {
                p_input,
                efficiency: r.external_efficiency,
                p_harmonic: r.p_harmonic_out,
                depletion: r.depletion,
                iterations: r.iterations,
            }),
            Err(error) => failures.push(SweepFailure { p_input, error }),
        }
    }
    Ok(EfficiencyCurve {
        points,
        failures,
        specs: *specs,
        fingerprint: specs.fingerprint(config),
    })
}
