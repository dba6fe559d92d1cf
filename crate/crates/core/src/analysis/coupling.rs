//! Impedance matching of the resonator under conversion.

use crate::analysis::SEARCH_TOLERANCE;
use crate::cavity::{CavityModel, CouplingRegime, SimConfig, Specs};
use crate::error::{Result, ShgError};
use crate::search::golden_section_min;

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub p_input: f64,
    pub coupler_transmission: f64,
    /// Round-trip loss without conversion.
    pub linear_loss: f64,
    /// Round-trip loss of the fundamental including conversion.
    pub effective_internal_loss: f64,
    pub coupling_regime: CouplingRegime,
    /// Reflected fraction of the mode-matched input on resonance.
    pub reflection_on_resonance: f64,
    pub depletion: f64,
    pub external_efficiency: f64,
    /// Internal losses (absorption, facets, back-face transmission, coupler
    /// harmonic reflection) as a fraction of the input power.
    pub internal_loss_share: f64,
    /// Depletion minus true efficiency, percentage points: how much reading
    /// the depletion as conversion efficiency overstates it.
    pub overcoupling_correction: f64,
}

pub fn coupling_analysis(p_pump: f64, specs: &Specs, config: &SimConfig) -> Result<CouplingReport> {
    let model = CavityModel::new(specs, config)?;
    let r = model.on_resonance(p_pump)?;
    let internal_loss_share = if p_pump > 0.0 { r.losses.total() / p_pump } else { 0.0 };
    Ok(CouplingReport {
        p_input: p_pump,
        coupler_transmission: specs.cavity.coupler_transmission(),
        linear_loss: specs.linear_round_trip_loss(),
        effective_internal_loss: r.round_trip_loss,
        coupling_regime: r.coupling_regime,
        reflection_on_resonance: r.matched_reflectivity(specs.cavity.mode_matching),
        depletion: r.depletion,
        external_efficiency: r.external_efficiency,
        internal_loss_share,
        overcoupling_correction: 100.0 * (r.depletion - r.external_efficiency),
    })
}

/// Pump power that minimizes the on-resonance reflectivity of the matched
/// mode, i.e. where conversion loss completes the impedance match.
pub fn matched_power_search(specs: &Specs, config: &SimConfig, bracket: (f64, f64)) -> Result<f64> {
    let (low, high) = bracket;
    if !(low > 0.0 && high > low && high.is_finite()) {
        return Err(ShgError::Domain(format!("invalid power bracket {bracket:?}")));
    }
    let model = CavityModel::new(specs, config)?;
    let mm = specs.cavity.mode_matching;
    let mut failure = None;
    let mut reflectivity = |p: f64| match model.on_resonance(p) {
        Ok(r) => r.matched_reflectivity(mm),
        Err(e) => {
            failure.get_or_insert(e);
            f64::INFINITY
        }
    };
    let tol = SEARCH_TOLERANCE * (high - low);
    let x_best = golden_section_min(&mut reflectivity, low, high, tol);
    let f_best = reflectivity(x_best);
    let f_low = reflectivity(low);
    let f_high = reflectivity(high);
    if let Some(e) = failure {
        return Err(e);
    }
    let near_edge = x_best - low < 2.0 * tol || high - x_best < 2.0 * tol;
    if near_edge || !(f_best < (1.0 - 1e-6) * f_low.min(f_high)) {
        return Err(ShgError::NoInteriorMinimum {
            low,
            high,
            f_low,
            f_high,
            x_best,
            f_best,
        });
    }
    Ok(x_best)
}
