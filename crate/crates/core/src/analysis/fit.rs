//! Least-squares estimate of d_eff from measured pump depletion.

use crate::analysis::SEARCH_TOLERANCE;
use crate::cavity::{CavityModel, SimConfig, Specs};
use crate::error::{Result, ShgError};
use crate::exec;
use crate::physics::single_pass_coefficient_with;
use crate::search::golden_section_min;

/// Search interval for d_eff, m/V.
pub const DEFAULT_DEFF_BRACKET: (f64, f64) = (1e-12, 20e-12);

#[derive(Debug, Clone, PartialEq)]
pub struct DeffFit {
    /// m/V.
    pub d_eff: f64,
    /// E_NL belonging to `d_eff`, 1/W.
    pub single_pass_coefficient: f64,
    /// Sum of squared residuals.
    pub objective: f64,
    /// Model minus measured depletion, in input order.
    pub residuals: Vec<f64>,
}

pub fn fit_deff(measured: &[(f64, f64)], specs: &Specs, config: &SimConfig) -> Result<DeffFit> {
    fit_deff_in(measured, specs, config, DEFAULT_DEFF_BRACKET)
}

/// Model depletion at each measured power for a trial nonlinearity.
fn model_depletion(
    powers: &[f64],
    specs: &Specs,
    config: &SimConfig,
    e_nl: f64,
) -> Result<Vec<f64>> {
    let model = CavityModel::with_single_pass_coefficient(specs, config, e_nl)?;
    exec::map(powers, config.execution, |&p| {
        model.solve_steady_state(p, 0.0).map(|r| r.depletion)
    })
    .into_iter()
    .collect()
}

pub fn fit_deff_in(
    measured: &[(f64, f64)],
    specs: &Specs,
    config: &SimConfig,
    bracket: (f64, f64),
) -> Result<DeffFit> {
    if measured.is_empty() {
        return Err(ShgError::DegenerateData("no data points".into()));
    }
    if measured.iter().any(|(p, d)| !(p.is_finite() && *p >= 0.0 && d.is_finite())) {
        return Err(ShgError::DegenerateData("powers must be finite and non-negative".into()));
    }
    if measured.iter().all(|(p, _)| *p == 0.0) {
        return Err(ShgError::DegenerateData("all input powers are zero".into()));
    }
    let mut sorted: Vec<f64> = measured.iter().map(|(p, _)| *p).collect();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ShgError::DegenerateData("input powers must be distinct".into()));
    }
    if !(bracket.0 > 0.0 && bracket.1 > bracket.0) {
        return Err(ShgError::Domain(format!("invalid d_eff bracket {bracket:?}")));
    }

    // E_NL ∝ d_eff², so one focusing evaluation serves the whole search.
    let reference = single_pass_coefficient_with(
        &crate::physics::CrystalSpec { d_eff: 1e-12, ..specs.crystal },
        &specs.beam,
        config.focusing,
    )?;
    let e_nl = |d: f64| reference * (d / 1e-12).powi(2);
    let powers: Vec<f64> = measured.iter().map(|(p, _)| *p).collect();
    let objective = |depletions: &[f64]| -> f64 {
        depletions
            .iter()
            .zip(measured)
            .map(|(m, (_, d))| (m - d).powi(2))
            .sum()
    };

    let mut failure = None;
    let d_best = golden_section_min(
        |d| match model_depletion(&powers, specs, config, e_nl(d)) {
            Ok(m) => objective(&m),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        bracket.0,
        bracket.1,
        SEARCH_TOLERANCE * (bracket.1 - bracket.0),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let modelled = model_depletion(&powers, specs, config, e_nl(d_best))?;
    let residuals = modelled
        .iter()
        .zip(measured)
        .map(|(m, (_, d))| m - d)
        .collect();
    Ok(DeffFit {
        d_eff: d_best,
        single_pass_coefficient: e_nl(d_best),
        objective: objective(&modelled),
        residuals,
    })
}
