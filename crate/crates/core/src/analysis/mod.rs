//! Figures and fitted quantities built from many steady-state solves.

mod coupling;
mod depletion;
mod fit;
mod sweep;

pub use coupling::{coupling_analysis, matched_power_search, CouplingReport};
pub use depletion::{depletion_trace, symmetric_detuning_grid, DepletionTrace, TraceSample, MIN_TRACE_SAMPLES};
pub use fit::{fit_deff, fit_deff_in, DeffFit, DEFAULT_DEFF_BRACKET};
pub use sweep::{sweep_power, CurvePoint, EfficiencyCurve, SweepFailure};

/// Absolute golden-section tolerance as a fraction of the bracket width.
pub const SEARCH_TOLERANCE: f64 = 1e-4;
