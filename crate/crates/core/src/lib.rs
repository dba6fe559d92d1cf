//! Numerical model of continuous-wave second-harmonic generation in a
//! standing-wave resonator around a nonlinear crystal.
//!
//! The crystal is cut into thin segments and the coupled fundamental and
//! harmonic amplitudes are integrated through it on every pass; the
//! resonator round trip is iterated from an empty cavity until the fields
//! stop changing. On top of the steady-state solver sit power sweeps,
//! cavity-length scans, nonlinearity fits and impedance-matching analysis.

pub mod analysis;
pub mod cavity;
pub mod error;
pub mod exec;
pub mod physics;
pub mod propagation;
pub mod search;

pub use cavity::{
    on_resonance, scan_detuning, solve_steady_state, CavityModel, CavitySpec, CavityState,
    CouplingRegime, LossLedger, SimConfig, Specs, SteadyStateResult,
};
pub use error::{Result, ShgError};
pub use exec::Execution;
pub use physics::{BeamSpec, CrystalSpec, FieldPair, FocusingModel};
