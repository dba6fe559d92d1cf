//! Beam, crystal and field bookkeeping, the single-pass conversion strength
//! and the resonator eigenmode.

pub mod eigenmode;
pub mod focusing;

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_fraction, check_nonnegative, check_positive, Result, ShgError};

pub use eigenmode::{cavity_eigenmode, cavity_eigenmode_segmented, EigenMode, RayMatrix};
pub use focusing::{boyd_kleinman_factor, focusing_integral, focusing_h, optimal_focusing};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Extraordinary (z-polarized) index of flux-grown KTP, `lambda` in metres.
///
/// Three-term Sellmeier fit of Fradkin et al., Appl. Phys. Lett. 74, 914 (1999),
/// valid roughly from 0.4 to 4 µm.
pub fn ktp_index_z(lambda: f64) -> f64 {
    let l2 = (lambda * 1e6).powi(2);
    (4.59423 + 0.06206 / (l2 - 0.04763) + 110.80672 / (l2 - 86.12171)).sqrt()
}

/// Gaussian pump beam inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSpec {
    /// Vacuum wavelength of the fundamental, m.
    pub wavelength_fundamental: f64,
    /// 1/e² intensity radius at the focus, m.
    pub waist_radius: f64,
    /// Focus position measured from the plane crystal face, m. `None` puts
    /// the focus at the crystal centre.
    pub focus_position: Option<f64>,
}

impl BeamSpec {
    pub fn new(wavelength_fundamental: f64, waist_radius: f64) -> Self {
        Self {
            wavelength_fundamental,
            waist_radius,
            focus_position: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("beam.wavelength", self.wavelength_fundamental)?;
        check_positive("beam.waist_radius", self.waist_radius)?;
        if let Some(z) = self.focus_position {
            if !z.is_finite() {
                return Err(ShgError::InvalidParameter {
                    field: "beam.focus_position",
                    reason: format!("{z} is not finite"),
                });
            }
        }
        Ok(())
    }

    pub fn wavelength_harmonic(&self) -> f64 {
        self.wavelength_fundamental / 2.0
    }

    /// Angular frequency of the fundamental, rad/s.
    pub fn omega(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength_fundamental
    }

    /// Rayleigh range inside a medium of index `n`.
    pub fn rayleigh_range(&self, n: f64) -> f64 {
        PI * self.waist_radius * self.waist_radius * n / self.wavelength_fundamental
    }

    /// Focusing parameter ξ = L / (2 z_R) for the given crystal.
    pub fn focusing_parameter(&self, crystal: &CrystalSpec) -> f64 {
        crystal.length / (2.0 * self.rayleigh_range(crystal.n_fundamental))
    }

    /// Focus offset from the crystal centre in units of the half length.
    pub fn focus_offset(&self, crystal: &CrystalSpec) -> f64 {
        match self.focus_position {
            Some(z) => (z - crystal.length / 2.0) / (crystal.length / 2.0),
            None => 0.0,
        }
    }
}

/// Nonlinear crystal with a curved high-reflective back face and an
/// anti-reflection coated plane front face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalSpec {
    /// Length along the beam, m.
    pub length: f64,
    /// Effective nonlinear coefficient, m/V.
    pub d_eff: f64,
    pub n_fundamental: f64,
    pub n_harmonic: f64,
    /// Power absorption coefficient at the fundamental, 1/m.
    pub alpha_fundamental: f64,
    /// Power absorption coefficient at the harmonic, 1/m.
    pub alpha_harmonic: f64,
    /// Power lost at each facet crossing (per facet per pass).
    pub ar_residual_reflectivity: f64,
    pub hr_reflectivity_fundamental: f64,
    pub hr_reflectivity_harmonic: f64,
    /// Radius of curvature of the coated back face, m.
    pub hr_radius_of_curvature: f64,
    /// Residual phase mismatch, 1/m.
    pub delta_k: f64,
    /// Phase-matching temperature, °C. Carried as metadata.
    pub qpm_temperature: f64,
}

impl CrystalSpec {
    pub fn validate(&self) -> Result<()> {
        check_positive("crystal.length", self.length)?;
        check_nonnegative("crystal.d_eff", self.d_eff)?;
        for (field, n) in [
            ("crystal.n_fundamental", self.n_fundamental),
            ("crystal.n_harmonic", self.n_harmonic),
        ] {
            if !(n > 1.0 && n.is_finite()) {
                return Err(ShgError::InvalidParameter {
                    field,
                    reason: format!("refractive index {n} must exceed 1"),
                });
            }
        }
        check_nonnegative("crystal.alpha_fundamental", self.alpha_fundamental)?;
        check_nonnegative("crystal.alpha_harmonic", self.alpha_harmonic)?;
        check_fraction("crystal.ar_residual_reflectivity", self.ar_residual_reflectivity)?;
        check_fraction("crystal.hr_reflectivity_fundamental", self.hr_reflectivity_fundamental)?;
        check_fraction("crystal.hr_reflectivity_harmonic", self.hr_reflectivity_harmonic)?;
        check_positive("crystal.hr_radius_of_curvature", self.hr_radius_of_curvature)?;
        if !self.delta_k.is_finite() {
            return Err(ShgError::InvalidParameter {
                field: "crystal.delta_k",
                reason: "must be finite".into(),
            });
        }
        Ok(())
    }

    /// The same crystal with every loss channel removed.
    pub fn lossless(mut self) -> Self {
        self.alpha_fundamental = 0.0;
        self.alpha_harmonic = 0.0;
        self.ar_residual_reflectivity = 0.0;
        self.hr_reflectivity_fundamental = 1.0;
        self.hr_reflectivity_harmonic = 1.0;
        self
    }
}

/// Complex amplitudes of the fundamental and harmonic, normalized so that
/// `|a|²` is the power in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldPair {
    pub a_fundamental: Complex64,
    pub a_harmonic: Complex64,
}

impl FieldPair {
    pub const ZERO: FieldPair = FieldPair {
        a_fundamental: Complex64::new(0.0, 0.0),
        a_harmonic: Complex64::new(0.0, 0.0),
    };

    pub fn new(a_fundamental: Complex64, a_harmonic: Complex64) -> Self {
        Self {
            a_fundamental,
            a_harmonic,
        }
    }

    /// Real-valued fundamental of the given power, no harmonic.
    pub fn fundamental(power: f64) -> Self {
        Self::new(Complex64::new(power.sqrt(), 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn power_fundamental(&self) -> f64 {
        self.a_fundamental.norm_sqr()
    }

    pub fn power_harmonic(&self) -> f64 {
        self.a_harmonic.norm_sqr()
    }

    pub fn total_power(&self) -> f64 {
        self.power_fundamental() + self.power_harmonic()
    }

    pub fn is_finite(&self) -> bool {
        self.a_fundamental.is_finite() && self.a_harmonic.is_finite()
    }

    pub(crate) fn scale(self, fundamental: f64, harmonic: f64) -> Self {
        Self::new(self.a_fundamental * fundamental, self.a_harmonic * harmonic)
    }
}

/// How the transverse Gaussian overlap enters the single-pass coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FocusingModel {
    /// Boyd–Kleinman factor with the mismatch parameter tuned to its optimum.
    #[default]
    BoydKleinman,
    /// Near-field limit h = ξ, equivalent to a collimated beam of radius w₀.
    PlaneWave,
}

/// Low-power single-pass conversion coefficient E_NL in P₂ = E_NL·P₁² (1/W).
pub fn single_pass_coefficient(crystal: &CrystalSpec, beam: &BeamSpec) -> Result<f64> {
    single_pass_coefficient_with(crystal, beam, FocusingModel::BoydKleinman)
}

pub fn single_pass_coefficient_with(
    crystal: &CrystalSpec,
    beam: &BeamSpec,
    model: FocusingModel,
) -> Result<f64> {
    crystal.validate()?;
    beam.validate()?;
    if crystal.d_eff == 0.0 {
        return Ok(0.0);
    }
    let omega = beam.omega();
    let n1 = crystal.n_fundamental;
    let n2 = crystal.n_harmonic;
    let k1 = 2.0 * PI * n1 / beam.wavelength_fundamental;
    let prefactor = 2.0 * omega * omega * crystal.d_eff * crystal.d_eff
        / (PI * VACUUM_PERMITTIVITY * SPEED_OF_LIGHT.powi(3) * n1 * n1 * n2);
    let xi = beam.focusing_parameter(crystal);
    let h = match model {
        FocusingModel::PlaneWave => xi,
        FocusingModel::BoydKleinman => optimal_focusing(xi, beam.focus_offset(crystal))?.1,
    };
    Ok(prefactor * crystal.length * k1 * h)
}
