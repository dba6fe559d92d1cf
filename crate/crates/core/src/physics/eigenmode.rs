//! Ray-transfer (ABCD) description of the standing-wave resonator.
//!
//! Matrices act on (y, n·θ) so propagation through a medium of index n over
//! a length d is [[1, d/n], [0, 1]] and a flat dielectric interface is the
//! identity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cavity::CavitySpec;
use crate::error::{Result, ShgError};
use crate::physics::CrystalSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn propagation(length: f64, index: f64) -> Self {
        Self { a: 1.0, b: length / index, c: 0.0, d: 1.0 }
    }

    /// Concave mirror of radius `radius` seen from a medium of index `index`.
    /// An infinite radius is a plane mirror.
    pub fn mirror(radius: f64, index: f64) -> Self {
        Self { a: 1.0, b: 0.0, c: -2.0 * index / radius, d: 1.0 }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &RayMatrix) -> RayMatrix {
        RayMatrix {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
        }
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * (self.a + self.d)
    }
}

/// TEM00 eigenmode of the resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenMode {
    /// Waist radius, m.
    pub waist_radius: f64,
    /// Waist location measured from the plane crystal face, m; negative
    /// values lie in the air gap.
    pub waist_position: f64,
    /// (A + D)/2 of the round-trip matrix.
    pub half_trace: f64,
    /// Spot radius on the coupling mirror, m.
    pub coupler_spot_radius: f64,
}

pub fn cavity_eigenmode(cavity: &CavitySpec, crystal: &CrystalSpec, wavelength: f64) -> Result<EigenMode> {
    cavity_eigenmode_segmented(cavity, crystal, wavelength, 1)
}

/// Same as [`cavity_eigenmode`] with every free-space and crystal section
/// split into `segments` equal propagation steps.
pub fn cavity_eigenmode_segmented(
    cavity: &CavitySpec,
    crystal: &CrystalSpec,
    wavelength: f64,
    segments: usize,
) -> Result<EigenMode> {
    if segments == 0 {
        return Err(ShgError::Domain("segment count must be at least 1".into()));
    }
    let n = crystal.n_fundamental;
    let steps = segments as f64;
    let air = RayMatrix::propagation(cavity.air_gap / steps, 1.0);
    let slab = RayMatrix::propagation(crystal.length / steps, n);

    // Reference plane: just inside the coupler, heading toward the crystal.
    let mut m = RayMatrix::IDENTITY;
    for _ in 0..segments {
        m = air.after(&m);
    }
    for _ in 0..segments {
        m = slab.after(&m);
    }
    m = RayMatrix::mirror(crystal.hr_radius_of_curvature, n).after(&m);
    for _ in 0..segments {
        m = slab.after(&m);
    }
    for _ in 0..segments {
        m = air.after(&m);
    }
    m = RayMatrix::mirror(cavity.coupler_radius_of_curvature, 1.0).after(&m);

    let half_trace = m.half_trace();
    if !(half_trace.abs() < 1.0 - 1e-12) || m.b == 0.0 {
        return Err(ShgError::UnstableResonator { half_trace });
    }
    // Self-consistent 1/q with Im(1/q) < 0.
    let inv_q = Complex64::new(
        (m.d - m.a) / (2.0 * m.b),
        -(1.0 - half_trace * half_trace).sqrt() / m.b.abs(),
    );
    let q = inv_q.inv();
    let waist_radius = (wavelength * q.im / PI).sqrt();
    let coupler_spot_radius = (-wavelength / (PI * inv_q.im)).sqrt();

    // Re(q) is the reduced distance already travelled past the waist.
    let to_waist = -q.re;
    let waist_position = if to_waist <= cavity.air_gap {
        to_waist - cavity.air_gap
    } else {
        (to_waist - cavity.air_gap) * n
    };
    Ok(EigenMode {
        waist_radius,
        waist_position,
        half_trace,
        coupler_spot_radius,
    })
}
