//! Gaussian-beam focusing factor for second-harmonic generation.
//!
//! h(σ, ξ, μ) = |∫ e^{iστ} / (1 + iτ) dτ|² / (4ξ), integrated over the
//! crystal in units of the Rayleigh range, τ ∈ [−ξ(1 − μ), ξ(1 + μ)].
//! No walk-off. The mismatch parameter σ is what temperature tuning of a
//! QPM crystal adjusts, so the operating value is the σ that maximizes h.

use num_complex::Complex64;

use crate::error::{Result, ShgError};
use crate::search::golden_section_max;

/// Complex focusing integral by composite Simpson quadrature.
pub fn focusing_integral(sigma: f64, xi: f64, mu: f64) -> Complex64 {
    let lo = -xi * (1.0 - mu);
    let hi = xi * (1.0 + mu);
    let span = hi - lo;
    // Resolve both the Lorentzian core and the e^{iστ} oscillation.
    let mut panels = (200.0 * span * (1.0 + sigma.abs())).ceil() as usize;
    panels = panels.clamp(256, 1_000_000);
    if panels % 2 == 1 {
        panels += 1;
    }
    let step = span / panels as f64;
    let f = |tau: f64| Complex64::new(0.0, sigma * tau).exp() / Complex64::new(1.0, tau);
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(lo + step * i as f64) * w;
    }
    acc * (step / 3.0)
}

/// h(σ, ξ, μ) for an explicit mismatch parameter.
pub fn focusing_h(sigma: f64, xi: f64, mu: f64) -> f64 {
    focusing_integral(sigma, xi, mu).norm_sqr() / (4.0 * xi)
}

/// Maximizes h over σ for fixed ξ and focus offset μ. Returns (σ_opt, h).
pub fn optimal_focusing(xi: f64, mu: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(ShgError::Domain(format!("focusing parameter {xi} must be positive")));
    }
    // Coarse scan locates the main lobe, golden section polishes it.
    let step = 0.05;
    let (mut best_sigma, mut best_h) = (0.0, f64::NEG_INFINITY);
    for i in 0..=80 {
        let sigma = -1.0 + step * i as f64;
        let h = focusing_h(sigma, xi, mu);
        if h > best_h {
            best_sigma = sigma;
            best_h = h;
        }
    }
    let sigma = golden_section_max(
        |s| focusing_h(s, xi, mu),
        best_sigma - step,
        best_sigma + step,
        1e-7,
    );
    let h = focusing_h(sigma, xi, mu);
    Ok(if h >= best_h { (sigma, h) } else { (best_sigma, best_h) })
}

/// Focusing factor h(ξ) for a centred focus, no walk-off, with the
/// mismatch parameter at its optimum.
pub fn boyd_kleinman_factor(xi: f64) -> Result<f64> {
    optimal_focusing(xi, 0.0).map(|(_, h)| h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mismatch_matches_arctan_closed_form() {
        // σ = 0: ∫ dτ/(1+iτ) over [−ξ, ξ] = 2 atan ξ.
        for xi in [0.01_f64, 0.3, 1.0, 2.84, 7.5] {
            let expected = xi.atan().powi(2) / xi;
            let got = focusing_h(0.0, xi, 0.0);
            assert!((got - expected).abs() < 1e-9 * expected, "xi={xi}: {got} vs {expected}");
        }
    }

    #[test]
    fn plane_wave_limit() {
        for xi in [1e-5, 1e-4, 5e-4, 9e-4] {
            let h = boyd_kleinman_factor(xi).unwrap();
            assert!((h / xi - 1.0).abs() < 1e-3, "xi={xi}: h/xi = {}", h / xi);
        }
    }

    #[test]
    fn non_positive_xi_is_domain_error() {
        assert!(matches!(boyd_kleinman_factor(0.0), Err(ShgError::Domain(_))));
        assert!(matches!(boyd_kleinman_factor(-1.0), Err(ShgError::Domain(_))));
    }

    #[test]
    fn optimum_mismatch_at_confocal_optimum() {
        let (sigma, h) = optimal_focusing(2.84, 0.0).unwrap();
        assert!((sigma - 0.57).abs() < 0.02, "sigma = {sigma}");
        assert!((h - 1.068).abs() < 1e-3, "h = {h}");
    }
}
