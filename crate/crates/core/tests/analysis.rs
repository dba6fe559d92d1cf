use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use shg_core::analysis::{
    coupling_analysis, depletion_trace, fit_deff, matched_power_search, sweep_power,
    symmetric_detuning_grid, MIN_TRACE_SAMPLES,
};
use shg_core::{CavityModel, CouplingRegime, ShgError, SimConfig, Specs};

const D_EFF: f64 = 7.3e-12;
const FIT_POWERS: [f64; 6] = [0.2, 0.4, 0.6, 0.8, 1.0, 1.2];

fn linear_reflection(specs: &Specs) -> f64 {
    let r = specs.cavity.coupler_reflectivity_fundamental;
    let g = (1.0 - specs.linear_round_trip_loss()).sqrt();
    let refl = (Complex64::new(r.sqrt(), 0.0) - g) / (1.0 - g * r.sqrt());
    let mm = specs.cavity.mode_matching;
    1.0 - mm + mm * refl.norm_sqr()
}

fn synthetic(specs: &Specs, config: &SimConfig) -> Vec<(f64, f64)> {
    let model = CavityModel::new(specs, config).unwrap();
    FIT_POWERS
        .iter()
        .map(|&p| (p, model.solve_steady_state(p, 0.0).unwrap().depletion))
        .collect()
}

#[test]
fn sweep_at_zero_power() {
    let curve = sweep_power(&[0.0], &Specs::ppktp_1550(), &SimConfig::default()).unwrap();
    assert_eq!(curve.points.len(), 1);
    let pt = &curve.points[0];
    assert_eq!((pt.p_input, pt.efficiency, pt.p_harmonic), (0.0, 0.0, 0.0));
    assert!(curve.failures.is_empty());
}

#[test]
fn sweep_rejects_bad_grids() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    assert!(sweep_power(&[0.5, 0.5], &specs, &config).is_err());
    assert!(sweep_power(&[-0.1, 0.5], &specs, &config).is_err());
}

#[test]
fn efficiency_curve_has_single_interior_peak() {
    let specs = Specs::ppktp_1550();
    let grid: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
    let curve = sweep_power(&grid, &specs, &SimConfig::default()).unwrap();
    let eff: Vec<f64> = curve.points.iter().map(|p| p.efficiency).collect();
    let peak = curve.peak().unwrap();
    let i_peak = eff.iter().position(|e| *e == peak.efficiency).unwrap();
    assert!(i_peak > 0 && i_peak < eff.len() - 1);
    assert!(eff[..=i_peak].windows(2).all(|w| w[1] > w[0]));
    assert!(eff[i_peak..].windows(2).all(|w| w[1] < w[0]));
    for p in &curve.points {
        assert!(p.efficiency >= 0.0 && p.efficiency <= specs.cavity.mode_matching);
    }
    let at = |p: f64| curve.points.iter().find(|c| (c.p_input - p).abs() < 1e-12).unwrap().efficiency;
    assert!(at(1.3) > at(1.1));
}

#[test]
fn sweep_order_independent_of_execution() {
    let specs = Specs::ppktp_1550();
    let grid = [0.2, 0.7, 1.1];
    let seq = SimConfig { execution: shg_core::Execution::Sequential, ..SimConfig::default() };
    let a = sweep_power(&grid, &specs, &seq).unwrap();
    let b = sweep_power(&grid, &specs, &SimConfig::default()).unwrap();
    assert_eq!(a.points, b.points);
    assert_eq!(a.fingerprint.len(), 64);
}

#[test]
fn trace_symmetric_about_resonance() {
    let specs = Specs::ppktp_1550();
    let trace = depletion_trace(1.1, &specs, &SimConfig::default(), 33).unwrap();
    let n = trace.samples.len();
    for i in 0..n {
        let (a, b) = (trace.samples[i], trace.samples[n - 1 - i]);
        assert_eq!(a.detuning, -b.detuning);
        assert!((a.relative_reflection - b.relative_reflection).abs() < 1e-8);
        assert!((0.0..=1.0).contains(&a.relative_reflection));
    }
    assert_eq!((trace.reference_zero, trace.reference_full), (0.0, 1.0));
    let min = trace.samples.iter().map(|s| s.relative_reflection).fold(f64::INFINITY, f64::min);
    assert!(trace.locked_level <= min + 1e-9);
    assert!((trace.depletion() - (1.0 - trace.locked_level)).abs() < 1e-15);
}

#[test]
fn trace_linear_limit() {
    let mut specs = Specs::ppktp_1550();
    specs.crystal.d_eff = 0.0;
    let trace = depletion_trace(1.0, &specs, &SimConfig::default(), MIN_TRACE_SAMPLES).unwrap();
    assert!((trace.locked_level / linear_reflection(&specs) - 1.0).abs() < 1e-8);

    let weak = depletion_trace(1e-6, &Specs::ppktp_1550(), &SimConfig::default(), MIN_TRACE_SAMPLES).unwrap();
    assert!((weak.locked_level - linear_reflection(&specs)).abs() < 1e-4);
    assert!(weak.locked_level > 0.9);
}

#[test]
fn trace_preconditions() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    assert!(depletion_trace(1.1, &specs, &config, MIN_TRACE_SAMPLES - 1).is_err());
    let grid = symmetric_detuning_grid(5);
    assert_eq!(grid[2], 0.0);
    assert_eq!(grid[0], -grid[4]);
}

#[test]
fn fit_recovers_noiseless_deff() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    let fit = fit_deff(&synthetic(&specs, &config), &specs, &config).unwrap();
    assert!((fit.d_eff / D_EFF - 1.0).abs() < 5e-3, "d_eff = {}", fit.d_eff);
    assert_eq!(fit.residuals.len(), FIT_POWERS.len());
}

#[test]
fn fit_with_noise_stays_within_two_percent() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    let clean = synthetic(&specs, &config);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // The full 100-replicate run lives in the acceptance suite.
    for _ in 0..10 {
        let noisy: Vec<(f64, f64)> = clean.iter().map(|&(p, d)| (p, d * (1.0 + noise.sample(&mut rng)))).collect();
        let fit = fit_deff(&noisy, &specs, &config).unwrap();
        assert!((fit.d_eff / D_EFF - 1.0).abs() < 0.02, "d_eff = {}", fit.d_eff);
    }
}

#[test]
fn single_point_fit_is_interpolation() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    let fit = fit_deff(&[(1.1, 0.95)], &specs, &config).unwrap();
    assert!(fit.residuals[0].abs() < 1e-5, "residual {}", fit.residuals[0]);
}

#[test]
fn degenerate_fit_data() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    for data in [vec![], vec![(0.0, 0.1), (0.0, 0.2)], vec![(0.5, 0.1), (0.5, 0.2)], vec![(f64::NAN, 0.1)]] {
        assert!(matches!(fit_deff(&data, &specs, &config), Err(ShgError::DegenerateData(_))));
    }
}

#[test]
fn fit_objective_unimodal() {
    let specs = Specs::ppktp_1550();
    let config = SimConfig::default();
    let data = synthetic(&specs, &config);
    let e_ref = CavityModel::new(&specs, &config).unwrap().single_pass_coefficient() / D_EFF.powi(2);
    let sse: Vec<f64> = (1..=20)
        .map(|k| {
            let d = k as f64 * 1e-12;
            let model = CavityModel::with_single_pass_coefficient(&specs, &config, e_ref * d * d).unwrap();
            data.iter()
                .map(|&(p, m)| (model.solve_steady_state(p, 0.0).unwrap().depletion - m).powi(2))
                .sum()
        })
        .collect();
    let i_min = sse.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert_eq!(i_min, 6);
    assert!(sse[..=i_min].windows(2).all(|w| w[1] < w[0]));
    assert!(sse[i_min..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn linear_cavity_is_over_coupled() {
    let mut specs = Specs::ppktp_1550();
    specs.crystal.d_eff = 0.0;
    let report = coupling_analysis(1.1, &specs, &SimConfig::default()).unwrap();
    assert_eq!(report.coupling_regime, CouplingRegime::Over);
    assert!(report.coupler_transmission > 10.0 * report.linear_loss);
    assert!((report.effective_internal_loss - report.linear_loss).abs() < 1e-9);
}

#[test]
fn coupling_report_is_ledger_consistent() {
    let specs = Specs::ppktp_1550();
    let report = coupling_analysis(1.1, &specs, &SimConfig::default()).unwrap();
    let gap = report.depletion - report.external_efficiency - report.internal_loss_share;
    assert!(gap.abs() < 1e-6);
    assert!(report.overcoupling_correction > 0.0);
    assert!(report.effective_internal_loss > report.linear_loss);
}

#[test]
fn reflection_minimum_between_one_and_two_watts() {
    let specs = Specs::ppktp_1550();
    let model = CavityModel::new(&specs, &SimConfig::default()).unwrap();
    let mm = specs.cavity.mode_matching;
    let refl: Vec<f64> = (0..=18)
        .map(|k| model.on_resonance(1.0 + 0.06 * k as f64).unwrap().matched_reflectivity(mm))
        .collect();
    let i_min = refl.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    assert!(i_min > 1 && i_min < refl.len() - 1, "minimum at index {i_min}");
    let found = matched_power_search(&specs, &SimConfig::default(), (1.1, 2.0)).unwrap();
    assert!((found - (1.0 + 0.06 * i_min as f64)).abs() <= 0.06);
}

#[test]
fn matched_search_without_nonlinearity_hits_boundary() {
    let mut specs = Specs::ppktp_1550();
    specs.crystal.d_eff = 0.0;
    let err = matched_power_search(&specs, &SimConfig::default(), (0.5, 2.0)).unwrap_err();
    assert!(matches!(err, ShgError::NoInteriorMinimum { .. }), "{err:?}");
}

#[test]
fn more_loss_matches_at_lower_power() {
    let specs = Specs::ppktp_1550();
    let mut lossy = specs;
    lossy.crystal.alpha_fundamental *= 2.0;
    lossy.crystal.alpha_harmonic *= 2.0;
    lossy.crystal.ar_residual_reflectivity *= 2.0;
    lossy.crystal.hr_reflectivity_fundamental = 1.0 - 2.0 * (1.0 - specs.crystal.hr_reflectivity_fundamental);
    lossy.crystal.hr_reflectivity_harmonic = 1.0 - 2.0 * (1.0 - specs.crystal.hr_reflectivity_harmonic);
    let config = SimConfig::default();
    let base = matched_power_search(&specs, &config, (1.0, 2.5)).unwrap();
    let reduced = matched_power_search(&lossy, &config, (1.0, 2.5)).unwrap();
    assert!(reduced < base, "{reduced} vs {base}");
}
