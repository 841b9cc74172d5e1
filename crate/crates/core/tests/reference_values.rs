//! Values frozen from an independent NumPy implementation of the same model,
//! plus the published anchors.

use approx::assert_relative_eq;
use optomech_core::*;
use std::f64::consts::PI;

fn table_one(top: Topology) -> OperatingState {
    let mut p = SystemParams::table_one();
    p.topology = top;
    p.resolve().unwrap()
}

#[test]
fn srm_operating_point() {
    let s = table_one(Topology::Srm);
    assert_relative_eq!(s.epsilon(), 0.6969578687489121, max_relative = 1e-12);
    assert_relative_eq!(s.couplings.xi, 7.001467552895999, max_relative = 1e-9);
    assert_relative_eq!(s.couplings.eta, 554268988.6656872, max_relative = 1e-9);
    assert_relative_eq!(
        s.normalized.dissipative,
        0.1454934982181009,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        s.normalized.dispersive,
        1.2926126357951866,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        s.oscillator.omega_mod,
        2187028.501796244,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        s.oscillator.kappa_mod,
        15342.82986270367,
        max_relative = 1e-9
    );
    let occ = occupancy(&s, &InputNoise::vacuum(&s), OccupancyModel::HighTemperature).unwrap();
    assert_relative_eq!(occ.n_t, 210.66483076348842, max_relative = 1e-9);
}

#[test]
fn prm_operating_point() {
    let s = table_one(Topology::Prm);
    assert_relative_eq!(
        s.oscillator.omega_mod,
        2071343.838738028,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        s.oscillator.kappa_mod,
        158211.63497916167,
        max_relative = 1e-9
    );
    let occ = occupancy(&s, &InputNoise::vacuum(&s), OccupancyModel::HighTemperature).unwrap();
    assert_relative_eq!(occ.n_t, 58.35706461571225, max_relative = 1e-9);
}

#[test]
fn five_centimeter_couplings() {
    let mut p = SystemParams::table_one();
    p.effective_length = 0.05;
    let s = p.resolve().unwrap();
    assert_relative_eq!(s.couplings.xi, 14.001467322165382, max_relative = 1e-9);
    assert_relative_eq!(s.couplings.eta, 783936893.0132798, max_relative = 1e-9);
}

#[test]
fn transmissions_from_rates() {
    let tau = 2.0 * 0.05 / constants::SPEED_OF_LIGHT;
    assert_relative_eq!(
        cavity::CavityRates::transmission_for(2.0 * PI * 1e5, tau),
        0.014477033611730276,
        max_relative = 1e-14
    );
    assert_relative_eq!(
        cavity::CavityRates::transmission_for(2.0 * PI * 1e6, tau),
        0.045780399975881396,
        max_relative = 1e-14
    );
}

#[test]
fn thermal_phonon_anchor() {
    let mut p = SystemParams::table_one();
    p.power = 0.0;
    let s = p.resolve().unwrap();
    let occ = occupancy(&s, &InputNoise::vacuum(&s), OccupancyModel::HighTemperature).unwrap();
    assert_relative_eq!(occ.n_t, 1190663.9506339754, max_relative = 1e-12);
    assert!((occ.n_t / 1.2e6 - 1.0).abs() < 0.05);
}

#[test]
fn intracavity_power_ratio() {
    let pump = Pump::coherent(0.1, OpticalCarrier::new(1550e-9).unwrap()).unwrap();
    let g1 = 2.0 * PI * 1e6;
    let srm = mean_fields(
        Topology::Srm,
        &CavityRates::from_rates(g1, g1, 6e-10).unwrap(),
        &pump,
    );
    let prm = mean_fields(
        Topology::Prm,
        &CavityRates::from_rates(g1 * 1e-4, g1, 6e-10).unwrap(),
        &pump,
    );
    let ratio = prm.intracavity.powi(2) / srm.intracavity.powi(2);
    assert!((ratio / 4.0 - 1.0).abs() < 0.01, "{ratio}");
}

#[test]
fn back_action_to_thermal_cross_check() {
    let mut p = SystemParams::table_one();
    p.epsilon = EpsilonChoice::Maximal;
    let s = p.resolve().unwrap();
    let closed = ba_to_thermal_ratio(&s);
    assert!(closed > 0.3 && closed < 1.0, "{closed}");
    let b = budget_point(
        &s,
        PI / 2.0,
        &InputNoise::vacuum(&s),
        s.oscillator.omega_mod,
    );
    let composed = b.qrpn_c / b.thermal;
    assert!(
        (composed / closed - 1.0).abs() < 0.3,
        "{composed} vs {closed}"
    );
}

#[test]
fn back_action_ratio_scales_with_power() {
    let mut p = SystemParams::table_one();
    p.epsilon = EpsilonChoice::Maximal;
    let a = ba_to_thermal_ratio(&p.resolve().unwrap());
    p.power *= 3.0;
    let b = ba_to_thermal_ratio(&p.resolve().unwrap());
    assert_relative_eq!(b / a, 3.0, max_relative = 1e-12);
    p.power = 0.0;
    assert_eq!(ba_to_thermal_ratio(&p.resolve().unwrap()), 0.0);
}

#[test]
fn maximal_imbalance_kills_dissipative_coupling() {
    let mut p = SystemParams::table_one();
    p.epsilon = EpsilonChoice::Maximal;
    let s = p.resolve().unwrap();
    assert!(s.couplings.eta.abs() < 1e-9);
    assert!(s.couplings.eta.abs() * p.wavelength < 1e-6);
    let e = s.epsilon();
    p.epsilon = EpsilonChoice::Fixed(e + 1e-4);
    assert!(matches!(
        p.resolve(),
        Err(OptomechError::ImaginaryEta { .. })
    ));
}

#[test]
fn argmax_matches_closed_form_at_defaults() {
    let p = SystemParams::table_one();
    let grid = epsilon_argmax_grid(&p, 1e-3).unwrap();
    let closed = epsilon_opt(&p.mirror().unwrap(), p.gamma0 * p.tau()).unwrap();
    assert!((grid - closed).abs() <= 1e-3);
}

#[test]
fn damping_falls_beyond_optimum() {
    let p = SystemParams::table_one();
    let mirror = p.mirror().unwrap();
    let g0tau = p.gamma0 * p.tau();
    let (lo, hi) = (
        epsilon_opt(&mirror, g0tau).unwrap(),
        epsilon_max(&mirror, g0tau).unwrap(),
    );
    let mut last = f64::INFINITY;
    for i in 0..50 {
        let e = lo + (hi - lo) * i as f64 / 50.0;
        let k = optimize::damping_at_epsilon(&p, e).unwrap();
        assert!(k < last);
        last = k;
    }
}

#[test]
fn squeezing_dip_srm_location() {
    let mut p = SystemParams::table_one();
    p.gamma0 = 2.0 * PI * 3e5;
    let s = p.resolve().unwrap();
    let f = squeeze_features(&s);
    assert!(f.observable);
    let dip = find_dip(&s, DipTarget::SignalPort, &InputNoise::vacuum(&s)).unwrap();
    assert!((dip.omega - f.omega_sq).abs() < f.gamma_sq / 4.0);
    assert!(dip.value < 1.0);
}

#[test]
fn prm_dip_overlaps_resonance() {
    let mut p = SystemParams::table_one();
    p.topology = Topology::Prm;
    p.gamma0 = 2.0 * PI * 1e6;
    p.gamma1 = 2.0 * PI * 3e5;
    let f = squeeze_features(&p.resolve().unwrap());
    assert!(!f.observable);
    assert!(f.separation_estimate < 1.0);
}

#[test]
fn verification_harness_is_seeded() {
    let p = SystemParams::table_one();
    let a = verify_closed_forms(&p, 5, 11).unwrap();
    let b = verify_closed_forms(&p, 5, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.passed());
    let pair = a.pairs.iter().find(|r| r.pair == "couplings").unwrap();
    assert_eq!(pair.guarded, 1);
}
