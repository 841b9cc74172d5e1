//! Closed-form optimal imbalance, parameter sweeps and the closed-form/oracle harness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::{optical_spring, CavityRates, MechanicalOscillator, Pump, Topology};
use crate::error::{ensure, OptomechError, Result};
use crate::model::{EpsilonChoice, OperatingState, SystemParams};
use crate::msi::{
    couplings_at_transmission, couplings_by_derivative, couplings_closed_form, generalized_mirror,
    solve_operating_point, BeamSplitterSpec, MirrorSpec, DEFAULT_FD_STEP,
};
use crate::spectra::{
    correlated_c_coefficient, correlated_c_coefficient_composed, occupancy, qrpn_psd,
    qrpn_psd_from_transfer, OccupancyModel,
};
use crate::squeeze::{find_dip, squeeze_features, DipTarget};
use crate::transfer::InputNoise;

fn check_g0tau(g0tau: f64) -> Result<()> {
    ensure(
        g0tau > 0.0 && g0tau < 1.0,
        "gamma0_tau",
        g0tau,
        "must lie in (0, 1)",
    )
}

/// Imbalance maximizing the optical damping:
/// `(r_m / sqrt 2) sqrt(1 - g0 tau) - t_m sqrt(g0 tau)`.
pub fn epsilon_opt(mirror: &MirrorSpec, g0tau: f64) -> Result<f64> {
    check_g0tau(g0tau)?;
    Ok(mirror.r() / 2f64.sqrt() * (1.0 - g0tau).sqrt() - mirror.t() * g0tau.sqrt())
}

/// Largest imbalance with a real operating point:
/// `r_m sqrt(1 - g0 tau) - t_m sqrt(g0 tau)`.
pub fn epsilon_max(mirror: &MirrorSpec, g0tau: f64) -> Result<f64> {
    check_g0tau(g0tau)?;
    Ok(mirror.r() * (1.0 - g0tau).sqrt() - mirror.t() * g0tau.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    Gamma0,
    Epsilon,
    Omega,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepScale {
    Linear,
    Log,
}

/// A 1-D grid over one parameter, in the core's SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl SweepSpec {
    pub fn new(
        parameter: SweepParameter,
        lo: f64,
        hi: f64,
        points: usize,
        scale: SweepScale,
    ) -> Result<Self> {
        ensure(lo < hi, "sweep_lo", lo, "must be below the upper bound")?;
        ensure(
            points >= 2,
            "sweep_points",
            points as f64,
            "must be at least 2",
        )?;
        if scale == SweepScale::Log {
            ensure(
                lo > 0.0,
                "sweep_lo",
                lo,
                "log sweeps need a positive lower bound",
            )?;
        }
        Ok(Self {
            parameter,
            lo,
            hi,
            points,
            scale,
        })
    }

    /// 200 log-spaced values of `gamma0` from 2 pi 1e4 to 2 pi 3e6 rad/s.
    pub fn default_gamma0() -> Self {
        let tp = 2.0 * std::f64::consts::PI;
        Self {
            parameter: SweepParameter::Gamma0,
            lo: tp * 1e4,
            hi: tp * 3e6,
            points: 200,
            scale: SweepScale::Log,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let f = i as f64 / last;
                if i + 1 == self.points {
                    return self.hi;
                }
                match self.scale {
                    SweepScale::Linear => self.lo + (self.hi - self.lo) * f,
                    SweepScale::Log => self.lo * (self.hi / self.lo).powf(f),
                }
            })
            .collect()
    }
}

/// Why a sweep point has no occupancy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointStatus {
    Stable,
    /// Optical anti-damping or negative stiffness.
    Unstable,
    /// The requested MSI transmission is unreachable at this imbalance.
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingPoint {
    pub gamma0: f64,
    pub epsilon: f64,
    /// NaN unless stable.
    pub n_t: f64,
    /// NaN when unsolvable.
    pub kappa_mod: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingCurve {
    pub points: Vec<CoolingPoint>,
}

impl CoolingCurve {
    pub fn stable(&self) -> impl Iterator<Item = &CoolingPoint> {
        self.points
            .iter()
            .filter(|p| p.status == PointStatus::Stable)
    }

    /// Stable point with the lowest occupancy.
    pub fn minimum(&self) -> Option<CoolingPoint> {
        self.stable()
            .copied()
            .min_by(|a, b| a.n_t.total_cmp(&b.n_t))
    }
}

/// Occupancy against `gamma0`; with `EpsilonChoice::Optimal` the imbalance is
/// recomputed at every point.
pub fn cooling_sweep(
    params: &SystemParams,
    sweep: &SweepSpec,
    model: OccupancyModel,
) -> Result<CoolingCurve> {
    if sweep.parameter != SweepParameter::Gamma0 {
        return Err(OptomechError::InvalidParameter {
            name: "sweep_parameter",
            value: 0.0,
            reason: "cooling curves sweep gamma0",
        });
    }
    let points = sweep
        .values()
        .into_iter()
        .map(|g0| cooling_point(params, g0, model))
        .collect();
    Ok(CoolingCurve { points })
}

fn cooling_point(params: &SystemParams, gamma0: f64, model: OccupancyModel) -> CoolingPoint {
    let mut p = params.clone();
    p.gamma0 = gamma0;
    let epsilon = p.resolve_epsilon().unwrap_or(f64::NAN);
    let blank = CoolingPoint {
        gamma0,
        epsilon,
        n_t: f64::NAN,
        kappa_mod: f64::NAN,
        status: PointStatus::Unsolvable,
    };
    match OperatingState::new(p.clone()) {
        Ok(state) => match occupancy(&state, &InputNoise::from_state(&state), model) {
            Ok(occ) => CoolingPoint {
                n_t: occ.n_t,
                kappa_mod: state.oscillator.kappa_mod,
                status: PointStatus::Stable,
                ..blank
            },
            Err(_) => CoolingPoint {
                kappa_mod: state.oscillator.kappa_mod,
                status: PointStatus::Unstable,
                ..blank
            },
        },
        Err(OptomechError::UnstableSpring { kappa, .. }) => CoolingPoint {
            kappa_mod: kappa,
            status: PointStatus::Unstable,
            ..blank
        },
        Err(_) => blank,
    }
}

/// Dressed damping `kappa_M` at imbalance `epsilon`, other parameters from `params`.
pub fn damping_at_epsilon(params: &SystemParams, epsilon: f64) -> Result<f64> {
    let tau = params.tau();
    let rates = CavityRates::from_rates(params.gamma0, params.gamma1, tau)?;
    let carrier = params.carrier()?;
    let mirror = params.mirror()?;
    let mech: MechanicalOscillator = params.mechanics()?;
    let pump = Pump::coherent(params.power, carrier)?;
    let bs = BeamSplitterSpec::new(epsilon)?;
    let t = CavityRates::transmission_for(params.gamma0, tau);
    let (_, c) = couplings_at_transmission(t, &mirror, &bs, &carrier, params.effective_length)?;
    // evaluated at omega_m: the imbalance enters only through xi * eta
    let spring = optical_spring(params.topology, &rates, &c, &pump, &mech, mech.omega_m);
    Ok(mech.kappa_m() - spring.im / mech.omega_m)
}

/// Brute-force argmax of the optical damping over `epsilon` in `(0, epsilon_max)` with spacing `step`.
pub fn epsilon_argmax_grid(params: &SystemParams, step: f64) -> Result<f64> {
    ensure(
        step > 0.0 && step < 0.5,
        "step",
        step,
        "must lie in (0, 0.5)",
    )?;
    let e_max = epsilon_max(&params.mirror()?, params.gamma0 * params.tau())?;
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut e = step;
    while e < e_max {
        if let Ok(k) = damping_at_epsilon(params, e) {
            if k > best.1 {
                best = (e, k);
            }
        }
        e += step;
    }
    if best.0.is_nan() {
        return Err(OptomechError::InvalidParameter {
            name: "epsilon_max",
            value: e_max,
            reason: "no grid point below the maximal imbalance",
        });
    }
    Ok(best.0)
}

/// Outcome of one closed-form/oracle pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub pair: String,
    pub samples: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub worst_point: String,
    /// Samples skipped because the comparison is undefined there.
    pub skipped: usize,
    /// Degenerate inputs that were surfaced as errors instead of values.
    pub guarded: usize,
}

impl PairReport {
    fn new(pair: &str, tolerance: f64) -> Self {
        Self {
            pair: pair.to_string(),
            samples: 0,
            max_deviation: 0.0,
            tolerance,
            worst_point: String::new(),
            skipped: 0,
            guarded: 0,
        }
    }

    fn record(&mut self, deviation: f64, point: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN counts as a failure
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = if deviation.is_nan() {
                f64::INFINITY
            } else {
                deviation
            };
            self.worst_point = point();
        }
    }

    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub pairs: Vec<PairReport>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(PairReport::passed)
    }

    pub fn ensure_passed(&self) -> Result<()> {
        match self.pairs.iter().find(|p| !p.passed()) {
            None => Ok(()),
            Some(p) => Err(OptomechError::VerificationFailed {
                pair: p.pair.clone(),
                deviation: p.max_deviation,
                tolerance: p.tolerance,
                point: p.worst_point.clone(),
            }),
        }
    }
}

pub const COUPLING_TOLERANCE: f64 = 1e-6;
pub const UNITARITY_TOLERANCE: f64 = 1e-12;
pub const ARGMAX_STEP: f64 = 1e-3;
pub const BACK_ACTION_TOLERANCE: f64 = 0.1;
pub const CORRELATION_TOLERANCE: f64 = 1e-9;
pub const DIP_TOLERANCE: f64 = 0.25;

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Draws random operating points around `params` and compares every closed
/// form with its numeric oracle. The dip pair is evaluated at `params` itself
/// and only when the closed forms predict a resolvable dip.
pub fn verify_closed_forms(
    params: &SystemParams,
    samples: usize,
    seed: u64,
) -> Result<VerificationReport> {
    ensure(
        samples >= 1,
        "samples",
        samples as f64,
        "must be at least 1",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let carrier = params.carrier()?;
    let tau = params.tau();

    let mut unitarity = PairReport::new("unitarity", UNITARITY_TOLERANCE);
    let mut coupling = PairReport::new("couplings", COUPLING_TOLERANCE);
    let mut argmax = PairReport::new("epsilon_opt_argmax", ARGMAX_STEP);
    let mut back_action = PairReport::new("back_action_psd", BACK_ACTION_TOLERANCE);
    let mut correlated = PairReport::new("correlated_quadrature", CORRELATION_TOLERANCE);
    let mut dip = PairReport::new("squeeze_dip", DIP_TOLERANCE);

    for _ in 0..samples {
        let r2: f64 = rng.gen_range(0.5..0.99);
        let g0: f64 = 2.0 * std::f64::consts::PI * 10f64.powf(rng.gen_range(4.0..6.0));
        let g0tau = g0 * tau;
        let mirror = MirrorSpec::from_power_reflectivity(r2)?;
        let e_max = epsilon_max(&mirror, g0tau)?;
        let eps: f64 = rng.gen_range(0.05..0.9) * e_max;
        let phase: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let topology = if rng.gen_bool(0.5) {
            Topology::Srm
        } else {
            Topology::Prm
        };
        let describe = || format!("r_m^2={r2}, eps={eps}, gamma0={g0}, topology={topology}");

        let bs = BeamSplitterSpec::new(eps)?;
        let free = crate::msi::MsiOperatingPoint::from_phase(phase, &carrier);
        let gm = generalized_mirror(&mirror, &bs, &free, &carrier);
        unitarity.record((gm.power_sum() - 1.0).abs(), describe);

        let t = CavityRates::transmission_for(g0, tau);
        let op = solve_operating_point(t, &mirror, &bs, &carrier)?;
        let cf = couplings_closed_form(&mirror, &bs, &op, &carrier, params.effective_length)?;
        let fd = couplings_by_derivative(&mirror, &bs, &op, &carrier, tau, DEFAULT_FD_STEP)?;
        coupling.record(rel(fd.xi, cf.xi).max(rel(fd.eta, cf.eta)), describe);

        let mut p = params.clone();
        p.topology = topology;
        p.power_reflectivity = r2;
        p.gamma0 = g0;
        p.squeeze = crate::model::SqueezeSpec::vacuum();
        p.epsilon = EpsilonChoice::Fixed(eps);
        let grid_best = epsilon_argmax_grid(&p, ARGMAX_STEP)?;
        let e_opt = epsilon_opt(&mirror, g0tau)?;
        argmax.record((grid_best - e_opt).abs(), describe);

        match p.resolve() {
            Ok(state) => {
                let w = state.oscillator.omega_mod;
                let oracle = qrpn_psd_from_transfer(&state, &InputNoise::vacuum(&state), w);
                back_action.record(rel(qrpn_psd(&state, w), oracle), describe);
                let omega = w * rng.gen_range(0.2..5.0);
                let a = correlated_c_coefficient(&state, omega);
                let b = correlated_c_coefficient_composed(&state, omega);
                correlated.record((a - b).norm() / b.norm(), describe);
            }
            Err(OptomechError::UnstableSpring { .. }) => {
                back_action.skipped += 1;
                correlated.skipped += 1;
            }
            Err(e) => return Err(e),
        }
    }

    // adversarial: a dark-fringe operating point must be refused, not produce NaN
    let mirror = params.mirror()?;
    let bs = BeamSplitterSpec::balanced();
    let dark = crate::msi::MsiOperatingPoint::from_phase(0.0, &carrier);
    match couplings_closed_form(&mirror, &bs, &dark, &carrier, params.effective_length) {
        Err(OptomechError::DegenerateOperatingPoint { .. }) => coupling.guarded += 1,
        Ok(c) => coupling.record(f64::INFINITY, || format!("dark fringe returned {c:?}")),
        Err(e) => coupling.record(f64::INFINITY, || format!("dark fringe raised {e}")),
    }

    let state = params.resolve()?;
    let feats = squeeze_features(&state);
    if feats.observable && state.normalized.product() > 0.0 {
        let noise = InputNoise::vacuum(&state);
        let loc = find_dip(&state, DipTarget::SignalPort, &noise)?;
        dip.record((loc.omega - feats.omega_sq).abs() / feats.gamma_sq, || {
            format!(
                "topology={}, omega_sq={}, located={}",
                state.topology(),
                feats.omega_sq,
                loc.omega
            )
        });
    } else {
        dip.skipped += 1;
    }

    Ok(VerificationReport {
        seed,
        pairs: vec![unitarity, coupling, argmax, back_action, correlated, dip],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn limits_without_membrane_transmission() {
        let m = MirrorSpec::from_power_reflectivity(1.0).unwrap();
        assert_relative_eq!(
            epsilon_opt(&m, 1e-14).unwrap(),
            1.0 / 2f64.sqrt(),
            epsilon = 1e-12
        );
        assert_relative_eq!(epsilon_max(&m, 1e-14).unwrap(), 1.0, epsilon = 1e-12);
        assert!(epsilon_opt(&m, 0.0).is_err());
        assert!(epsilon_max(&m, 1.0).is_err());
    }

    #[test]
    fn optimal_imbalance_for_reflective_membrane() {
        let m = MirrorSpec::from_power_reflectivity(0.98).unwrap();
        assert_relative_eq!(epsilon_opt(&m, 2.1e-4).unwrap(), 0.7, epsilon = 0.01);
    }

    #[test]
    fn sweep_grid_endpoints() {
        let s = SweepSpec::new(SweepParameter::Gamma0, 1.0, 100.0, 3, SweepScale::Log).unwrap();
        let v = s.values();
        assert_eq!((v[0], v[2]), (1.0, 100.0));
        assert_relative_eq!(v[1], 10.0, max_relative = 1e-15);
        assert!(SweepSpec::new(SweepParameter::Gamma0, 2.0, 1.0, 3, SweepScale::Linear).is_err());
        assert!(SweepSpec::new(SweepParameter::Gamma0, 0.0, 1.0, 3, SweepScale::Log).is_err());
        assert!(SweepSpec::new(SweepParameter::Gamma0, 0.0, 1.0, 1, SweepScale::Linear).is_err());
    }

    #[test]
    fn unsolvable_points_are_kept() {
        let mut p = SystemParams::table_one();
        p.epsilon = EpsilonChoice::Fixed(0.995);
        let s = SweepSpec::new(SweepParameter::Gamma0, 1e5, 1e6, 4, SweepScale::Log).unwrap();
        let c = cooling_sweep(&p, &s, OccupancyModel::HighTemperature).unwrap();
        assert_eq!(c.points.len(), 4);
        assert!(c.points.iter().all(|p| p.status == PointStatus::Unsolvable));
        assert!(c.minimum().is_none());
    }

    #[test]
    fn default_verification_passes() {
        let r = verify_closed_forms(&SystemParams::table_one(), 10, 7).unwrap();
        for p in &r.pairs {
            assert!(p.passed(), "{p:?}");
        }
        r.ensure_passed().unwrap();
    }
}
