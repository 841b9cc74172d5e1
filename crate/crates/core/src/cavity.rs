//! Recycling-cavity rates, steady-state fields, the resonant-pump optical
//! spring and the spring-modified mechanical oscillator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{ensure, OptomechError, Result};
use crate::msi::{CouplingPair, OpticalCarrier};

/// Which port the external recycling mirror closes.
///
/// With `Srm` the pump enters through the interferometer and the recycling
/// mirror sits on the signal port; with `Prm` the pump enters through the
/// recycling mirror and the signal leaves through the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Topology {
    Srm,
    Prm,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Srm => "SRM",
            Topology::Prm => "PRM",
        }
    }
}

impl std::fmt::Display for Topology {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Amplitude relaxation rates of the cavity (rad/s) and its round-trip time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityRates {
    /// Relaxation through the interferometer.
    pub gamma0: f64,
    /// Relaxation through the recycling mirror.
    pub gamma1: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub tau: f64,
}

impl CavityRates {
    pub fn from_rates(gamma0: f64, gamma1: f64, tau: f64) -> Result<Self> {
        ensure(gamma0 > 0.0, "gamma0", gamma0, "must be positive")?;
        ensure(gamma1 > 0.0, "gamma1", gamma1, "must be positive")?;
        ensure(tau > 0.0, "tau", tau, "must be positive")?;
        Ok(Self {
            gamma0,
            gamma1,
            gamma_plus: 0.5 * (gamma1 + gamma0),
            gamma_minus: 0.5 * (gamma1 - gamma0),
            tau,
        })
    }

    /// Amplitude transmission that yields relaxation rate `gamma` at this round-trip time.
    pub fn transmission_for(gamma: f64, tau: f64) -> f64 {
        (gamma * tau).sqrt()
    }
}

pub fn cavity_rates(t_msi: f64, t_recycling: f64, tau: f64) -> Result<CavityRates> {
    ensure(
        t_msi > 0.0 && t_msi < 1.0,
        "t_msi",
        t_msi,
        "must lie in (0, 1)",
    )?;
    ensure(
        t_recycling > 0.0 && t_recycling < 1.0,
        "t_recycling",
        t_recycling,
        "must lie in (0, 1)",
    )?;
    ensure(tau > 0.0, "tau", tau, "must be positive")?;
    CavityRates::from_rates(t_msi * t_msi / tau, t_recycling * t_recycling / tau, tau)
}

/// Mechanical mode of the membrane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanicalOscillator {
    pub mass: f64,
    pub omega_m: f64,
    pub quality: f64,
    pub temperature: f64,
}

impl MechanicalOscillator {
    pub fn new(mass: f64, omega_m: f64, quality: f64, temperature: f64) -> Result<Self> {
        ensure(mass > 0.0, "mass", mass, "must be positive")?;
        ensure(omega_m > 0.0, "omega_m", omega_m, "must be positive")?;
        ensure(quality > 0.0, "quality", quality, "must be positive")?;
        ensure(
            temperature > 0.0,
            "temperature",
            temperature,
            "must be positive",
        )?;
        Ok(Self {
            mass,
            omega_m,
            quality,
            temperature,
        })
    }

    /// Energy damping rate `kappa_m = omega_m / Q`.
    pub fn kappa_m(&self) -> f64 {
        self.omega_m / self.quality
    }
}

/// Resonant pump laser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pump {
    pub power: f64,
    pub carrier: OpticalCarrier,
    /// Classical excess noise on the pump amplitude quadrature, in units of shot noise.
    pub excess_amplitude: f64,
    /// Classical excess noise on the pump phase quadrature, in units of shot noise.
    pub excess_phase: f64,
}

impl Pump {
    /// A coherent-state pump of the given power.
    pub fn coherent(power: f64, carrier: OpticalCarrier) -> Result<Self> {
        Self::with_excess(power, carrier, 1.0, 1.0)
    }

    pub fn with_excess(
        power: f64,
        carrier: OpticalCarrier,
        excess_amplitude: f64,
        excess_phase: f64,
    ) -> Result<Self> {
        ensure(
            power >= 0.0 && power.is_finite(),
            "power",
            power,
            "must be non-negative",
        )?;
        ensure(
            excess_amplitude >= 1.0,
            "excess_amplitude",
            excess_amplitude,
            "must be >= 1",
        )?;
        ensure(
            excess_phase >= 1.0,
            "excess_phase",
            excess_phase,
            "must be >= 1",
        )?;
        Ok(Self {
            power,
            carrier,
            excess_amplitude,
            excess_phase,
        })
    }

    /// Carrier amplitude `B = sqrt(W / hbar omega_0)`, in sqrt(photons/s).
    pub fn amplitude(&self) -> f64 {
        (self.power / (HBAR * self.carrier.angular_frequency())).sqrt()
    }
}

/// Zero-order (mean) field amplitudes for a resonant pump, sqrt(photons/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFields {
    pub intracavity: f64,
    pub reflected: f64,
    pub output: f64,
}

pub fn mean_fields(topology: Topology, rates: &CavityRates, pump: &Pump) -> MeanFields {
    let b = pump.amplitude();
    let (g0, g1) = (rates.gamma0, rates.gamma1);
    let sum = g0 + g1;
    let output = 2.0 * (g0 * g1).sqrt() / sum * b;
    match topology {
        Topology::Srm => MeanFields {
            intracavity: 2.0 * g0.sqrt() / sum * b,
            reflected: (g0 - g1) / sum * b,
            output,
        },
        Topology::Prm => MeanFields {
            intracavity: 2.0 * g1.sqrt() / sum * b,
            reflected: (g1 - g0) / sum * b,
            output,
        },
    }
}

/// Dimensionless dissipative (`dissipative`, script X) and dispersive
/// (`dispersive`, script H) coupling rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedCouplings {
    pub dissipative: f64,
    pub dispersive: f64,
}

impl NormalizedCouplings {
    pub fn product(&self) -> f64 {
        self.dissipative * self.dispersive
    }

    pub fn magnitude(&self) -> f64 {
        self.dissipative.hypot(self.dispersive)
    }
}

pub fn normalized_couplings(
    couplings: &CouplingPair,
    pump: &Pump,
    mech: &MechanicalOscillator,
    rates: &CavityRates,
) -> NormalizedCouplings {
    let w0 = pump.carrier.angular_frequency();
    let gp = rates.gamma_plus;
    let m = mech.mass;
    NormalizedCouplings {
        dissipative: couplings.eta * (pump.power / (2.0 * m * w0 * gp * gp)).sqrt(),
        dispersive: couplings.xi * (2.0 * w0 * pump.power / (m * gp.powi(4))).sqrt(),
    }
}

/// Complex optical-spring constant `omega_os^2(Omega)` per unit mass.
pub fn optical_spring(
    topology: Topology,
    rates: &CavityRates,
    couplings: &CouplingPair,
    pump: &Pump,
    mech: &MechanicalOscillator,
    omega: f64,
) -> Complex64 {
    let gp = rates.gamma_plus;
    let prefactor = match topology {
        Topology::Srm => rates.gamma0 * rates.gamma0,
        Topology::Prm => rates.gamma1 * rates.gamma0,
    };
    let numerator = -pump.power * prefactor * couplings.product() / (mech.mass * gp * gp);
    numerator / Complex64::new(gp, -omega)
}

/// The same spring expressed through the normalized couplings:
/// `-g gamma_+ X H / (gamma_+ - i Omega)` with `g = gamma0^2` (SRM) or
/// `gamma0 gamma1` (PRM).
pub fn optical_spring_normalized(
    topology: Topology,
    rates: &CavityRates,
    nc: &NormalizedCouplings,
    omega: f64,
) -> Complex64 {
    let gp = rates.gamma_plus;
    let prefactor = match topology {
        Topology::Srm => rates.gamma0 * rates.gamma0,
        Topology::Prm => rates.gamma1 * rates.gamma0,
    };
    -prefactor * gp * nc.product() / Complex64::new(gp, -omega)
}

/// A violated small-parameter assumption behind the closed-form oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RegimeWarning {
    /// `hbar omega_M` is not small against `k_B T0`.
    LowTemperature { ratio: f64 },
    /// A mechanical linewidth is not small against `omega_m`.
    BroadMechanicalLine { ratio: f64 },
    /// `omega_M` is not small against `gamma_+`.
    SlowCavity { ratio: f64 },
    /// The single refinement step moved `omega_M` by more than 1e-3 relative.
    SpringNotConverged { relative_shift: f64 },
}

/// Ratio above which a "much less than" assumption is reported.
pub const REGIME_THRESHOLD: f64 = 0.1;
/// Allowed relative change of `omega_M` across the refinement step.
pub const REFINEMENT_TOLERANCE: f64 = 1e-3;

/// The mechanical mode dressed by the optical spring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedOscillator {
    pub omega_os_sq: Complex64,
    /// Frequency at which `omega_os_sq` was evaluated (the refined `omega_M`).
    pub evaluated_at: f64,
    pub omega_mod: f64,
    pub kappa_mod: f64,
    pub warnings: Vec<RegimeWarning>,
}

impl ModifiedOscillator {
    /// The undressed oscillator.
    pub fn bare(mech: &MechanicalOscillator) -> Self {
        Self {
            omega_os_sq: Complex64::new(0.0, 0.0),
            evaluated_at: mech.omega_m,
            omega_mod: mech.omega_m,
            kappa_mod: mech.kappa_m(),
            warnings: Vec::new(),
        }
    }

    /// Optical damping is negative: the spring heats the mode.
    pub fn is_heating(&self, mech: &MechanicalOscillator) -> bool {
        self.kappa_mod < mech.kappa_m()
    }
}

pub fn modified_oscillator(
    topology: Topology,
    rates: &CavityRates,
    couplings: &CouplingPair,
    pump: &Pump,
    mech: &MechanicalOscillator,
) -> Result<ModifiedOscillator> {
    let spring = |omega| optical_spring(topology, rates, couplings, pump, mech, omega);
    dress(mech, rates, spring)
}

/// As [`modified_oscillator`], with the spring taken from normalized couplings.
pub fn modified_oscillator_normalized(
    topology: Topology,
    rates: &CavityRates,
    nc: &NormalizedCouplings,
    mech: &MechanicalOscillator,
) -> Result<ModifiedOscillator> {
    let spring = |omega| optical_spring_normalized(topology, rates, nc, omega);
    dress(mech, rates, spring)
}

// First pass at omega_m, one refinement at the resulting omega_M.
fn dress(
    mech: &MechanicalOscillator,
    rates: &CavityRates,
    spring: impl Fn(f64) -> Complex64,
) -> Result<ModifiedOscillator> {
    let wm2 = mech.omega_m * mech.omega_m;
    let first = wm2 + spring(mech.omega_m).re;
    if first <= 0.0 {
        return Err(OptomechError::UnstableSpring {
            omega_sq: first,
            kappa: f64::NAN,
        });
    }
    let first = first.sqrt();
    let os = spring(first);
    let omega_sq = wm2 + os.re;
    if omega_sq <= 0.0 {
        return Err(OptomechError::UnstableSpring {
            omega_sq,
            kappa: f64::NAN,
        });
    }
    let omega_mod = omega_sq.sqrt();
    let kappa_mod = mech.kappa_m() - os.im / omega_mod;
    if kappa_mod <= 0.0 {
        return Err(OptomechError::UnstableSpring {
            omega_sq,
            kappa: kappa_mod,
        });
    }

    let mut warnings = Vec::new();
    let relative_shift = (omega_mod - first).abs() / omega_mod;
    if relative_shift > REFINEMENT_TOLERANCE {
        warnings.push(RegimeWarning::SpringNotConverged { relative_shift });
    }
    let thermal = HBAR * omega_mod / (crate::constants::BOLTZMANN * mech.temperature);
    if thermal > REGIME_THRESHOLD {
        warnings.push(RegimeWarning::LowTemperature { ratio: thermal });
    }
    let line = mech.kappa_m().max(kappa_mod) / mech.omega_m;
    if line > REGIME_THRESHOLD {
        warnings.push(RegimeWarning::BroadMechanicalLine { ratio: line });
    }
    let slow = omega_mod / rates.gamma_plus;
    if slow > REGIME_THRESHOLD {
        warnings.push(RegimeWarning::SlowCavity { ratio: slow });
    }

    Ok(ModifiedOscillator {
        omega_os_sq: os,
        evaluated_at: omega_mod,
        omega_mod,
        kappa_mod,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::SPEED_OF_LIGHT;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn table_one_mech() -> MechanicalOscillator {
        MechanicalOscillator::new(5e-11, 2.0 * PI * 350e3, 1e6, 20.0).unwrap()
    }

    fn pump(power: f64) -> Pump {
        Pump::coherent(power, OpticalCarrier::new(1550e-9).unwrap()).unwrap()
    }

    #[test]
    fn matched_rates() {
        let r = cavity_rates(0.03, 0.03, 3e-10).unwrap();
        assert_eq!(r.gamma0, r.gamma1);
        assert_eq!(r.gamma_minus, 0.0);
    }

    #[test]
    fn recycling_transmission_from_rate() {
        let tau = 2.0 * 0.05 / SPEED_OF_LIGHT;
        let t = CavityRates::transmission_for(2.0 * PI * 1e6, tau);
        assert_relative_eq!(t, 0.0458, max_relative = 1e-3);
        let r = cavity_rates(0.01, t, tau).unwrap();
        assert_relative_eq!(r.gamma1, 2.0 * PI * 1e6, max_relative = 1e-12);
        assert!(cavity_rates(0.0, t, tau).is_err());
        assert!(cavity_rates(0.1, 1.0, tau).is_err());
    }

    #[test]
    fn impedance_matched_srm() {
        let r = CavityRates::from_rates(1e6, 1e6, 3e-10).unwrap();
        let p = pump(0.1);
        let f = mean_fields(Topology::Srm, &r, &p);
        assert_eq!(f.reflected, 0.0);
        assert_relative_eq!(f.output, p.amplitude(), max_relative = 1e-15);
    }

    #[test]
    fn pump_amplitude_inverts_power() {
        let p = pump(0.1);
        let w0 = p.carrier.angular_frequency();
        assert_relative_eq!(HBAR * w0 * p.amplitude().powi(2), 0.1, max_relative = 1e-14);
    }

    #[test]
    fn zero_coupling_springs() {
        let r = CavityRates::from_rates(1e6, 6e6, 3e-10).unwrap();
        let c = CouplingPair { xi: 0.0, eta: 1e8 };
        let s = optical_spring(Topology::Srm, &r, &c, &pump(0.1), &table_one_mech(), 1e6);
        assert_eq!(s.norm(), 0.0);
    }

    #[test]
    fn spring_signs_and_topology_ratio() {
        let r = CavityRates::from_rates(6e5, 6e6, 3e-10).unwrap();
        let c = CouplingPair { xi: 14.0, eta: 7e8 };
        let mech = table_one_mech();
        let p = pump(0.1);
        let srm = optical_spring(Topology::Srm, &r, &c, &p, &mech, mech.omega_m);
        let prm = optical_spring(Topology::Prm, &r, &c, &p, &mech, mech.omega_m);
        // negative rigidity, positive optical damping (-Im/Omega > 0)
        assert!(srm.re < 0.0);
        assert!(-srm.im / mech.omega_m > 0.0);
        let ratio = prm / srm;
        assert_relative_eq!(ratio.re, r.gamma1 / r.gamma0, max_relative = 1e-12);
        assert!(ratio.im.abs() < 1e-12);
    }

    #[test]
    fn normalized_spring_agrees() {
        let r = CavityRates::from_rates(6e5, 6e6, 3e-10).unwrap();
        let c = CouplingPair { xi: 14.0, eta: 7e8 };
        let mech = table_one_mech();
        let p = pump(0.1);
        let nc = normalized_couplings(&c, &p, &mech, &r);
        for top in [Topology::Srm, Topology::Prm] {
            for omega in [0.0, 1e5, 2.2e6, 1e7] {
                let a = optical_spring(top, &r, &c, &p, &mech, omega);
                let b = optical_spring_normalized(top, &r, &nc, omega);
                assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
                assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
            }
        }
        assert_eq!(
            normalized_couplings(&CouplingPair { xi: 0.0, eta: 0.0 }, &p, &mech, &r),
            NormalizedCouplings {
                dissipative: 0.0,
                dispersive: 0.0
            }
        );
    }

    #[test]
    fn zero_pump_leaves_oscillator_bare() {
        let r = CavityRates::from_rates(6e5, 6e6, 3e-10).unwrap();
        let c = CouplingPair { xi: 14.0, eta: 7e8 };
        let mech = table_one_mech();
        let m = modified_oscillator(Topology::Srm, &r, &c, &pump(0.0), &mech).unwrap();
        assert_eq!(m.omega_mod, mech.omega_m);
        assert_eq!(m.kappa_mod, mech.kappa_m());
    }

    #[test]
    fn anti_correlated_couplings_heat() {
        let r = CavityRates::from_rates(6e5, 6e6, 3e-10).unwrap();
        let mech = MechanicalOscillator::new(5e-11, 2.0 * PI * 350e3, 1e3, 20.0).unwrap();
        let c = CouplingPair {
            xi: -1e-3,
            eta: 7e8,
        };
        let m = modified_oscillator(Topology::Srm, &r, &c, &pump(0.1), &mech).unwrap();
        assert!(m.is_heating(&mech));
        // strong enough anti-damping destabilizes the mode
        let c = CouplingPair {
            xi: -14.0,
            eta: 7e8,
        };
        assert!(matches!(
            modified_oscillator(Topology::Srm, &r, &c, &pump(0.1), &mech),
            Err(OptomechError::UnstableSpring { .. })
        ));
    }

    #[test]
    fn refinement_warning_reported() {
        // omega_M comparable to gamma_+ violates the slow-mechanics assumption
        let r = CavityRates::from_rates(6e5, 6e6, 3e-10).unwrap();
        let c = CouplingPair { xi: 14.0, eta: 7e8 };
        let mech = table_one_mech();
        let m = modified_oscillator(Topology::Srm, &r, &c, &pump(0.1), &mech).unwrap();
        assert!(m
            .warnings
            .iter()
            .any(|w| matches!(w, RegimeWarning::SlowCavity { .. })));
        assert!(m.kappa_mod > mech.kappa_m());
        assert!(m.omega_mod < mech.omega_m);
    }
}
