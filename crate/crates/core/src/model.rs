//! Full system configuration and its resolved operating state.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cavity::{
    mean_fields, modified_oscillator, normalized_couplings, CavityRates, MeanFields,
    MechanicalOscillator, ModifiedOscillator, NormalizedCouplings, Pump, Topology,
};
use crate::constants::SPEED_OF_LIGHT;
use crate::error::{ensure, Result};
use crate::msi::{
    couplings_at_transmission, BeamSplitterSpec, CouplingPair, MirrorSpec, MsiOperatingPoint,
    OpticalCarrier,
};
use crate::optimize::{epsilon_max, epsilon_opt};

/// How the beam-splitter imbalance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EpsilonChoice {
    Fixed(f64),
    /// Maximizes the optical damping at the configured `gamma0`.
    Optimal,
    /// Largest imbalance with a real operating point; the dissipative coupling vanishes.
    Maximal,
}

/// Mechanical susceptibility used to propagate forces to displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Susceptibility {
    /// `omega_m^2 + omega_os^2(Omega) - Omega^2 - i Omega kappa_m`, frequency-dependent spring.
    Dynamic,
    /// `omega_M^2 - Omega^2 - i Omega kappa_M` with the scalar dressed oscillator.
    Resonant,
}

/// Orientation of the squeezed ellipse injected at the signal port.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SqueezeAngle {
    /// Aligned with the quadrature of C that drives the back-action force.
    BackAction,
    /// Explicit angle in radians from the amplitude quadrature.
    Fixed(f64),
}

/// Signal-port squeezing. Negative `db` squeezes the quadrature at `angle`,
/// positive `db` anti-squeezes it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeSpec {
    pub db: f64,
    pub angle: SqueezeAngle,
}

impl SqueezeSpec {
    pub fn vacuum() -> Self {
        Self {
            db: 0.0,
            angle: SqueezeAngle::BackAction,
        }
    }
}

/// Every input needed to build the linearized system, in SI units (rates in rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub topology: Topology,
    pub power_reflectivity: f64,
    pub epsilon: EpsilonChoice,
    pub wavelength: f64,
    /// Length entering the dispersive coupling and the round trip `tau = 2 L / c`.
    pub effective_length: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub power: f64,
    pub mass: f64,
    pub omega_m: f64,
    pub quality: f64,
    pub temperature: f64,
    pub squeeze: SqueezeSpec,
    pub excess_amplitude: f64,
    pub excess_phase: f64,
    pub susceptibility: Susceptibility,
}

impl SystemParams {
    /// Table-top SiN membrane setup.
    pub fn table_one() -> Self {
        Self {
            topology: Topology::Srm,
            power_reflectivity: 0.98,
            epsilon: EpsilonChoice::Optimal,
            wavelength: 1550e-9,
            effective_length: 0.10,
            gamma0: 2.0 * PI * 1e5,
            gamma1: 2.0 * PI * 1e6,
            power: 0.1,
            mass: 50e-12,
            omega_m: 2.0 * PI * 350e3,
            quality: 1e6,
            temperature: 20.0,
            squeeze: SqueezeSpec::vacuum(),
            excess_amplitude: 1.0,
            excess_phase: 1.0,
            susceptibility: Susceptibility::Dynamic,
        }
    }

    pub fn tau(&self) -> f64 {
        2.0 * self.effective_length / SPEED_OF_LIGHT
    }

    pub fn mirror(&self) -> Result<MirrorSpec> {
        MirrorSpec::from_power_reflectivity(self.power_reflectivity)
    }

    pub fn carrier(&self) -> Result<OpticalCarrier> {
        OpticalCarrier::new(self.wavelength)
    }

    pub fn mechanics(&self) -> Result<MechanicalOscillator> {
        MechanicalOscillator::new(self.mass, self.omega_m, self.quality, self.temperature)
    }

    /// Imbalance implied by [`Self::epsilon`] at the configured `gamma0`.
    pub fn resolve_epsilon(&self) -> Result<f64> {
        let mirror = self.mirror()?;
        let g0tau = self.gamma0 * self.tau();
        Ok(match self.epsilon {
            EpsilonChoice::Fixed(e) => e,
            EpsilonChoice::Optimal => epsilon_opt(&mirror, g0tau)?,
            EpsilonChoice::Maximal => epsilon_max(&mirror, g0tau)?,
        })
    }

    pub fn resolve(&self) -> Result<OperatingState> {
        OperatingState::new(self.clone())
    }
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::table_one()
    }
}

/// A configured system with every derived quantity evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingState {
    pub params: SystemParams,
    pub carrier: OpticalCarrier,
    pub mirror: MirrorSpec,
    pub beam_splitter: BeamSplitterSpec,
    pub operating_point: MsiOperatingPoint,
    pub couplings: CouplingPair,
    pub rates: CavityRates,
    pub pump: Pump,
    pub mechanics: MechanicalOscillator,
    pub normalized: NormalizedCouplings,
    pub oscillator: ModifiedOscillator,
    pub mean_fields: MeanFields,
}

impl OperatingState {
    pub fn new(params: SystemParams) -> Result<Self> {
        ensure(
            params.effective_length > 0.0,
            "effective_length",
            params.effective_length,
            "must be positive",
        )?;
        let tau = params.tau();
        let rates = CavityRates::from_rates(params.gamma0, params.gamma1, tau)?;
        let t_msi = CavityRates::transmission_for(params.gamma0, tau);
        let t_rec = CavityRates::transmission_for(params.gamma1, tau);
        ensure(
            t_msi < 1.0,
            "gamma0",
            params.gamma0,
            "implies MSI transmission >= 1",
        )?;
        ensure(
            t_rec < 1.0,
            "gamma1",
            params.gamma1,
            "implies mirror transmission >= 1",
        )?;

        let carrier = params.carrier()?;
        let mirror = params.mirror()?;
        let mechanics = params.mechanics()?;
        let pump = Pump::with_excess(
            params.power,
            carrier,
            params.excess_amplitude,
            params.excess_phase,
        )?;
        let beam_splitter = BeamSplitterSpec::new(params.resolve_epsilon()?)?;
        let (operating_point, couplings) = couplings_at_transmission(
            t_msi,
            &mirror,
            &beam_splitter,
            &carrier,
            params.effective_length,
        )?;
        let normalized = normalized_couplings(&couplings, &pump, &mechanics, &rates);
        let oscillator =
            modified_oscillator(params.topology, &rates, &couplings, &pump, &mechanics)?;
        let mean_fields = mean_fields(params.topology, &rates, &pump);
        Ok(Self {
            params,
            carrier,
            mirror,
            beam_splitter,
            operating_point,
            couplings,
            rates,
            pump,
            mechanics,
            normalized,
            oscillator,
            mean_fields,
        })
    }

    pub fn topology(&self) -> Topology {
        self.params.topology
    }

    pub fn epsilon(&self) -> f64 {
        self.beam_splitter.epsilon()
    }

    /// Angle of the signal-port quadrature that drives the back-action force
    /// at low frequency: `chi` for SRM, `beta + pi/2` for PRM.
    pub fn back_action_angle(&self) -> f64 {
        let (x, h) = (self.normalized.dissipative, self.normalized.dispersive);
        match self.topology() {
            Topology::Srm => x.atan2(h),
            Topology::Prm => h.atan2(x) + PI / 2.0,
        }
    }
}
