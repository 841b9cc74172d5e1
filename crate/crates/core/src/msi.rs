//! The Michelson-Sagnac interferometer reduced to a single generalized
//! mirror, and the optomechanical coupling coefficients that follow from
//! its dependence on the membrane position.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{ensure, OptomechError, Result};

/// Lossless partially transmissive membrane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    r: f64,
    t: f64,
}

impl MirrorSpec {
    /// Builds the membrane from its power reflectivity `r_m^2`.
    pub fn from_power_reflectivity(power_reflectivity: f64) -> Result<Self> {
        ensure(
            (0.0..=1.0).contains(&power_reflectivity),
            "power_reflectivity",
            power_reflectivity,
            "must lie in [0, 1]",
        )?;
        Ok(Self {
            r: power_reflectivity.sqrt(),
            t: (1.0 - power_reflectivity).sqrt(),
        })
    }

    /// Amplitude reflectivity `r_m`.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Amplitude transmissivity `t_m`.
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn power_reflectivity(&self) -> f64 {
        self.r * self.r
    }
}

/// Central beam splitter, parameterized by its imbalance `epsilon = r_BS^2 - t_BS^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec {
    epsilon: f64,
}

impl BeamSplitterSpec {
    pub fn new(epsilon: f64) -> Result<Self> {
        ensure(
            epsilon.is_finite() && epsilon > -1.0 && epsilon < 1.0,
            "epsilon",
            epsilon,
            "beam-splitter imbalance must lie in (-1, 1)",
        )?;
        Ok(Self { epsilon })
    }

    pub fn balanced() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn power_reflectivity(&self) -> f64 {
        0.5 * (1.0 + self.epsilon)
    }

    pub fn power_transmissivity(&self) -> f64 {
        0.5 * (1.0 - self.epsilon)
    }

    /// `sqrt(1 - epsilon^2) = 2 r_BS t_BS`.
    pub fn interference_factor(&self) -> f64 {
        (1.0 - self.epsilon * self.epsilon).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalCarrier {
    wavelength: f64,
}

impl OpticalCarrier {
    pub fn new(wavelength: f64) -> Result<Self> {
        ensure(
            wavelength.is_finite() && wavelength > 0.0,
            "wavelength",
            wavelength,
            "must be positive",
        )?;
        Ok(Self { wavelength })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Angular frequency `omega_0 = 2 pi c / lambda`.
    pub fn angular_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Wavenumber `k = omega_0 / c`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// Mean membrane offset `x0` from the symmetric position.
///
/// The interferometer phase `2 k x0` is carried alongside `x0` as an exact
/// (sin, cos) pair. Operating points produced by the solver keep the
/// algebraic values instead of a lossy `asin`/`sin` round trip, which is what
/// lets the boundary `cos 2kx0 = 0` be represented exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsiOperatingPoint {
    x0: f64,
    sin_phase: f64,
    cos_phase: f64,
}

impl MsiOperatingPoint {
    pub fn from_displacement(x0: f64, carrier: &OpticalCarrier) -> Self {
        let (sin_phase, cos_phase) = (2.0 * carrier.wavenumber() * x0).sin_cos();
        Self {
            x0,
            sin_phase,
            cos_phase,
        }
    }

    /// Operating point at interferometer phase `2 k x0 = phase`.
    pub fn from_phase(phase: f64, carrier: &OpticalCarrier) -> Self {
        let (sin_phase, cos_phase) = phase.sin_cos();
        Self {
            x0: phase / (2.0 * carrier.wavenumber()),
            sin_phase,
            cos_phase,
        }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// `2 k x0` reduced to (-pi, pi].
    pub fn phase(&self) -> f64 {
        self.sin_phase.atan2(self.cos_phase)
    }

    pub fn sin_phase(&self) -> f64 {
        self.sin_phase
    }

    pub fn cos_phase(&self) -> f64 {
        self.cos_phase
    }

    /// The operating point moved by `dx`, using angle addition on the cached phase.
    pub fn shifted(&self, dx: f64, carrier: &OpticalCarrier) -> Self {
        let (sd, cd) = (2.0 * carrier.wavenumber() * dx).sin_cos();
        Self {
            x0: self.x0 + dx,
            sin_phase: self.sin_phase * cd + self.cos_phase * sd,
            cos_phase: self.cos_phase * cd - self.sin_phase * sd,
        }
    }
}

/// Amplitude transmission (real) and reflection (complex) of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedMirror {
    pub transmission: f64,
    pub reflection: Complex64,
}

impl GeneralizedMirror {
    /// `T^2 + |R|^2`, identically one for a lossless membrane.
    pub fn power_sum(&self) -> f64 {
        self.transmission * self.transmission + self.reflection.norm_sqr()
    }
}

/// Dispersive (`xi`) and dissipative (`eta`) coupling coefficients, both in 1/m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingPair {
    pub xi: f64,
    pub eta: f64,
}

impl CouplingPair {
    pub fn product(&self) -> f64 {
        self.xi * self.eta
    }
}

/// Below this |T_msi| the dissipative coupling is treated as undefined.
pub const DEGENERATE_TRANSMISSION: f64 = 1e-9;

/// Relative slack allowed on |sin 2kx0| = 1 before the point is declared
/// unreachable; inside the slack the phase snaps onto the boundary.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Default finite-difference step for [`couplings_by_derivative`], metres.
pub const DEFAULT_FD_STEP: f64 = 1e-15;

pub fn generalized_mirror(
    mirror: &MirrorSpec,
    bs: &BeamSplitterSpec,
    op: &MsiOperatingPoint,
    _carrier: &OpticalCarrier,
) -> GeneralizedMirror {
    let (s, c) = (op.sin_phase, op.cos_phase);
    let eps = bs.epsilon();
    let root = bs.interference_factor();
    GeneralizedMirror {
        transmission: mirror.r * root * s - mirror.t * eps,
        reflection: Complex64::new(mirror.r * c, mirror.r * eps * s + mirror.t * root),
    }
}

/// Closed-form coupling coefficients for effective cavity length
/// `effective_length`.
pub fn couplings_closed_form(
    mirror: &MirrorSpec,
    bs: &BeamSplitterSpec,
    op: &MsiOperatingPoint,
    carrier: &OpticalCarrier,
    effective_length: f64,
) -> Result<CouplingPair> {
    ensure(
        effective_length > 0.0,
        "effective_length",
        effective_length,
        "must be positive",
    )?;
    let gm = generalized_mirror(mirror, bs, op, carrier);
    check_transmission(gm.transmission)?;
    let eps = bs.epsilon();
    let xi = (mirror.t * gm.transmission + eps) / (effective_length * gm.reflection.norm_sqr());
    let eta = 4.0 * carrier.wavenumber() * mirror.r * bs.interference_factor() * op.cos_phase
        / gm.transmission;
    Ok(CouplingPair { xi, eta })
}

/// Coupling coefficients from their defining derivatives
/// `eta = 2 dT/dx / T` and `xi = Im(dR/dx / R) / (omega_0 tau)`, evaluated by
/// Richardson-extrapolated central differences with steps `step` and `2 step`.
pub fn couplings_by_derivative(
    mirror: &MirrorSpec,
    bs: &BeamSplitterSpec,
    op: &MsiOperatingPoint,
    carrier: &OpticalCarrier,
    tau: f64,
    step: f64,
) -> Result<CouplingPair> {
    ensure(tau > 0.0, "tau", tau, "must be positive")?;
    ensure(step > 0.0, "step", step, "must be positive")?;
    let centre = generalized_mirror(mirror, bs, op, carrier);
    check_transmission(centre.transmission)?;

    let central = |h: f64| {
        let plus = generalized_mirror(mirror, bs, &op.shifted(h, carrier), carrier);
        let minus = generalized_mirror(mirror, bs, &op.shifted(-h, carrier), carrier);
        (
            (plus.transmission - minus.transmission) / (2.0 * h),
            (plus.reflection - minus.reflection) / (2.0 * h),
        )
    };
    let (dt1, dr1) = central(step);
    let (dt2, dr2) = central(2.0 * step);
    let dt = (4.0 * dt1 - dt2) / 3.0;
    let dr = (4.0 * dr1 - dr2) / 3.0;

    let eta = 2.0 * dt / centre.transmission;
    let xi = (dr / centre.reflection).im / (carrier.angular_frequency() * tau);
    Ok(CouplingPair { xi, eta })
}

/// Finds the membrane offset at which the interferometer transmits
/// `target_transmission`, on the branch `cos 2kx0 >= 0`.
pub fn solve_operating_point(
    target_transmission: f64,
    mirror: &MirrorSpec,
    bs: &BeamSplitterSpec,
    carrier: &OpticalCarrier,
) -> Result<MsiOperatingPoint> {
    let arg = sine_argument(target_transmission, mirror, bs);
    if !arg.is_finite() || arg.abs() > 1.0 + BOUNDARY_SLACK {
        return Err(OptomechError::Unsolvable {
            target: target_transmission,
            sine_argument: arg,
        });
    }
    let (sin_phase, cos_phase) = if arg.abs() >= 1.0 - BOUNDARY_SLACK {
        (arg.signum(), 0.0)
    } else {
        (arg, (1.0 - arg * arg).sqrt())
    };
    let phase = sin_phase.atan2(cos_phase);
    Ok(MsiOperatingPoint {
        x0: phase / (2.0 * carrier.wavenumber()),
        sin_phase,
        cos_phase,
    })
}

/// Solves the operating point for `target_transmission` and returns it with
/// the closed-form couplings there. An unreachable transmission is reported
/// as [`OptomechError::ImaginaryEta`]: along this path it means the
/// imbalance exceeds its maximum and `cos 2kx0` has no real value.
pub fn couplings_at_transmission(
    target_transmission: f64,
    mirror: &MirrorSpec,
    bs: &BeamSplitterSpec,
    carrier: &OpticalCarrier,
    effective_length: f64,
) -> Result<(MsiOperatingPoint, CouplingPair)> {
    let op =
        solve_operating_point(target_transmission, mirror, bs, carrier).map_err(|e| match e {
            OptomechError::Unsolvable { sine_argument, .. } => OptomechError::ImaginaryEta {
                sine_argument,
                epsilon: bs.epsilon(),
            },
            other => other,
        })?;
    let couplings = couplings_closed_form(mirror, bs, &op, carrier, effective_length)?;
    Ok((op, couplings))
}

fn sine_argument(target: f64, mirror: &MirrorSpec, bs: &BeamSplitterSpec) -> f64 {
    (target + mirror.t * bs.epsilon()) / (mirror.r * bs.interference_factor())
}

fn check_transmission(t: f64) -> Result<()> {
    if t.abs() < DEGENERATE_TRANSMISSION || !t.is_finite() {
        Err(OptomechError::DegenerateOperatingPoint {
            transmission: t,
            threshold: DEGENERATE_TRANSMISSION,
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_4;

    fn carrier() -> OpticalCarrier {
        OpticalCarrier::new(1550e-9).unwrap()
    }

    #[test]
    fn dark_fringe_balanced() {
        let m = MirrorSpec::from_power_reflectivity(0.7).unwrap();
        let op = MsiOperatingPoint::from_displacement(0.0, &carrier());
        let gm = generalized_mirror(&m, &BeamSplitterSpec::balanced(), &op, &carrier());
        assert_eq!(gm.transmission, 0.0);
        assert_relative_eq!(gm.reflection.re, m.r(), max_relative = 1e-15);
        assert_relative_eq!(gm.reflection.im, m.t(), max_relative = 1e-15);
        assert_relative_eq!(gm.reflection.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn full_transmission_point() {
        let m = MirrorSpec::from_power_reflectivity(1.0).unwrap();
        let op = MsiOperatingPoint::from_phase(std::f64::consts::FRAC_PI_2, &carrier());
        let gm = generalized_mirror(&m, &BeamSplitterSpec::balanced(), &op, &carrier());
        assert_relative_eq!(gm.transmission, 1.0, epsilon = 1e-15);
        assert!(gm.reflection.norm() < 1e-15);
    }

    #[test]
    fn beam_splitter_power_split() {
        let bs = BeamSplitterSpec::new(0.7).unwrap();
        assert_eq!(bs.power_reflectivity() + bs.power_transmissivity(), 1.0);
        assert!(BeamSplitterSpec::new(1.0).is_err());
        assert!(BeamSplitterSpec::new(-1.0).is_err());
        assert!(MirrorSpec::from_power_reflectivity(1.2).is_err());
    }

    #[test]
    fn carrier_wavenumber() {
        let c = carrier();
        assert_relative_eq!(
            c.wavenumber() * c.wavelength(),
            2.0 * PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            c.angular_frequency() / SPEED_OF_LIGHT,
            c.wavenumber(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn pure_dissipative_limit() {
        let m = MirrorSpec::from_power_reflectivity(1.0).unwrap();
        let c = carrier();
        let op = MsiOperatingPoint::from_phase(FRAC_PI_4, &c);
        let bs = BeamSplitterSpec::balanced();
        let cp = couplings_closed_form(&m, &bs, &op, &c, 0.05).unwrap();
        assert_eq!(cp.xi, 0.0);
        assert_relative_eq!(cp.eta, 4.0 * c.wavenumber(), max_relative = 1e-12);

        let tau = 2.0 * 0.05 / SPEED_OF_LIGHT;
        let fd = couplings_by_derivative(&m, &bs, &op, &c, tau, DEFAULT_FD_STEP).unwrap();
        assert!(fd.xi.abs() < 1e-9);
        assert_relative_eq!(fd.eta, cp.eta, max_relative = 1e-6);
    }

    #[test]
    fn finite_difference_matches_closed_form() {
        let m = MirrorSpec::from_power_reflectivity(0.98).unwrap();
        let bs = BeamSplitterSpec::new(0.7).unwrap();
        let c = carrier();
        let length = 0.05;
        let tau = 2.0 * length / SPEED_OF_LIGHT;
        let op = solve_operating_point(0.01445, &m, &bs, &c).unwrap();
        let cf = couplings_closed_form(&m, &bs, &op, &c, length).unwrap();
        let fd = couplings_by_derivative(&m, &bs, &op, &c, tau, DEFAULT_FD_STEP).unwrap();
        assert_relative_eq!(fd.eta, cf.eta, max_relative = 1e-6);
        assert_relative_eq!(fd.xi, cf.xi, max_relative = 1e-6);
        // xi ~ epsilon / L for the strongly unbalanced splitter
        assert!(cf.xi > 0.9 * 0.7 / length);
    }

    #[test]
    fn dark_fringe_is_degenerate() {
        let m = MirrorSpec::from_power_reflectivity(0.98).unwrap();
        let c = carrier();
        let op = MsiOperatingPoint::from_displacement(0.0, &c);
        let bs = BeamSplitterSpec::balanced();
        let tau = 2.0 * 0.05 / SPEED_OF_LIGHT;
        assert!(matches!(
            couplings_by_derivative(&m, &bs, &op, &c, tau, DEFAULT_FD_STEP),
            Err(OptomechError::DegenerateOperatingPoint { .. })
        ));
        assert!(matches!(
            couplings_closed_form(&m, &bs, &op, &c, 0.05),
            Err(OptomechError::DegenerateOperatingPoint { .. })
        ));
    }

    #[test]
    fn solve_round_trip() {
        let m = MirrorSpec::from_power_reflectivity(0.98).unwrap();
        let c = carrier();

        let zero = solve_operating_point(0.0, &m, &BeamSplitterSpec::balanced(), &c).unwrap();
        assert_eq!(zero.x0(), 0.0);

        // gamma0 / 2pi = 100 kHz with a 5 cm cavity
        let tau = 2.0 * 0.05 / SPEED_OF_LIGHT;
        assert_relative_eq!(tau, 3.3356e-10, max_relative = 1e-4);
        let target = (2.0 * PI * 1e5 * tau).sqrt();
        assert_relative_eq!(target, 0.01448, max_relative = 1e-3);
        let bs = BeamSplitterSpec::new(0.7).unwrap();
        let op = solve_operating_point(target, &m, &bs, &c).unwrap();
        assert!(op.cos_phase() >= 0.0);
        let gm = generalized_mirror(&m, &bs, &op, &c);
        assert!((gm.transmission - target).abs() < 1e-12);
        // the cached phase agrees with recomputing it from x0
        let fresh = MsiOperatingPoint::from_displacement(op.x0(), &c);
        assert!((fresh.sin_phase() - op.sin_phase()).abs() < 1e-12);
    }

    #[test]
    fn unreachable_target() {
        let m = MirrorSpec::from_power_reflectivity(0.98).unwrap();
        let bs = BeamSplitterSpec::new(0.3).unwrap();
        let scale = m.r() * bs.interference_factor();
        let target = 1.0001 * scale - m.t() * bs.epsilon();
        assert!(matches!(
            solve_operating_point(target, &m, &bs, &carrier()),
            Err(OptomechError::Unsolvable { .. })
        ));
        assert!(matches!(
            couplings_at_transmission(target, &m, &bs, &carrier(), 0.05),
            Err(OptomechError::ImaginaryEta { .. })
        ));
    }

    #[test]
    fn negative_imbalance_supported() {
        let m = MirrorSpec::from_power_reflectivity(0.9).unwrap();
        let bs = BeamSplitterSpec::new(-0.4).unwrap();
        let c = carrier();
        let (op, cp) = couplings_at_transmission(0.02, &m, &bs, &c, 0.1).unwrap();
        let tau = 2.0 * 0.1 / SPEED_OF_LIGHT;
        let fd = couplings_by_derivative(&m, &bs, &op, &c, tau, DEFAULT_FD_STEP).unwrap();
        assert!(cp.xi < 0.0);
        assert_relative_eq!(fd.xi, cp.xi, max_relative = 1e-6);
        assert_relative_eq!(fd.eta, cp.eta, max_relative = 1e-6);
    }
}
