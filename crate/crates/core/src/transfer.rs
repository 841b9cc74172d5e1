//! Linearized input-output relations at a single sideband frequency.
//!
//! Inputs are the amplitude/phase quadratures of the pump port (`b`), the
//! signal port (`c`) and the thermal force `F_T` in newtons. Optical
//! quadratures are normalized so that vacuum has unit spectral density.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::Topology;
use crate::constants::HBAR;
use crate::model::{OperatingState, SqueezeAngle, Susceptibility};

/// Complex coefficients of one output against each input at one `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferRow {
    pub b_amplitude: Complex64,
    pub b_phase: Complex64,
    pub c_amplitude: Complex64,
    pub c_phase: Complex64,
    /// Coefficient on the thermal force, per newton.
    pub thermal: Complex64,
}

impl TransferRow {
    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            b_amplitude: z,
            b_phase: z,
            c_amplitude: z,
            c_phase: z,
            thermal: z,
        }
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self {
            b_amplitude: self.b_amplitude * k,
            b_phase: self.b_phase * k,
            c_amplitude: self.c_amplitude * k,
            c_phase: self.c_phase * k,
            thermal: self.thermal * k,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            b_amplitude: self.b_amplitude + o.b_amplitude,
            b_phase: self.b_phase + o.b_phase,
            c_amplitude: self.c_amplitude + o.c_amplitude,
            c_phase: self.c_phase + o.c_phase,
            thermal: self.thermal + o.thermal,
        }
    }

    pub fn b_port(&self) -> [Complex64; 2] {
        [self.b_amplitude, self.b_phase]
    }

    pub fn c_port(&self) -> [Complex64; 2] {
        [self.c_amplitude, self.c_phase]
    }

    /// Projection of the signal-port coefficients onto the quadrature at `angle`.
    pub fn c_projection(&self, angle: f64) -> Complex64 {
        self.c_amplitude * angle.cos() + self.c_phase * angle.sin()
    }
}

/// Symmetric covariance of one port's (amplitude, phase) quadratures, vacuum = identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortCovariance(pub [[f64; 2]; 2]);

impl PortCovariance {
    pub fn vacuum() -> Self {
        Self([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn diagonal(amplitude: f64, phase: f64) -> Self {
        Self([[amplitude, 0.0], [0.0, phase]])
    }

    /// Ellipse with spectral density `10^(db/10)` along `angle` and the
    /// reciprocal along the orthogonal quadrature.
    pub fn squeezed(db: f64, angle: f64) -> Self {
        let s = 10f64.powf(db / 10.0);
        let (sn, cs) = angle.sin_cos();
        let (a, b) = (s, 1.0 / s);
        Self([
            [a * cs * cs + b * sn * sn, (a - b) * cs * sn],
            [(a - b) * cs * sn, a * sn * sn + b * cs * cs],
        ])
    }

    /// `k^dagger V k`.
    pub fn quadratic_form(&self, k: [Complex64; 2]) -> f64 {
        let v = &self.0;
        let mut acc = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                acc += v[i][j] * (k[i].conj() * k[j]).re;
            }
        }
        acc
    }
}

/// Spectral densities of every input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputNoise {
    pub b_port: PortCovariance,
    pub c_port: PortCovariance,
    /// One-sided thermal force PSD, N^2/Hz.
    pub thermal_force_psd: f64,
}

impl InputNoise {
    /// Inputs implied by the state's configuration.
    pub fn from_state(state: &OperatingState) -> Self {
        let p = &state.params;
        let angle = match p.squeeze.angle {
            SqueezeAngle::BackAction => state.back_action_angle(),
            SqueezeAngle::Fixed(a) => a,
        };
        Self {
            b_port: PortCovariance::diagonal(p.excess_amplitude, p.excess_phase),
            c_port: PortCovariance::squeezed(p.squeeze.db, angle),
            thermal_force_psd: thermal_force_psd(state),
        }
    }

    /// Vacuum optical inputs with the bath at the configured temperature.
    pub fn vacuum(state: &OperatingState) -> Self {
        Self {
            b_port: PortCovariance::vacuum(),
            c_port: PortCovariance::vacuum(),
            thermal_force_psd: thermal_force_psd(state),
        }
    }

    pub fn without_thermal(mut self) -> Self {
        self.thermal_force_psd = 0.0;
        self
    }
}

/// `S_FT = 4 m kappa_m k_B T0`.
pub fn thermal_force_psd(state: &OperatingState) -> f64 {
    let m = &state.mechanics;
    4.0 * m.mass * m.kappa_m() * crate::constants::BOLTZMANN * m.temperature
}

/// Mechanical impedance `Z(Omega)` per unit mass.
pub fn susceptibility(state: &OperatingState, omega: f64) -> Complex64 {
    let mech = &state.mechanics;
    match state.params.susceptibility {
        Susceptibility::Dynamic => {
            let spring = crate::cavity::optical_spring_normalized(
                state.topology(),
                &state.rates,
                &state.normalized,
                omega,
            );
            Complex64::new(
                mech.omega_m * mech.omega_m - omega * omega,
                -omega * mech.kappa_m(),
            ) + spring
        }
        Susceptibility::Resonant => {
            let o = &state.oscillator;
            Complex64::new(
                o.omega_mod * o.omega_mod - omega * omega,
                -omega * o.kappa_mod,
            )
        }
    }
}

/// Fluctuating force on the membrane (newtons) plus the thermal force.
pub fn back_action_force(state: &OperatingState, omega: f64) -> TransferRow {
    let r = &state.rates;
    let (g0, g1, gp) = (r.gamma0, r.gamma1, r.gamma_plus);
    let (x, h) = (state.normalized.dissipative, state.normalized.dispersive);
    let m = state.mechanics.mass;
    let den = Complex64::new(gp, -omega);
    let i_omega = Complex64::new(0.0, omega);
    let one = Complex64::new(1.0, 0.0);
    match state.topology() {
        Topology::Srm => {
            let pre = -(HBAR * m).sqrt() * g0 * gp / den;
            let ratio = (g1 / g0).sqrt();
            TransferRow {
                b_amplitude: pre * h,
                b_phase: pre * x * i_omega / gp,
                c_amplitude: pre * h * ratio,
                c_phase: pre * x * ratio,
                thermal: one,
            }
        }
        Topology::Prm => {
            let pre = (HBAR * m * g1).sqrt();
            TransferRow {
                b_amplitude: -pre * h * gp * g1.sqrt() / den,
                b_phase: Complex64::new(0.0, 0.0),
                c_amplitude: -pre * h * gp * g0.sqrt() / den,
                c_phase: Complex64::new(pre * x * g0.sqrt(), 0.0),
                thermal: one,
            }
        }
    }
}

/// Membrane displacement (meters) against every input.
pub fn displacement_transfer(state: &OperatingState, omega: f64) -> TransferRow {
    let z = susceptibility(state, omega);
    back_action_force(state, omega).scale(1.0 / (state.mechanics.mass * z))
}

/// Optical path from inputs to the homodyne quadrature at `theta` without the membrane.
pub fn direct_output(state: &OperatingState, theta: f64, omega: f64) -> TransferRow {
    let r = &state.rates;
    let den = Complex64::new(r.gamma_plus, -omega);
    let through = (r.gamma0 * r.gamma1).sqrt() / den;
    let reflect = match state.topology() {
        Topology::Srm => Complex64::new(r.gamma_minus, omega) / den,
        Topology::Prm => Complex64::new(-r.gamma_minus, omega) / den,
    };
    let (s, c) = theta.sin_cos();
    TransferRow {
        b_amplitude: through * c,
        b_phase: through * s,
        c_amplitude: reflect * c,
        c_phase: reflect * s,
        thermal: Complex64::new(0.0, 0.0),
    }
}

/// Readout gain of the quadrature at `theta` to membrane displacement, per meter.
pub fn displacement_gain(state: &OperatingState, theta: f64, omega: f64) -> Complex64 {
    let r = &state.rates;
    let (x, h) = (state.normalized.dissipative, state.normalized.dispersive);
    let den = Complex64::new(r.gamma_plus, -omega);
    let pre = (state.mechanics.mass / HBAR).sqrt() * (r.gamma0 * r.gamma1).sqrt() / den;
    let (s, c) = theta.sin_cos();
    let dissipative = match state.topology() {
        Topology::Srm => Complex64::new(r.gamma_minus, 0.0),
        Topology::Prm => Complex64::new(r.gamma_minus, -omega),
    };
    pre * (dissipative * x * c - r.gamma_plus * h * s)
}

/// Output quadrature `c_1theta` against every input.
pub fn output_quadrature_transfer(state: &OperatingState, theta: f64, omega: f64) -> TransferRow {
    let g = displacement_gain(state, theta, omega);
    direct_output(state, theta, omega).add(&displacement_transfer(state, omega).scale(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use approx::assert_relative_eq;

    #[test]
    fn squeezed_covariance_is_pure() {
        let v = PortCovariance::squeezed(-6.0, 0.3).0;
        let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
        assert_relative_eq!(det, 1.0, epsilon = 1e-12);
        let k = [
            Complex64::new(0.3f64.cos(), 0.0),
            Complex64::new(0.3f64.sin(), 0.0),
        ];
        assert_relative_eq!(
            PortCovariance::squeezed(-6.0, 0.3).quadratic_form(k),
            10f64.powf(-0.6),
            max_relative = 1e-12
        );
    }

    #[test]
    fn optical_path_is_unitary() {
        let mut p = SystemParams::table_one();
        for top in [Topology::Srm, Topology::Prm] {
            p.topology = top;
            let s = p.resolve().unwrap();
            for omega in [0.0, 1e5, 3e6, 4e7] {
                let row = direct_output(&s, 0.4, omega);
                let total: f64 = [row.b_amplitude, row.b_phase, row.c_amplitude, row.c_phase]
                    .iter()
                    .map(|k| k.norm_sqr())
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn resonant_susceptibility_matches_dressed_mode() {
        let mut p = SystemParams::table_one();
        p.susceptibility = Susceptibility::Resonant;
        let s = p.resolve().unwrap();
        let z = susceptibility(&s, s.oscillator.omega_mod);
        assert!(z.re.abs() < 1e-3);
        assert_relative_eq!(
            -z.im,
            s.oscillator.omega_mod * s.oscillator.kappa_mod,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bare_oscillator_displacement() {
        let mut p = SystemParams::table_one();
        p.power = 0.0;
        let s = p.resolve().unwrap();
        let omega = 2.0e6;
        let row = displacement_transfer(&s, omega);
        assert_eq!(row.c_amplitude.norm(), 0.0);
        let expected = 1.0
            / (s.mechanics.mass
                * Complex64::new(
                    s.mechanics.omega_m.powi(2) - omega * omega,
                    -omega * s.mechanics.kappa_m(),
                ));
        assert_relative_eq!(
            (row.thermal - expected).norm() / expected.norm(),
            0.0,
            epsilon = 1e-12
        );
    }
}
