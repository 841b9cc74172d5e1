//! Shot-normalized homodyne spectra, radiation-pressure noise and occupancy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::Topology;
use crate::constants::{BOLTZMANN, HBAR};
use crate::error::{OptomechError, Result};
use crate::model::OperatingState;
use crate::transfer::{
    back_action_force, direct_output, displacement_gain, output_quadrature_transfer,
    susceptibility, InputNoise,
};

/// One-sided shot-normalized spectral densities at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetPoint {
    pub omega: f64,
    /// Direct optical path of both ports, weighted by their input spectra.
    pub shot: f64,
    /// Back action of the signal port and its correlation with the direct path.
    pub qrpn_c: f64,
    /// Same for the pump port.
    pub laser_b: f64,
    pub thermal: f64,
    pub total: f64,
}

impl BudgetPoint {
    /// Everything the signal port contributes, direct path included.
    pub fn c_only(&self, state: &OperatingState, theta: f64, noise: &InputNoise) -> f64 {
        noise
            .c_port
            .quadratic_form(direct_output(state, theta, self.omega).c_port())
            + self.qrpn_c
    }
}

pub fn budget_point(
    state: &OperatingState,
    theta: f64,
    noise: &InputNoise,
    omega: f64,
) -> BudgetPoint {
    let direct = direct_output(state, theta, omega);
    let row = output_quadrature_transfer(state, theta, omega);
    let shot_b = noise.b_port.quadratic_form(direct.b_port());
    let shot_c = noise.c_port.quadratic_form(direct.c_port());
    let qrpn_c = noise.c_port.quadratic_form(row.c_port()) - shot_c;
    let laser_b = noise.b_port.quadratic_form(row.b_port()) - shot_b;
    let thermal = row.thermal.norm_sqr() * noise.thermal_force_psd;
    let shot = shot_b + shot_c;
    BudgetPoint {
        omega,
        shot,
        qrpn_c,
        laser_b,
        thermal,
        total: shot + qrpn_c + laser_b + thermal,
    }
}

/// Per-source spectra of one homodyne quadrature over a frequency grid (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBudget {
    pub theta: f64,
    pub omega: Vec<f64>,
    pub shot: Vec<f64>,
    pub qrpn_c: Vec<f64>,
    pub laser_b: Vec<f64>,
    pub thermal: Vec<f64>,
    pub total: Vec<f64>,
    /// Signal-port contribution including its direct path.
    pub c_only: Vec<f64>,
}

impl SpectrumBudget {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn point(&self, i: usize) -> BudgetPoint {
        BudgetPoint {
            omega: self.omega[i],
            shot: self.shot[i],
            qrpn_c: self.qrpn_c[i],
            laser_b: self.laser_b[i],
            thermal: self.thermal[i],
            total: self.total[i],
        }
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(OptomechError::InvalidParameter {
            name: "omega_grid",
            value: 0.0,
            reason: "must not be empty",
        });
    }
    for (i, &w) in grid.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(OptomechError::InvalidParameter {
                name: "omega_grid",
                value: w,
                reason: "frequencies must be positive and finite",
            });
        }
        if i > 0 && w <= grid[i - 1] {
            return Err(OptomechError::InvalidParameter {
                name: "omega_grid",
                value: w,
                reason: "must be strictly increasing",
            });
        }
    }
    Ok(())
}

pub fn homodyne_spectrum(
    state: &OperatingState,
    theta: f64,
    noise: &InputNoise,
    grid: &[f64],
) -> Result<SpectrumBudget> {
    validate_grid(grid)?;
    let n = grid.len();
    let mut out = SpectrumBudget {
        theta,
        omega: grid.to_vec(),
        shot: Vec::with_capacity(n),
        qrpn_c: Vec::with_capacity(n),
        laser_b: Vec::with_capacity(n),
        thermal: Vec::with_capacity(n),
        total: Vec::with_capacity(n),
        c_only: Vec::with_capacity(n),
    };
    for &w in grid {
        let p = budget_point(state, theta, noise, w);
        out.c_only.push(p.c_only(state, theta, noise));
        out.shot.push(p.shot);
        out.qrpn_c.push(p.qrpn_c);
        out.laser_b.push(p.laser_b);
        out.thermal.push(p.thermal);
        out.total.push(p.total);
    }
    Ok(out)
}

/// Closed-form back-action force spectrum at `omega` for vacuum inputs,
/// normalized by `2 hbar m omega_M`.
pub fn qrpn_psd(state: &OperatingState, omega: f64) -> f64 {
    let r = &state.rates;
    let (g0, g1, gp) = (r.gamma0, r.gamma1, r.gamma_plus);
    let (x, h) = (state.normalized.dissipative, state.normalized.dispersive);
    let w_mod = state.oscillator.omega_mod;
    let lorentz = gp * gp / (gp * gp + omega * omega);
    match state.topology() {
        Topology::Srm => {
            g0 * g0 / (2.0 * w_mod)
                * lorentz
                * (h * h * (1.0 + g1 / g0) + x * x * (g1 / g0 + omega * omega / (gp * gp)))
        }
        Topology::Prm => {
            g1 * g1 / (2.0 * w_mod) * (h * h * lorentz * (1.0 + g0 / g1) + x * x * g0 / g1)
        }
    }
}

/// Back-action force spectrum from the force transfer row and the actual input spectra.
pub fn qrpn_psd_from_transfer(state: &OperatingState, noise: &InputNoise, omega: f64) -> f64 {
    let f = back_action_force(state, omega);
    let norm = 2.0 * HBAR * state.mechanics.mass * state.oscillator.omega_mod;
    (noise.b_port.quadratic_form(f.b_port()) + noise.c_port.quadratic_form(f.c_port())) / norm
}

/// Bath occupancy model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OccupancyModel {
    /// `k_B T0 / (hbar omega)`.
    #[default]
    HighTemperature,
    /// `1 / (exp(hbar omega / k_B T0) - 1)`.
    Bose,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub n_t: f64,
    pub t_eff: f64,
}

/// Bath phonon number at frequency `omega`.
pub fn bath_occupancy(temperature: f64, omega: f64, model: OccupancyModel) -> f64 {
    let x = HBAR * omega / (BOLTZMANN * temperature);
    match model {
        OccupancyModel::HighTemperature => 1.0 / x,
        OccupancyModel::Bose => 1.0 / x.exp_m1(),
    }
}

/// `n_T = (kappa_m / kappa_M) n_bath + S_LP / (2 kappa_M)`.
pub fn thermal_occupation(
    state: &OperatingState,
    s_lp: f64,
    model: OccupancyModel,
) -> Result<Occupancy> {
    let o = &state.oscillator;
    if o.kappa_mod.is_nan() || o.kappa_mod <= 0.0 {
        return Err(OptomechError::UnstableSpring {
            omega_sq: o.omega_mod * o.omega_mod,
            kappa: o.kappa_mod,
        });
    }
    let mech = &state.mechanics;
    let n_bath = bath_occupancy(mech.temperature, o.omega_mod, model);
    let n_t = mech.kappa_m() / o.kappa_mod * n_bath + s_lp / (2.0 * o.kappa_mod);
    Ok(Occupancy {
        n_t,
        t_eff: n_t * HBAR * o.omega_mod / BOLTZMANN,
    })
}

/// Occupancy with the back action evaluated from the transfer rows at `omega_M`.
pub fn occupancy(
    state: &OperatingState,
    noise: &InputNoise,
    model: OccupancyModel,
) -> Result<Occupancy> {
    let s_lp = qrpn_psd_from_transfer(state, noise, state.oscillator.omega_mod);
    thermal_occupation(state, s_lp, model)
}

/// Ratio of signal-port back action to thermal noise near resonance, for `gamma1 >> gamma0`.
pub fn ba_to_thermal_ratio(state: &OperatingState) -> f64 {
    let r = &state.rates;
    let nc = &state.normalized;
    let mech = &state.mechanics;
    let gp2 = r.gamma_plus * r.gamma_plus;
    HBAR * r.gamma0 * r.gamma1 * gp2 * (nc.dispersive.powi(2) + nc.dissipative.powi(2))
        / (4.0 * mech.kappa_m() * BOLTZMANN * mech.temperature * (gp2 + mech.omega_m.powi(2)))
}

/// Closed-form terms of the phase-quadrature spectrum for a purely dispersive SRM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuadratureTerms {
    pub shot: f64,
    pub qrpn_c: f64,
    pub laser_b: f64,
    pub thermal: f64,
}

pub fn phase_quadrature_terms(state: &OperatingState, omega: f64) -> Result<PhaseQuadratureTerms> {
    if state.topology() != Topology::Srm {
        return Err(OptomechError::InvalidParameter {
            name: "topology",
            value: 1.0,
            reason: "phase-quadrature closed form holds for SRM only",
        });
    }
    let r = &state.rates;
    let (g0, g1, gp) = (r.gamma0, r.gamma1, r.gamma_plus);
    let h2 = state.normalized.dispersive.powi(2);
    let z2 = susceptibility(state, omega).norm_sqr();
    let lor = gp * gp + omega * omega;
    let common = h2 * h2 * gp.powi(4) / (z2 * lor * lor);
    let noise = InputNoise::vacuum(state);
    Ok(PhaseQuadratureTerms {
        shot: 1.0,
        qrpn_c: common * g0 * g0 * g1 * g1,
        laser_b: common * g0.powi(3) * g1,
        thermal: g0 * g1 * gp * gp * h2 / (lor * z2) * noise.thermal_force_psd
            / (HBAR * state.mechanics.mass),
    })
}

/// Closed-form coefficient of the correlated signal quadrature in the output
/// at the correlation angle (`chi` for SRM, `beta + pi/2` for PRM).
pub fn correlated_c_coefficient(state: &OperatingState, omega: f64) -> Complex64 {
    let r = &state.rates;
    let (g0, g1, gp, gm) = (r.gamma0, r.gamma1, r.gamma_plus, r.gamma_minus);
    let (x, h) = (state.normalized.dissipative, state.normalized.dispersive);
    let xh = x * h;
    let mech = &state.mechanics;
    let w = omega;
    let den = Complex64::new(gp, -w);
    let bare = Complex64::new(mech.omega_m * mech.omega_m - w * w, -w * mech.kappa_m());
    match state.topology() {
        Topology::Srm => {
            let rho = Complex64::new(gm, w) / den;
            let num = bare + g0 * g0 * gp * xh / Complex64::new(gm, w);
            let dnm = bare - g0 * g0 * gp * xh / den;
            rho * num / dnm
        }
        Topology::Prm => {
            let rho = Complex64::new(-gm, w) / den;
            let num = bare + g0 * g1 * gp * gp * xh / (Complex64::new(gm, -w) * den);
            let dnm = bare - g0 * g1 * gp * xh / den;
            let n2 = x * x + h * h;
            // phase-port term of the force that is not collinear with the correlated quadrature
            let residual = if n2 > 0.0 {
                Complex64::new(0.0, w) * g0 * g1 * x * x * xh * Complex64::new(g1, -w)
                    / (n2 * dnm * den * den)
            } else {
                Complex64::new(0.0, 0.0)
            };
            rho * num / dnm + residual
        }
    }
}

/// The same coefficient projected from the composed output row.
pub fn correlated_c_coefficient_composed(state: &OperatingState, omega: f64) -> Complex64 {
    let theta = state.back_action_angle();
    output_quadrature_transfer(state, theta, omega).c_projection(theta)
}

/// Readout gain at the correlation angle, exposed for diagnostics.
pub fn correlated_gain(state: &OperatingState, omega: f64) -> Complex64 {
    displacement_gain(state, state.back_action_angle(), omega)
}
