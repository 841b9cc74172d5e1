//! Ponderomotive-squeezing dip: closed-form location and a numeric locator.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::Topology;
use crate::error::{OptomechError, Result};
use crate::model::OperatingState;
use crate::spectra::budget_point;
use crate::transfer::InputNoise;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeFeatures {
    pub omega_sq: f64,
    pub gamma_sq: f64,
    pub omega_mod: f64,
    pub gamma_mod: f64,
    /// `|omega_sq - omega_M| / Gamma_M` from the closed forms.
    pub separation: f64,
    /// Small-parameter estimate of the separation.
    pub separation_estimate: f64,
    /// Homodyne angle of full back-action correlation.
    pub theta_opt: f64,
    /// `chi` (SRM) or `beta` (PRM).
    pub correlation_angle: f64,
    /// False when the dressed resonance overlaps the dip.
    pub observable: bool,
}

pub fn squeeze_features(state: &OperatingState) -> SqueezeFeatures {
    let r = &state.rates;
    let (g0, g1, gp, gm) = (r.gamma0, r.gamma1, r.gamma_plus, r.gamma_minus);
    let (x, h) = (state.normalized.dissipative, state.normalized.dispersive);
    let xh = x * h;
    let wm = state.mechanics.omega_m;
    let km = state.mechanics.kappa_m();
    let (shift, width, corr, theta_opt, estimate) = match state.topology() {
        Topology::Srm => {
            let a = gp * g0 * g0 * xh / (gm * gm + wm * wm);
            let chi = x.atan2(h);
            (gm * a, a, chi, chi, g1 / (2.0 * wm))
        }
        Topology::Prm => {
            let v = g0 * g1 * gp * gp * xh / (Complex64::new(gm, -wm) * Complex64::new(gp, -wm));
            let beta = h.atan2(x);
            let est = g1 / (2.0 * wm * (1.0 + 4.0 * wm * wm / (g0 * g0)));
            (v.re, v.im / wm, beta, beta + PI / 2.0, est)
        }
    };
    let omega_sq = (wm * wm + shift).max(0.0).sqrt();
    let gamma_sq = km + width;
    let o = &state.oscillator;
    let separation = (omega_sq - o.omega_mod).abs() / o.kappa_mod;
    SqueezeFeatures {
        omega_sq,
        gamma_sq,
        omega_mod: o.omega_mod,
        gamma_mod: o.kappa_mod,
        separation,
        separation_estimate: estimate,
        theta_opt,
        correlation_angle: corr,
        observable: separation > 1.0,
    }
}

/// Which spectrum the dip locator minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DipTarget {
    /// Signal-port contribution only.
    SignalPort,
    /// Sum of all sources.
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipLocation {
    pub omega: f64,
    pub value: f64,
}

/// Minimizes the chosen spectrum on `[lo, hi]`: a uniform scan with spacing
/// `resolution / 8` brackets the global minimum, golden section refines it to `tol`.
#[allow(clippy::too_many_arguments)]
pub fn locate_minimum(
    state: &OperatingState,
    theta: f64,
    noise: &InputNoise,
    target: DipTarget,
    lo: f64,
    hi: f64,
    resolution: f64,
    tol: f64,
) -> Result<DipLocation> {
    if !(lo > 0.0 && hi > lo && resolution > 0.0 && tol > 0.0) {
        return Err(OptomechError::InvalidParameter {
            name: "dip_interval",
            value: hi - lo,
            reason: "needs 0 < lo < hi and positive resolution and tolerance",
        });
    }
    let f = |w: f64| {
        let p = budget_point(state, theta, noise, w);
        match target {
            DipTarget::SignalPort => p.c_only(state, theta, noise),
            DipTarget::Total => p.total,
        }
    };
    const MAX_SCAN: f64 = 2.0e6;
    let n = (((hi - lo) / (resolution / 8.0)).ceil()).clamp(16.0, MAX_SCAN) as usize;
    let step = (hi - lo) / n as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = f(lo + step * i as f64);
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut a = lo + step * best.0.saturating_sub(1) as f64;
    let mut b = (lo + step * (best.0 + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let omega = 0.5 * (a + b);
    let value = f(omega);
    Ok(if value <= best.1 {
        DipLocation { omega, value }
    } else {
        DipLocation {
            omega: lo + step * best.0 as f64,
            value: best.1,
        }
    })
}

/// Locates the dip of the signal-port spectrum at the correlation angle on
/// `[omega_m / 2, 2 gamma_+]` with tolerance `Gamma_sq / 100`.
pub fn find_dip(
    state: &OperatingState,
    target: DipTarget,
    noise: &InputNoise,
) -> Result<DipLocation> {
    let feats = squeeze_features(state);
    let lo = state.mechanics.omega_m / 2.0;
    let hi = 2.0 * state.rates.gamma_plus;
    let resolution = feats.gamma_sq.min(feats.gamma_mod);
    locate_minimum(
        state,
        feats.theta_opt,
        noise,
        target,
        lo,
        hi,
        resolution,
        feats.gamma_sq / 100.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use approx::assert_relative_eq;

    #[test]
    fn uncoupled_limits() {
        let mut p = SystemParams::table_one();
        p.power = 0.0;
        for top in [Topology::Srm, Topology::Prm] {
            p.topology = top;
            let s = p.resolve().unwrap();
            let f = squeeze_features(&s);
            assert_eq!(f.omega_sq, s.mechanics.omega_m);
            assert_eq!(f.gamma_sq, s.mechanics.kappa_m());
        }
    }

    #[test]
    fn prm_closed_form_expansion() {
        let mut p = SystemParams::table_one();
        p.topology = Topology::Prm;
        p.gamma0 = 2.0 * PI * 1e6;
        p.gamma1 = 2.0 * PI * 3e5;
        let s = p.resolve().unwrap();
        let r = &s.rates;
        let wm = s.mechanics.omega_m;
        let xh = s.normalized.product();
        let expanded = wm * wm
            + r.gamma0
                * r.gamma1
                * r.gamma_plus.powi(2)
                * (r.gamma_plus * r.gamma_minus - wm * wm)
                * xh
                / ((r.gamma_minus.powi(2) + wm * wm) * (r.gamma_plus.powi(2) + wm * wm));
        assert_relative_eq!(
            squeeze_features(&s).omega_sq,
            expanded.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn golden_section_finds_parabola_vertex_scale() {
        let s = SystemParams::table_one().resolve().unwrap();
        let noise = InputNoise::vacuum(&s).without_thermal();
        let d = find_dip(&s, DipTarget::SignalPort, &noise).unwrap();
        assert!(d.value < 1.0);
        let f = squeeze_features(&s);
        let eps = f.gamma_sq / 50.0;
        for w in [d.omega - eps, d.omega + eps] {
            let v = budget_point(&s, f.theta_opt, &noise, w).c_only(&s, f.theta_opt, &noise);
            assert!(v >= d.value - 1e-12);
        }
    }
}
