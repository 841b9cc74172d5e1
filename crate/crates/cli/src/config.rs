//! Line-oriented `key = value` configuration.
//!
//! Frequencies that the model treats as angular rates are given here as
//! ordinary frequencies (`*_Hz`, `*_kHz`); the conversion to rad/s happens in
//! [`ModelConfig::to_params`] and nowhere else.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use optomech_core::{
    EpsilonChoice, OccupancyModel, SqueezeAngle, SqueezeSpec, Susceptibility, SweepParameter,
    SweepScale, SweepSpec, SystemParams, Topology,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key} = {value}: {reason}")]
    Unit {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonMode {
    Fixed,
    Opt,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthModel {
    /// Effective length equals the arm length.
    Arm,
    /// Effective length equals the recycling-cavity length.
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqueezeTarget {
    BackAction,
    Angle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HomodyneAngle {
    /// Phase quadrature for budgets, the correlation angle for squeezing spectra.
    Auto,
    Chi,
    BetaPlus90,
    Radians(f64),
}

impl HomodyneAngle {
    /// Resolves against normalized couplings; `auto_value` is used for `Auto`.
    pub fn resolve(&self, dissipative: f64, dispersive: f64, auto_value: f64) -> f64 {
        match *self {
            HomodyneAngle::Auto => auto_value,
            HomodyneAngle::Chi => dissipative.atan2(dispersive),
            HomodyneAngle::BetaPlus90 => dispersive.atan2(dissipative) + PI / 2.0,
            HomodyneAngle::Radians(r) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub topology: Topology,
    pub power_reflectivity: f64,
    pub epsilon_mode: EpsilonMode,
    pub epsilon: f64,
    pub wavelength_nm: f64,
    pub cavity_length_cm: f64,
    pub arm_length_cm: f64,
    pub length_model: LengthModel,
    pub gamma1_over_2pi_hz: f64,
    pub gamma0_over_2pi_hz: f64,
    pub sweep_gamma0_min_hz: f64,
    pub sweep_gamma0_max_hz: f64,
    pub sweep_points: usize,
    pub sweep_scale: SweepScale,
    pub baseline_reflectivity: f64,
    pub input_power_w: f64,
    pub mass_ng: f64,
    pub freq_mech_khz: f64,
    pub q: f64,
    pub temperature_k: f64,
    pub squeeze_db: f64,
    pub squeeze_target: SqueezeTarget,
    pub squeeze_angle_rad: f64,
    pub homodyne_angle: HomodyneAngle,
    pub excess_amplitude: f64,
    pub excess_phase: f64,
    pub spectrum_min_hz: f64,
    pub spectrum_max_hz: f64,
    pub spectrum_points: usize,
    pub spectrum_scale: SweepScale,
    pub epsilon_points: usize,
    pub susceptibility: Susceptibility,
    pub occupancy: OccupancyModel,
    pub verify_samples: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Srm,
            power_reflectivity: 0.98,
            epsilon_mode: EpsilonMode::Opt,
            epsilon: 0.0,
            wavelength_nm: 1550.0,
            cavity_length_cm: 5.0,
            arm_length_cm: 10.0,
            length_model: LengthModel::Arm,
            gamma1_over_2pi_hz: 1e6,
            gamma0_over_2pi_hz: 1e5,
            sweep_gamma0_min_hz: 1e4,
            sweep_gamma0_max_hz: 3e6,
            sweep_points: 200,
            sweep_scale: SweepScale::Log,
            baseline_reflectivity: 0.5,
            input_power_w: 0.1,
            mass_ng: 50.0,
            freq_mech_khz: 350.0,
            q: 1e6,
            temperature_k: 20.0,
            squeeze_db: 0.0,
            squeeze_target: SqueezeTarget::BackAction,
            squeeze_angle_rad: 0.0,
            homodyne_angle: HomodyneAngle::Auto,
            excess_amplitude: 1.0,
            excess_phase: 1.0,
            spectrum_min_hz: 1e4,
            spectrum_max_hz: 1e7,
            spectrum_points: 1000,
            spectrum_scale: SweepScale::Log,
            epsilon_points: 201,
            susceptibility: Susceptibility::Dynamic,
            occupancy: OccupancyModel::HighTemperature,
            verify_samples: 100,
            seed: 1,
        }
    }
}

pub const KEYS: &[&str] = &[
    "topology",
    "power_reflectivity",
    "epsilon_mode",
    "epsilon",
    "wavelength_nm",
    "cavity_length_cm",
    "arm_length_cm",
    "length_model",
    "gamma1_over_2pi_Hz",
    "gamma0_over_2pi_Hz",
    "sweep_gamma0_min_Hz",
    "sweep_gamma0_max_Hz",
    "sweep_points",
    "sweep_scale",
    "baseline_reflectivity",
    "input_power_W",
    "mass_ng",
    "freq_mech_kHz",
    "Q",
    "temperature_K",
    "squeeze_dB",
    "squeeze_target",
    "squeeze_angle_rad",
    "homodyne_angle",
    "excess_amplitude",
    "excess_phase",
    "spectrum_min_Hz",
    "spectrum_max_Hz",
    "spectrum_points",
    "spectrum_scale",
    "epsilon_points",
    "susceptibility",
    "occupancy",
    "verify_samples",
    "seed",
];

fn scale_name(s: SweepScale) -> &'static str {
    match s {
        SweepScale::Linear => "linear",
        SweepScale::Log => "log",
    }
}

fn unit(key: &str, value: &str, reason: &str) -> ConfigError {
    ConfigError::Unit {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

/// Syntax failure inside `set`; callers attach the line number.
#[derive(Debug)]
struct SetError(String);

impl ModelConfig {
    /// Assigns one key. Range checks happen in [`Self::validate`].
    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        let num = |v: &str| -> Result<f64, SetError> {
            v.parse::<f64>()
                .map_err(|_| SetError(format!("{key}: expected a number, got {v:?}")))
        };
        let count = |v: &str| -> Result<usize, SetError> {
            v.parse::<usize>()
                .map_err(|_| SetError(format!("{key}: expected a count, got {v:?}")))
        };
        let choice = |options: &[&str]| -> Result<usize, SetError> {
            options.iter().position(|o| *o == value).ok_or_else(|| {
                SetError(format!(
                    "{key}: expected one of {}, got {value:?}",
                    options.join("|")
                ))
            })
        };
        let scale = || -> Result<SweepScale, SetError> {
            Ok([SweepScale::Linear, SweepScale::Log][choice(&["linear", "log"])?])
        };
        match key {
            "topology" => self.topology = [Topology::Srm, Topology::Prm][choice(&["SRM", "PRM"])?],
            "power_reflectivity" => self.power_reflectivity = num(value)?,
            "epsilon_mode" => {
                self.epsilon_mode = [EpsilonMode::Fixed, EpsilonMode::Opt, EpsilonMode::Max]
                    [choice(&["fixed", "opt", "max"])?]
            }
            "epsilon" => self.epsilon = num(value)?,
            "wavelength_nm" => self.wavelength_nm = num(value)?,
            "cavity_length_cm" => self.cavity_length_cm = num(value)?,
            "arm_length_cm" => self.arm_length_cm = num(value)?,
            "length_model" => {
                self.length_model =
                    [LengthModel::Arm, LengthModel::Cavity][choice(&["arm", "cavity"])?]
            }
            "gamma1_over_2pi_Hz" => self.gamma1_over_2pi_hz = num(value)?,
            "gamma0_over_2pi_Hz" => self.gamma0_over_2pi_hz = num(value)?,
            "sweep_gamma0_min_Hz" => self.sweep_gamma0_min_hz = num(value)?,
            "sweep_gamma0_max_Hz" => self.sweep_gamma0_max_hz = num(value)?,
            "sweep_points" => self.sweep_points = count(value)?,
            "sweep_scale" => self.sweep_scale = scale()?,
            "baseline_reflectivity" => self.baseline_reflectivity = num(value)?,
            "input_power_W" => self.input_power_w = num(value)?,
            "mass_ng" => self.mass_ng = num(value)?,
            "freq_mech_kHz" => self.freq_mech_khz = num(value)?,
            "Q" => self.q = num(value)?,
            "temperature_K" => self.temperature_k = num(value)?,
            "squeeze_dB" => self.squeeze_db = num(value)?,
            "squeeze_target" => {
                self.squeeze_target = [SqueezeTarget::BackAction, SqueezeTarget::Angle]
                    [choice(&["back_action", "angle"])?]
            }
            "squeeze_angle_rad" => self.squeeze_angle_rad = num(value)?,
            "homodyne_angle" => {
                self.homodyne_angle = match value {
                    "auto" => HomodyneAngle::Auto,
                    "chi" => HomodyneAngle::Chi,
                    "beta+90" => HomodyneAngle::BetaPlus90,
                    v => HomodyneAngle::Radians(v.parse::<f64>().map_err(|_| {
                        SetError(format!(
                            "homodyne_angle: expected radians, chi, beta+90 or auto, got {v:?}"
                        ))
                    })?),
                }
            }
            "excess_amplitude" => self.excess_amplitude = num(value)?,
            "excess_phase" => self.excess_phase = num(value)?,
            "spectrum_min_Hz" => self.spectrum_min_hz = num(value)?,
            "spectrum_max_Hz" => self.spectrum_max_hz = num(value)?,
            "spectrum_points" => self.spectrum_points = count(value)?,
            "spectrum_scale" => self.spectrum_scale = scale()?,
            "epsilon_points" => self.epsilon_points = count(value)?,
            "susceptibility" => {
                self.susceptibility = [Susceptibility::Dynamic, Susceptibility::Resonant]
                    [choice(&["dynamic", "resonant"])?]
            }
            "occupancy" => {
                self.occupancy = [OccupancyModel::HighTemperature, OccupancyModel::Bose]
                    [choice(&["high_temperature", "bose"])?]
            }
            "verify_samples" => self.verify_samples = count(value)?,
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| SetError(format!("seed: expected an integer, got {value:?}")))?
            }
            other => return Err(SetError(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("wavelength_nm", self.wavelength_nm),
            ("cavity_length_cm", self.cavity_length_cm),
            ("arm_length_cm", self.arm_length_cm),
            ("gamma1_over_2pi_Hz", self.gamma1_over_2pi_hz),
            ("gamma0_over_2pi_Hz", self.gamma0_over_2pi_hz),
            ("sweep_gamma0_min_Hz", self.sweep_gamma0_min_hz),
            ("mass_ng", self.mass_ng),
            ("freq_mech_kHz", self.freq_mech_khz),
            ("Q", self.q),
            ("temperature_K", self.temperature_k),
            ("spectrum_min_Hz", self.spectrum_min_hz),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(unit(k, &v.to_string(), "must be positive and finite"));
            }
        }
        for (k, v) in [
            ("power_reflectivity", self.power_reflectivity),
            ("baseline_reflectivity", self.baseline_reflectivity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(unit(k, &v.to_string(), "must lie in [0, 1]"));
            }
        }
        if !(self.epsilon > -1.0 && self.epsilon < 1.0) {
            return Err(unit(
                "epsilon",
                &self.epsilon.to_string(),
                "must lie in (-1, 1)",
            ));
        }
        if !(self.input_power_w >= 0.0 && self.input_power_w.is_finite()) {
            return Err(unit(
                "input_power_W",
                &self.input_power_w.to_string(),
                "must be non-negative",
            ));
        }
        for (k, v) in [
            ("excess_amplitude", self.excess_amplitude),
            ("excess_phase", self.excess_phase),
        ] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(unit(k, &v.to_string(), "must be at least 1 (shot noise)"));
            }
        }
        for (k, v) in [
            ("squeeze_dB", self.squeeze_db),
            ("squeeze_angle_rad", self.squeeze_angle_rad),
        ] {
            if !v.is_finite() {
                return Err(unit(k, &v.to_string(), "must be finite"));
            }
        }
        if let HomodyneAngle::Radians(r) = self.homodyne_angle {
            if !r.is_finite() {
                return Err(unit("homodyne_angle", &r.to_string(), "must be finite"));
            }
        }
        if self.sweep_gamma0_max_hz <= self.sweep_gamma0_min_hz {
            return Err(unit(
                "sweep_gamma0_max_Hz",
                &self.sweep_gamma0_max_hz.to_string(),
                "must exceed sweep_gamma0_min_Hz",
            ));
        }
        if self.spectrum_max_hz <= self.spectrum_min_hz {
            return Err(unit(
                "spectrum_max_Hz",
                &self.spectrum_max_hz.to_string(),
                "must exceed spectrum_min_Hz",
            ));
        }
        for (k, v) in [
            ("sweep_points", self.sweep_points),
            ("spectrum_points", self.spectrum_points),
            ("epsilon_points", self.epsilon_points),
        ] {
            if v < 2 {
                return Err(unit(k, &v.to_string(), "must be at least 2"));
            }
        }
        if self.verify_samples < 1 {
            return Err(unit("verify_samples", "0", "must be at least 1"));
        }
        Ok(())
    }

    /// Applies `key=value` overrides after file parsing.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for (i, raw) in overrides.iter().enumerate() {
            let raw = raw.as_ref();
            let (k, v) = raw.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: 0,
                message: format!("override #{}: expected key=value, got {raw:?}", i + 1),
            })?;
            self.set(k.trim(), v.trim())
                .map_err(|SetError(message)| ConfigError::Parse {
                    line: 0,
                    message: format!("override #{}: {message}", i + 1),
                })?;
        }
        self.validate()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Every key with its canonical textual value, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let homodyne = match self.homodyne_angle {
            HomodyneAngle::Auto => "auto".to_string(),
            HomodyneAngle::Chi => "chi".to_string(),
            HomodyneAngle::BetaPlus90 => "beta+90".to_string(),
            HomodyneAngle::Radians(r) => r.to_string(),
        };
        let values = vec![
            self.topology.name().to_string(),
            self.power_reflectivity.to_string(),
            match self.epsilon_mode {
                EpsilonMode::Fixed => "fixed",
                EpsilonMode::Opt => "opt",
                EpsilonMode::Max => "max",
            }
            .to_string(),
            self.epsilon.to_string(),
            self.wavelength_nm.to_string(),
            self.cavity_length_cm.to_string(),
            self.arm_length_cm.to_string(),
            match self.length_model {
                LengthModel::Arm => "arm",
                LengthModel::Cavity => "cavity",
            }
            .to_string(),
            self.gamma1_over_2pi_hz.to_string(),
            self.gamma0_over_2pi_hz.to_string(),
            self.sweep_gamma0_min_hz.to_string(),
            self.sweep_gamma0_max_hz.to_string(),
            self.sweep_points.to_string(),
            scale_name(self.sweep_scale).to_string(),
            self.baseline_reflectivity.to_string(),
            self.input_power_w.to_string(),
            self.mass_ng.to_string(),
            self.freq_mech_khz.to_string(),
            self.q.to_string(),
            self.temperature_k.to_string(),
            self.squeeze_db.to_string(),
            match self.squeeze_target {
                SqueezeTarget::BackAction => "back_action",
                SqueezeTarget::Angle => "angle",
            }
            .to_string(),
            self.squeeze_angle_rad.to_string(),
            homodyne,
            self.excess_amplitude.to_string(),
            self.excess_phase.to_string(),
            self.spectrum_min_hz.to_string(),
            self.spectrum_max_hz.to_string(),
            self.spectrum_points.to_string(),
            scale_name(self.spectrum_scale).to_string(),
            self.epsilon_points.to_string(),
            match self.susceptibility {
                Susceptibility::Dynamic => "dynamic",
                Susceptibility::Resonant => "resonant",
            }
            .to_string(),
            match self.occupancy {
                OccupancyModel::HighTemperature => "high_temperature",
                OccupancyModel::Bose => "bose",
            }
            .to_string(),
            self.verify_samples.to_string(),
            self.seed.to_string(),
        ];
        KEYS.iter().copied().zip(values).collect()
    }

    pub fn effective_length_m(&self) -> f64 {
        match self.length_model {
            LengthModel::Arm => self.arm_length_cm / 100.0,
            LengthModel::Cavity => self.cavity_length_cm / 100.0,
        }
    }

    /// SI parameters for the core model.
    pub fn to_params(&self) -> SystemParams {
        SystemParams {
            topology: self.topology,
            power_reflectivity: self.power_reflectivity,
            epsilon: match self.epsilon_mode {
                EpsilonMode::Fixed => EpsilonChoice::Fixed(self.epsilon),
                EpsilonMode::Opt => EpsilonChoice::Optimal,
                EpsilonMode::Max => EpsilonChoice::Maximal,
            },
            wavelength: self.wavelength_nm / 1e9,
            effective_length: self.effective_length_m(),
            gamma0: 2.0 * PI * self.gamma0_over_2pi_hz,
            gamma1: 2.0 * PI * self.gamma1_over_2pi_hz,
            power: self.input_power_w,
            mass: self.mass_ng / 1e12,
            omega_m: 2.0 * PI * self.freq_mech_khz * 1e3,
            quality: self.q,
            temperature: self.temperature_k,
            squeeze: SqueezeSpec {
                db: self.squeeze_db,
                angle: match self.squeeze_target {
                    SqueezeTarget::BackAction => SqueezeAngle::BackAction,
                    SqueezeTarget::Angle => SqueezeAngle::Fixed(self.squeeze_angle_rad),
                },
            },
            excess_amplitude: self.excess_amplitude,
            excess_phase: self.excess_phase,
            susceptibility: self.susceptibility,
        }
    }

    pub fn gamma0_sweep(&self) -> SweepSpec {
        SweepSpec {
            parameter: SweepParameter::Gamma0,
            lo: 2.0 * PI * self.sweep_gamma0_min_hz,
            hi: 2.0 * PI * self.sweep_gamma0_max_hz,
            points: self.sweep_points,
            scale: self.sweep_scale,
        }
    }

    pub fn spectrum_sweep(&self) -> SweepSpec {
        SweepSpec {
            parameter: SweepParameter::Omega,
            lo: 2.0 * PI * self.spectrum_min_hz,
            hi: 2.0 * PI * self.spectrum_max_hz,
            points: self.spectrum_points,
            scale: self.spectrum_scale,
        }
    }
}

pub fn parse_config(text: &str) -> Result<ModelConfig, ConfigError> {
    let mut cfg = ModelConfig::default();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body.split_once('=').ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("expected key = value, got {body:?}"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: "empty key or value".to_string(),
            });
        }
        if !seen.insert(k.to_string()) {
            return Err(ConfigError::Parse {
                line,
                message: format!("duplicate key {k:?}"),
            });
        }
        cfg.set(k, v)
            .map_err(|SetError(message)| ConfigError::Parse { line, message })?;
    }
    cfg.validate()?;
    Ok(cfg)
}
