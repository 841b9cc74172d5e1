//! Command dispatch. Each command writes one or more CSV files and `summary.json`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use optomech_core::cavity::RegimeWarning;
use optomech_core::optimize::{damping_at_epsilon, ARGMAX_STEP};
use optomech_core::squeeze::DipTarget;
use optomech_core::{
    ba_to_thermal_ratio, cooling_sweep, couplings_by_derivative, couplings_closed_form,
    epsilon_argmax_grid, epsilon_max, epsilon_opt, find_dip, homodyne_spectrum,
    solve_operating_point, squeeze_features, verify_closed_forms, BeamSplitterSpec, CavityRates,
    CoolingCurve, EpsilonChoice, InputNoise, OperatingState, OptomechError, PointStatus,
    SystemParams, Topology,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::config::{EpsilonMode, ModelConfig};
use crate::output::{fmt_f64, write_atomic, Csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Couplings,
    CoolingCurve,
    QrpnBudget,
    SqueezeSpectrum,
    OptimizeEpsilon,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Couplings => "couplings",
            Command::CoolingCurve => "cooling-curve",
            Command::QrpnBudget => "qrpn-budget",
            Command::SqueezeSpectrum => "squeeze-spectrum",
            Command::OptimizeEpsilon => "optimize-epsilon",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] crate::config::ConfigError),
    #[error("model: {0}")]
    Model(#[from] OptomechError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(OptomechError::VerificationFailed { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// False only for a failed `verify`.
    pub passed: bool,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            2
        }
    }
}

fn hz(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI)
}

fn num(v: f64) -> Value {
    // NaN and infinities have no JSON form
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn warning_text(w: &RegimeWarning) -> String {
    match w {
        RegimeWarning::LowTemperature { ratio } => {
            format!("hbar omega_M / k_B T0 = {} is not small", fmt_f64(*ratio))
        }
        RegimeWarning::BroadMechanicalLine { ratio } => {
            format!(
                "mechanical linewidth / omega_m = {} is not small",
                fmt_f64(*ratio)
            )
        }
        RegimeWarning::SlowCavity { ratio } => {
            format!("omega_M / gamma_+ = {} is not small", fmt_f64(*ratio))
        }
        RegimeWarning::SpringNotConverged { relative_shift } => format!(
            "spring refinement moved omega_M by {} (relative)",
            fmt_f64(*relative_shift)
        ),
    }
}

/// Scalars every summary carries, evaluated at the configured operating point.
fn common_scalars(params: &SystemParams) -> (Map<String, Value>, Vec<String>) {
    let mut m = Map::new();
    let mut warnings = Vec::new();
    let g0tau = params.gamma0 * params.tau();
    if let Ok(mirror) = params.mirror() {
        if let Ok(e) = epsilon_opt(&mirror, g0tau) {
            m.insert("epsilon_opt".into(), num(e));
        }
        if let Ok(e) = epsilon_max(&mirror, g0tau) {
            m.insert("epsilon_max".into(), num(e));
        }
    }
    m.insert("effective_length_m".into(), num(params.effective_length));
    m.insert("tau_s".into(), num(params.tau()));
    match params.resolve() {
        Ok(s) => {
            let f = squeeze_features(&s);
            let o = &s.oscillator;
            m.insert("epsilon".into(), num(s.epsilon()));
            m.insert("xi_per_m".into(), num(s.couplings.xi));
            m.insert("eta_per_m".into(), num(s.couplings.eta));
            m.insert("X".into(), num(s.normalized.dissipative));
            m.insert("H".into(), num(s.normalized.dispersive));
            m.insert("omega_M_Hz".into(), num(hz(o.omega_mod)));
            m.insert("Gamma_M_Hz".into(), num(hz(o.kappa_mod)));
            m.insert("omega_sq_Hz".into(), num(hz(f.omega_sq)));
            m.insert("Gamma_sq_Hz".into(), num(hz(f.gamma_sq)));
            m.insert("separation".into(), num(f.separation));
            m.insert("separation_estimate".into(), num(f.separation_estimate));
            m.insert("heating".into(), Value::Bool(o.is_heating(&s.mechanics)));
            warnings.extend(o.warnings.iter().map(warning_text));
            if !f.observable {
                warnings
                    .push("squeezing dip overlaps the dressed resonance (separation <= 1)".into());
            }
        }
        Err(e) => {
            m.insert("state_error".into(), Value::String(e.to_string()));
        }
    }
    (m, warnings)
}

fn config_echo(cfg: &ModelConfig) -> Value {
    let mut m = Map::new();
    for (k, v) in cfg.entries() {
        m.insert(k.to_string(), Value::String(v));
    }
    Value::Object(m)
}

struct Emitter<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
}

impl Emitter<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let p =
            write_atomic(self.dir, name, contents.as_bytes()).map_err(|source| CliError::Io {
                context: format!("writing {}", self.dir.join(name).display()),
                source,
            })?;
        self.files.push(p);
        Ok(())
    }
}

pub fn run(command: Command, cfg: &ModelConfig, out_dir: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let params = cfg.to_params();
    let mut em = Emitter {
        dir: out_dir,
        files: Vec::new(),
    };
    let (mut scalars, mut warnings) = common_scalars(&params);
    let mut passed = true;
    let mut extra = Map::new();

    match command {
        Command::Couplings => couplings(cfg, &params, &mut em, &mut scalars)?,
        Command::CoolingCurve => cooling(cfg, &params, &mut em, &mut scalars)?,
        Command::QrpnBudget => qrpn_budget(cfg, &params, &mut em, &mut scalars)?,
        Command::SqueezeSpectrum => {
            squeeze_spectrum(cfg, &params, &mut em, &mut scalars, &mut warnings)?
        }
        Command::OptimizeEpsilon => optimize(cfg, &params, &mut em, &mut scalars)?,
        Command::Verify => {
            let report = verify_closed_forms(&params, cfg.verify_samples, cfg.seed)?;
            passed = report.passed();
            let value = serde_json::to_value(&report).expect("report serializes");
            let mut text = serde_json::to_string_pretty(&value).expect("json");
            text.push('\n');
            em.write("verify.json", &text)?;
            scalars.insert("verification_passed".into(), Value::Bool(passed));
            extra.insert("verification".into(), value);
        }
    }

    let files: Vec<Value> = em
        .files
        .iter()
        .map(|p| Value::String(p.file_name().unwrap().to_string_lossy().into_owned()))
        .collect();
    let mut summary = json!({
        "tool": "msi-optomech",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "config": config_echo(cfg),
        "scalars": Value::Object(scalars),
        "warnings": warnings,
        "files": files,
    });
    if let Value::Object(m) = &mut summary {
        m.extend(extra);
    }
    let mut text = serde_json::to_string_pretty(&summary).expect("json");
    text.push('\n');
    em.write("summary.json", &text)?;
    Ok(RunOutcome {
        files: em.files,
        summary,
        passed,
    })
}

fn status_name(s: PointStatus) -> &'static str {
    match s {
        PointStatus::Stable => "stable",
        PointStatus::Unstable => "unstable",
        PointStatus::Unsolvable => "unsolvable",
    }
}

fn couplings(
    cfg: &ModelConfig,
    params: &SystemParams,
    em: &mut Emitter,
    scalars: &mut Map<String, Value>,
) -> Result<(), CliError> {
    let mirror = params.mirror()?;
    let carrier = params.carrier()?;
    let tau = params.tau();
    let e_max = epsilon_max(&mirror, params.gamma0 * tau)?;
    let t = CavityRates::transmission_for(params.gamma0, tau);
    let mut csv = Csv::new(&[
        "epsilon",
        "x0_m",
        "xi_per_m",
        "eta_per_m",
        "xi_fd_per_m",
        "eta_fd_per_m",
        "kappa_M_Hz",
        "status",
    ]);
    let n = cfg.epsilon_points;
    for i in 0..n {
        let e = e_max * i as f64 / (n - 1) as f64;
        let mut row = vec![fmt_f64(e)];
        let computed = BeamSplitterSpec::new(e).and_then(|bs| {
            let op = solve_operating_point(t, &mirror, &bs, &carrier)?;
            let cf = couplings_closed_form(&mirror, &bs, &op, &carrier, params.effective_length)?;
            let fd = couplings_by_derivative(
                &mirror,
                &bs,
                &op,
                &carrier,
                tau,
                optomech_core::msi::DEFAULT_FD_STEP,
            )?;
            Ok((op, cf, fd))
        });
        match computed {
            Ok((op, cf, fd)) => {
                let mut p = params.clone();
                p.epsilon = EpsilonChoice::Fixed(e);
                let (kappa, status) = match p.resolve() {
                    Ok(s) => (hz(s.oscillator.kappa_mod), PointStatus::Stable),
                    Err(OptomechError::UnstableSpring { kappa, .. }) => {
                        (hz(kappa), PointStatus::Unstable)
                    }
                    Err(_) => (f64::NAN, PointStatus::Unsolvable),
                };
                row.extend([op.x0(), cf.xi, cf.eta, fd.xi, fd.eta, kappa].map(fmt_f64));
                row.push(status_name(status).into());
            }
            Err(_) => {
                row.extend([f64::NAN; 6].map(fmt_f64));
                row.push(status_name(PointStatus::Unsolvable).into());
            }
        }
        csv.push(row);
    }
    scalars.insert("rows".into(), json!(csv.len()));
    em.write("couplings.csv", &csv.render())
}

fn cooling_csv(curve: &CoolingCurve) -> String {
    let mut csv = Csv::new(&["gamma0_Hz", "n_T", "kappa_M_Hz", "stable"]);
    for p in &curve.points {
        csv.push(vec![
            fmt_f64(hz(p.gamma0)),
            fmt_f64(p.n_t),
            fmt_f64(hz(p.kappa_mod)),
            (p.status == PointStatus::Stable).to_string(),
        ]);
    }
    csv.render()
}

fn cooling(
    cfg: &ModelConfig,
    params: &SystemParams,
    em: &mut Emitter,
    scalars: &mut Map<String, Value>,
) -> Result<(), CliError> {
    let sweep = cfg.gamma0_sweep();
    let suffix = match cfg.epsilon_mode {
        EpsilonMode::Opt => "opt",
        EpsilonMode::Max => "max",
        EpsilonMode::Fixed => "fixed",
    };
    let mut curves = Map::new();
    for top in [Topology::Srm, Topology::Prm] {
        let mut baseline = params.clone();
        baseline.topology = top;
        baseline.power_reflectivity = cfg.baseline_reflectivity;
        baseline.epsilon = EpsilonChoice::Fixed(0.0);
        let mut configured = params.clone();
        configured.topology = top;
        let tag = top.name().to_ascii_lowercase();
        for (label, p) in [
            ("eps0".to_string(), baseline),
            (format!("eps_{suffix}"), configured),
        ] {
            let curve = cooling_sweep(&p, &sweep, cfg.occupancy)?;
            let name = format!("cooling_{tag}_{label}.csv");
            em.write(&name, &cooling_csv(&curve))?;
            let min = curve.minimum();
            curves.insert(
                name,
                json!({
                    "min_n_T": num(min.map_or(f64::NAN, |m| m.n_t)),
                    "argmin_gamma0_Hz": num(min.map_or(f64::NAN, |m| hz(m.gamma0))),
                    "stable_points": curve.stable().count(),
                    "points": curve.points.len(),
                }),
            );
        }
    }
    let best = curves
        .values()
        .filter_map(|v| v["min_n_T"].as_f64())
        .fold(f64::NAN, f64::min);
    scalars.insert("min_n_T".into(), num(best));
    scalars.insert("curves".into(), Value::Object(curves));
    Ok(())
}

fn budget_grid(cfg: &ModelConfig) -> Vec<f64> {
    cfg.spectrum_sweep().values()
}

fn qrpn_budget(
    cfg: &ModelConfig,
    params: &SystemParams,
    em: &mut Emitter,
    scalars: &mut Map<String, Value>,
) -> Result<(), CliError> {
    let s = params.resolve()?;
    let theta =
        cfg.homodyne_angle
            .resolve(s.normalized.dissipative, s.normalized.dispersive, PI / 2.0);
    let noise = InputNoise::from_state(&s);
    let b = homodyne_spectrum(&s, theta, &noise, &budget_grid(cfg))?;
    let mut csv = Csv::new(&["Omega_Hz", "S_shot", "S_CC", "S_BB", "S_thermal", "S_total"]);
    for i in 0..b.len() {
        csv.push_numbers(&[
            hz(b.omega[i]),
            b.shot[i],
            b.qrpn_c[i],
            b.laser_b[i],
            b.thermal[i],
            b.total[i],
        ]);
    }
    scalars.insert("homodyne_angle_rad".into(), num(theta));
    scalars.insert("ba_to_thermal_ratio".into(), num(ba_to_thermal_ratio(&s)));
    em.write("qrpn_budget.csv", &csv.render())
}

fn squeeze_spectrum(
    cfg: &ModelConfig,
    params: &SystemParams,
    em: &mut Emitter,
    scalars: &mut Map<String, Value>,
    warnings: &mut Vec<String>,
) -> Result<(), CliError> {
    let s: OperatingState = params.resolve()?;
    let f = squeeze_features(&s);
    let theta = cfg.homodyne_angle.resolve(
        s.normalized.dissipative,
        s.normalized.dispersive,
        f.theta_opt,
    );
    let noise = InputNoise::from_state(&s);
    let b = homodyne_spectrum(&s, theta, &noise, &budget_grid(cfg))?;
    let mut csv = Csv::new(&[
        "Omega_Hz",
        "S_total",
        "S_C_only",
        "S_shot",
        "S_CC",
        "S_BB",
        "S_thermal",
    ]);
    for i in 0..b.len() {
        csv.push_numbers(&[
            hz(b.omega[i]),
            b.total[i],
            b.c_only[i],
            b.shot[i],
            b.qrpn_c[i],
            b.laser_b[i],
            b.thermal[i],
        ]);
    }
    scalars.insert("homodyne_angle_rad".into(), num(theta));
    scalars.insert("theta_opt_rad".into(), num(f.theta_opt));
    scalars.insert("correlation_angle_rad".into(), num(f.correlation_angle));
    if s.normalized.product() > 0.0 && (theta - f.theta_opt).abs() < 1e-12 {
        let dip = find_dip(&s, DipTarget::SignalPort, &noise)?;
        let quantum = find_dip(&s, DipTarget::Total, &noise.without_thermal())?;
        let total = find_dip(&s, DipTarget::Total, &noise)?;
        scalars.insert("dip_C_only_Hz".into(), num(hz(dip.omega)));
        scalars.insert("dip_C_only_value".into(), num(dip.value));
        scalars.insert(
            "dip_offset_over_Gamma_sq".into(),
            num((dip.omega - f.omega_sq) / f.gamma_sq),
        );
        scalars.insert("dip_quantum_min".into(), num(quantum.value));
        scalars.insert("dip_total_min".into(), num(total.value));
    } else {
        warnings
            .push("dip location skipped: homodyne angle differs from the correlation angle".into());
    }
    em.write("squeeze_spectrum.csv", &csv.render())
}

fn optimize(
    _cfg: &ModelConfig,
    params: &SystemParams,
    em: &mut Emitter,
    scalars: &mut Map<String, Value>,
) -> Result<(), CliError> {
    let mirror = params.mirror()?;
    let g0tau = params.gamma0 * params.tau();
    let e_opt = epsilon_opt(&mirror, g0tau)?;
    let e_max = epsilon_max(&mirror, g0tau)?;
    let mut csv = Csv::new(&["epsilon", "kappa_M_Hz"]);
    let mut e = ARGMAX_STEP;
    let mut i = 1u32;
    while e < e_max {
        let k = damping_at_epsilon(params, e).map_or(f64::NAN, hz);
        csv.push_numbers(&[e, k]);
        i += 1;
        e = ARGMAX_STEP * f64::from(i);
    }
    let grid = epsilon_argmax_grid(params, ARGMAX_STEP)?;
    let mut at_max = params.clone();
    at_max.epsilon = EpsilonChoice::Maximal;
    let eta_max = at_max.resolve().map_or(f64::NAN, |s| s.couplings.eta);
    scalars.insert("epsilon_argmax_grid".into(), num(grid));
    scalars.insert("grid_step".into(), num(ARGMAX_STEP));
    scalars.insert(
        "argmax_agrees".into(),
        Value::Bool((grid - e_opt).abs() <= ARGMAX_STEP),
    );
    scalars.insert("eta_at_epsilon_max_per_m".into(), num(eta_max));
    em.write("epsilon_scan.csv", &csv.render())
}
