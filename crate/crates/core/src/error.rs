use thiserror::Error;

pub type Result<T> = std::result::Result<T, OptomechError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptomechError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The interferometer sits on (or too close to) the dark fringe, so the
    /// dissipative coupling has a vanishing denominator.
    #[error("degenerate operating point: |T_msi| = {transmission:e} is below {threshold:e}")]
    DegenerateOperatingPoint { transmission: f64, threshold: f64 },

    /// The requested transmission needs |sin 2kx0| > 1, so cos 2kx0 and
    /// with it the dissipative coupling would be imaginary.
    #[error(
        "dissipative coupling would be imaginary: sin 2kx0 = {sine_argument} (epsilon = {epsilon})"
    )]
    ImaginaryEta { sine_argument: f64, epsilon: f64 },

    #[error("target transmission {target} unreachable: required sin 2kx0 = {sine_argument}")]
    Unsolvable { target: f64, sine_argument: f64 },

    #[error(
        "optical spring is unstable: omega_M^2 = {omega_sq:e} rad^2/s^2, kappa_M = {kappa:e} 1/s"
    )]
    UnstableSpring { omega_sq: f64, kappa: f64 },

    #[error("verification of `{pair}` failed: deviation {deviation:e} exceeds tolerance {tolerance:e} at {point}")]
    VerificationFailed {
        pair: String,
        deviation: f64,
        tolerance: f64,
        point: String,
    },
}

pub(crate) fn ensure(
    cond: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(OptomechError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
