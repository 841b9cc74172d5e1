//! Linear quantum-noise model of a membrane-in-the-middle Michelson-Sagnac
//! interferometer closed by a signal- or power-recycling mirror.

pub mod cavity;
pub mod constants;
pub mod error;
pub mod model;
pub mod msi;
pub mod optimize;
pub mod spectra;
pub mod squeeze;
pub mod transfer;

pub use cavity::{
    cavity_rates, mean_fields, modified_oscillator, normalized_couplings, optical_spring,
    CavityRates, MeanFields, MechanicalOscillator, ModifiedOscillator, NormalizedCouplings, Pump,
    RegimeWarning, Topology,
};
pub use error::{OptomechError, Result};
pub use model::{
    EpsilonChoice, OperatingState, SqueezeAngle, SqueezeSpec, Susceptibility, SystemParams,
};
pub use msi::{
    couplings_at_transmission, couplings_by_derivative, couplings_closed_form, generalized_mirror,
    solve_operating_point, BeamSplitterSpec, CouplingPair, GeneralizedMirror, MirrorSpec,
    MsiOperatingPoint, OpticalCarrier,
};
pub use num_complex::Complex64;
pub use optimize::{
    cooling_sweep, epsilon_argmax_grid, epsilon_max, epsilon_opt, verify_closed_forms,
    CoolingCurve, CoolingPoint, PairReport, PointStatus, SweepParameter, SweepScale, SweepSpec,
    VerificationReport,
};
pub use spectra::{
    ba_to_thermal_ratio, budget_point, homodyne_spectrum, occupancy, qrpn_psd,
    qrpn_psd_from_transfer, thermal_occupation, BudgetPoint, Occupancy, OccupancyModel,
    SpectrumBudget,
};
pub use squeeze::{find_dip, squeeze_features, DipLocation, DipTarget, SqueezeFeatures};
pub use transfer::{
    back_action_force, displacement_transfer, output_quadrature_transfer, InputNoise,
    PortCovariance, TransferRow,
};
