//! Monte-Carlo reconstruction experiments.

mod bounds;
mod noise;
mod sweep;

pub use bounds::{
    error_decomposition, noise_error_bound_check, noise_scaling_sweep, ErrorDecomposition,
    NoiseBoundPoint, NoiseScalingReport,
};
pub use noise::{
    exact_measurement, generate_measurement, generate_measurement_with_noise, reconstruct,
    reconstruction_error, trial_error, NoiseModel,
};
pub use sweep::{
    cell_trial_errors, critical_bandwidth, critical_bandwidth_from_curve, critical_report,
    default_bandwidth_grid, fit_critical_line, format_bandwidth, sweep_error_vs_bandwidth,
    CriticalPoint, CriticalReport, ExperimentConfig, ExperimentReport, LineFit, Persistence,
    SweepCell, DEFAULT_SAMPLING_RATE, DEFAULT_TRIALS,
};
