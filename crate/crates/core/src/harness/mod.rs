//! Amplitude sweeps, estimate verification, the nondegeneracy probe and the
//! dispersion check.

mod checks;
mod estimates;
mod fit;
mod probe;
mod sweep;

pub use checks::{
    dispersion_check, kp_deviation_fit, resolvent_deviation, resolvent_replacement_fit, AsymptoticFit,
    CheckStatus, DispersionVerdict, RAYS,
};
pub use estimates::{verify_estimate, Estimate, EstimateVerdict, EXPONENT_SLACK, FIT_POINTS, RATIO_BAND};
pub use fit::loglog_fit;
pub use probe::{
    nondegeneracy_probe, zero_potential_eigenvalue, ProbeLevel, SpectralProbeResult, EIGEN_TOL, REFINEMENT_TOL,
};
pub use sweep::{
    approximation_error, run_sweep, ContractionRecord, CriterionCheck, SolutionRecord, SweepRecord, SweepReport,
    TheoryRegime, ASYMMETRY_TOL, CONTRACTION_LIMIT, FULL_TOL, REDUCED_TOL,
};

/// Amplitudes of the default sweep.
pub const DEFAULT_EPSILONS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
