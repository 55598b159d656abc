//! Secular equations of the point scatterer and their roots.

mod config;
mod engine;
mod solve;
mod zeta;

pub use config::{c0, compute_c0, CouplingConfig, CouplingMode, DEFAULT_DELTA};
pub use engine::{SecularEngine, SecularEvaluation, SpectralPoint, FLUCTUATION_CONSTANT};
pub use solve::{
    renormalisation_report, solve_interval, spectrum, validate_interlacing, EigenvalueRecord,
    InterlacingReport, InterlacingSequence, RenormalisationSample, SequenceSource, Spectrum,
};
