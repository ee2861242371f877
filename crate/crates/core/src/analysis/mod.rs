//! Numerical analysis on top of the solver: the `H^ε` functional, Monte Carlo
//! ensembles, and the statistics used to compare them with the limits.

pub mod dissipation;
pub mod ensemble;
pub mod quadrature;
pub mod stats;

pub use dissipation::{dissipation_probe, DissipationRow};
pub use ensemble::{
    limit_ensemble, monte_carlo_ensemble, residual_sweep, tail_test, EnsembleSample, ExperimentConfig, NoiseSpec,
    ResidualRow, TailReport,
};
pub use quadrature::{h_eps, h_eps_with_error, DampedStable};
pub use stats::{hill_k, hill_sensitivity, hill_tail_index, ks_critical_value, ks_two_sample, quantile};
