//! Simulation and verification toolkit for the non-linear friction Langevin
//! system
//!
//! ```text
//! dX^ε = ε^{-1} V^ε dt,    dV^ε = -ε^{-1} |V^ε|^β sgn V^ε dt + dZ^ε
//! ```
//!
//! driven by small compound-Poisson or truncated-stable Lévy noise.
//!
//! * [`noise`]: noise models, tails, jump sampling.
//! * [`regime`]: classification of `(α, β)`.
//! * [`dynamics`]: closed-form flows, exact solver, stepping oracle.
//! * [`limits`]: pathwise limit processes, coupling residual, rescaling.
//! * [`analysis`]: `H^ε` quadrature, Monte Carlo ensembles, statistics.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod limits;
pub mod noise;
pub mod regime;
pub mod rng;

pub use dynamics::{
    flow_displacement, flow_velocity, response_f, solve_exact, solve_oracle, ExactSolution, SystemParams,
    TrajectoryPath,
};
pub use error::{Error, Result};
pub use limits::{
    limit_filtered_sum, limit_log_signs, limit_power_gaps, pathwise_residual, rescale_to_y, stable_filter_params,
    LimitPath,
};
pub use noise::{sample_jump_events, Jump, JumpLaw, JumpPath, LevyModel};
pub use regime::{classify_regime, LimitKind, RegimeReport, Regularity};
pub use rng::StreamId;
