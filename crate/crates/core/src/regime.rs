//! Classification of `(α, β)` into the asymptotic regimes of the position process.

use std::fmt;

use crate::error::{ensure_finite, Error, Result};

/// Boundary tolerance when testing `α + 2β = 4`.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitKind {
    /// `α + 2β < 4`: the position converges without scaling to a non-Gaussian
    /// Lévy process whose jumps are the responses `F(z)` of the input jumps.
    NonGaussianFilter,
    /// `α + 2β > 4`: a scaled position obeys a central limit theorem. Reported only.
    GaussianCLT,
    /// `α + 2β = 4`.
    OpenBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    /// `α + β < 2`, or `(α, β) = (2, 0)`.
    Regular,
    NonRegularQuasiErgodic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub alpha: f64,
    pub beta: f64,
    pub limit_kind: LimitKind,
    /// Only meaningful inside [`LimitKind::NonGaussianFilter`].
    pub regularity: Option<Regularity>,
    /// Exponent `2 - β` of the response function, when `β < 2`.
    pub response_exponent: Option<f64>,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::NonGaussianFilter => "NonGaussianFilter",
            LimitKind::GaussianCLT => "GaussianCLT",
            LimitKind::OpenBoundary => "OpenBoundary",
        })
    }
}

impl fmt::Display for Regularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regularity::Regular => "Regular",
            Regularity::NonRegularQuasiErgodic => "NonRegularQuasiErgodic",
        })
    }
}

pub fn classify_regime(alpha: f64, beta: f64) -> Result<RegimeReport> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("must lie in [0, 2], got {alpha}")));
    }
    ensure_finite("beta", beta)?;
    let balance = alpha + 2.0 * beta - 4.0;
    let limit_kind = if balance.abs() <= BOUNDARY_TOL {
        LimitKind::OpenBoundary
    } else if balance < 0.0 {
        LimitKind::NonGaussianFilter
    } else {
        LimitKind::GaussianCLT
    };
    let regularity = (limit_kind == LimitKind::NonGaussianFilter).then(|| {
        if alpha + beta < 2.0 || (alpha == 2.0 && beta == 0.0) {
            Regularity::Regular
        } else {
            Regularity::NonRegularQuasiErgodic
        }
    });
    Ok(RegimeReport {
        alpha,
        beta,
        limit_kind,
        regularity,
        response_exponent: (beta < 2.0).then_some(2.0 - beta),
    })
}
