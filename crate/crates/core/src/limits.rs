//! Small-noise limits of the position process built pathwise from a realised
//! noise, the coupling residual between `X^ε` and its limit, and the
//! space-time rescaling of the velocity.

use crate::dynamics::{check_grid, response_unchecked, sgn, ExactSolution, SystemParams, TrajectoryPath};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::noise::{Jump, JumpPath, LevyModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitRegime {
    /// `β < 2`: `x0 + F(v0) + Σ F(J_k)`.
    FilteredSum,
    /// `β = 2`: `sgn v0 + Σ sgn J_k`.
    LogScaledSigns,
    /// `β > 2`: power of inter-jump gaps.
    PowerScaledGaps,
}

/// Prefactor applied to `X^ε_t` before comparing with the limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scaling {
    Identity,
    /// `(ln 1/ε)^{-1}`.
    InverseLog,
    /// `ε^exponent`.
    Power { exponent: f64 },
}

impl Scaling {
    pub fn for_beta(beta: f64) -> Scaling {
        if beta < 2.0 {
            Scaling::Identity
        } else if beta == 2.0 {
            Scaling::InverseLog
        } else {
            Scaling::Power {
                exponent: power_gap_exponent(beta),
            }
        }
    }

    pub fn factor(&self, eps: f64) -> f64 {
        match *self {
            Scaling::Identity => 1.0,
            Scaling::InverseLog => 1.0 / (1.0 / eps).ln(),
            Scaling::Power { exponent } => eps.powf(exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitPath {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub regime: LimitRegime,
    pub scaling: Scaling,
}

fn check_limit_grid(noise: &JumpPath, t_grid: &[f64]) -> Result<()> {
    check_grid(t_grid, noise.horizon())
}

/// Running sums `base + Σ_{j<=k} f(J_j)` evaluated at each grid time.
fn piecewise_sum(noise: &JumpPath, t_grid: &[f64], base: f64, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut prefix = Vec::with_capacity(noise.len() + 1);
    let mut acc = base;
    prefix.push(acc);
    for j in noise.events() {
        acc += f(j.size);
        prefix.push(acc);
    }
    t_grid.iter().map(|&t| prefix[noise.count_until(t)]).collect()
}

/// `X_t = x0 + F(v0) + Σ_{τ_k <= t} F(J_k)` with `F` the complete response.
/// For symmetric noise this is also the compound-Poisson realisation of the
/// compensated-integral limit, whose compensator vanishes by oddness of `F`.
pub fn limit_filtered_sum(noise: &JumpPath, x0: f64, v0: f64, beta: f64, t_grid: &[f64]) -> Result<LimitPath> {
    ensure_finite("x0", x0)?;
    ensure_finite("v0", v0)?;
    ensure_finite("beta", beta)?;
    if beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta });
    }
    check_limit_grid(noise, t_grid)?;
    let base = x0 + response_unchecked(v0, beta);
    Ok(LimitPath {
        t_grid: t_grid.to_vec(),
        values: piecewise_sum(noise, t_grid, base, |z| response_unchecked(z, beta)),
        regime: LimitRegime::FilteredSum,
        scaling: Scaling::Identity,
    })
}

/// `X_t = sgn v0 + Σ_{τ_k <= t} sgn J_k`, the limit of `(ln 1/ε)^{-1} X^ε_t` at `β = 2`.
pub fn limit_log_signs(noise: &JumpPath, v0: f64, t_grid: &[f64]) -> Result<LimitPath> {
    ensure_finite("v0", v0)?;
    check_limit_grid(noise, t_grid)?;
    Ok(LimitPath {
        t_grid: t_grid.to_vec(),
        values: piecewise_sum(noise, t_grid, sgn(v0), sgn),
        regime: LimitRegime::LogScaledSigns,
        scaling: Scaling::InverseLog,
    })
}

/// `(β-2)/(β-1)`: both the gap exponent and the ε-prefactor exponent for `β > 2`.
pub fn power_gap_exponent(beta: f64) -> f64 {
    (beta - 2.0) / (beta - 1.0)
}

/// `(β-1)^{(β-2)/(β-1)} / (β-2)`.
pub fn power_gap_coefficient(beta: f64) -> f64 {
    (beta - 1.0).powf(power_gap_exponent(beta)) / (beta - 2.0)
}

/// Limit of `ε^{(β-2)/(β-1)} X^ε_t` for `β > 2`:
///
/// ```text
/// (β-1)^p/(β-2) · Σ_{k=0}^{N_t} ((t-τ_k) ∧ (τ_{k+1}-τ_k))^p sgn J_k,   p = (β-2)/(β-1)
/// ```
///
/// with `τ_0 = 0`, `J_0 = v0`.
pub fn limit_power_gaps(noise: &JumpPath, v0: f64, beta: f64, t: f64) -> Result<f64> {
    ensure_finite("v0", v0)?;
    ensure_finite("beta", beta)?;
    if beta <= 2.0 {
        return Err(Error::Regime(format!("power-gap limit requires beta > 2, got {beta}")));
    }
    check_limit_grid(noise, &[t])?;
    let p = power_gap_exponent(beta);
    let n = noise.count_until(t);
    let events = noise.events();
    let mut sum = 0.0;
    let mut start = 0.0;
    let mut sign = sgn(v0);
    for j in events.iter().take(n) {
        sum += (j.tau - start).powf(p) * sign;
        start = j.tau;
        sign = sgn(j.size);
    }
    sum += (t - start).powf(p) * sign;
    Ok(power_gap_coefficient(beta) * sum)
}

/// [`limit_power_gaps`] on a grid.
pub fn limit_power_gaps_path(noise: &JumpPath, v0: f64, beta: f64, t_grid: &[f64]) -> Result<LimitPath> {
    check_limit_grid(noise, t_grid)?;
    let values = t_grid
        .iter()
        .map(|&t| limit_power_gaps(noise, v0, beta, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitPath {
        t_grid: t_grid.to_vec(),
        values,
        regime: LimitRegime::PowerScaledGaps,
        scaling: Scaling::for_beta(beta),
    })
}

/// The limit matching `beta`, evaluated on `t_grid`.
pub fn limit_path(noise: &JumpPath, params: &SystemParams, t_grid: &[f64]) -> Result<LimitPath> {
    if params.beta < 2.0 {
        limit_filtered_sum(noise, params.x0, params.v0, params.beta, t_grid)
    } else if params.beta == 2.0 {
        limit_log_signs(noise, params.v0, t_grid)
    } else {
        limit_power_gaps_path(noise, params.v0, params.beta, t_grid)
    }
}

/// `X^ε_t - x0 - F(v0) - Σ_{τ_k <= t} F(J_k)` on one noise realisation.
pub fn pathwise_residual(noise: &JumpPath, params: &SystemParams, t: f64) -> Result<f64> {
    params.validate()?;
    if params.beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta: params.beta });
    }
    check_limit_grid(noise, &[t])?;
    let sol = ExactSolution::new(noise, params)?;
    let limit = limit_filtered_sum(noise, params.x0, params.v0, params.beta, &[t])?;
    Ok(sol.position_at(t) - limit.values[0])
}

/// Output of [`rescale_to_y`].
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledPath {
    /// `γ = 1/(α+β-1)`.
    pub gamma: f64,
    /// Original time `t` maps to `t · time_scale`, with `time_scale = ε^{-αγ}`.
    pub time_scale: f64,
    pub t_grid: Vec<f64>,
    /// `ε^{-γ} V^ε` read off the original trajectory.
    pub y: Vec<f64>,
    /// `Y` obtained by solving the rescaled system (no `1/ε` in the drift) on
    /// the rescaled noise `ε^{-γ} Z^ε_{· ε^{αγ}}`.
    pub y_direct: Vec<f64>,
    /// `x0 + ε^{(2-β)γ} ∫_0^{tε^{-αγ}} Y ds` from the rescaled solve.
    pub x_from_y: Vec<f64>,
    /// Largest gap between `x_from_y` and the original `X`, relative to the path scale.
    pub max_rel_gap_x: f64,
    /// Largest gap between `y_direct` and `y`, relative to `max(|y|, |y_direct|)`
    /// floored at the smallest normal `f64` (subnormals carry few significant bits).
    pub max_rel_gap_y: f64,
}

fn rel_gap(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / scale.max(a.abs()).max(b.abs())
    }
}

/// Space-time rescaling `Y_t = ε^{-γ} V^ε_{t ε^{αγ}}`, `γ = 1/(α+β-1)`, and the
/// identity `X^ε_t = x0 + ε^{(2-β)γ} ∫_0^{tε^{-αγ}} Y_s ds` checked through an
/// independent solve of the rescaled system.
pub fn rescale_to_y(noise: &JumpPath, traj: &TrajectoryPath, alpha: f64) -> Result<RescaledPath> {
    ensure_positive("alpha", alpha)?;
    if noise.fingerprint() != traj.noise_id {
        return Err(Error::invalid("noise", "trajectory was not produced by this noise path"));
    }
    let SystemParams { beta, eps, x0, v0 } = traj.params;
    let denom = alpha + beta - 1.0;
    if !(denom > 0.0) {
        return Err(Error::Regime(format!("rescaling needs alpha + beta > 1, got {}", alpha + beta)));
    }
    let gamma = 1.0 / denom;
    let time_scale = eps.powf(-alpha * gamma);
    let space_scale = eps.powf(-gamma);
    let x_scale = eps.powf((2.0 - beta) * gamma);
    if ![time_scale, space_scale, x_scale].iter().all(|s| s.is_finite() && *s > 0.0) {
        return Err(Error::invalid("eps", "rescaling factors overflow"));
    }

    let events = noise
        .events()
        .iter()
        .map(|j| Jump {
            tau: j.tau * time_scale,
            size: j.size * space_scale,
        })
        .collect();
    let rescaled_noise = JumpPath::new(noise.horizon() * time_scale, events)?;
    let rescaled_params = SystemParams::new(beta, 1.0, 0.0, v0 * space_scale)?;
    let rescaled = ExactSolution::new(&rescaled_noise, &rescaled_params)?;
    let original = ExactSolution::new(noise, &traj.params)?;

    let t_grid: Vec<f64> = traj.t_grid.iter().map(|&t| t * time_scale).collect();
    let y: Vec<f64> = traj.v.iter().map(|&v| v * space_scale).collect();
    let mut y_direct = Vec::with_capacity(t_grid.len());
    let mut x_from_y = Vec::with_capacity(t_grid.len());
    let (mut gap_x, mut gap_y) = (0.0_f64, 0.0_f64);
    for (i, &u) in t_grid.iter().enumerate() {
        let (integral, yd) = rescaled.state_at(u);
        let xr = x0 + x_scale * integral;
        gap_x = gap_x.max(rel_gap(xr, traj.x[i], original.variation_at(traj.t_grid[i])));
        gap_y = gap_y.max(rel_gap(yd, y[i], f64::MIN_POSITIVE));
        y_direct.push(yd);
        x_from_y.push(xr);
    }
    Ok(RescaledPath {
        gamma,
        time_scale,
        t_grid,
        y,
        y_direct,
        x_from_y,
        max_rel_gap_x: gap_x,
        max_rel_gap_y: gap_y,
    })
}

/// Output stable parameters of the non-linear filter for symmetric α-stable
/// input `c|z|^{-α-1}dz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredStable {
    pub alpha_x: f64,
    pub c_x: f64,
}

/// Pushes `c|z|^{-α-1}dz` forward through `F(z) = |z|^{2-β}sgn z/(2-β)`:
/// the image is `c_X|x|^{-α_X-1}dx` with `α_X = α/(2-β)` and
/// `c_X = c/(2-β)^{α_X+1}`.
pub fn stable_filter_params(alpha: f64, beta: f64, c: f64) -> Result<FilteredStable> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 2), got {alpha}")));
    }
    ensure_finite("beta", beta)?;
    ensure_positive("c", c)?;
    if alpha + 2.0 * beta >= 4.0 {
        return Err(Error::Regime(format!(
            "alpha + 2 beta = {} >= 4: no stable filter limit",
            alpha + 2.0 * beta
        )));
    }
    let alpha_x = alpha / (2.0 - beta);
    Ok(FilteredStable {
        alpha_x,
        c_x: c / (2.0 - beta).powf(alpha_x + 1.0),
    })
}

/// Tail `μ^X(|x| > u) = μ(|F(z)| > u)` of the filtered measure, computed by
/// inverting `|F|` and reading the input tail.
pub fn filtered_tail_mass(model: &LevyModel, beta: f64, u: f64) -> Result<f64> {
    if beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta });
    }
    ensure_positive("u", u)?;
    model.tail_mass(((2.0 - beta) * u).powf(1.0 / (2.0 - beta)))
}
