//! Deterministic friction flows and the exact event-driven solution of
//!
//! ```text
//! dX = V/ε dt,   dV = -|V|^β sgn V / ε dt + dZ^ε
//! ```
//!
//! for compound-Poisson `Z^ε`, together with a jump-adapted time-stepping
//! oracle used to cross-check it.
//!
//! Between jumps the velocity follows the explicit flow `𝐕_t(v)` and the
//! position advances by `𝐈_t(v) = ε^{-1} ∫_0^t 𝐕_s(v) ds`. The initial velocity
//! is treated as a jump `J_0 = v_0` at `τ_0 = 0`.

use log::warn;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::noise::JumpPath;

/// Distance from `β = 1` or `β = 2` under which the special branch is used.
pub const BRANCH_SNAP: f64 = 1e-9;

/// `sgn` with `sgn 0 = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Which closed form of the flow applies for a given friction exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowBranch {
    /// `β = 1`, Stokes friction.
    Linear,
    /// `β = 2`.
    Logarithmic,
    General(f64),
}

impl FlowBranch {
    /// Selects the branch for `beta`, snapping values within [`BRANCH_SNAP`]
    /// of 1 or 2. The flag reports whether snapping happened.
    pub fn for_beta(beta: f64) -> (FlowBranch, bool) {
        if beta == 1.0 {
            (FlowBranch::Linear, false)
        } else if beta == 2.0 {
            (FlowBranch::Logarithmic, false)
        } else if (beta - 1.0).abs() < BRANCH_SNAP {
            (FlowBranch::Linear, true)
        } else if (beta - 2.0).abs() < BRANCH_SNAP {
            (FlowBranch::Logarithmic, true)
        } else {
            (FlowBranch::General(beta), false)
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            FlowBranch::Linear => 1.0,
            FlowBranch::Logarithmic => 2.0,
            FlowBranch::General(b) => b,
        }
    }

    /// `𝐕_t(v)`; no validation.
    pub fn velocity(&self, v: f64, t: f64, eps: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let a = v.abs();
        let mag = match *self {
            FlowBranch::Linear => a * (-t / eps).exp(),
            FlowBranch::Logarithmic => a / (1.0 + a * t / eps),
            FlowBranch::General(beta) => {
                let s = (1.0 - beta) * t / (eps * a.powf(1.0 - beta));
                if s >= 1.0 {
                    0.0
                } else {
                    a * ((-s).ln_1p() / (1.0 - beta)).exp()
                }
            }
        };
        mag * sgn(v)
    }

    /// `𝐈_t(v)`; no validation.
    pub fn displacement(&self, v: f64, t: f64, eps: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let a = v.abs();
        let mag = match *self {
            FlowBranch::Linear => -a * (-t / eps).exp_m1(),
            FlowBranch::Logarithmic => (a * t / eps).ln_1p(),
            FlowBranch::General(beta) => {
                // (|v|^{1-β} - (1-β)t/ε)_+^{(β-2)/(β-1)} - |v|^{2-β}, factored as
                // |v|^{2-β} [(1 - s)_+^p - 1] to avoid cancellation for small t.
                let s = (1.0 - beta) * t / (eps * a.powf(1.0 - beta));
                let p = (beta - 2.0) / (beta - 1.0);
                let bracket = if s >= 1.0 { -1.0 } else { (p * (-s).ln_1p()).exp_m1() };
                a.powf(2.0 - beta) * bracket / (beta - 2.0)
            }
        };
        mag * sgn(v)
    }
}

/// Complete response `F(v) = |v|^{2-β} sgn v / (2-β)` to a velocity kick `v`.
pub fn response_f(v: f64, beta: f64) -> Result<f64> {
    ensure_finite("v", v)?;
    ensure_finite("beta", beta)?;
    if beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta });
    }
    Ok(response_unchecked(v, beta))
}

#[inline]
pub(crate) fn response_unchecked(v: f64, beta: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.abs().powf(2.0 - beta) * sgn(v) / (2.0 - beta)
    }
}

fn check_flow_args(v: f64, t: f64, eps: f64, beta: f64) -> Result<FlowBranch> {
    ensure_finite("v", v)?;
    ensure_finite("t", t)?;
    ensure_finite("beta", beta)?;
    ensure_positive("eps", eps)?;
    if t < 0.0 {
        return Err(Error::invalid("t", format!("must be >= 0, got {t}")));
    }
    let (branch, snapped) = FlowBranch::for_beta(beta);
    if snapped {
        warn!("beta = {beta} is within {BRANCH_SNAP:e} of {}; using that branch", branch.beta());
    }
    Ok(branch)
}

/// Velocity `𝐕^ε_t(v)` of the friction flow started at `v`.
pub fn flow_velocity(v: f64, t: f64, eps: f64, beta: f64) -> Result<f64> {
    Ok(check_flow_args(v, t, eps, beta)?.velocity(v, t, eps))
}

/// Displacement `𝐈^ε_t(v)` accumulated by the friction flow started at `v`.
pub fn flow_displacement(v: f64, t: f64, eps: f64, beta: f64) -> Result<f64> {
    Ok(check_flow_args(v, t, eps, beta)?.displacement(v, t, eps))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub beta: f64,
    pub eps: f64,
    pub x0: f64,
    pub v0: f64,
}

impl SystemParams {
    pub fn new(beta: f64, eps: f64, x0: f64, v0: f64) -> Result<Self> {
        let p = SystemParams { beta, eps, x0, v0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("beta", self.beta)?;
        ensure_positive("eps", self.eps)?;
        ensure_finite("x0", self.x0)?;
        ensure_finite("v0", self.v0)
    }

    pub fn with_eps(self, eps: f64) -> Self {
        SystemParams { eps, ..self }
    }
}

/// Non-fatal events recorded while solving.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveDiagnostics {
    /// β was snapped onto a special branch.
    pub snapped_beta: bool,
    /// Oracle steps whose velocity update crossed zero and was clamped.
    pub zero_clamps: u64,
}

/// Sampled `(t, X, V)` for one noise realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPath {
    pub t_grid: Vec<f64>,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub params: SystemParams,
    /// [`JumpPath::fingerprint`] of the driving noise.
    pub noise_id: u64,
    pub diagnostics: SolveDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    start: f64,
    /// Velocity right after the jump at `start`.
    u: f64,
    /// Position at `start`.
    x: f64,
    /// `|x0|` plus the absolute displacements of all earlier segments.
    var: f64,
}

/// Piecewise closed-form solution on one noise path. Cheap to evaluate at any
/// `t` in `[0, horizon]`.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    branch: FlowBranch,
    params: SystemParams,
    horizon: f64,
    segments: Vec<Segment>,
    noise_id: u64,
    snapped: bool,
}

impl ExactSolution {
    pub fn new(noise: &JumpPath, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let (branch, snapped) = FlowBranch::for_beta(params.beta);
        if snapped {
            warn!("beta = {} snapped to {}", params.beta, branch.beta());
        }
        let eps = params.eps;
        let mut segments = Vec::with_capacity(noise.len() + 1);
        let mut seg = Segment {
            start: 0.0,
            u: params.v0,
            x: params.x0,
            var: params.x0.abs(),
        };
        for jump in noise.events() {
            let gap = jump.tau - seg.start;
            let dx = branch.displacement(seg.u, gap, eps);
            let v_minus = branch.velocity(seg.u, gap, eps);
            segments.push(seg);
            seg = Segment {
                start: jump.tau,
                u: v_minus + jump.size,
                x: seg.x + dx,
                var: seg.var + dx.abs(),
            };
        }
        segments.push(seg);
        Ok(ExactSolution {
            branch,
            params: *params,
            horizon: noise.horizon(),
            segments,
            noise_id: noise.fingerprint(),
            snapped,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn segment_at(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.start <= t);
        &self.segments[idx.saturating_sub(1)]
    }

    /// `(X_t, V_t)`, right-continuous in `V` at jump times. `t` is not range-checked.
    pub fn state_at(&self, t: f64) -> (f64, f64) {
        let s = self.segment_at(t);
        let dt = t - s.start;
        (
            s.x + self.branch.displacement(s.u, dt, self.params.eps),
            self.branch.velocity(s.u, dt, self.params.eps),
        )
    }

    pub fn position_at(&self, t: f64) -> f64 {
        let s = self.segment_at(t);
        s.x + self.branch.displacement(s.u, t - s.start, self.params.eps)
    }

    /// `|x0| + ∫_0^t |dX|`, the natural scale for relative position errors.
    pub fn variation_at(&self, t: f64) -> f64 {
        let s = self.segment_at(t);
        s.var + self.branch.displacement(s.u, t - s.start, self.params.eps).abs()
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        let s = self.segment_at(t);
        self.branch.velocity(s.u, t - s.start, self.params.eps)
    }

    /// `sup_{s <= t} |V_s|`. Flows decrease `|V|` monotonically, so the
    /// supremum is attained at a post-jump value.
    pub fn sup_abs_velocity(&self, t: f64) -> f64 {
        let n = self.segments.partition_point(|s| s.start <= t);
        self.segments[..n.max(1)]
            .iter()
            .fold(0.0_f64, |m, s| m.max(s.u.abs()))
    }

    pub fn sample(&self, t_grid: &[f64]) -> Result<TrajectoryPath> {
        check_grid(t_grid, self.horizon)?;
        let (x, v) = t_grid.iter().map(|&t| self.state_at(t)).unzip();
        Ok(TrajectoryPath {
            t_grid: t_grid.to_vec(),
            x,
            v,
            params: self.params,
            noise_id: self.noise_id,
            diagnostics: SolveDiagnostics {
                snapped_beta: self.snapped,
                zero_clamps: 0,
            },
        })
    }
}

pub(crate) fn check_grid(t_grid: &[f64], horizon: f64) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for &t in t_grid {
        if !(t >= 0.0 && t <= horizon) {
            return Err(Error::invalid(
                "t_grid",
                format!("time {t} lies outside [0, {horizon}]"),
            ));
        }
        if t <= prev {
            return Err(Error::invalid("t_grid", "times must be strictly increasing"));
        }
        prev = t;
    }
    Ok(())
}

/// Exact event-driven solution sampled on `t_grid`.
pub fn solve_exact(noise: &JumpPath, params: &SystemParams, t_grid: &[f64]) -> Result<TrajectoryPath> {
    ExactSolution::new(noise, params)?.sample(t_grid)
}

/// Upper bound on oracle substeps per call.
pub const ORACLE_MAX_STEPS: f64 = 2.0e10;

/// Jump-adapted explicit stepping: explicit Euler for `V`, trapezoidal
/// accumulation of `X`, fixed substeps no longer than `dt` between consecutive
/// jump or grid times, jumps applied atomically at their arrival times.
pub fn solve_oracle(
    noise: &JumpPath,
    params: &SystemParams,
    dt: f64,
    t_grid: &[f64],
) -> Result<TrajectoryPath> {
    params.validate()?;
    ensure_positive("dt", dt)?;
    check_grid(t_grid, noise.horizon())?;
    let t_end = t_grid.last().copied().unwrap_or(0.0);
    let steps_estimate = t_end / dt + (noise.len() + t_grid.len()) as f64;
    if steps_estimate > ORACLE_MAX_STEPS {
        return Err(Error::Budget {
            message: format!("oracle would need about {steps_estimate:e} steps"),
            estimate: steps_estimate,
        });
    }

    let beta = params.beta;
    let inv_eps = 1.0 / params.eps;
    let drift = |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(beta) * sgn(v) };
    let mut clamps = 0u64;
    let mut advance = |x: &mut f64, v: &mut f64, span: f64| {
        if span <= 0.0 {
            return;
        }
        let n = (span / dt).ceil().max(1.0);
        let h = span / n;
        for _ in 0..n as u64 {
            let v_old = *v;
            let mut v_new = v_old - h * inv_eps * drift(v_old);
            if v_new * v_old < 0.0 {
                v_new = 0.0;
                clamps += 1;
            }
            *x += 0.5 * h * inv_eps * (v_old + v_new);
            *v = v_new;
        }
    };

    let jumps = noise.events();
    let mut next_jump = 0;
    let (mut x, mut v) = (params.x0, params.v0);
    let mut now = 0.0;
    let mut xs = Vec::with_capacity(t_grid.len());
    let mut vs = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while next_jump < jumps.len() && jumps[next_jump].tau <= target {
            let j = jumps[next_jump];
            advance(&mut x, &mut v, j.tau - now);
            v += j.size;
            now = j.tau;
            next_jump += 1;
        }
        advance(&mut x, &mut v, target - now);
        now = target;
        xs.push(x);
        vs.push(v);
    }

    Ok(TrajectoryPath {
        t_grid: t_grid.to_vec(),
        x: xs,
        v: vs,
        params: *params,
        noise_id: noise.fingerprint(),
        diagnostics: SolveDiagnostics {
            snapped_beta: false,
            zero_clamps: clamps,
        },
    })
}
