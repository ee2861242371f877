//! Driving-noise models: symmetric compound Poisson processes and truncated
//! symmetric stable measures, their tails, and exact sampling of jump events.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use statrs::function::erf::erfc;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::rng::StreamId;

/// Symmetric law of a single jump amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    /// `±scale`, each with probability ½.
    Rademacher { scale: f64 },
    /// `a` or `-a` with probability ½ each.
    TwoPoint { a: f64 },
    /// Uniform on `[-half_width, half_width]`.
    UniformSym { half_width: f64 },
    /// Centred Gaussian.
    GaussianSym { std: f64 },
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            JumpLaw::Rademacher { scale } => ensure_positive("scale", scale),
            JumpLaw::TwoPoint { a } => ensure_positive("a", a),
            JumpLaw::UniformSym { half_width } => ensure_positive("half_width", half_width),
            JumpLaw::GaussianSym { std } => ensure_positive("std", std),
        }
    }

    /// `P(|J| > r)` for `r >= 0`.
    pub fn exceedance(&self, r: f64) -> f64 {
        match *self {
            JumpLaw::Rademacher { scale: s } | JumpLaw::TwoPoint { a: s } => {
                if r < s {
                    1.0
                } else {
                    0.0
                }
            }
            JumpLaw::UniformSym { half_width } => (1.0 - r / half_width).clamp(0.0, 1.0),
            JumpLaw::GaussianSym { std } => erfc(r / (std * std::f64::consts::SQRT_2)),
        }
    }

    /// Draws a nonzero amplitude. Continuous laws resample on an exact zero.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Rademacher { scale: s } | JumpLaw::TwoPoint { a: s } => {
                if rng.random::<bool>() {
                    s
                } else {
                    -s
                }
            }
            JumpLaw::UniformSym { half_width } => loop {
                let z = half_width * (2.0 * rng.random::<f64>() - 1.0);
                if z != 0.0 {
                    break z;
                }
            },
            JumpLaw::GaussianSym { std } => loop {
                let z: f64 = rng.sample(StandardNormal);
                if z != 0.0 {
                    break std * z;
                }
            },
        }
    }
}

/// A symmetric Lévy measure with finite total mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyModel {
    /// Jumps arrive at rate `intensity`, amplitudes i.i.d. from `law`.
    CompoundPoisson { intensity: f64, law: JumpLaw },
    /// `μ(dz) = c |z|^{-α-1} dz` restricted to `|z| > ell`.
    TruncatedStable { alpha: f64, c: f64, ell: f64 },
}

impl LevyModel {
    pub fn compound_poisson(intensity: f64, law: JumpLaw) -> Result<Self> {
        let m = LevyModel::CompoundPoisson { intensity, law };
        m.validate()?;
        Ok(m)
    }

    pub fn truncated_stable(alpha: f64, c: f64, ell: f64) -> Result<Self> {
        let m = LevyModel::TruncatedStable { alpha, c, ell };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LevyModel::CompoundPoisson { intensity, law } => {
                ensure_positive("intensity", intensity)?;
                law.validate()
            }
            LevyModel::TruncatedStable { alpha, c, ell } => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(Error::invalid("alpha", format!("must lie in (0, 2), got {alpha}")));
                }
                ensure_positive("c", c)?;
                ensure_positive("ell", ell)?;
                let total = self.total_intensity();
                if !(total.is_finite() && total > 0.0) {
                    return Err(Error::invalid(
                        "ell",
                        format!("total intensity {total} is not finite and positive"),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Total mass `μ(ℝ)`, the arrival rate of jumps.
    pub fn total_intensity(&self) -> f64 {
        match *self {
            LevyModel::CompoundPoisson { intensity, .. } => intensity,
            LevyModel::TruncatedStable { alpha, c, ell } => 2.0 * c * ell.powf(-alpha) / alpha,
        }
    }

    /// `μ(z: |z| > r)`, exact.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::invalid("r", format!("must be positive, got {r}")));
        }
        self.validate()?;
        Ok(match *self {
            LevyModel::CompoundPoisson { intensity, law } => intensity * law.exceedance(r),
            LevyModel::TruncatedStable { alpha, c, ell } => 2.0 * c * r.max(ell).powf(-alpha) / alpha,
        })
    }

    /// One amplitude from the normalised jump law.
    pub fn sample_amplitude<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LevyModel::CompoundPoisson { law, .. } => law.sample(rng),
            LevyModel::TruncatedStable { alpha, ell, .. } => {
                // P(|J| > r) = (r/ell)^{-alpha} for r >= ell; inverted exactly.
                let u = 1.0 - rng.random::<f64>();
                let magnitude = ell * u.powf(-1.0 / alpha);
                if rng.random::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    /// Jump events on `(0, horizon]` drawn from `rng`.
    pub fn sample_events<R: Rng + ?Sized>(&self, horizon: f64, rng: &mut R) -> Result<Vec<Jump>> {
        self.validate()?;
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be finite and >= 0, got {horizon}")));
        }
        let rate = self.total_intensity();
        let expected = rate * horizon;
        if expected > MAX_EXPECTED_EVENTS {
            return Err(Error::Budget {
                message: format!("expected {expected:e} jumps exceeds the per-path limit"),
                estimate: expected,
            });
        }
        let mut events = Vec::with_capacity((expected * 1.1) as usize + 4);
        let mut t = 0.0;
        loop {
            let gap: f64 = rng.sample(Exp1);
            t += gap / rate;
            if t > horizon {
                break;
            }
            let size = self.sample_amplitude(rng);
            // Exp1 can return 0; keep arrival times strictly increasing.
            if events.last().is_some_and(|j: &Jump| j.tau >= t) || t <= 0.0 {
                continue;
            }
            events.push(Jump { tau: t, size });
        }
        Ok(events)
    }
}

const MAX_EXPECTED_EVENTS: f64 = 5.0e8;

/// Samples a [`JumpPath`] on `(0, horizon]` from the stream `id`.
pub fn sample_jump_events(model: &LevyModel, horizon: f64, id: StreamId) -> Result<JumpPath> {
    let mut rng = id.rng();
    let events = model.sample_events(horizon, &mut rng)?;
    Ok(JumpPath {
        horizon,
        events,
        seed: Some(id),
    })
}

/// A single jump event at time `tau` with amplitude `size`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub tau: f64,
    pub size: f64,
}

/// A realised compound-Poisson noise path on `(0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPath {
    horizon: f64,
    events: Vec<Jump>,
    seed: Option<StreamId>,
}

impl JumpPath {
    /// Builds a path from explicit events, checking
    /// `0 < τ_1 < τ_2 < … <= horizon` and nonzero finite amplitudes.
    pub fn new(horizon: f64, events: Vec<Jump>) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return Err(Error::invalid("horizon", format!("must be finite and >= 0, got {horizon}")));
        }
        let mut prev = 0.0;
        for (k, j) in events.iter().enumerate() {
            if !(j.tau > prev && j.tau <= horizon) {
                return Err(Error::invalid(
                    "events",
                    format!("arrival {k} at {} breaks 0 < tau_1 < ... <= {horizon}", j.tau),
                ));
            }
            ensure_finite("jump size", j.size)?;
            if j.size == 0.0 {
                return Err(Error::invalid("events", format!("jump {k} has zero amplitude")));
            }
            prev = j.tau;
        }
        Ok(JumpPath {
            horizon,
            events,
            seed: None,
        })
    }

    /// A path with no jumps.
    pub fn empty(horizon: f64) -> Result<Self> {
        JumpPath::new(horizon, Vec::new())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[Jump] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn seed(&self) -> Option<StreamId> {
        self.seed
    }

    /// `N_t`, the number of arrivals in `(0, t]`.
    pub fn count_until(&self, t: f64) -> usize {
        self.events.partition_point(|j| j.tau <= t)
    }

    /// Same arrival times, every amplitude negated.
    pub fn negated(&self) -> JumpPath {
        JumpPath {
            horizon: self.horizon,
            events: self
                .events
                .iter()
                .map(|j| Jump {
                    tau: j.tau,
                    size: -j.size,
                })
                .collect(),
            seed: self.seed,
        }
    }

    /// Content fingerprint (FNV-1a over the bit patterns of horizon and events).
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: f64| {
            for b in x.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.horizon);
        for j in &self.events {
            eat(j.tau);
            eat(j.size);
        }
        h
    }
}

/// A family `ε ↦ μ^ε` of driving noises.
pub trait NoiseFamily: Sync {
    fn model(&self, eps: f64) -> Result<LevyModel>;
}

impl<F> NoiseFamily for F
where
    F: Fn(f64) -> LevyModel + Sync,
{
    fn model(&self, eps: f64) -> Result<LevyModel> {
        let m = self(eps);
        m.validate()?;
        Ok(m)
    }
}

/// Truncation schedule `ℓ(ε) = scale · ε^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllSchedule {
    pub scale: f64,
    pub power: f64,
}

impl Default for EllSchedule {
    /// `ℓ(ε) = ε`.
    fn default() -> Self {
        EllSchedule {
            scale: 1.0,
            power: 1.0,
        }
    }
}

impl EllSchedule {
    /// A constant truncation level, independent of ε.
    pub fn fixed(ell: f64) -> Self {
        EllSchedule {
            scale: ell,
            power: 0.0,
        }
    }

    pub fn at(&self, eps: f64) -> f64 {
        self.scale * eps.powf(self.power)
    }
}

/// Symmetric α-stable measure `c|z|^{-α-1}dz` truncated below `ℓ(ε)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedStableFamily {
    pub alpha: f64,
    pub c: f64,
    pub ell: EllSchedule,
}

impl NoiseFamily for TruncatedStableFamily {
    fn model(&self, eps: f64) -> Result<LevyModel> {
        LevyModel::truncated_stable(self.alpha, self.c, self.ell.at(eps))
    }
}

/// The same model for every ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedModel(pub LevyModel);

impl NoiseFamily for FixedModel {
    fn model(&self, _eps: f64) -> Result<LevyModel> {
        self.0.validate()?;
        Ok(self.0)
    }
}

/// `sup_{r, ε} r^{alpha_test} μ^ε(|z| > r)` over the supplied grids. A finite
/// value that stays bounded as the grids are refined toward `r → 0` is the
/// numerical signature of a Blumenthal–Getoor index at most `alpha_test`.
pub fn bg_family_bound<F: NoiseFamily + ?Sized>(
    family: &F,
    alpha_test: f64,
    r_grid: &[f64],
    eps_grid: &[f64],
) -> Result<f64> {
    if !(alpha_test > 0.0 && alpha_test <= 2.0) {
        return Err(Error::invalid("alpha_test", format!("must lie in (0, 2], got {alpha_test}")));
    }
    if r_grid.is_empty() || eps_grid.is_empty() {
        return Err(Error::invalid("grid", "r and eps grids must be nonempty"));
    }
    if let Some(r) = r_grid.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::invalid("r_grid", format!("values must lie in (0, 1], got {r}")));
    }
    if let Some(e) = eps_grid.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::invalid("eps_grid", format!("values must lie in (0, 1], got {e}")));
    }
    let mut sup = 0.0_f64;
    for &eps in eps_grid {
        let model = family.model(eps)?;
        for &r in r_grid {
            sup = sup.max(r.powf(alpha_test) * model.tail_mass(r)?);
        }
    }
    Ok(sup)
}
