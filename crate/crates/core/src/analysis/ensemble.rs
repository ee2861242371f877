//! Monte Carlo ensembles over an ε grid.
//!
//! Path `i` at grid point `j` is driven by the stream `(master_seed, j, i)`, so
//! every path is reproducible on its own and results do not depend on the
//! number of worker threads. Independent limit samples use the stream groups
//! starting at [`LIMIT_GROUP`].

use rayon::prelude::*;

use crate::dynamics::{ExactSolution, SystemParams};
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::limits::limit_filtered_sum;
use crate::noise::{sample_jump_events, JumpPath, LevyModel, NoiseFamily, TruncatedStableFamily};
use crate::rng::StreamId;

use super::stats::{quantile, hill_k, hill_tail_index, ks_critical_value, ks_two_sample};

/// First stream group used for independent draws of the limit process.
pub const LIMIT_GROUP: u32 = 1 << 16;
/// Default cap on the expected number of jump events of one ensemble.
pub const DEFAULT_EVENT_BUDGET: f64 = 2e9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    TruncatedStable(TruncatedStableFamily),
    Fixed(LevyModel),
}

impl NoiseFamily for NoiseSpec {
    fn model(&self, eps: f64) -> Result<LevyModel> {
        match self {
            NoiseSpec::TruncatedStable(f) => f.model(eps),
            NoiseSpec::Fixed(m) => {
                m.validate()?;
                Ok(*m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub noise: NoiseSpec,
    pub beta: f64,
    pub x0: f64,
    pub v0: f64,
    pub eps_grid: Vec<f64>,
    pub horizon: f64,
    /// Times in `[0, horizon]` at which `X` and `V` are recorded.
    pub eval_times: Vec<f64>,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Fraction of the sample used as top order statistics by the Hill estimator.
    pub hill_fraction: f64,
    /// Worker threads; `0` lets the pool choose.
    pub workers: usize,
    pub event_budget: f64,
}

impl ExperimentConfig {
    pub fn new(noise: NoiseSpec, beta: f64, eps_grid: Vec<f64>, horizon: f64, n_paths: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            noise,
            beta,
            x0: 0.0,
            v0: 0.0,
            eps_grid,
            horizon,
            eval_times: vec![horizon],
            n_paths,
            master_seed,
            hill_fraction: 0.05,
            workers: 0,
            event_budget: DEFAULT_EVENT_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("beta", self.beta)?;
        ensure_finite("x0", self.x0)?;
        ensure_finite("v0", self.v0)?;
        ensure_finite("horizon", self.horizon)?;
        if self.horizon < 0.0 {
            return Err(Error::invalid("horizon", "must be nonnegative"));
        }
        if self.eps_grid.is_empty() {
            return Err(Error::invalid("eps", "grid must be nonempty"));
        }
        for &e in &self.eps_grid {
            ensure_positive("eps", e)?;
            self.noise.model(e)?;
        }
        if self.eps_grid.len() > LIMIT_GROUP as usize {
            return Err(Error::invalid("eps", "grid too long"));
        }
        if self.n_paths == 0 || self.n_paths > u32::MAX as usize {
            return Err(Error::invalid("paths", format!("must lie in [1, 2^32), got {}", self.n_paths)));
        }
        if self.eval_times.is_empty() {
            return Err(Error::invalid("t", "at least one evaluation time is required"));
        }
        crate::dynamics::check_grid(&self.eval_times, self.horizon)?;
        if !(self.hill_fraction > 0.0 && self.hill_fraction < 1.0) {
            return Err(Error::invalid("hill_fraction", format!("must lie in (0, 1), got {}", self.hill_fraction)));
        }
        ensure_positive("event_budget", self.event_budget)?;
        Ok(())
    }

    pub fn params(&self, eps: f64) -> SystemParams {
        SystemParams { beta: self.beta, eps, x0: self.x0, v0: self.v0 }
    }

    /// Expected number of jump events over the whole ensemble.
    pub fn expected_events(&self) -> Result<f64> {
        let mut total = 0.0;
        for &e in &self.eps_grid {
            total += self.noise.model(e)?.total_intensity() * self.horizon * self.n_paths as f64;
        }
        Ok(total)
    }

    pub(crate) fn check_budget(&self, factor: f64) -> Result<()> {
        let expected = factor * self.expected_events()?;
        if expected > self.event_budget {
            return Err(Error::Budget {
                message: format!(
                    "ensemble needs about {expected:.3e} jump events, budget is {:.3e}",
                    self.event_budget
                ),
                estimate: expected,
            });
        }
        Ok(())
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))
    }
}

/// Runs `f(path_index, noise)` for every path of grid point `group`, in path order.
pub(crate) fn map_paths<T, F>(config: &ExperimentConfig, pool: &rayon::ThreadPool, eps: f64, group: u32, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&JumpPath) -> Result<T> + Sync,
{
    let model = config.noise.model(eps)?;
    pool.install(|| {
        (0..config.n_paths as u32)
            .into_par_iter()
            .map(|i| {
                let noise = sample_jump_events(&model, config.horizon, StreamId::new(config.master_seed, group, i))?;
                f(&noise)
            })
            .collect()
    })
}

/// Values of `X` and `V` at one `(ε, t)` across the ensemble, in path order.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSample {
    pub eps: f64,
    pub eval_time: f64,
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub master_seed: u64,
    pub paths: usize,
}

/// `X^ε_t` and `V^ε_t` for every `ε` in the grid and every evaluation time.
/// The result is ordered by ε first, then by evaluation time.
pub fn monte_carlo_ensemble(config: &ExperimentConfig) -> Result<Vec<EnsembleSample>> {
    config.validate()?;
    config.check_budget(1.0)?;
    let pool = config.pool()?;
    let mut out = Vec::with_capacity(config.eps_grid.len() * config.eval_times.len());
    for (j, &eps) in config.eps_grid.iter().enumerate() {
        let params = config.params(eps);
        let states = map_paths(config, &pool, eps, j as u32, |noise| {
            let sol = ExactSolution::new(noise, &params)?;
            Ok(config.eval_times.iter().map(|&t| sol.state_at(t)).collect::<Vec<_>>())
        })?;
        for (k, &t) in config.eval_times.iter().enumerate() {
            out.push(EnsembleSample {
                eps,
                eval_time: t,
                positions: states.iter().map(|s| s[k].0).collect(),
                velocities: states.iter().map(|s| s[k].1).collect(),
                master_seed: config.master_seed,
                paths: config.n_paths,
            });
        }
    }
    Ok(out)
}

/// Draws of the filtered-sum limit at time `t` from noise independent of
/// [`monte_carlo_ensemble`], one vector per ε.
pub fn limit_ensemble(config: &ExperimentConfig, t: f64) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if config.beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta: config.beta });
    }
    config.check_budget(1.0)?;
    let pool = config.pool()?;
    config
        .eps_grid
        .iter()
        .enumerate()
        .map(|(j, &eps)| {
            map_paths(config, &pool, eps, LIMIT_GROUP + j as u32, |noise| {
                Ok(limit_filtered_sum(noise, config.x0, config.v0, config.beta, &[t])?.values[0])
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub eps: f64,
    pub median: f64,
    pub p90: f64,
}

/// Median and 90% quantile of `|X^ε_t - limit|` on common noise, per ε.
pub fn residual_sweep(config: &ExperimentConfig, t: f64) -> Result<Vec<ResidualRow>> {
    config.validate()?;
    if config.beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta: config.beta });
    }
    crate::dynamics::check_grid(&[t], config.horizon)?;
    config.check_budget(1.0)?;
    let pool = config.pool()?;
    let mut rows = Vec::with_capacity(config.eps_grid.len());
    for (j, &eps) in config.eps_grid.iter().enumerate() {
        let params = config.params(eps);
        let res = map_paths(config, &pool, eps, j as u32, |noise| {
            Ok(crate::limits::pathwise_residual(noise, &params, t)?.abs())
        })?;
        rows.push(ResidualRow { eps, median: quantile(&res, 0.5)?, p90: quantile(&res, 0.9)? });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailReport {
    pub eps: f64,
    pub hill_k: usize,
    pub hill_index: f64,
    pub ks_statistic: f64,
    /// 1% two-sample critical value.
    pub ks_critical: f64,
}

/// Hill index of `X^ε_t - x0 - F(v0)` and the KS distance between `X^ε_t` and
/// independent limit draws, per ε.
pub fn tail_test(config: &ExperimentConfig, t: f64) -> Result<Vec<TailReport>> {
    config.validate()?;
    if config.beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta: config.beta });
    }
    crate::dynamics::check_grid(&[t], config.horizon)?;
    config.check_budget(2.0)?;
    let mut cfg = config.clone();
    cfg.eval_times = vec![t];
    let samples = monte_carlo_ensemble(&cfg)?;
    let limits = limit_ensemble(&cfg, t)?;
    let shift = config.x0 + crate::dynamics::response_unchecked(config.v0, config.beta);
    samples
        .iter()
        .zip(&limits)
        .map(|(s, lim)| {
            let centred: Vec<f64> = s.positions.iter().map(|x| x - shift).collect();
            let k = hill_k(centred.len(), config.hill_fraction);
            Ok(TailReport {
                eps: s.eps,
                hill_k: k,
                hill_index: hill_tail_index(&centred, k)?,
                ks_statistic: ks_two_sample(&s.positions, lim)?,
                ks_critical: ks_critical_value(0.01, s.positions.len(), lim.len()),
            })
        })
        .collect()
}
