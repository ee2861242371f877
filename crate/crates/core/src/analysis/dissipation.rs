//! Empirical exceedance probabilities of the velocity.

use crate::dynamics::{check_grid, ExactSolution};
use crate::error::{ensure_positive, Result};

use super::ensemble::{map_paths, ExperimentConfig};
use super::stats::proportion;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationRow {
    pub eps: f64,
    /// `P(sup_{s <= T} |V_s| > R)` and its binomial standard error.
    pub sup_exceed: f64,
    pub sup_se: f64,
    /// `P(|V_t| > δ)` and its binomial standard error.
    pub end_exceed: f64,
    pub end_se: f64,
}

/// Exceedance frequencies of the velocity over `config.eps_grid`: the running
/// supremum over `[0, horizon]` against `r`, and `|V_t|` against `delta`.
pub fn dissipation_probe(config: &ExperimentConfig, r: f64, delta: f64, t: f64) -> Result<Vec<DissipationRow>> {
    config.validate()?;
    ensure_positive("r", r)?;
    ensure_positive("delta", delta)?;
    check_grid(&[t], config.horizon)?;
    let mut cfg = config.clone();
    cfg.eval_times = vec![t];
    cfg.check_budget(1.0)?;
    let pool = cfg.pool()?;
    let mut rows = Vec::with_capacity(cfg.eps_grid.len());
    for (j, &eps) in cfg.eps_grid.iter().enumerate() {
        let params = cfg.params(eps);
        let flags = map_paths(&cfg, &pool, eps, j as u32, |noise| {
            let sol = ExactSolution::new(noise, &params)?;
            Ok((sol.sup_abs_velocity(cfg.horizon) > r, sol.velocity_at(t).abs() > delta))
        })?;
        let n = flags.len();
        let (sup_exceed, sup_se) = proportion(flags.iter().filter(|f| f.0).count(), n);
        let (end_exceed, end_se) = proportion(flags.iter().filter(|f| f.1).count(), n);
        rows.push(DissipationRow { eps, sup_exceed, sup_se, end_exceed, end_se });
    }
    Ok(rows)
}
