//! The second-difference functional
//!
//! ```text
//! H(v) = ∫_0^cutoff (F(v+z) + F(v-z) - 2F(v)) z^{-α-1} dz
//! ```
//!
//! for the damped stable density `z^{-α-1} 1_{(0, cutoff]}`.
//!
//! The integrand behaves like `F''(v) z^{1-α}` at the origin and `F(v-z)` has a
//! kink at `z = |v|` when `β > 1`. The range is split at `z_s = 10^{-3} min(|v|, cutoff)`,
//! where a two-term Taylor expansion is integrated in closed form, and at `|v|`.
//! The remaining panels go to a globally adaptive Gauss–Kronrod (7, 15) rule.

use crate::dynamics::{response_unchecked, sgn};
use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Symmetric density `z^{-α-1}` on `0 < |z| <= cutoff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedStable {
    pub alpha: f64,
    pub cutoff: f64,
}

impl DampedStable {
    pub fn new(alpha: f64) -> Self {
        DampedStable { alpha, cutoff: 1.0 }
    }
}

/// Ratio `z_s / min(|v|, cutoff)` below which the Taylor panel is used.
const TAYLOR_FRACTION: f64 = 1e-3;
const MAX_SUBDIVISIONS: usize = 5000;

/// `H(v)` to absolute accuracy `quad_tol`.
pub fn h_eps(v: f64, beta: f64, measure: &DampedStable, quad_tol: f64) -> Result<f64> {
    Ok(h_eps_with_error(v, beta, measure, quad_tol)?.0)
}

/// `H(v)` together with the quadrature error estimate.
pub fn h_eps_with_error(v: f64, beta: f64, measure: &DampedStable, quad_tol: f64) -> Result<(f64, f64)> {
    ensure_finite("v", v)?;
    ensure_finite("beta", beta)?;
    ensure_positive("quad_tol", quad_tol)?;
    ensure_positive("cutoff", measure.cutoff)?;
    let alpha = measure.alpha;
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 2), got {alpha}")));
    }
    if beta >= 2.0 {
        return Err(Error::InfiniteResponse { beta });
    }
    if v == 0.0 {
        return Ok((0.0, 0.0));
    }

    let a = v.abs();
    let cutoff = measure.cutoff;
    let zs = TAYLOR_FRACTION * a.min(cutoff);

    // F''(v) z^2 + F''''(v) z^4 / 12, integrated against z^{-α-1} on (0, zs]
    let f2 = (1.0 - beta) * a.powf(-beta) * sgn(v);
    let f4 = (1.0 - beta) * beta * (beta + 1.0) * a.powf(-beta - 2.0) * sgn(v);
    let taylor = f2 * zs.powf(2.0 - alpha) / (2.0 - alpha) + f4 * zs.powf(4.0 - alpha) / (12.0 * (4.0 - alpha));

    let fv = response_unchecked(v, beta);
    let integrand = |z: f64| {
        let d = response_unchecked(v + z, beta) + response_unchecked(v - z, beta) - 2.0 * fv;
        d * z.powf(-alpha - 1.0)
    };
    let mut breaks = vec![zs];
    if a < cutoff {
        breaks.push(a);
    }
    breaks.push(cutoff);

    let (value, err) = adaptive_gk(&integrand, &breaks, quad_tol, MAX_SUBDIVISIONS)
        .map_err(|(estimate, err)| Error::Budget {
            message: format!("H quadrature did not reach {quad_tol:e} (error estimate {err:e})"),
            estimate: estimate + taylor,
        })?;
    Ok((value + taylor, err))
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

fn gk15(f: &impl Fn(f64) -> f64, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = kronrod.abs();
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let value = kronrod * half;
    let asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * (200.0 * err / asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * abs_k * half.abs();
    if round > err {
        err = round;
    }
    Panel { lo, hi, value, err }
}

/// Globally adaptive GK15 over `[0, breaks...]` panels: `breaks` are the panel
/// endpoints (the first entry is the lower limit). Returns `(value, error)` or,
/// when the subdivision budget runs out, `Err((value, error))`.
pub(crate) fn adaptive_gk(
    f: &impl Fn(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_panels: usize,
) -> std::result::Result<(f64, f64), (f64, f64)> {
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk15(f, w[0], w[1]))
        .collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.err).sum();
        if err <= tol {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err((total, err));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.total_cmp(&b.1.err))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // cannot split further in floating point
            return Err((total, err));
        }
        panels.push(gk15(f, p.lo, mid));
        panels.push(gk15(f, mid, p.hi));
    }
}
