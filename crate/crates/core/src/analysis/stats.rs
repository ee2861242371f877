//! Distribution distances and tail-index estimation.

use crate::error::{Error, Result};

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sample Kolmogorov–Smirnov statistic `sup_x |F_a(x) - F_b(x)|`, exact
/// over the merged support (ties advance both ECDFs together).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::DegenerateSample("KS needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::DegenerateSample("KS samples contain NaN".into()));
    }
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic two-sample KS critical value at significance `level`:
/// `sqrt(-ln(level/2)/2) · sqrt((n+m)/(n m))`.
pub fn ks_critical_value(level: f64, n: usize, m: usize) -> f64 {
    let c = (-(level / 2.0).ln() / 2.0).sqrt();
    let (n, m) = (n as f64, m as f64);
    c * ((n + m) / (n * m)).sqrt()
}

/// Hill estimator of the tail index of `|samples|` from the top `k` order
/// statistics: `k / Σ_{i<=k} ln(x_(i) / x_(k+1))`.
pub fn hill_tail_index(samples: &[f64], k: usize) -> Result<f64> {
    let n = samples.len();
    if k < 2 || k >= n {
        return Err(Error::invalid("k", format!("need 2 <= k < {n}, got {k}")));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    if abs.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("Hill samples must be finite".into()));
    }
    abs.sort_by(|x, y| y.total_cmp(x));
    let threshold = abs[k];
    if threshold == 0.0 {
        return Err(Error::DegenerateSample("zero values inside the top k + 1 order statistics".into()));
    }
    let spacing: f64 = abs[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    if spacing <= 0.0 {
        return Err(Error::DegenerateSample("top order statistics have zero log-spacing".into()));
    }
    Ok(1.0 / spacing)
}

/// Default `k = ⌈fraction · n⌉`, clamped to a valid order-statistic count.
pub fn hill_k(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).ceil() as usize).clamp(2, n.saturating_sub(1).max(2))
}

/// Hill estimates for several top-fractions.
pub fn hill_sensitivity(samples: &[f64], fractions: &[f64]) -> Result<Vec<(f64, usize, f64)>> {
    fractions
        .iter()
        .map(|&f| {
            let k = hill_k(samples.len(), f);
            Ok((f, k, hill_tail_index(samples, k)?))
        })
        .collect()
}

/// Linear-interpolation quantile (`q` in `[0,1]`) of a nonempty sample.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::DegenerateSample("quantile of an empty sample".into()));
    }
    let s = sorted(xs);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(s[lo] + (s[hi] - s[lo]) * (pos - lo as f64))
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binomial proportion with its standard error `sqrt(p(1-p)/n)`.
pub fn proportion(hits: usize, n: usize) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}
