//! Convergence-rate checks for nonnegative error sequences.
//!
//! A sequence `s_k >= 0` satisfying `s_k^alpha <= beta (s_k - s_{k+1})`
//! reaches zero in finitely many steps when `alpha = 0`, converges linearly
//! when `0 < alpha <= 1`, and converges at least like `k^{-1/(alpha-1)}`
//! when `alpha > 1`. [`classify_rate`] recognises those regimes in data.

use serde::{Deserialize, Serialize};

/// Slack in [`verify_rate_inequality`].
pub const RATE_INEQUALITY_SLACK: f64 = 1e-12;

/// True iff `s` is nonincreasing from `from_index` on and
/// `s_k^alpha <= beta (s_k - s_{k+1}) + 1e-12` for every `k >= from_index`
/// with `s_k > 0` (with `0^0 = 1`, a zero term would otherwise fail the
/// inequality even though the sequence has already converged).
pub fn verify_rate_inequality(s: &[f64], alpha: f64, beta: f64, from_index: usize) -> bool {
    if from_index >= s.len() {
        return true;
    }
    let tail = &s[from_index..];
    if tail.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return false;
    }
    tail.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        if b > a {
            return false;
        }
        if a == 0.0 {
            return true;
        }
        let lhs = if alpha == 0.0 { 1.0 } else { a.powf(alpha) };
        lhs <= beta * (a - b) + RATE_INEQUALITY_SLACK
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Finite,
    Linear,
    Sublinear,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub regime: Regime,
    /// Per-step contraction factor, for `Linear`.
    pub rate: Option<f64>,
    /// `p` in `s_k ~ C k^{-p}`, for `Sublinear`.
    pub exponent: Option<f64>,
    /// Root-mean-square residual of the fit behind the verdict (log space).
    pub fit_residual: f64,
    pub samples_used: usize,
}

impl RateReport {
    fn plain(regime: Regime, samples_used: usize) -> Self {
        Self {
            regime,
            rate: None,
            exponent: None,
            fit_residual: 0.0,
            samples_used,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateConfig {
    /// Shorter sequences are `Inconclusive`.
    pub min_len: usize,
    /// Fraction of the (positive) sequence used for the fits.
    pub tail_fraction: f64,
    /// Upper bound on the variance of successive ratios for `Linear`.
    pub ratio_variance_tol: f64,
    /// Upper bound on the log-log fit residual for `Sublinear`.
    pub power_fit_tol: f64,
    /// Values at or below `atol_rel * s_0` count as zero.
    pub atol_rel: f64,
}

impl Default for RateConfig {
    fn default() -> Self {
        Self {
            min_len: 10,
            tail_fraction: 1.0 / 3.0,
            ratio_variance_tol: 0.01,
            power_fit_tol: 0.05,
            atol_rel: 1e-14,
        }
    }
}

/// Least-squares line through `(t, y)`: returns `(slope, rms residual)`.
fn fit_line(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(a, b)| (b - ym - slope * (a - tm)).powi(2))
        .sum();
    (slope, (ss / n).sqrt())
}

/// Regime of a nonnegative, eventually nonincreasing sequence.
///
/// Values below `atol_rel * s_0` are treated as zero. If the sequence
/// reaches zero, the strictly positive prefix is analysed when it has at
/// least `min_len` entries (a linearly convergent trace eventually hits
/// roundoff); otherwise the verdict is `Finite`. On the last
/// `tail_fraction` of the positive part, `Linear` requires stable
/// successive ratios inside `(0, 1)` and a log-linear fit at least as good
/// as a log-log fit; `Sublinear` requires a good log-log fit with negative
/// slope.
pub fn classify_rate(s: &[f64], cfg: &RateConfig) -> RateReport {
    if s.len() < cfg.min_len.max(2) {
        return RateReport::plain(Regime::Inconclusive, s.len());
    }
    let atol = cfg.atol_rel * s[0].abs();
    let hit = s.iter().position(|&v| v <= atol);
    let prefix = &s[..hit.unwrap_or(s.len())];
    if let Some(h) = hit {
        if prefix.len() < cfg.min_len {
            return RateReport::plain(Regime::Finite, h + 1);
        }
    }
    let fallback = if hit.is_some() { Regime::Finite } else { Regime::Inconclusive };

    let len = prefix.len();
    let tail_len = ((len as f64 * cfg.tail_fraction).ceil() as usize).clamp(3, len);
    let start = len - tail_len;
    let tail = &prefix[start..];
    if tail.iter().any(|v| !v.is_finite()) {
        return RateReport::plain(Regime::Inconclusive, tail_len);
    }

    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / ratios.len() as f64;

    let logs: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
    let ks: Vec<f64> = (start..len).map(|k| k as f64).collect();
    // 1-based index so that s_k = k^{-p} is exactly linear in log-log space.
    let log_ks: Vec<f64> = (start..len).map(|k| ((k + 1) as f64).ln()).collect();
    let (lin_slope, lin_res) = fit_line(&ks, &logs);
    let (pow_slope, pow_res) = fit_line(&log_ks, &logs);

    let rate = lin_slope.exp();
    if var < cfg.ratio_variance_tol && mean > 0.0 && mean < 1.0 && lin_res <= pow_res && rate > 0.0 && rate < 1.0 {
        return RateReport {
            regime: Regime::Linear,
            rate: Some(rate),
            exponent: None,
            fit_residual: lin_res,
            samples_used: tail_len,
        };
    }
    if pow_slope < 0.0 && pow_res <= cfg.power_fit_tol {
        return RateReport {
            regime: Regime::Sublinear,
            rate: None,
            exponent: Some(-pow_slope),
            fit_residual: pow_res,
            samples_used: tail_len,
        };
    }
    RateReport {
        fit_residual: lin_res.min(pow_res),
        ..RateReport::plain(fallback, tail_len)
    }
}
