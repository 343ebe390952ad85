//! Convergence monitoring: the per-block χ² consistency statistic, plateau
//! detection on log–log curves, the truth-to-spread ratio and power-law fits.

use serde::{Deserialize, Serialize};

use crate::apparatus::{CountRecord, Probe};
use crate::error::{invalid, Result};
use crate::quantum::ChiMatrix;

/// Floor on predicted probabilities in χ² denominators.
pub const PROB_FLOOR: f64 = 1e-9;
/// Window of the moving average applied to χ²/b before slope estimation.
pub const CHI2_SMOOTHING: usize = 5;
pub const DEFAULT_PLATEAU_WINDOW: usize = 5;
pub const DEFAULT_PLATEAU_SLOPE: f64 = -0.25;

/// One checkpoint of a convergence trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    #[serde(rename = "N")]
    pub n: u64,
    pub d2_truth: Option<f64>,
    pub dist_size: f64,
    pub chi2_norm: f64,
    pub r_dd: Option<f64>,
    pub ess: f64,
}

/// Which column of a trace to analyse.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Field {
    D2Truth,
    DistSize,
    Chi2Norm,
    RDd,
    Ess,
}

impl Field {
    pub fn get(&self, p: &TracePoint) -> Option<f64> {
        match self {
            Field::D2Truth => p.d2_truth,
            Field::DistSize => Some(p.dist_size),
            Field::Chi2Norm => Some(p.chi2_norm),
            Field::RDd => p.r_dd,
            Field::Ess => Some(p.ess),
        }
    }
}

impl std::str::FromStr for Field {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "d2_truth" => Field::D2Truth,
            "dist_size" => Field::DistSize,
            "chi2_norm" => Field::Chi2Norm,
            "r_dd" => Field::RDd,
            "ess" => Field::Ess,
            _ => return Err(crate::error::Error::Parse(format!("unknown trace field {s:?}"))),
        })
    }
}

/// `Σ_γ (n_γ − b p̂_γ)² / (b p̂_γ)` with `p̂` predicted by `chi_hat` at the
/// record's commanded config. For lossy records `b = n_0 + n_1` and `p̂` is
/// renormalized over the two detectors.
pub fn chi_squared(rec: &CountRecord, chi_hat: &ChiMatrix) -> f64 {
    let b = rec.total();
    if b == 0 {
        return 0.0;
    }
    let probe = Probe::new(&rec.config);
    let p = if chi_hat.is_trace_preserving() {
        let p0 = probe.prob(chi_hat, 0);
        [p0, 1.0 - p0]
    } else {
        let raw = probe.probs(chi_hat);
        let s = raw[0] + raw[1];
        if s <= 0.0 {
            [0.5, 0.5]
        } else {
            [raw[0] / s, raw[1] / s]
        }
    };
    chi_squared_counts(rec.counts, p)
}

/// χ² of two-outcome counts against probabilities `p`.
pub fn chi_squared_counts(n: [u64; 2], p: [f64; 2]) -> f64 {
    let b = (n[0] + n[1]) as f64;
    (0..2)
        .map(|g| {
            let e = b * p[g].max(PROB_FLOOR);
            (n[g] as f64 - e).powi(2) / e
        })
        .sum()
}

/// Centered moving average; windows shrink at the ends.
pub fn moving_average(y: &[f64], window: usize) -> Vec<f64> {
    let half = window.max(1) / 2;
    (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(y.len());
            y[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    (slope, intercept, mx, sxx)
}

/// Smallest `N` at which the log–log slope of `field`, estimated by least
/// squares over `window` consecutive checkpoints centered on it, exceeds
/// `slope_thresh`. χ²/b is smoothed with a 5-point moving average first.
/// Checkpoints where the field is missing or non-positive are dropped.
pub fn plateau_detect(trace: &[TracePoint], field: Field, window: usize, slope_thresh: f64) -> Option<u64> {
    plateau_detect_from(trace, field, window, slope_thresh, 0)
}

/// [`plateau_detect`] restricted to checkpoints with `N ≥ n_min`, which
/// skips the initial transient where the estimate is still the prior mean.
pub fn plateau_detect_from(
    trace: &[TracePoint],
    field: Field,
    window: usize,
    slope_thresh: f64,
    n_min: u64,
) -> Option<u64> {
    let window = window.max(2);
    let pts: Vec<(u64, f64)> = trace
        .iter()
        .filter(|p| p.n >= n_min)
        .filter_map(|p| field.get(p).map(|y| (p.n, y)))
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .collect();
    if pts.len() < window {
        return None;
    }
    let mut y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if field == Field::Chi2Norm {
        y = moving_average(&y, CHI2_SMOOTHING);
    }
    let lx: Vec<f64> = pts.iter().map(|p| (p.0 as f64).ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let half = window / 2;
    (0..=pts.len() - window).find_map(|start| {
        let (slope, ..) = ols(&lx[start..start + window], &ly[start..start + window]);
        (slope > slope_thresh).then_some(pts[start + half].0)
    })
}

/// `y ≈ C·N^alpha` fitted by least squares in log–log space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha: f64,
    #[serde(rename = "stderr_C")]
    pub stderr_c: f64,
    pub stderr_alpha: f64,
    pub n_points: usize,
    /// Smallest and largest `N` among the fitted points.
    pub range: [f64; 2],
}

/// Fits the points with `n_min ≤ N ≤ n_max` and `y > 0`. Needs at least
/// three such points.
pub fn power_law_fit(points: &[(f64, f64)], n_min: f64, n_max: f64) -> Result<PowerLawFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(n, y)| n >= n_min && n <= n_max && n > 0.0 && y > 0.0 && y.is_finite())
        .collect();
    if used.len() < 3 {
        return Err(invalid(format!(
            "power-law fit needs at least 3 positive points in [{n_min}, {n_max}], got {}",
            used.len()
        )));
    }
    let x: Vec<f64> = used.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = used.iter().map(|p| p.1.ln()).collect();
    let (alpha, intercept, mx, sxx) = ols(&x, &y);
    if !(sxx > 0.0) {
        return Err(invalid("power-law fit needs at least two distinct N"));
    }
    let n = used.len() as f64;
    let ssr: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - alpha * a).powi(2)).sum();
    let s2 = ssr / (n - 2.0);
    let se_alpha = (s2 / sxx).sqrt();
    let se_int = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let c = intercept.exp();
    let lo = used.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = used.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(PowerLawFit {
        c,
        alpha,
        stderr_c: c * se_int,
        stderr_alpha: se_alpha,
        n_points: used.len(),
        range: [lo, hi],
    })
}

/// Ratio of the distance to truth and the distribution size; `None` when
/// the truth is unknown or the spread has collapsed below 1e-15.
pub fn r_dd(d2_truth: Option<f64>, dist_size: f64) -> Option<f64> {
    match d2_truth {
        Some(t) if dist_size >= 1e-15 => Some(t / dist_size),
        _ => None,
    }
}
