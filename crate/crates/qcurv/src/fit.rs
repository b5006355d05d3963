//! Least-squares power laws in log-log coordinates.

use crate::error::{QcurvError, Result};

pub const MIN_WINDOW_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    /// `C` in `|y| ≈ C x^slope`.
    pub constant: f64,
    /// RMS misfit of `ln|y|`.
    pub residual: f64,
    pub samples: usize,
}

/// Fits `ln|y| = ln C + slope · ln x` over samples with `x ∈ [lo, hi]`.
pub fn fit_power_law(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Result<PowerLawFit> {
    fit_with_min(xs, ys, lo, hi, MIN_WINDOW_SAMPLES)
}

/// As [`fit_power_law`], for short sweeps where fewer samples are expected.
pub fn fit_with_min(xs: &[f64], ys: &[f64], lo: f64, hi: f64, min: usize) -> Result<PowerLawFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x >= lo && **x <= hi && **x > 0.0 && **y != 0.0)
        .map(|(x, y)| (x.ln(), y.abs().ln()))
        .collect();
    if pts.len() < min.max(2) {
        return Err(QcurvError::EmptyWindow { lo, hi, count: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(QcurvError::EmptyWindow { lo, hi, count: 1 });
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let residual = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / m).sqrt();
    Ok(PowerLawFit { slope, constant: icpt.exp(), residual, samples: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logspace(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect()
    }

    #[test]
    fn exact_power() {
        let x = logspace(1e-3, 1e-2, 30);
        let y: Vec<f64> = x.iter().map(|r| 3.0 * r.powi(-2)).collect();
        let f = fit_power_law(&x, &y, 1e-3, 1e-2).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-6);
        assert!((f.constant - 3.0).abs() < 1e-9);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn perturbed_power() {
        let x = logspace(1e-3, 1e-2, 30);
        let y: Vec<f64> = x.iter().map(|r| r.powi(-2) * (1.0 + r * r)).collect();
        assert!((fit_power_law(&x, &y, 1e-3, 1e-2).unwrap().slope + 2.0).abs() < 1e-3);
    }

    #[test]
    fn constant_has_zero_slope() {
        let x = logspace(1.0, 10.0, 12);
        let f = fit_power_law(&x, &[4.0; 12], 1.0, 10.0).unwrap();
        assert!(f.slope.abs() < 1e-14);
    }

    #[test]
    fn sparse_window() {
        let x = logspace(1.0, 10.0, 12);
        let err = fit_power_law(&x, &[1.0; 12], 2.0, 3.0).unwrap_err();
        assert!(matches!(err, QcurvError::EmptyWindow { .. }));
    }
}
