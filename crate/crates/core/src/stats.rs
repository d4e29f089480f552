//! Small statistics helpers shared by the estimators.

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 32;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
}

/// Batch-means summary of a correlated series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchMeans {
    pub mean: f64,
    pub std_error: f64,
    /// Integrated autocorrelation time implied by the batch variance (1 for independent draws).
    pub tau: f64,
}

/// Standard error from `n_batches` contiguous batches. A trailing remainder
/// shorter than one batch is dropped from the variance but kept in the mean.
/// With fewer than two samples per batch the naive i.i.d. error is used.
pub fn batch_means(xs: &[f64], n_batches: usize) -> BatchMeans {
    let n = xs.len();
    let m = mean(xs);
    let var = variance(xs);
    if n == 0 {
        return BatchMeans { mean: f64::NAN, std_error: f64::NAN, tau: f64::NAN };
    }
    if var == 0.0 {
        return BatchMeans { mean: m, std_error: 0.0, tau: 1.0 };
    }
    let size = n / n_batches.max(1);
    if n_batches < 2 || size < 2 {
        return BatchMeans { mean: m, std_error: (var / n as f64).sqrt(), tau: 1.0 };
    }
    let bm: Vec<f64> = xs.chunks_exact(size).take(n_batches).map(mean).collect();
    let se = (variance(&bm) / bm.len() as f64).sqrt();
    BatchMeans {
        mean: m,
        std_error: se,
        tau: se * se * n as f64 / var,
    }
}

/// Weighted least squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub intercept_se: f64,
    pub r_squared: f64,
    /// Weighted residual sum of squares per degree of freedom.
    pub chi2_dof: f64,
}

/// With `weights = Some(1/σ²)` the parameter errors come from the stated
/// variances, inflated by `sqrt(χ²/dof)` when the scatter exceeds them.
/// Without weights they come from the residual scatter alone.
pub fn linear_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> LinearFit {
    let n = x.len();
    assert_eq!(n, y.len());
    let ones = vec![1.0; n];
    let w = weights.unwrap_or(&ones);
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, c), b)| b * (a - xm) * (c - ym)).sum();
    let syy: f64 = y.iter().zip(w).map(|(c, b)| b * (c - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, c), b)| b * (c - intercept - slope * a).powi(2))
        .sum();
    let dof = n.saturating_sub(2).max(1) as f64;
    let chi2_dof = rss / dof;
    let scale = if weights.is_some() { chi2_dof.max(1.0) } else { chi2_dof };
    let slope_se = (scale / sxx).sqrt();
    let intercept_se = (scale * (1.0 / sw + xm * xm / sxx)).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        slope_se,
        intercept_se,
        r_squared,
        chi2_dof,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y, None);
        assert!((f.slope + 0.5).abs() < 1e-14);
        assert!((f.intercept - 2.0).abs() < 1e-14);
        assert!(f.slope_se < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_errors_follow_variances() {
        // two points each side with sigma = 1: slope se = 1/sqrt(Sxx)
        let x = [0.0, 0.0, 2.0, 2.0];
        let y = [0.0, 0.0, 2.0, 2.0];
        let f = linear_fit(&x, &y, Some(&[1.0; 4]));
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.slope_se - 0.5).abs() < 1e-14);
    }

    #[test]
    fn batch_means_constant_and_iid() {
        let c = batch_means(&[3.0; 100], 32);
        assert_eq!((c.mean, c.std_error), (3.0, 0.0));
        let alt: Vec<f64> = (0..6400).map(|i| (i % 2) as f64).collect();
        let b = batch_means(&alt, 32);
        assert!((b.mean - 0.5).abs() < 1e-12);
        // perfectly balanced batches have identical means
        assert!(b.std_error < 1e-12);
        let short = batch_means(&[0.0, 1.0, 0.0, 1.0], 32);
        assert!((short.std_error - (variance(&[0.0, 1.0, 0.0, 1.0]) / 4.0).sqrt()).abs() < 1e-15);
    }
}
