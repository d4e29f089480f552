use rayon::prelude::*;

use super::direct::sample_percolation_with;
use super::mcmc::{Chain, DeltaK};
use super::{stream, RcParams, SamplerError};
use crate::continuum::{reaches_boundary, Boundary, BoxSpec, RcConfig, Region};
use crate::stats::{batch_means, linear_fit, DEFAULT_BATCHES};

/// Monte Carlo point estimate with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub n_burnin: usize,
    pub seed: u64,
    /// Integrated autocorrelation time in samples (1 for independent draws).
    pub autocorrelation_time: f64,
}

impl EstimateResult {
    /// The chain mixes too slowly for the batch-means error to be trusted.
    pub fn is_suspect(&self) -> bool {
        self.autocorrelation_time > self.n_samples as f64 / 50.0
    }
}

/// Which sampler drives an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerKind {
    /// Direct Poisson sampling when `q = 1`, the Metropolis–Hastings chain otherwise.
    #[default]
    Auto,
    Direct,
    Mcmc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub n_samples: usize,
    /// Sweeps discarded from the empty start of each chain.
    pub n_burnin: usize,
    /// Sweeps between recorded samples.
    pub thinning: usize,
    pub seed: u64,
    /// Independent chains; samples are split evenly and concatenated in chain order.
    pub n_chains: usize,
    pub n_batches: usize,
    pub sampler: SamplerKind,
    pub delta_k: DeltaK,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            n_burnin: 100,
            thinning: 1,
            seed: 0,
            n_chains: 1,
            n_batches: DEFAULT_BATCHES,
            sampler: SamplerKind::Auto,
            delta_k: DeltaK::Auto,
        }
    }
}

impl EstimatorConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self { n_samples, seed, ..Self::default() }
    }

    pub fn with_burnin(mut self, n_burnin: usize) -> Self {
        self.n_burnin = n_burnin;
        self
    }

    pub fn with_chains(mut self, n_chains: usize) -> Self {
        self.n_chains = n_chains.max(1);
        self
    }

    pub fn with_sampler(mut self, sampler: SamplerKind) -> Self {
        self.sampler = sampler;
        self
    }

    pub fn with_thinning(mut self, thinning: usize) -> Self {
        self.thinning = thinning.max(1);
        self
    }

    fn direct(&self, params: &RcParams) -> bool {
        match self.sampler {
            SamplerKind::Auto => params.q() == 1.0,
            SamplerKind::Direct => true,
            SamplerKind::Mcmc => false,
        }
    }
}

/// Observables recorded per sample, row-major, rows ordered by chain then time.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    n_obs: usize,
    values: Vec<f64>,
    n_burnin: usize,
    seed: u64,
    n_batches: usize,
}

impl SampleTable {
    pub fn n_samples(&self) -> usize {
        self.values.len() / self.n_obs.max(1)
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_obs..(i + 1) * self.n_obs]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().skip(j).step_by(self.n_obs).copied().collect()
    }

    pub fn estimate(&self, j: usize) -> EstimateResult {
        self.summarize(&self.column(j))
    }

    /// Batch-means summary of an arbitrary derived series of the same length.
    pub fn summarize(&self, series: &[f64]) -> EstimateResult {
        let bm = batch_means(series, self.n_batches);
        let r = EstimateResult {
            estimate: bm.mean,
            std_error: bm.std_error,
            n_samples: series.len(),
            n_burnin: self.n_burnin,
            seed: self.seed,
            autocorrelation_time: bm.tau,
        };
        if r.is_suspect() {
            log::warn!(
                "autocorrelation time {:.1} exceeds n_samples/50 = {:.1}",
                r.autocorrelation_time,
                r.n_samples as f64 / 50.0
            );
        }
        r
    }

    pub fn n_batches(&self) -> usize {
        self.n_batches
    }
}

/// Record `n_obs` observables per sample. `f` receives the global sample
/// index (chain order, then time) and writes into the provided slice.
pub fn run_samples<F>(
    bx: &BoxSpec,
    params: &RcParams,
    ecfg: &EstimatorConfig,
    n_obs: usize,
    f: F,
) -> Result<SampleTable, SamplerError>
where
    F: Fn(usize, &BoxSpec, &RcConfig, &mut [f64]) + Sync,
{
    if ecfg.n_samples == 0 {
        return Err(SamplerError::NoSamples);
    }
    let rates = params.rates(bx)?;
    let direct = ecfg.direct(params);
    let chains = ecfg.n_chains.max(1).min(ecfg.n_samples);
    let per: Vec<usize> = (0..chains)
        .map(|c| ecfg.n_samples / chains + usize::from(c < ecfg.n_samples % chains))
        .collect();
    let parts: Vec<Result<Vec<f64>, SamplerError>> = per
        .par_iter()
        .enumerate()
        .map(|(c, &n)| {
            let offset: usize = per[..c].iter().sum();
            let mut out = vec![0.0; n * n_obs];
            if direct {
                let mut rng = stream(ecfg.seed, c as u64);
                for (i, row) in out.chunks_exact_mut(n_obs.max(1)).take(n).enumerate() {
                    let cfg = sample_percolation_with(bx, &rates, &mut rng);
                    f(offset + i, bx, &cfg, row);
                }
            } else {
                let mut chain = Chain::new(bx, params, ecfg.seed, c as u64)?.with_strategy(ecfg.delta_k);
                for _ in 0..ecfg.n_burnin {
                    chain.sweep();
                }
                for (i, row) in out.chunks_exact_mut(n_obs.max(1)).take(n).enumerate() {
                    for _ in 0..ecfg.thinning.max(1) {
                        chain.sweep();
                    }
                    f(offset + i, bx, chain.config(), row);
                }
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(ecfg.n_samples * n_obs);
    for p in parts {
        values.extend(p?);
    }
    Ok(SampleTable {
        n_obs,
        values,
        n_burnin: if direct { 0 } else { ecfg.n_burnin },
        seed: ecfg.seed,
        n_batches: ecfg.n_batches,
    })
}

/// Probability of an event.
pub fn estimate_event<F>(
    bx: &BoxSpec,
    params: &RcParams,
    event: F,
    ecfg: &EstimatorConfig,
) -> Result<EstimateResult, SamplerError>
where
    F: Fn(&BoxSpec, &RcConfig) -> bool + Sync,
{
    estimate_observable(bx, params, |b, c| f64::from(u8::from(event(b, c))), ecfg)
}

/// Expectation of a real observable.
pub fn estimate_observable<F>(
    bx: &BoxSpec,
    params: &RcParams,
    observable: F,
    ecfg: &EstimatorConfig,
) -> Result<EstimateResult, SamplerError>
where
    F: Fn(&BoxSpec, &RcConfig) -> f64 + Sync,
{
    let t = run_samples(bx, params, ecfg, 1, |_, b, c, out| out[0] = observable(b, c))?;
    Ok(t.estimate(0))
}

/// The source interval `I = {0} × [−½, ½]`.
pub fn unit_source() -> [Region; 1] {
    [Region::Interval { line: 0, lo: -0.5, hi: 0.5 }]
}

/// Event `I ↔ sides`, validated against `bx` once up front.
pub fn side_reaching(bx: &BoxSpec) -> Result<impl Fn(&BoxSpec, &RcConfig) -> bool + Sync + Copy, SamplerError> {
    reaches_boundary(bx, &RcConfig::empty(bx), &unit_source(), Boundary::Sides)?;
    Ok(|b: &BoxSpec, c: &RcConfig| reaches_boundary(b, c, &unit_source(), Boundary::Sides).unwrap_or(false))
}

/// Fit of `p_m ≈ C e^{−γ m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub gamma: f64,
    pub gamma_se: f64,
    pub c: f64,
    /// Standard error of `ln C`.
    pub log_c_se: f64,
    pub r_squared: f64,
    pub chi2_dof: f64,
    pub used: Vec<f64>,
    /// Abscissae whose estimate was not positive and could not be logged.
    pub dropped: Vec<f64>,
}

impl DecayFit {
    /// `γ̂ / SE(γ̂)`; infinite for an exact fit with positive slope.
    pub fn significance(&self) -> f64 {
        if self.gamma_se == 0.0 {
            if self.gamma > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            self.gamma / self.gamma_se
        }
    }
}

/// Weighted least squares of `ln p` on `m` with delta-method weights `(p/SE)²`.
/// When any positive point has zero error the fit is unweighted.
pub fn estimate_decay_rate(points: &[(f64, EstimateResult)]) -> Result<DecayFit, SamplerError> {
    let (good, bad): (Vec<_>, Vec<_>) = points.iter().partition(|(_, e)| e.estimate > 0.0);
    if good.len() < 3 {
        return Err(SamplerError::InsufficientPoints { needed: 3, got: good.len() });
    }
    let x: Vec<f64> = good.iter().map(|(m, _)| *m).collect();
    let y: Vec<f64> = good.iter().map(|(_, e)| e.estimate.ln()).collect();
    let weights: Option<Vec<f64>> = good
        .iter()
        .map(|(_, e)| (e.std_error > 0.0).then(|| (e.estimate / e.std_error).powi(2)))
        .collect();
    let fit = linear_fit(&x, &y, weights.as_deref());
    Ok(DecayFit {
        gamma: -fit.slope,
        gamma_se: fit.slope_se,
        c: fit.intercept.exp(),
        log_c_se: fit.intercept_se,
        r_squared: fit.r_squared,
        chi2_dof: fit.chi2_dof,
        used: x,
        dropped: bad.iter().map(|(m, _)| *m).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(p: f64) -> EstimateResult {
        EstimateResult {
            estimate: p,
            std_error: 0.0,
            n_samples: 1,
            n_burnin: 0,
            seed: 0,
            autocorrelation_time: 1.0,
        }
    }

    #[test]
    fn synthetic_decay_is_recovered() {
        let pts: Vec<(f64, EstimateResult)> =
            (1..=6).map(|m| (m as f64, exact(0.8 * (-0.7 * m as f64).exp()))).collect();
        let f = estimate_decay_rate(&pts).unwrap();
        assert!((f.gamma - 0.7).abs() < 1e-6);
        assert!((f.c - 0.8).abs() < 1e-6);
        assert!(f.dropped.is_empty());
    }

    #[test]
    fn non_positive_points_are_dropped() {
        let mut pts: Vec<(f64, EstimateResult)> =
            (1..=3).map(|m| (m as f64, exact((-(m as f64)).exp()))).collect();
        pts.push((4.0, exact(0.0)));
        let f = estimate_decay_rate(&pts).unwrap();
        assert_eq!(f.dropped, vec![4.0]);
        pts.truncate(2);
        assert!(matches!(estimate_decay_rate(&pts), Err(SamplerError::InsufficientPoints { .. })));
    }

    #[test]
    fn certain_event_has_no_error() {
        let bx = BoxSpec::new(0, 1, 0.0, 2.0).unwrap();
        for q in [1.0, 2.0] {
            let p = RcParams::new(1.0, 1.0, q).unwrap();
            let r = estimate_event(&bx, &p, |_, _| true, &EstimatorConfig::new(200, 1)).unwrap();
            assert_eq!((r.estimate, r.std_error), (1.0, 0.0));
        }
    }

    #[test]
    fn void_probability() {
        let bx = BoxSpec::new(0, 0, 0.0, 1.5).unwrap();
        let p = RcParams::percolation(1.0, 1.0).unwrap();
        let r = estimate_event(&bx, &p, |_, c| c.n_deaths() == 0, &EstimatorConfig::new(20_000, 4)).unwrap();
        assert!((r.estimate - (-1.5f64).exp()).abs() < 4.0 * r.std_error);
        assert_eq!(r.n_burnin, 0);
    }

    #[test]
    fn chains_are_scheduling_independent() {
        let bx = BoxSpec::new(-2, 2, -1.0, 1.0).unwrap();
        let p = RcParams::new(1.0, 1.0, 2.0).unwrap();
        let ecfg = EstimatorConfig::new(300, 9).with_chains(3).with_burnin(10);
        let ev = side_reaching(&bx).unwrap();
        let a = estimate_event(&bx, &p, ev, &ecfg).unwrap();
        let b = estimate_event(&bx, &p, ev, &ecfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn side_reaching_needs_source_inside() {
        let bx = BoxSpec::new(1, 3, -1.0, 1.0).unwrap();
        assert!(side_reaching(&bx).is_err());
    }
}
