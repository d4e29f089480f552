//! Sampling the continuum percolation and random-cluster measures.
//!
//! * [`sample_percolation`] draws independent Poisson deaths and bridges (`q = 1`).
//! * [`Chain`] runs a birth/death Metropolis–Hastings chain targeting the
//!   `q^{k(ω)}`-weighted measure for any `q ≥ 1`.
//! * [`estimate_event`] and friends turn either sampler into Monte Carlo
//!   estimates with batch-means standard errors.
//!
//! Every random stream is a ChaCha8 generator seeded from the user seed with
//! the chain index as its stream number, so results are reproducible across
//! platforms and independent of thread scheduling.

mod direct;
mod domination;
mod estimate;
mod mcmc;

pub use direct::{sample_percolation, sample_percolation_with};
pub use domination::{check_domination, compare_measures, ComparisonRow, DominationReport, Statistic};
pub use estimate::{
    estimate_decay_rate, estimate_event, estimate_observable, run_samples, side_reaching, unit_source,
    DecayFit, EstimateResult, EstimatorConfig, SampleTable, SamplerKind,
};
pub use mcmc::{acceptance, mcmc_sweep, target_density, transition_density, Chain, DeltaK, Move};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::continuum::{BoxSpec, GeometryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("q = {0} is below 1")]
    QBelowOne(f64),
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("disorder window does not cover {what} {line}")]
    MissingIntensity { what: &'static str, line: i64 },
    #[error("need at least one sample")]
    NoSamples,
    #[error("need at least {needed} usable points for a fit, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("configurations differ by more than one event")]
    NotAdjacent,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Site- and bond-dependent intensities over a window of lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Disorder {
    first_line: i64,
    deaths: Vec<f64>,
    bridges: Vec<f64>,
}

impl Disorder {
    /// `deaths[j]` is `δ` on line `first_line + j`; `bridges[j]` is `λ` between
    /// lines `first_line + j` and `first_line + j + 1`.
    pub fn new(first_line: i64, deaths: Vec<f64>, bridges: Vec<f64>) -> Result<Self, SamplerError> {
        for &v in &deaths {
            positive("death intensity", v)?;
        }
        for &v in &bridges {
            positive("bridge intensity", v)?;
        }
        Ok(Self { first_line, deaths, bridges })
    }

    pub fn first_line(&self) -> i64 {
        self.first_line
    }

    pub fn deaths(&self) -> &[f64] {
        &self.deaths
    }

    pub fn bridges(&self) -> &[f64] {
        &self.bridges
    }
}

/// Intensities and cluster weight of the random-cluster measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RcParams {
    lambda: f64,
    delta: f64,
    q: f64,
    disorder: Option<Disorder>,
}

fn positive(what: &'static str, value: f64) -> Result<f64, SamplerError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(SamplerError::NonPositive { what, value })
    }
}

impl RcParams {
    pub fn new(lambda: f64, delta: f64, q: f64) -> Result<Self, SamplerError> {
        positive("lambda", lambda)?;
        positive("delta", delta)?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(SamplerError::QBelowOne(q));
        }
        Ok(Self { lambda, delta, q, disorder: None })
    }

    /// Percolation (`q = 1`).
    pub fn percolation(lambda: f64, delta: f64) -> Result<Self, SamplerError> {
        Self::new(lambda, delta, 1.0)
    }

    /// Replace the homogeneous intensities by per-line and per-pair values.
    /// The homogeneous `λ`, `δ` are kept as the reference pair.
    pub fn with_disorder(mut self, disorder: Disorder) -> Self {
        self.disorder = Some(disorder);
        self
    }

    pub fn with_q(mut self, q: f64) -> Result<Self, SamplerError> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(SamplerError::QBelowOne(q));
        }
        self.q = q;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `θ = λ/δ`.
    pub fn theta(&self) -> f64 {
        self.lambda / self.delta
    }

    pub fn disorder(&self) -> Option<&Disorder> {
        self.disorder.as_ref()
    }

    /// Intensities resolved on every line and pair of `bx`.
    pub fn rates(&self, bx: &BoxSpec) -> Result<Rates, SamplerError> {
        let (death, bridge) = match &self.disorder {
            None => (vec![self.delta; bx.width()], vec![self.lambda; bx.n_pairs()]),
            Some(d) => {
                let pick = |what, v: &[f64], n: usize| -> Result<Vec<f64>, SamplerError> {
                    (0..n)
                        .map(|i| {
                            let line = bx.first_line() + i as i64;
                            usize::try_from(line - d.first_line)
                                .ok()
                                .and_then(|j| v.get(j).copied())
                                .ok_or(SamplerError::MissingIntensity { what, line })
                        })
                        .collect()
                };
                (
                    pick("line", &d.deaths, bx.width())?,
                    pick("pair", &d.bridges, bx.n_pairs())?,
                )
            }
        };
        Ok(Rates::new(death, bridge, bx.height(), self.disorder.is_none()))
    }
}

/// Per-line death and per-pair bridge intensities in one box.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    pub death: Vec<f64>,
    pub bridge: Vec<f64>,
    death_cdf: Vec<f64>,
    bridge_cdf: Vec<f64>,
    height: f64,
    uniform: bool,
}

impl Rates {
    fn new(death: Vec<f64>, bridge: Vec<f64>, height: f64, uniform: bool) -> Self {
        let cdf = |v: &[f64]| {
            v.iter()
                .scan(0.0, |acc, &r| {
                    *acc += r;
                    Some(*acc)
                })
                .collect()
        };
        Self {
            death_cdf: cdf(&death),
            bridge_cdf: cdf(&bridge),
            death,
            bridge,
            height,
            uniform,
        }
    }

    /// Expected number of deaths in the box, `Σ δ_x · β`.
    pub fn death_mass(&self) -> f64 {
        self.death_cdf.last().copied().unwrap_or(0.0) * self.height
    }

    /// Expected number of bridges in the box, `Σ λ_{x,x+1} · β`.
    pub fn bridge_mass(&self) -> f64 {
        self.bridge_cdf.last().copied().unwrap_or(0.0) * self.height
    }

    /// Line index drawn in proportion to its death intensity, from `u ∈ [0, 1)`.
    fn pick_line(&self, u: f64) -> usize {
        pick(&self.death_cdf, u, self.uniform)
    }

    fn pick_pair(&self, u: f64) -> usize {
        pick(&self.bridge_cdf, u, self.uniform)
    }
}

fn pick(cdf: &[f64], u: f64, uniform: bool) -> usize {
    let n = cdf.len();
    let j = if uniform {
        (u * n as f64) as usize
    } else {
        let total = cdf[n - 1];
        cdf.partition_point(|&c| c <= u * total)
    };
    j.min(n - 1)
}

/// The random stream for chain `chain` under `seed`.
pub fn stream(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn params_validation() {
        assert!(RcParams::new(1.0, 1.0, 0.5).is_err());
        assert!(RcParams::new(0.0, 1.0, 2.0).is_err());
        assert!(RcParams::new(1.0, f64::NAN, 2.0).is_err());
        let p = RcParams::new(0.5, 2.0, 2.0).unwrap();
        assert_eq!(p.theta(), 0.25);
    }

    #[test]
    fn disorder_window_must_cover_box() {
        let bx = BoxSpec::new(-1, 1, 0.0, 2.0).unwrap();
        let d = Disorder::new(-1, vec![1.0, 2.0, 3.0], vec![0.5, 0.25]).unwrap();
        let p = RcParams::percolation(1.0, 1.0).unwrap().with_disorder(d);
        let r = p.rates(&bx).unwrap();
        assert_eq!(r.death_mass(), 12.0);
        assert_eq!(r.bridge_mass(), 1.5);
        assert_eq!(r.pick_line(0.0), 0);
        assert_eq!(r.pick_line(0.2), 1);
        assert_eq!(r.pick_line(0.99), 2);
        let wide = BoxSpec::new(-2, 1, 0.0, 2.0).unwrap();
        assert_eq!(
            p.rates(&wide),
            Err(SamplerError::MissingIntensity { what: "line", line: -2 })
        );
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 0), |r, _| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 0), |r, _| Some(r.random())).collect();
        let c: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 1), |r, _| Some(r.random())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
