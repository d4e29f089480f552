use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{stream, RcParams, Rates, SamplerError};
use crate::continuum::{BoxSpec, RcConfig};

/// Independent Poisson deaths and bridges in `bx`; `q` is ignored.
pub fn sample_percolation(bx: &BoxSpec, params: &RcParams, seed: u64) -> Result<RcConfig, SamplerError> {
    let rates = params.rates(bx)?;
    Ok(sample_percolation_with(bx, &rates, &mut stream(seed, 0)))
}

/// Draw from an explicit random stream.
pub fn sample_percolation_with<R: Rng + ?Sized>(bx: &BoxSpec, rates: &Rates, rng: &mut R) -> RcConfig {
    loop {
        let deaths: Vec<Vec<f64>> = rates.death.iter().map(|&r| poisson_times(bx, r, rng)).collect();
        let bridges: Vec<Vec<f64>> = rates.bridge.iter().map(|&r| poisson_times(bx, r, rng)).collect();
        let mut all: Vec<f64> = deaths.iter().chain(&bridges).flatten().copied().collect();
        all.sort_unstable_by(f64::total_cmp);
        // a tie has probability zero but would break the distinctness invariant
        if all.windows(2).all(|w| w[0] != w[1]) {
            return RcConfig::from_sorted_parts(deaths, bridges);
        }
    }
}

/// Sorted points of a rate-`rate` Poisson process on the open time interval of `bx`,
/// avoiding the slit instant when the box has a slit.
fn poisson_times<R: Rng + ?Sized>(bx: &BoxSpec, rate: f64, rng: &mut R) -> Vec<f64> {
    let mean = rate * bx.height();
    let n = Poisson::new(mean).map(|p| p.sample(rng) as usize).unwrap_or(0);
    let mut v = Vec::with_capacity(n);
    while v.len() < n {
        let t = uniform_time(bx, rng);
        if let Some(t) = t {
            v.push(t);
        }
    }
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// A uniform time strictly inside the box interval, or `None` on the null
/// outcomes (the lower endpoint, or the slit instant).
pub(crate) fn uniform_time<R: Rng + ?Sized>(bx: &BoxSpec, rng: &mut R) -> Option<f64> {
    let t = bx.start() + bx.height() * rng.random::<f64>();
    let ok = bx.start() < t && t < bx.end() && !(bx.slit().is_some() && t == 0.0);
    ok.then_some(t + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};

    #[test]
    fn deterministic_given_seed() {
        let bx = BoxSpec::slit_box(2, 1, 4.0).unwrap();
        let p = RcParams::percolation(0.7, 1.3).unwrap();
        let a = sample_percolation(&bx, &p, 11).unwrap();
        let b = sample_percolation(&bx, &p, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_percolation(&bx, &p, 12).unwrap());
        let events = a.events(&bx);
        assert!(RcConfig::from_events(&bx, &events).is_ok());
    }

    #[test]
    fn death_count_is_poisson() {
        let bx = BoxSpec::new(0, 0, 0.0, 3.0).unwrap();
        let p = RcParams::percolation(1.0, 1.5).unwrap();
        let rates = p.rates(&bx).unwrap();
        let mut rng = stream(3, 0);
        let n = 10_000;
        let counts: Vec<f64> = (0..n)
            .map(|_| sample_percolation_with(&bx, &rates, &mut rng).n_deaths() as f64)
            .collect();
        let (m, v) = (mean(&counts), variance(&counts));
        let mu = 4.5;
        assert!((m - mu).abs() < 4.0 * (mu / n as f64).sqrt(), "mean {m}");
        // var of the sample variance for Poisson: (mu + 2 mu^2 (n/(n-1))) / n
        let sd_v = ((mu + 2.0 * mu * mu) / n as f64).sqrt();
        assert!((v - mu).abs() < 4.0 * sd_v, "variance {v}");
    }
}
