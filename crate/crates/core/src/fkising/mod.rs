//! Ising spins on random-cluster configurations and the quantities built from them.
//!
//! With `q = 2` the clusters of the continuum random-cluster measure carry
//! independent fair spins, which reproduces the ground-state statistics of the
//! transverse-field chain. Spin-dependent estimators here average the exact
//! conditional probabilities given the clusters instead of sampling spins.

mod mixing;
mod slit;

pub use mixing::{composite_t, mixing_diagnostics, MixingGeometry, MixingReport};
pub use slit::{
    default_beta, ed_index, estimate_am, estimate_correlation, estimate_correlations, estimate_reduced_matrix,
    pattern_index, pattern_spins, probe_beta, BetaProbe, PairCorrelation, ReducedMatrixEstimate, SlitStats,
    MAX_MATRIX_BLOCK,
};

use rand::Rng;
use thiserror::Error;

use crate::continuum::{ClusterLabeling, GeometryError, Region};
use crate::rcsampler::{stream, SamplerError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FkError {
    #[error("this estimator needs q = 2, got q = {0}")]
    RequiresQ2(f64),
    #[error("the box has no slit")]
    NoSlit,
    #[error("block length {requested} differs from the slit length {slit}")]
    SlitMismatch { requested: usize, slit: usize },
    #[error("the box must not have a slit")]
    HasSlit,
    #[error("block length {0} exceeds the supported maximum {MAX_MATRIX_BLOCK}")]
    BlockTooLarge(usize),
    #[error("boundary spins {0} and {1} meet in one cluster")]
    Inadmissible(i8, i8),
    #[error("spin values must be +1 or -1, got {0}")]
    BadSpin(i8),
    #[error("{0} is empty for these parameters")]
    EmptySet(&'static str),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Spins imposed on the two vertical sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinBoundary {
    /// One value on both sides.
    Uniform(i8),
    /// Separate values on the left and right sides.
    PerSide { left: i8, right: i8 },
}

impl SpinBoundary {
    fn sides(self) -> Result<(i8, i8), FkError> {
        let (l, r) = match self {
            SpinBoundary::Uniform(s) => (s, s),
            SpinBoundary::PerSide { left, right } => (left, right),
        };
        for s in [l, r] {
            if s != 1 && s != -1 {
                return Err(FkError::BadSpin(s));
            }
        }
        Ok((l, r))
    }
}

/// A spin for every cluster and the induced slit vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinAssignment {
    pub cluster_spins: Vec<i8>,
    /// `σ_L^+`, indexed by `x = 0..=L`; empty without a slit.
    pub sigma_plus: Vec<i8>,
    /// `σ_L^−`.
    pub sigma_minus: Vec<i8>,
}

impl SpinAssignment {
    pub fn spin_of(&self, labeling: &ClusterLabeling, line: i64, time: f64) -> Result<i8, FkError> {
        Ok(self.cluster_spins[labeling.label_of_point(line, time)?])
    }
}

/// Assign spins on stream `(seed, 0)`.
pub fn assign_spins(
    labeling: &ClusterLabeling,
    boundary: Option<SpinBoundary>,
    seed: u64,
) -> Result<SpinAssignment, FkError> {
    assign_spins_with(labeling, boundary, &mut stream(seed, 0))
}

/// Free clusters get independent fair spins; clusters meeting a side take its spin.
pub fn assign_spins_with<R: Rng + ?Sized>(
    labeling: &ClusterLabeling,
    boundary: Option<SpinBoundary>,
    rng: &mut R,
) -> Result<SpinAssignment, FkError> {
    let mut spins: Vec<i8> = (0..labeling.n_clusters())
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    if let Some(b) = boundary {
        let (left, right) = b.sides()?;
        let bx = labeling.boxspec();
        let mut fixed: Vec<Option<i8>> = vec![None; labeling.n_clusters()];
        let last = bx.last_line();
        for (line, s) in [(bx.first_line(), left), (last, right)] {
            let labels = labeling.region_labels(&Region::Interval { line, lo: bx.start(), hi: bx.end() })?;
            for l in labels {
                match fixed[l] {
                    Some(t) if t != s => return Err(FkError::Inadmissible(t, s)),
                    _ => fixed[l] = Some(s),
                }
            }
        }
        for (sp, f) in spins.iter_mut().zip(fixed) {
            if let Some(f) = f {
                *sp = f;
            }
        }
    }
    let (sigma_plus, sigma_minus) = match labeling.boxspec().slit() {
        Some(len) => {
            let mut up = Vec::with_capacity(len + 1);
            let mut down = Vec::with_capacity(len + 1);
            for x in 0..=len as i64 {
                up.push(spins[labeling.slit_upper(x)?]);
                down.push(spins[labeling.slit_lower(x)?]);
            }
            (up, down)
        }
        None => (Vec::new(), Vec::new()),
    };
    Ok(SpinAssignment {
        cluster_spins: spins,
        sigma_plus,
        sigma_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{BoxSpec, Event, RcConfig, SideBc};

    #[test]
    fn single_cluster_spin_is_fair() {
        let bx = BoxSpec::new(0, 0, 0.0, 1.0).unwrap();
        let lab = ClusterLabeling::build(&bx, &RcConfig::empty(&bx));
        let mut rng = stream(1, 0);
        let n = 20_000;
        let sum: f64 = (0..n)
            .map(|_| assign_spins_with(&lab, None, &mut rng).unwrap().cluster_spins[0] as f64)
            .sum();
        assert!((sum / n as f64).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn boundary_spins_are_imposed() {
        let bx = BoxSpec::new(-1, 1, -1.0, 1.0).unwrap();
        let empty = RcConfig::empty(&bx);
        let lab = ClusterLabeling::build(&bx, &empty);
        let s = assign_spins(&lab, Some(SpinBoundary::Uniform(1)), 3).unwrap();
        assert_eq!(s.spin_of(&lab, -1, 0.0).unwrap(), 1);
        assert_eq!(s.spin_of(&lab, 1, 0.0).unwrap(), 1);
        let pm = assign_spins(&lab, Some(SpinBoundary::PerSide { left: 1, right: -1 }), 3).unwrap();
        assert_eq!((pm.spin_of(&lab, -1, 0.5).unwrap(), pm.spin_of(&lab, 1, 0.5).unwrap()), (1, -1));
        assert!(matches!(assign_spins(&lab, Some(SpinBoundary::Uniform(0)), 3), Err(FkError::BadSpin(0))));
    }

    #[test]
    fn conflicting_boundary_is_inadmissible() {
        let bx = BoxSpec::new(0, 1, 0.0, 1.0).unwrap();
        let bridged = RcConfig::from_events(&bx, &[Event::Bridge { line: 0, time: 0.5 }]).unwrap();
        let lab = ClusterLabeling::build(&bx, &bridged);
        let eta = SpinBoundary::PerSide { left: 1, right: -1 };
        assert!(matches!(assign_spins(&lab, Some(eta), 0), Err(FkError::Inadmissible(..))));
        let wired = bx.clone().side_bc(SideBc::Wired);
        let lab = ClusterLabeling::build(&wired, &RcConfig::empty(&wired));
        assert!(assign_spins(&lab, Some(eta), 0).is_err());
        assert!(assign_spins(&lab, Some(SpinBoundary::Uniform(-1)), 0).is_ok());
    }

    #[test]
    fn slit_vectors_without_bridges() {
        let bx = BoxSpec::slit_box(1, 2, 2.0).unwrap();
        let lab = ClusterLabeling::build(&bx, &RcConfig::empty(&bx));
        let s = assign_spins(&lab, None, 9).unwrap();
        assert_eq!(s.sigma_plus.len(), 3);
        assert_eq!(s.sigma_minus.len(), 3);
        assert_eq!(lab.n_clusters(), 2 + 2 * 3);
    }
}
