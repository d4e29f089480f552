use super::estimate::{run_samples, unit_source, EstimateResult, EstimatorConfig};
use super::{RcParams, SamplerError};
use crate::continuum::{reaches_boundary, Boundary, BoxSpec, RcConfig};

/// Increasing statistics compared between two measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    BridgeCount,
    /// Minus the number of deaths.
    NegDeathCount,
    /// Indicator of `I ↔ sides`.
    SideReaching,
}

impl Statistic {
    pub const ALL: [Statistic; 3] = [Statistic::BridgeCount, Statistic::NegDeathCount, Statistic::SideReaching];

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::BridgeCount => "bridge_count",
            Statistic::NegDeathCount => "neg_death_count",
            Statistic::SideReaching => "side_reaching",
        }
    }

    fn eval(&self, bx: &BoxSpec, cfg: &RcConfig) -> f64 {
        match self {
            Statistic::BridgeCount => cfg.n_bridges() as f64,
            Statistic::NegDeathCount => -(cfg.n_deaths() as f64),
            Statistic::SideReaching => {
                f64::from(u8::from(reaches_boundary(bx, cfg, &unit_source(), Boundary::Sides).unwrap_or(false)))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub statistic: Statistic,
    /// The measure expected to be smaller.
    pub lower: EstimateResult,
    pub upper: EstimateResult,
    /// `(lower − upper) / sqrt(se_lower² + se_upper²)`.
    pub z: f64,
    /// `lower ≤ upper` within three combined standard errors.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    pub rows: Vec<ComparisonRow>,
}

impl DominationReport {
    pub fn all_consistent(&self) -> bool {
        self.rows.iter().all(|r| r.consistent)
    }

    pub fn row(&self, s: Statistic) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.statistic == s)
    }
}

/// Check that the means of increasing statistics under `lower` do not exceed
/// those under `upper`. The two runs use different chain streams of one seed.
pub fn compare_measures(
    bx: &BoxSpec,
    lower: &RcParams,
    upper: &RcParams,
    stats: &[Statistic],
    ecfg: &EstimatorConfig,
) -> Result<DominationReport, SamplerError> {
    if stats.contains(&Statistic::SideReaching) {
        reaches_boundary(bx, &RcConfig::empty(bx), &unit_source(), Boundary::Sides)?;
    }
    let eval = |_: usize, b: &BoxSpec, c: &RcConfig, out: &mut [f64]| {
        for (o, s) in out.iter_mut().zip(stats) {
            *o = s.eval(b, c);
        }
    };
    let lo = run_samples(bx, lower, ecfg, stats.len(), eval)?;
    let mut shifted = ecfg.clone();
    shifted.seed = ecfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let hi = run_samples(bx, upper, &shifted, stats.len(), eval)?;
    let rows = stats
        .iter()
        .enumerate()
        .map(|(j, &statistic)| {
            let (a, b) = (lo.estimate(j), hi.estimate(j));
            let se = a.std_error.hypot(b.std_error);
            let diff = a.estimate - b.estimate;
            let z = if se > 0.0 { diff / se } else if diff > 0.0 { f64::INFINITY } else { 0.0 };
            ComparisonRow {
                statistic,
                lower: a,
                upper: b,
                z,
                consistent: diff <= 3.0 * se,
            }
        })
        .collect();
    Ok(DominationReport { rows })
}

/// The `q`-weighted measure of `params` against percolation with the same intensities.
pub fn check_domination(bx: &BoxSpec, params: &RcParams, ecfg: &EstimatorConfig) -> Result<DominationReport, SamplerError> {
    let perc = params.clone().with_q(1.0)?;
    compare_measures(bx, params, &perc, &Statistic::ALL, ecfg)
}
