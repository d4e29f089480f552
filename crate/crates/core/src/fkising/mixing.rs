use super::FkError;
use crate::continuum::{parallelogram_k, BoxSpec, ClusterLabeling, Equator, Parallelogram, RcConfig, Region};
use crate::rcsampler::{run_samples, EstimateResult, EstimatorConfig, RcParams};

/// Choice of separating set and of the two sets it separates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingGeometry {
    /// `Δ = {x⁺ : K ≤ x ≤ L−K}`, `Γ = {x⁻}` over the same range, `D` the equator complement.
    Equator { k: usize },
    /// `Δ = S_L⁺ ∪ S_L⁻`, `Γ` the vertical sides, `D` the staircase circuit with `k = ⌊3m/7⌋`.
    Parallelogram { m: usize },
}

/// `t = t₁ + 2t₂ + (t₁ + t₂)/(1 − t₁ − 2t₂)`, undefined when the denominator is not positive.
pub fn composite_t(t1: f64, t2: f64) -> Option<f64> {
    let den = 1.0 - t1 - 2.0 * t2;
    (den > 0.0).then(|| t1 + 2.0 * t2 + (t1 + t2) / den)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    /// `φ(Δ ↔ D)`.
    pub t1: EstimateResult,
    /// `φ(D ↔ Γ)`.
    pub t2_squared: EstimateResult,
    pub t2: f64,
    /// Delta-method error of `t₂`.
    pub t2_se: f64,
    /// `None` when `1 − t₁ − 2t₂ ≤ 0`.
    pub t: Option<f64>,
    /// `t < 1/2`, the regime in which the mixing bounds apply.
    pub hypotheses_hold: bool,
}

/// The sets `Δ`, `D` and `Γ`.
type RegionSets = (Vec<Region>, Vec<Region>, Vec<Region>);

fn sets(bx: &BoxSpec, geometry: MixingGeometry) -> Result<RegionSets, FkError> {
    let len = bx.slit().ok_or(FkError::NoSlit)?;
    let m = usize::try_from(-bx.first_line()).unwrap_or(0);
    match geometry {
        MixingGeometry::Equator { k } => {
            if 2 * k > len {
                return Err(FkError::EmptySet("Δ"));
            }
            let delta = (k..=len - k).map(|x| Region::SlitUpper(x as i64)).collect();
            let gamma = (k..=len - k).map(|x| Region::SlitLower(x as i64)).collect();
            let d = Equator { m, block_len: len }.regions();
            if d.is_empty() {
                return Err(FkError::EmptySet("D"));
            }
            Ok((delta, d, gamma))
        }
        MixingGeometry::Parallelogram { m } => {
            let mut delta: Vec<Region> = (0..=len as i64).map(Region::SlitUpper).collect();
            delta.extend((0..=len as i64).map(Region::SlitLower));
            let d = Parallelogram { k: parallelogram_k(m), block_len: len }.regions_in(bx);
            if d.is_empty() {
                return Err(FkError::EmptySet("D"));
            }
            Ok((delta, d, vec![Region::Sides]))
        }
    }
}

/// Monte Carlo estimates of `t₁ = φ(Δ ↔ D)`, `t₂ = √φ(D ↔ Γ)` and the composite `t`.
pub fn mixing_diagnostics(
    bx: &BoxSpec,
    params: &RcParams,
    geometry: MixingGeometry,
    ecfg: &EstimatorConfig,
) -> Result<MixingReport, FkError> {
    let (delta, d, gamma) = sets(bx, geometry)?;
    let empty = ClusterLabeling::build(bx, &RcConfig::empty(bx));
    empty.joins(&delta, &d)?;
    empty.joins(&d, &gamma)?;
    let table = run_samples(bx, params, ecfg, 2, |_, b, cfg, out| {
        let lab = ClusterLabeling::build(b, cfg);
        out[0] = f64::from(u8::from(lab.joins(&delta, &d).unwrap_or(false)));
        out[1] = f64::from(u8::from(lab.joins(&d, &gamma).unwrap_or(false)));
    })?;
    let t1 = table.estimate(0);
    let t2_squared = table.estimate(1);
    let t2 = t2_squared.estimate.sqrt();
    let t2_se = if t2 > 0.0 { t2_squared.std_error / (2.0 * t2) } else { t2_squared.std_error.sqrt() };
    let t = composite_t(t1.estimate, t2);
    Ok(MixingReport {
        t1,
        t2_squared,
        t2,
        t2_se,
        t,
        hypotheses_hold: t.is_some_and(|t| t < 0.5),
    })
}
