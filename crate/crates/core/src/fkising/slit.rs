use std::fmt::Write as _;

use rand::Rng;

use super::FkError;
use crate::continuum::{BoxSpec, ClusterLabeling, RcConfig};
use crate::rcsampler::{run_samples, stream, EstimateResult, EstimatorConfig, RcParams, SampleTable};

/// Largest block length for which the full joint law of the slit is estimated.
pub const MAX_MATRIX_BLOCK: usize = 3;

/// Offset separating the spin streams from the configuration streams.
const SPIN_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// Index of a spin pattern in lexicographic order with `−1 < +1` and site 0 most significant.
pub fn pattern_index(spins: &[i8]) -> usize {
    spins.iter().fold(0, |acc, &s| (acc << 1) | usize::from(s > 0))
}

/// Inverse of [`pattern_index`] for block length `l` (`l + 1` sites).
pub fn pattern_spins(l: usize, index: usize) -> Vec<i8> {
    (0..=l).map(|x| if (index >> (l - x)) & 1 == 1 { 1 } else { -1 }).collect()
}

/// Row of pattern `index` in the exact-diagonalization basis, where bit `x`
/// holds site `x` and a set bit means spin `−1`.
pub fn ed_index(l: usize, index: usize) -> usize {
    (0..=l).fold(0, |acc, x| acc | (usize::from((index >> (l - x)) & 1 == 0) << x))
}

fn require_q2(params: &RcParams) -> Result<(), FkError> {
    if params.q() != 2.0 {
        return Err(FkError::RequiresQ2(params.q()));
    }
    Ok(())
}

/// Cluster labels of the slit vertices relabelled densely: `(up, down, n_distinct)`.
fn slit_classes(lab: &ClusterLabeling, len: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let mut seen: Vec<usize> = Vec::with_capacity(2 * len + 2);
    let mut class = |l: usize| match seen.iter().position(|&s| s == l) {
        Some(p) => p,
        None => {
            seen.push(l);
            seen.len() - 1
        }
    };
    let mut up = Vec::with_capacity(len + 1);
    let mut down = Vec::with_capacity(len + 1);
    for x in 0..=len as i64 {
        up.push(class(lab.slit_upper(x).expect("slit vertex inside box")));
        down.push(class(lab.slit_lower(x).expect("slit vertex inside box")));
    }
    let n = seen.len();
    (up, down, n)
}

/// `2^{k_joined − k_slit}`: the conditional probability that the slit vectors agree.
fn agreement(up: &[usize], down: &[usize], n: usize) -> f64 {
    let mut uf = crate::continuum::UnionFind::new(n);
    let mut merged = 0;
    for (&u, &d) in up.iter().zip(down) {
        merged += i32::from(uf.union(u, d));
    }
    0.5f64.powi(merged)
}

/// Add the conditional law of `(σ⁺, σ⁻)` to `out[plus * d + minus]`.
fn joint_law(up: &[usize], down: &[usize], n: usize, out: &mut [f64]) {
    let l = up.len() - 1;
    let d = 1usize << (l + 1);
    let w = 0.5f64.powi(n as i32);
    for bits in 0..1usize << n {
        let spin = |c: usize| if (bits >> c) & 1 == 1 { 1i8 } else { -1 };
        let plus: Vec<i8> = up.iter().map(|&c| spin(c)).collect();
        let minus: Vec<i8> = down.iter().map(|&c| spin(c)).collect();
        out[pattern_index(&plus) * d + pattern_index(&minus)] += w;
    }
}

/// Agreement statistics of the slit vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SlitStats {
    pub block_len: usize,
    /// Averaged exact conditional agreement probability.
    pub a_m: EstimateResult,
    /// Agreement frequency of explicitly sampled spins.
    pub naive: EstimateResult,
    /// Counts of sampled `(σ⁺, σ⁻)` pairs at `plus * 2^{L+1} + minus`, for `L ≤ 3`.
    pub joint_counts: Option<Vec<u64>>,
}

impl SlitStats {
    /// CSV `eps_plus,eps_minus,count` with patterns written as strings of `+`/`-`.
    pub fn joint_counts_csv(&self) -> Option<String> {
        let counts = self.joint_counts.as_ref()?;
        let l = self.block_len;
        let d = 1usize << (l + 1);
        let mut out = String::from("eps_plus,eps_minus,count\n");
        let show = |i: usize| -> String {
            pattern_spins(l, i).iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
        };
        for (i, c) in counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", show(i / d), show(i % d), c);
        }
        Some(out)
    }
}

/// `a_m = φ(σ_L^+ = σ_L^−)` in a slit box at `q = 2`.
pub fn estimate_am(bx: &BoxSpec, params: &RcParams, ecfg: &EstimatorConfig) -> Result<SlitStats, FkError> {
    require_q2(params)?;
    let len = bx.slit().ok_or(FkError::NoSlit)?;
    let with_counts = len <= MAX_MATRIX_BLOCK;
    let seed = ecfg.seed;
    let table = run_samples(bx, params, ecfg, 3, |i, b, cfg, out| {
        let lab = ClusterLabeling::build(b, cfg);
        let (up, down, n) = slit_classes(&lab, len);
        out[0] = agreement(&up, &down, n);
        let mut rng = stream(seed.wrapping_add(SPIN_SALT), i as u64);
        let spins: Vec<i8> = (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        let plus: Vec<i8> = up.iter().map(|&c| spins[c]).collect();
        let minus: Vec<i8> = down.iter().map(|&c| spins[c]).collect();
        out[1] = f64::from(u8::from(plus == minus));
        if with_counts {
            out[2] = (pattern_index(&plus) * (1 << (len + 1)) + pattern_index(&minus)) as f64;
        }
    })?;
    let joint_counts = with_counts.then(|| {
        let d = 1usize << (len + 1);
        let mut counts = vec![0u64; d * d];
        for c in table.column(2) {
            counts[c as usize] += 1;
        }
        counts
    });
    Ok(SlitStats {
        block_len: len,
        a_m: table.estimate(0),
        naive: table.estimate(1),
        joint_counts,
    })
}

/// Estimated joint law of the slit vectors and the matrix it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrixEstimate {
    pub block_len: usize,
    /// `2^{L+1}`.
    pub dim: usize,
    /// `φ(σ⁺ = ε⁺, σ⁻ = ε⁻)` at `plus * dim + minus`.
    pub joint: Vec<EstimateResult>,
    pub a_m: EstimateResult,
    /// `joint / a_m`.
    pub matrix: Vec<f64>,
    /// Linearized standard errors of `matrix`.
    pub matrix_se: Vec<f64>,
}

impl ReducedMatrixEstimate {
    pub fn entry(&self, plus: usize, minus: usize) -> f64 {
        self.matrix[plus * self.dim + minus]
    }

    pub fn entry_se(&self, plus: usize, minus: usize) -> f64 {
        self.matrix_se[plus * self.dim + minus]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i)).sum()
    }

    /// `matrix / trace(matrix)`; the trace is one up to rounding because `a_m`
    /// is itself the diagonal mass of the joint law.
    pub fn trace_normalized(&self) -> Vec<f64> {
        let t = self.trace();
        self.matrix.iter().map(|v| v / t).collect()
    }

    /// Dense CSV, one row per `ε⁺`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim).map(|c| format!("{:?}", self.entry(r, c))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Estimate `φ(σ⁺ = ε⁺, σ⁻ = ε⁻)/a_m` for every pair of patterns, `L ≤ 3`.
pub fn estimate_reduced_matrix(
    l: usize,
    bx: &BoxSpec,
    params: &RcParams,
    ecfg: &EstimatorConfig,
) -> Result<ReducedMatrixEstimate, FkError> {
    require_q2(params)?;
    if l > MAX_MATRIX_BLOCK {
        return Err(FkError::BlockTooLarge(l));
    }
    let len = bx.slit().ok_or(FkError::NoSlit)?;
    if len != l {
        return Err(FkError::SlitMismatch { requested: l, slit: len });
    }
    let d = 1usize << (l + 1);
    let table = run_samples(bx, params, ecfg, d * d, |_, b, cfg, out| {
        let lab = ClusterLabeling::build(b, cfg);
        let (up, down, n) = slit_classes(&lab, len);
        out.fill(0.0);
        joint_law(&up, &down, n, out);
    })?;
    Ok(ratio_matrix(&table, l, d))
}

fn ratio_matrix(table: &SampleTable, l: usize, d: usize) -> ReducedMatrixEstimate {
    let n = table.n_samples();
    let diag: Vec<f64> = (0..n).map(|i| (0..d).map(|e| table.row(i)[e * d + e]).sum()).collect();
    let a_m = table.summarize(&diag);
    let joint: Vec<EstimateResult> = (0..d * d).map(|j| table.estimate(j)).collect();
    let mut matrix = Vec::with_capacity(d * d);
    let mut matrix_se = Vec::with_capacity(d * d);
    for (j, est) in joint.iter().enumerate() {
        let m = est.estimate / a_m.estimate;
        let z: Vec<f64> = (0..n).map(|i| (table.row(i)[j] - m * diag[i]) / a_m.estimate).collect();
        matrix.push(m);
        matrix_se.push(table.summarize(&z).std_error);
    }
    ReducedMatrixEstimate {
        block_len: l,
        dim: d,
        joint,
        a_m,
        matrix,
        matrix_se,
    }
}

/// `φ((x,0) ↔ (y,0))` for one pair of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCorrelation {
    pub x: i64,
    pub y: i64,
    pub estimate: EstimateResult,
}

/// `φ((x,0) ↔ (y,0))`, the random-cluster form of `⟨σ³_x σ³_y⟩`.
pub fn estimate_correlation(
    x: i64,
    y: i64,
    bx: &BoxSpec,
    params: &RcParams,
    ecfg: &EstimatorConfig,
) -> Result<EstimateResult, FkError> {
    Ok(estimate_correlations(&[x, y], bx, params, ecfg)?.remove(0).estimate)
}

/// Connection probabilities at time 0 for every pair `sites[i], sites[j]`, `i < j`,
/// from one run.
pub fn estimate_correlations(
    sites: &[i64],
    bx: &BoxSpec,
    params: &RcParams,
    ecfg: &EstimatorConfig,
) -> Result<Vec<PairCorrelation>, FkError> {
    require_q2(params)?;
    if bx.slit().is_some() {
        return Err(FkError::HasSlit);
    }
    let empty = ClusterLabeling::build(bx, &RcConfig::empty(bx));
    for &s in sites {
        empty.label_of_point(s, 0.0)?;
    }
    let pairs: Vec<(usize, usize)> = (0..sites.len())
        .flat_map(|i| (i + 1..sites.len()).map(move |j| (i, j)))
        .collect();
    let table = run_samples(bx, params, ecfg, pairs.len(), |_, b, cfg, out| {
        let lab = ClusterLabeling::build(b, cfg);
        let labels: Vec<usize> = sites.iter().map(|&s| lab.label_of_point(s, 0.0).unwrap_or(usize::MAX)).collect();
        for (o, &(i, j)) in out.iter_mut().zip(&pairs) {
            *o = f64::from(u8::from(labels[i] == labels[j]));
        }
    })?;
    Ok(pairs
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| PairCorrelation {
            x: sites[i],
            y: sites[j],
            estimate: table.estimate(k),
        })
        .collect())
}

/// `6 · max(1/δ, 1/λ)`.
pub fn default_beta(lambda: f64, delta: f64) -> f64 {
    6.0 * (1.0 / delta).max(1.0 / lambda)
}

/// Outcome of doubling `β` until an estimate stabilizes.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaProbe {
    pub beta: f64,
    pub history: Vec<(f64, EstimateResult)>,
    pub converged: bool,
}

/// Double `β` from `beta0` until consecutive estimates differ by less than
/// their combined standard error, at most `max_doublings` times.
pub fn probe_beta<E>(
    beta0: f64,
    max_doublings: usize,
    mut estimate: impl FnMut(f64) -> Result<EstimateResult, E>,
) -> Result<BetaProbe, E> {
    let mut beta = beta0;
    let mut history = vec![(beta, estimate(beta)?)];
    for _ in 0..max_doublings {
        beta *= 2.0;
        let next = estimate(beta)?;
        let prev = history.last().expect("non-empty").1;
        history.push((beta, next));
        if (next.estimate - prev.estimate).abs() < prev.std_error.hypot(next.std_error) {
            return Ok(BetaProbe { beta, history, converged: true });
        }
    }
    Ok(BetaProbe { beta, history, converged: false })
}
