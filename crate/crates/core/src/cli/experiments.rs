use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use super::{num, Artifact, CliError, Experiment, ExperimentSpec, Table};
use crate::bounds::{
    check_disorder_condition, choose_k, constant_a, derived_rates, entropy_bound, lemma1_envelope, r_k, Window,
};
use crate::continuum::BoxSpec;
use crate::fkising::{
    ed_index, estimate_am, estimate_correlations, estimate_reduced_matrix, mixing_diagnostics, MixingGeometry,
    MAX_MATRIX_BLOCK,
};
use crate::rcsampler::{
    estimate_decay_rate, estimate_event, side_reaching, stream, Disorder, EstimateResult, EstimatorConfig, RcParams,
};
use crate::spinchain::{
    block_density, build_hamiltonian, entanglement_entropy, ground_state, operator_norm_diff, zz_correlation,
    SpinChainParams,
};
use crate::stats::linear_fit;

const ED_TOLERANCE: f64 = 1e-10;
const ESTIMATOR_COLUMNS: [&str; 8] = ["m", "L", "theta", "q", "estimate", "std_error", "n_samples", "seed"];
const DISORDER_SALT: u64 = 0x0d15_0dde_a5ed_0001;

/// Run the experiment described by `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    match spec.experiment {
        Experiment::EdEntropy => ed_entropy(spec),
        Experiment::EdNormdiff => ed_normdiff(spec),
        Experiment::RcDecay => rc_decay(spec),
        Experiment::RcCriticalScan => rc_critical_scan(spec),
        Experiment::FkCrosscheck => fk_crosscheck(spec),
        Experiment::FkAm => fk_am(spec),
        Experiment::MixingDiag => mixing_diag(spec),
        Experiment::BoundsReport => bounds_report(spec),
        Experiment::DisorderSweep => disorder_sweep(spec),
    }
}

/// Seed of the `index`-th cell of a run.
fn cell_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn estimator(spec: &ExperimentSpec, seed: u64) -> EstimatorConfig {
    EstimatorConfig::new(spec.usize("n_samples"), seed)
        .with_burnin(spec.usize("n_burnin"))
        .with_chains(spec.usize("n_chains"))
        .with_thinning(spec.usize("thinning"))
}

fn chain_params(m: usize, l: usize, lambda: f64, delta: f64) -> Result<SpinChainParams, CliError> {
    Ok(SpinChainParams::homogeneous(m, l, lambda, delta)?)
}

fn estimator_row(m: usize, l: usize, theta: f64, q: f64, e: &EstimateResult) -> Vec<String> {
    vec![
        m.to_string(),
        l.to_string(),
        num(theta),
        num(q),
        num(e.estimate),
        num(e.std_error),
        e.n_samples.to_string(),
        e.seed.to_string(),
    ]
}

/// JSON form of a fit of `p ≈ C e^{−γ m}`, or the reason it is unavailable.
fn decay_summary(points: &[(f64, EstimateResult)]) -> Json {
    match estimate_decay_rate(points) {
        Ok(f) => json!({
            "gamma": f.gamma,
            "gamma_se": f.gamma_se,
            "C": f.c,
            "log_C_se": f.log_c_se,
            "r_squared": f.r_squared,
            "chi2_dof": f.chi2_dof,
            "significance": f.significance(),
            "dropped_m": f.dropped,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn cells(ms: &[usize], ls: &[usize]) -> Vec<(usize, usize)> {
    ms.iter().flat_map(|&m| ls.iter().map(move |&l| (m, l))).collect()
}

fn ed_entropy(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let (theta, lambda, delta) = (spec.float("theta"), spec.float("lambda"), spec.float("delta"));
    let cells = cells(&spec.ints("m"), &spec.ints("L"));
    for &(m, l) in &cells {
        chain_params(m, l, lambda, delta)?;
    }
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(m, l)| -> Result<f64, CliError> {
            let rho = block_density(&chain_params(m, l, lambda, delta)?, ED_TOLERANCE)?;
            Ok(entanglement_entropy(&rho))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["m", "L", "theta", "entropy_bits"]);
    for (&(m, l), s) in cells.iter().zip(&values) {
        table.push(vec![m.to_string(), l.to_string(), num(theta), num(*s)]);
    }
    let max = values.iter().copied().fold(0.0, f64::max);
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "max_entropy_bits": max })),
    })
}

fn ed_normdiff(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let (theta, lambda, delta) = (spec.float("theta"), spec.float("lambda"), spec.float("delta"));
    let n_ref = spec.usize("n_ref");
    let ms = spec.ints("m");
    let ls = spec.ints("L");
    if let Some(&m) = ms.iter().find(|&&m| m >= n_ref) {
        return Err(CliError::Config(format!("m = {m} is not below n_ref = {n_ref}")));
    }
    for &l in &ls {
        chain_params(n_ref, l, lambda, delta)?;
    }
    let references: Vec<_> = ls
        .par_iter()
        .map(|&l| block_density(&chain_params(n_ref, l, lambda, delta)?, ED_TOLERANCE).map_err(CliError::from))
        .collect::<Result<_, _>>()?;
    let cells = cells(&ms, &ls);
    let diffs: Vec<f64> = cells
        .par_iter()
        .map(|&(m, l)| -> Result<f64, CliError> {
            let rho = block_density(&chain_params(m, l, lambda, delta)?, ED_TOLERANCE)?;
            let j = ls.iter().position(|&x| x == l).expect("cell block length is listed");
            Ok(operator_norm_diff(&rho, &references[j])?)
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["m", "L", "theta", "n_ref", "norm_diff"]);
    for (&(m, l), d) in cells.iter().zip(&diffs) {
        table.push(vec![m.to_string(), l.to_string(), num(theta), n_ref.to_string(), num(*d)]);
    }
    let fits: Vec<Json> = ls
        .iter()
        .map(|&l| {
            let (x, y): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .zip(&diffs)
                .filter(|((_, cl), d)| *cl == l && **d > 0.0)
                .map(|(&(m, _), d)| (m as f64, d.ln()))
                .unzip();
            if x.len() < 3 {
                return json!({ "L": l, "error": "fewer than 3 positive points" });
            }
            let f = linear_fit(&x, &y, None);
            json!({
                "L": l,
                "slope": f.slope,
                "gamma": -f.slope,
                "C": f.intercept.exp(),
                "r_squared": f.r_squared,
                "strictly_decreasing": y.windows(2).all(|w| w[1] < w[0]),
            })
        })
        .collect();
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "fits": fits })),
    })
}

/// Side-reaching probabilities in periodic chain boxes for each `m`.
fn side_reaching_series(
    ms: &[usize],
    beta: f64,
    params: &RcParams,
    spec: &ExperimentSpec,
    first_cell: usize,
) -> Result<Vec<EstimateResult>, CliError> {
    let seed = spec.seed();
    ms.iter()
        .enumerate()
        .map(|(i, &m)| {
            let bx = BoxSpec::chain_box(m, 0, beta).map_err(|e| CliError::Feasibility(e.to_string()))?;
            let event = side_reaching(&bx)?;
            Ok(estimate_event(&bx, params, event, &estimator(spec, cell_seed(seed, first_cell + i)))?)
        })
        .collect()
}

fn rc_decay(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let params = RcParams::new(spec.float("lambda"), spec.float("delta"), spec.float("q"))?;
    let ms = spec.ints("m");
    let ests = side_reaching_series(&ms, spec.float("beta"), &params, spec, 0)?;
    let mut table = Table::new(&ESTIMATOR_COLUMNS);
    let mut points = Vec::new();
    for (&m, e) in ms.iter().zip(&ests) {
        table.push(estimator_row(m, 0, params.theta(), params.q(), e));
        points.push((m as f64, *e));
    }
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "fit": decay_summary(&points) })),
    })
}

fn rc_critical_scan(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let delta = spec.float("delta");
    let q = spec.float("q");
    let ms = spec.ints("m");
    let mut table = Table::new(&ESTIMATOR_COLUMNS);
    let mut fits = Vec::new();
    for (t, &theta) in spec.floats("thetas").iter().enumerate() {
        let params = RcParams::new(theta * delta, delta, q)?;
        let ests = side_reaching_series(&ms, spec.float("beta"), &params, spec, t * ms.len())?;
        let mut points = Vec::new();
        for (&m, e) in ms.iter().zip(&ests) {
            table.push(estimator_row(m, 0, theta, q, e));
            points.push((m as f64, *e));
        }
        let mut fit = decay_summary(&points);
        fit["theta"] = json!(theta);
        fits.push(fit);
    }
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "fits": fits })),
    })
}

fn q2_params(spec: &ExperimentSpec) -> Result<RcParams, CliError> {
    Ok(RcParams::new(spec.float("lambda"), spec.float("delta"), 2.0)?)
}

fn fk_crosscheck(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let (m, l) = (spec.ints("m")[0], spec.ints("L")[0]);
    let beta = spec.float("beta");
    let params = q2_params(spec)?;
    let chain = chain_params(m, l, params.lambda(), params.delta())?;
    let gs = ground_state(&build_hamiltonian(&chain)?, ED_TOLERANCE)?;
    let bx = BoxSpec::chain_box(m, l, beta).map_err(|e| CliError::Feasibility(e.to_string()))?;
    let sites: Vec<i64> = (-(m as i64)..=(m + l) as i64).collect();
    let pairs = estimate_correlations(&sites, &bx, &params, &estimator(spec, cell_seed(spec.seed(), 0)))?;
    let mut table = Table::new(&[
        "m", "L", "theta", "q", "x", "y", "estimate", "std_error", "n_samples", "seed", "ed_value",
    ]);
    let mut worst_excess = f64::NEG_INFINITY;
    for p in &pairs {
        let bit = |x: i64| chain.bit_of(x).expect("site in chain");
        let ed = zz_correlation(&gs.state, bit(p.x), bit(p.y));
        worst_excess = worst_excess.max((p.estimate.estimate - ed).abs() - 3.0 * p.estimate.std_error);
        table.push(vec![
            m.to_string(),
            l.to_string(),
            num(params.theta()),
            "2.0".into(),
            p.x.to_string(),
            p.y.to_string(),
            num(p.estimate.estimate),
            num(p.estimate.std_error),
            p.estimate.n_samples.to_string(),
            p.estimate.seed.to_string(),
            num(ed),
        ]);
    }
    let mut summary = json!({
        "pairs": pairs.len(),
        "worst_excess_over_3se": worst_excess,
        "within_3se_plus_0.01": worst_excess <= 0.01,
    });
    if l <= MAX_MATRIX_BLOCK {
        let slit = BoxSpec::slit_box(m, l, beta).map_err(|e| CliError::Feasibility(e.to_string()))?;
        let est = estimate_reduced_matrix(l, &slit, &params, &estimator(spec, cell_seed(spec.seed(), 1)))?;
        let rho = block_density(&chain, ED_TOLERANCE)?;
        let normalized = est.trace_normalized();
        let entries: Vec<Json> = (0..est.dim)
            .flat_map(|i| (0..est.dim).map(move |j| (i, j)))
            .map(|(i, j)| {
                json!({
                    "eps_plus": i,
                    "eps_minus": j,
                    "estimate": normalized[i * est.dim + j],
                    "std_error": est.entry_se(i, j),
                    "ed_value": rho.entries()[(ed_index(l, i), ed_index(l, j))].re,
                })
            })
            .collect();
        summary["slit_matrix"] = json!({ "a_m": est.a_m.estimate, "a_m_se": est.a_m.std_error, "entries": entries });
    }
    Ok(Artifact {
        table: Some(table),
        summary: Some(summary),
    })
}

fn fk_am(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let params = q2_params(spec)?;
    let beta = spec.float("beta");
    let ms = spec.ints("m");
    let ls = spec.ints("L");
    let mut table = Table::new(&ESTIMATOR_COLUMNS);
    let mut fits = Vec::new();
    for (j, &l) in ls.iter().enumerate() {
        let mut points = Vec::new();
        for (i, &m) in ms.iter().enumerate() {
            let bx = BoxSpec::slit_box(m, l, beta).map_err(|e| CliError::Feasibility(e.to_string()))?;
            let stats = estimate_am(&bx, &params, &estimator(spec, cell_seed(spec.seed(), j * ms.len() + i)))?;
            table.push(estimator_row(m, l, params.theta(), 2.0, &stats.a_m));
            points.push((m as f64, stats.a_m));
        }
        let mut fit = decay_summary(&points);
        fit["L"] = json!(l);
        fits.push(fit);
    }
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "fits": fits })),
    })
}

fn mixing_diag(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let params = RcParams::new(spec.float("lambda"), spec.float("delta"), spec.float("q"))?;
    let beta = spec.float("beta");
    let mut table = Table::new(&[
        "m", "L", "theta", "q", "t1", "t1_se", "t2", "t2_se", "t", "hypotheses_hold", "n_samples", "seed",
    ]);
    for (i, (m, l)) in cells(&spec.ints("m"), &spec.ints("L")).into_iter().enumerate() {
        let geometry = match spec.text("geometry") {
            Some("equator") => MixingGeometry::Equator { k: spec.usize("k") },
            _ => MixingGeometry::Parallelogram { m },
        };
        let bx = BoxSpec::slit_box(m, l, beta).map_err(|e| CliError::Feasibility(e.to_string()))?;
        let r = mixing_diagnostics(&bx, &params, geometry, &estimator(spec, cell_seed(spec.seed(), i)))?;
        table.push(vec![
            m.to_string(),
            l.to_string(),
            num(params.theta()),
            num(params.q()),
            num(r.t1.estimate),
            num(r.t1.std_error),
            num(r.t2),
            num(r.t2_se),
            r.t.map(num).unwrap_or_default(),
            r.hypotheses_hold.to_string(),
            r.t1.n_samples.to_string(),
            r.t1.seed.to_string(),
        ]);
    }
    Ok(Artifact { table: Some(table), summary: None })
}

fn bounds_report(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let (lambda, delta) = (spec.float("lambda"), spec.float("delta"));
    let mut summary = json!({
        "lambda": lambda,
        "delta": delta,
        "theta": spec.float("theta"),
        "A": constant_a(lambda, delta)?,
    });
    if let Some(gamma) = spec.float_opt("gamma") {
        let c = spec.float("C");
        let k = choose_k(c, gamma)?;
        let r = r_k(c, gamma, k);
        let a = constant_a(lambda, delta)?;
        summary["gamma"] = json!(gamma);
        summary["C"] = json!(c);
        summary["K"] = json!(k);
        summary["rates"] = serde_json::to_value(derived_rates(gamma)).expect("serializable");
        summary["R_K"] = json!(r);
        summary["envelope"] = match lemma1_envelope(a, k, r) {
            Ok((lo, hi)) => json!({ "lower": lo, "upper": hi }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        summary["entropy_bound"] = match entropy_bound(c, gamma) {
            Ok(b) => serde_json::to_value(b).expect("serializable"),
            Err(e) => json!({ "error": e.to_string() }),
        };
    }
    Ok(Artifact { table: None, summary: Some(summary) })
}

/// One disorder draw: `δ_x ~ U[δ_min, δ_max]` and `λ_{x,x+1} ~ θ δ_min U[½, 1]` on lines `−M..=M`.
fn draw_disorder(spec: &ExperimentSpec, draw: usize, half_width: usize) -> (Window, Window) {
    let theta = spec.float("theta");
    let (lo, hi) = (spec.float("delta_min"), spec.float("delta_max"));
    let mut rng = stream(spec.seed() ^ DISORDER_SALT, draw as u64);
    let first = -(half_width as i64);
    let width = 2 * half_width + 1;
    let deltas: Vec<f64> = (0..width).map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo }).collect();
    let lambdas: Vec<f64> = (0..width - 1).map(|_| theta * lo * rng.random_range(0.5..=1.0)).collect();
    (Window::new(first, lambdas), Window::new(first, deltas))
}

fn disorder_sweep(spec: &ExperimentSpec) -> Result<Artifact, CliError> {
    let theta = spec.float("theta");
    let q = spec.float("q");
    let delta_min = spec.float("delta_min");
    let beta = spec.float("beta");
    let ms = spec.ints("m");
    let half_width = ms.iter().copied().max().unwrap_or(0);
    let homogeneous = RcParams::new(theta * delta_min, delta_min, q)?;
    let reference = side_reaching_series(&ms, beta, &homogeneous, spec, 0)?;
    let mut table = Table::new(&[
        "draw",
        "m",
        "L",
        "theta",
        "q",
        "estimate",
        "std_error",
        "homogeneous",
        "homogeneous_se",
        "n_samples",
        "seed",
        "consistent",
    ]);
    let mut draws = Vec::new();
    let mut all_consistent = true;
    for d in 0..spec.usize("draws") {
        let (lambdas, deltas) = draw_disorder(spec, d, half_width);
        let check = check_disorder_condition(&lambdas, &deltas, theta, 1.0);
        let disorder = Disorder::new(deltas.first, deltas.values.clone(), lambdas.values.clone())?;
        let params = homogeneous.clone().with_disorder(disorder);
        let ests = side_reaching_series(&ms, beta, &params, spec, (d + 1) * ms.len())?;
        for ((&m, e), h) in ms.iter().zip(&ests).zip(&reference) {
            let consistent = e.estimate - h.estimate <= 3.0 * e.std_error.hypot(h.std_error);
            all_consistent &= consistent;
            table.push(vec![
                d.to_string(),
                m.to_string(),
                "0".into(),
                num(theta),
                num(q),
                num(e.estimate),
                num(e.std_error),
                num(h.estimate),
                num(h.std_error),
                e.n_samples.to_string(),
                e.seed.to_string(),
                consistent.to_string(),
            ]);
        }
        draws.push(json!({ "draw": d, "condition": check }));
    }
    Ok(Artifact {
        table: Some(table),
        summary: Some(json!({ "all_consistent": all_consistent, "draws": draws })),
    })
}
