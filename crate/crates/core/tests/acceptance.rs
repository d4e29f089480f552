mod common;

use std::f64::consts::LN_2;
use std::io::Write;
use std::time::Instant;

use common::{compare_with_oracle, oracle_boxes, single_line_death_law};
use isingrc::bounds::{choose_k, constant_a, entropy_bound};
use isingrc::continuum::{cluster_count, BoxSpec, Event, RcConfig};
use isingrc::fkising::{ed_index, estimate_correlations, estimate_reduced_matrix};
use isingrc::rcsampler::{
    estimate_decay_rate, estimate_event, run_samples, side_reaching, stream, target_density, transition_density,
    Disorder, EstimateResult, EstimatorConfig, RcParams, SamplerKind,
};
use isingrc::spinchain::{
    block_density, build_hamiltonian, entanglement_entropy, ground_state, operator_norm_diff, zz_correlation,
    SpinChainParams,
};
use isingrc::stats::linear_fit;
use rand::Rng;

const ED_TOL: f64 = 1e-10;
/// Absolute floor for comparisons whose two sides agree exactly up to rounding.
const ROUNDING: f64 = 1e-12;

/// Print one verdict line past the test harness capture, then assert it.
fn report(criterion: u32, pass: bool, started: Instant, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!(
        "criterion {criterion}: {verdict} ({:.1} s) {detail}\n",
        started.elapsed().as_secs_f64()
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn side_reaching_points(ms: &[usize], beta: f64, params: &RcParams, ecfg: &EstimatorConfig) -> Vec<(f64, EstimateResult)> {
    ms.iter()
        .enumerate()
        .map(|(i, &m)| {
            let bx = BoxSpec::chain_box(m, 0, beta).unwrap();
            let ecfg = EstimatorConfig { seed: ecfg.seed + i as u64, ..ecfg.clone() };
            (m as f64, estimate_event(&bx, params, side_reaching(&bx).unwrap(), &ecfg).unwrap())
        })
        .collect()
}

#[test]
fn criterion_01_entropy_plateau() {
    let started = Instant::now();
    let entropies: Vec<f64> = (1..=8)
        .map(|l| {
            let p = SpinChainParams::homogeneous(4, l, 0.3, 1.0).unwrap();
            entanglement_entropy(&block_density(&p, ED_TOL).unwrap())
        })
        .collect();
    let last_increment = (entropies[7] - entropies[6]).abs();
    let max = entropies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    report(
        1,
        last_increment < 0.02 && max <= 1.5,
        started,
        format!("S(L=1..8) = {entropies:.5?}, last increment {last_increment:.2e}, max {max:.5}"),
    );
}

#[test]
fn criterion_02_norm_decay() {
    let started = Instant::now();
    let reference = block_density(&SpinChainParams::homogeneous(6, 1, 1.0, 1.0).unwrap(), ED_TOL).unwrap();
    let diffs: Vec<f64> = (1..=5)
        .map(|m| {
            let rho = block_density(&SpinChainParams::homogeneous(m, 1, 1.0, 1.0).unwrap(), ED_TOL).unwrap();
            operator_norm_diff(&rho, &reference).unwrap()
        })
        .collect();
    let xs: Vec<f64> = (1..=5).map(f64::from).collect();
    let ys: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
    let fit = linear_fit(&xs, &ys, None);
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    report(
        2,
        decreasing && fit.slope <= -0.3 && fit.r_squared >= 0.95,
        started,
        format!(
            "norm differences {diffs:?}, slope {:.4}, R^2 {:.4}, strictly decreasing {decreasing}",
            fit.slope, fit.r_squared
        ),
    );
}

#[test]
fn criterion_03_percolation_critical_point() {
    let started = Instant::now();
    let beta = 24.0;
    let sub_ms: Vec<usize> = (1..=12).map(|i| 2 * i).collect();
    let sub = RcParams::percolation(0.5, 1.0).unwrap();
    let sub_fit =
        estimate_decay_rate(&side_reaching_points(&sub_ms, beta, &sub, &EstimatorConfig::new(50_000, 300))).unwrap();
    let super_ms: Vec<usize> = (1..=6).map(|i| 4 * i).collect();
    let sup = RcParams::percolation(1.5, 1.0).unwrap();
    let super_fit =
        estimate_decay_rate(&side_reaching_points(&super_ms, beta, &sup, &EstimatorConfig::new(20_000, 400))).unwrap();
    let slope = -super_fit.gamma;
    report(
        3,
        sub_fit.significance() > 3.0 && slope >= -0.02,
        started,
        format!(
            "theta=0.5: gamma {:.4} +- {:.4} ({:.1} sigma, {} points dropped); theta=1.5: slope {:.4} +- {:.4}",
            sub_fit.gamma,
            sub_fit.gamma_se,
            sub_fit.significance(),
            sub_fit.dropped.len(),
            slope,
            super_fit.gamma_se
        ),
    );
}

#[test]
fn criterion_04_q2_subcritical_decay() {
    let started = Instant::now();
    let params = RcParams::new(1.0, 1.0, 2.0).unwrap();
    let points: Vec<(f64, EstimateResult)> = [4usize, 8, 12, 16]
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let bx = BoxSpec::chain_box(m, 0, 2.0 * m as f64).unwrap();
            let ecfg = EstimatorConfig::new(8_000, 500 + i as u64).with_burnin(200).with_chains(8);
            (m as f64, estimate_event(&bx, &params, side_reaching(&bx).unwrap(), &ecfg).unwrap())
        })
        .collect();
    let fit = estimate_decay_rate(&points).unwrap();
    let estimates: Vec<f64> = points.iter().map(|p| p.1.estimate).collect();
    report(
        4,
        fit.significance() > 3.0,
        started,
        format!(
            "p_m at m=4,8,12,16: {estimates:.4?}; gamma {:.4} +- {:.4} ({:.1} sigma)",
            fit.gamma,
            fit.gamma_se,
            fit.significance()
        ),
    );
}

#[test]
fn criterion_05_correlations_match_ed() {
    let started = Instant::now();
    let (lambda, delta) = (0.5, 1.0);
    let chain = SpinChainParams::homogeneous(2, 0, lambda, delta).unwrap();
    let gs = ground_state(&build_hamiltonian(&chain).unwrap(), ED_TOL).unwrap();
    let bx = BoxSpec::chain_box(2, 0, 12.0).unwrap();
    let params = RcParams::new(lambda, delta, 2.0).unwrap();
    let ecfg = EstimatorConfig::new(40_000, 600).with_burnin(200).with_chains(8);
    let pairs = estimate_correlations(&[-2, -1, 0, 1, 2], &bx, &params, &ecfg).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for p in &pairs {
        let ed = zz_correlation(&gs.state, chain.bit_of(p.x).unwrap(), chain.bit_of(p.y).unwrap());
        worst = worst.max((p.estimate.estimate - ed).abs() - 3.0 * p.estimate.std_error);
    }
    report(
        5,
        pairs.len() == 10 && worst <= 0.01,
        started,
        format!("{} pairs, worst |phi - ED| - 3 SE = {worst:.4}", pairs.len()),
    );
}

#[test]
fn criterion_06_slit_joint_law() {
    let started = Instant::now();
    let (lambda, delta) = (0.5, 1.0);
    let rho = block_density(&SpinChainParams::homogeneous(2, 0, lambda, delta).unwrap(), ED_TOL).unwrap();
    let bx = BoxSpec::slit_box(2, 0, 12.0).unwrap();
    let params = RcParams::new(lambda, delta, 2.0).unwrap();
    let ecfg = EstimatorConfig::new(40_000, 700).with_burnin(200).with_chains(8);
    let est = estimate_reduced_matrix(0, &bx, &params, &ecfg).unwrap();
    let normalized = est.trace_normalized();
    let d = est.dim;
    let mut diag_ok = true;
    let mut diag = Vec::new();
    for e in 0..d {
        let ed = rho.entries()[(ed_index(0, e), ed_index(0, e))].re;
        let m = normalized[e * d + e];
        diag_ok &= (m - ed).abs() <= 3.0 * est.entry_se(e, e) + ROUNDING;
        diag.push((m, ed));
    }
    let off_diagonal: Vec<(f64, f64, f64)> = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (normalized[i * d + j], est.entry_se(i, j), rho.entries()[(ed_index(0, i), ed_index(0, j))].re))
        .collect();
    let mut symmetric = true;
    for i in 0..d {
        for j in i + 1..d {
            let se = est.entry_se(i, j).hypot(est.entry_se(j, i));
            symmetric &= (est.entry(i, j) - est.entry(j, i)).abs() <= 3.0 * se + ROUNDING;
        }
    }
    report(
        6,
        diag_ok && symmetric,
        started,
        format!(
            "diagonal (estimate, ED) {diag:.4?}, within 3 SE {diag_ok}, reflection symmetric {symmetric}; \
             off-diagonal (estimate, SE, ED) {off_diagonal:.4?}"
        ),
    );
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Largest relative violation of detailed balance over random single-event moves.
fn detailed_balance_error(trials: usize) -> f64 {
    let bx = BoxSpec::chain_box(1, 1, 3.0).unwrap();
    let params = RcParams::new(0.8, 1.3, 2.0).unwrap();
    let mut rng = stream(77, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let Some((mut events, from)) = common::random_config(&bx, 8, &mut rng) else {
            continue;
        };
        let time = common::random_time(&bx, &mut rng);
        events.push(if rng.random_bool(0.5) {
            Event::Death { line: rng.random_range(bx.first_line()..=bx.last_line()), time }
        } else {
            Event::Bridge { line: rng.random_range(bx.first_line()..bx.last_line()), time }
        });
        let Ok(to) = RcConfig::from_events(&bx, &events) else {
            continue;
        };
        let forward = target_density(&bx, &params, &from).unwrap() * transition_density(&bx, &params, &from, &to).unwrap();
        let backward = target_density(&bx, &params, &to).unwrap() * transition_density(&bx, &params, &to, &from).unwrap();
        worst = worst.max((forward - backward).abs() / forward.abs().max(backward.abs()));
    }
    worst
}

#[test]
fn criterion_07_sampler_correctness() {
    let started = Instant::now();
    let bx = BoxSpec::chain_box(1, 0, 3.0).unwrap();
    let params = RcParams::percolation(1.0, 1.0).unwrap();
    let observe = |_: usize, b: &BoxSpec, cfg: &RcConfig, out: &mut [f64]| {
        out[0] = cfg.n_deaths() as f64;
        out[1] = cfg.n_bridges() as f64;
        out[2] = cluster_count(b, cfg) as f64;
    };
    let direct = run_samples(&bx, &params, &EstimatorConfig::new(10_000, 800).with_sampler(SamplerKind::Direct), 3, observe)
        .unwrap();
    let mcmc_cfg = EstimatorConfig::new(10_000, 801).with_sampler(SamplerKind::Mcmc).with_thinning(2);
    let mcmc = run_samples(&bx, &params, &mcmc_cfg, 3, observe).unwrap();
    let mut z_scores = Vec::new();
    for j in 0..3 {
        let (mean, se) = mean_and_se(&direct.column(j));
        let e = mcmc.estimate(j);
        z_scores.push((e.estimate - mean).abs() / se.hypot(e.std_error));
    }
    let two_sample_ok = z_scores.iter().all(|&z| z <= 4.0);

    let (delta, beta, q) = (1.0, 2.0, 2.0);
    let line = BoxSpec::new(0, 0, 0.0, beta).unwrap().periodic(true);
    let n_max = 8;
    let t = run_samples(
        &line,
        &RcParams::new(1.0, delta, q).unwrap(),
        &EstimatorConfig::new(40_000, 802).with_burnin(200),
        n_max + 1,
        |_, _, cfg, out| {
            out.fill(0.0);
            if cfg.n_deaths() <= n_max {
                out[cfg.n_deaths()] = 1.0;
            }
        },
    )
    .unwrap();
    let mut law_ok = true;
    for n in 0..=n_max {
        let e = t.estimate(n);
        law_ok &= (e.estimate - single_line_death_law(delta, beta, q, n)).abs() <= 3.0 * e.std_error.max(1e-4);
    }

    let balance = detailed_balance_error(2_000);
    report(
        7,
        two_sample_ok && law_ok && balance <= 1e-12,
        started,
        format!(
            "MCMC vs direct z (deaths, bridges, k) {z_scores:.2?}; single-line law within 3 SE {law_ok}; \
             detailed balance error {balance:.1e}"
        ),
    );
}

#[test]
fn criterion_08_oracle_equivalence() {
    let started = Instant::now();
    let boxes = oracle_boxes();
    let mut rng = stream(900, 0);
    let (mut compared, mut skipped, mut mismatches) = (0, 0, Vec::new());
    for trial in 0..10_000 {
        match compare_with_oracle(&boxes[trial % boxes.len()], 8, &mut rng) {
            Ok(true) => compared += 1,
            Ok(false) => skipped += 1,
            Err(e) => mismatches.push(e),
        }
    }
    report(
        8,
        mismatches.is_empty() && compared > 0,
        started,
        format!(
            "{compared} configurations compared, {skipped} skipped for colliding events, {} mismatches{}",
            mismatches.len(),
            mismatches.first().map(|e| format!(", first: {e}")).unwrap_or_default()
        ),
    );
}

/// `Σ_{j>ν} −(c/j^ξ) log₂(c/j^ξ)` for `ξ = 2`: a plain sum up to `N` plus the
/// Euler-Maclaurin tail `∫_N^∞ f − f(N)/2 − f'(N)/12`.
fn c1_by_summation(c: f64, nu: u64) -> f64 {
    let f = |x: f64| {
        let p = c / (x * x);
        -p * p.log2()
    };
    let n: u64 = 2_000_000;
    let head: f64 = (nu + 1..=n).map(|j| f(j as f64)).sum();
    let nf = n as f64;
    let integral = c / LN_2 * (2.0 * (nf.ln() + 1.0) / nf - c.ln() / nf);
    let h = 1e-3 * nf;
    let derivative = (f(nf + h) - f(nf - h)) / (2.0 * h);
    head + integral - f(nf) / 2.0 - derivative / 12.0
}

#[test]
fn criterion_09_bounds_arithmetic() {
    let started = Instant::now();
    let a_exact = constant_a(1.0, 1.0).unwrap() == 1.0 / 36.0;
    let b = entropy_bound(1.0, 4.0 * LN_2).unwrap();
    let independent = c1_by_summation(b.c, b.nu as u64);
    let c1_diff = (b.c1 - independent).abs();
    let mut rng = stream(1000, 0);
    let mut bracket_failures = 0;
    for _ in 0..1000 {
        let c = 10f64.powf(rng.random_range(-3.0..6.0));
        let gamma = 10f64.powf(rng.random_range(-2.0..1.5));
        let k = choose_k(c, gamma).unwrap();
        let slack = 1e-12 * (c.ln() / gamma).abs().max(1.0) * gamma;
        let fits = c.ln() - gamma * f64::from(k) <= slack;
        let minimal = k == 2 || c.ln() - gamma * f64::from(k - 1) > 0.0;
        if !(k >= 2 && fits && minimal) {
            bracket_failures += 1;
        }
    }
    report(
        9,
        a_exact && b.k == 2 && b.xi == 2.0 && c1_diff <= 1e-6 && bracket_failures == 0,
        started,
        format!(
            "A(1,1) == 1/36 {a_exact}; K {} xi {}; c1 {:.9} vs independent {independent:.9} (diff {c1_diff:.1e}); \
             choose_K bracketing failures {bracket_failures}/1000",
            b.k, b.xi, b.c1
        ),
    );
}

#[test]
fn criterion_10_disorder_domination() {
    let started = Instant::now();
    let (theta, delta_min, delta_max) = (0.5, 1.0, 2.0);
    let (beta, ms) = (12.0, [2usize, 4, 6]);
    let half_width = 6usize;
    let ecfg = EstimatorConfig::new(8_000, 1100).with_burnin(200).with_chains(8);
    let homogeneous = RcParams::new(theta * delta_min, delta_min, 2.0).unwrap();
    let reference = side_reaching_points(&ms, beta, &homogeneous, &ecfg);
    let mut worst = f64::NEG_INFINITY;
    let mut all_ok = true;
    for draw in 0..5u64 {
        let mut rng = stream(1200, draw);
        let width = 2 * half_width + 1;
        let deltas: Vec<f64> = (0..width).map(|_| rng.random_range(delta_min..=delta_max)).collect();
        let lambdas: Vec<f64> = (0..width - 1).map(|_| theta * delta_min * rng.random_range(0.5..=1.0)).collect();
        assert!(lambdas.iter().zip(&deltas).all(|(l, d)| l / d <= theta));
        let disorder = Disorder::new(-(half_width as i64), deltas, lambdas).unwrap();
        let params = homogeneous.clone().with_disorder(disorder);
        let ecfg = EstimatorConfig { seed: 1300 + 10 * draw, ..ecfg.clone() };
        for ((_, e), (_, h)) in side_reaching_points(&ms, beta, &params, &ecfg).iter().zip(&reference) {
            let excess = (e.estimate - h.estimate) / e.std_error.hypot(h.std_error).max(f64::MIN_POSITIVE);
            worst = worst.max(excess);
            all_ok &= e.estimate - h.estimate <= 3.0 * e.std_error.hypot(h.std_error);
        }
    }
    let reference_values: Vec<f64> = reference.iter().map(|p| p.1.estimate).collect();
    report(
        10,
        all_ok,
        started,
        format!(
            "5 draws at m = {ms:?}; homogeneous p_m {reference_values:.4?}; \
             largest (disordered - homogeneous)/SE {worst:.2}"
        ),
    );
}
