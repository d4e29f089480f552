mod common;

use common::{compare_with_oracle, oracle_boxes, single_line_death_law};
use isingrc::continuum::{cluster_count, BoxSpec, RcConfig};
use isingrc::fkising::estimate_am;
use isingrc::rcsampler::{
    run_samples, sample_percolation_with, stream, Chain, EstimatorConfig, RcParams, SamplerKind,
};
use proptest::prelude::*;

#[test]
fn oracle_sees_simple_geometry() {
    use isingrc::continuum::Event;
    let bx = BoxSpec::new(0, 1, 0.0, 1.0).unwrap();
    let events = [Event::Bridge { line: 0, time: 0.5 }, Event::Death { line: 0, time: 0.25 }];
    let g = common::PointGraph::new(&bx, &events, &[(0, 0.1), (1, 0.9)]);
    assert_eq!(g.cluster_count(), 2);
    assert!(!g.connected((0, 0.1), (1, 0.9)));
    let wired = bx.clone().side_bc(isingrc::continuum::SideBc::Wired);
    assert_eq!(common::PointGraph::new(&wired, &events, &[]).cluster_count(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn labeling_matches_exhaustive_search(seed in any::<u64>(), which in 0usize..5) {
        let bx = &oracle_boxes()[which];
        let mut rng = stream(seed, 0);
        let r = compare_with_oracle(bx, 8, &mut rng);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

#[test]
fn single_line_death_count_law() {
    let (delta, beta, q) = (1.0, 2.0, 2.0);
    let bx = BoxSpec::new(0, 0, 0.0, beta).unwrap().periodic(true);
    let params = RcParams::new(1.0, delta, q).unwrap();
    let ecfg = EstimatorConfig::new(40_000, 11).with_burnin(200);
    let n_max = 8;
    let t = run_samples(&bx, &params, &ecfg, n_max + 1, |_, _, cfg, out| {
        out.fill(0.0);
        let n = cfg.n_deaths();
        if n <= n_max {
            out[n] = 1.0;
        }
    })
    .unwrap();
    let total: f64 = (0..=200).map(|n| single_line_death_law(delta, beta, q, n)).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for n in 0..=n_max {
        let e = t.estimate(n);
        let exact = single_line_death_law(delta, beta, q, n);
        assert!((e.estimate - exact).abs() <= 4.0 * e.std_error.max(1e-4), "n = {n}: {e:?} vs {exact}");
    }
}

fn summary(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

#[test]
fn percolation_chain_matches_direct_sampling() {
    let bx = BoxSpec::chain_box(1, 0, 3.0).unwrap();
    let params = RcParams::percolation(1.0, 1.0).unwrap();
    let rates = params.rates(&bx).unwrap();
    let mut rng = stream(5, 0);
    let direct: Vec<RcConfig> = (0..20_000).map(|_| sample_percolation_with(&bx, &rates, &mut rng)).collect();
    let ecfg = EstimatorConfig::new(20_000, 6).with_sampler(SamplerKind::Mcmc);
    let mcmc = run_samples(&bx, &params, &ecfg, 3, |_, b, cfg, out| {
        out[0] = cfg.n_deaths() as f64;
        out[1] = cfg.n_bridges() as f64;
        out[2] = cluster_count(b, cfg) as f64;
    })
    .unwrap();
    let stats: [fn(&BoxSpec, &RcConfig) -> f64; 3] = [
        |_, c| c.n_deaths() as f64,
        |_, c| c.n_bridges() as f64,
        |b, c| cluster_count(b, c) as f64,
    ];
    for (j, f) in stats.iter().enumerate() {
        let xs: Vec<f64> = direct.iter().map(|c| f(&bx, c)).collect();
        let (mean, var) = summary(&xs);
        let e = mcmc.estimate(j);
        let se = (var / xs.len() as f64).hypot(e.std_error);
        assert!((e.estimate - mean).abs() <= 4.0 * se, "statistic {j}: {} vs {mean}", e.estimate);
    }
    let _ = Chain::new(&bx, &params, 0, 0).unwrap();
}

#[test]
fn averaged_agreement_matches_sampled_spins() {
    let bx = BoxSpec::slit_box(1, 1, 4.0).unwrap();
    let params = RcParams::new(0.7, 1.0, 2.0).unwrap();
    let s = estimate_am(&bx, &params, &EstimatorConfig::new(20_000, 9)).unwrap();
    let se = s.a_m.std_error.hypot(s.naive.std_error);
    assert!((s.a_m.estimate - s.naive.estimate).abs() <= 4.0 * se, "{:?} vs {:?}", s.a_m, s.naive);
    assert!(s.a_m.std_error <= s.naive.std_error);
    let counts = s.joint_counts.unwrap();
    assert_eq!(counts.iter().sum::<u64>(), 20_000);
}
