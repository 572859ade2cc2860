use otreg::diagnostics::{
    convergence_study, error_to_truth, goodness_of_fit_report, residuals, ConvergenceConfig,
};
use otreg::estimator::{build_isotonic_problem, objective};
use otreg::measures::wasserstein_distance;
use otreg::simulation::{
    draw_noise_map, generate_dataset, sample_noise_map, zeta, BetaMixtureSpec, NoiseSpec,
    Observation, SeedStream, SyntheticDataset,
};
use otreg::transport::pushforward;
use otreg::{fit, predict, Grid, Measure, MonotoneMap, RegressionDataset, RegressionPair};
use rand::Rng;

fn zeta4(m: usize) -> MonotoneMap {
    MonotoneMap::from_fn(Grid::unit(m).unwrap(), |x| zeta(4, x)).unwrap()
}

fn noiseless(n_pairs: usize, m: usize, seed: u64) -> SyntheticDataset {
    generate_dataset(
        SeedStream::new(seed),
        n_pairs,
        &zeta4(m),
        &BetaMixtureSpec::default(),
        &NoiseSpec::noiseless(),
        Observation::Full,
    )
    .unwrap()
}

#[test]
fn noiseless_zeta4_recovery() {
    let data = noiseless(10, 1000, 2024);
    let f = fit(&data.dataset).unwrap();
    let err = error_to_truth(&f, &data.true_map).unwrap();
    assert!(err <= 2e-2, "L2 error {err}");
    assert!(f.objective <= 1e-4, "objective {}", f.objective);
    for p in data.dataset.pairs() {
        let fitted = predict(&f, &p.predictor).unwrap();
        assert!(wasserstein_distance(&fitted, &p.response).unwrap() <= 2e-2);
    }
    assert!(objective(&data.true_map, &data.dataset).unwrap() <= 1e-10);
}

#[test]
fn pooled_weights_sum_to_pair_count() {
    let data = noiseless(7, 300, 5);
    let prob = build_isotonic_problem(&data.dataset).unwrap();
    let total: f64 = prob.pooled_weights.iter().sum();
    assert!((total - 7.0).abs() < 1e-6);
}

fn random_monotone(rng: &mut impl Rng, g: Grid) -> MonotoneMap {
    let steps: Vec<f64> = (0..g.len()).map(|_| rng.random::<f64>().powi(3)).collect();
    let total: f64 = steps.iter().sum();
    let lo = rng.random::<f64>() * 0.2;
    let hi = 1.0 - rng.random::<f64>() * 0.2;
    let mut acc = 0.0;
    let z = steps
        .iter()
        .map(|s| {
            acc += s;
            lo + (hi - lo) * acc / total
        })
        .collect();
    MonotoneMap::from_values(g, z).unwrap()
}

fn perturbed(rng: &mut impl Rng, t: &MonotoneMap, scale: f64) -> MonotoneMap {
    let mut z: Vec<f64> = t
        .values()
        .iter()
        .map(|v| (v + scale * (rng.random::<f64>() - 0.5)).clamp(0.0, 1.0))
        .collect();
    z.sort_by(f64::total_cmp);
    MonotoneMap::from_values(*t.grid(), z).unwrap()
}

#[test]
fn fit_beats_random_monotone_competitors() {
    let data = generate_dataset(
        SeedStream::new(17),
        12,
        &zeta4(150),
        &BetaMixtureSpec::default(),
        &NoiseSpec::default(),
        Observation::Full,
    )
    .unwrap();
    let d = &data.dataset;
    let f = fit(d).unwrap();
    let best = objective(&f.map, d).unwrap();
    let mut rng = SeedStream::new(99).rng();
    for i in 0..100 {
        let r = if i % 2 == 0 {
            random_monotone(&mut rng, *d.grid())
        } else {
            perturbed(&mut rng, &f.map, 0.02)
        };
        assert!(best <= objective(&r, d).unwrap() + 1e-9);
    }
}

#[test]
fn fit_is_affine_equivariant() {
    let data = generate_dataset(
        SeedStream::new(3),
        6,
        &zeta4(120),
        &BetaMixtureSpec::default(),
        &NoiseSpec::default(),
        Observation::Full,
    )
    .unwrap();
    let (a, b) = (3.5, -2.0);
    let g = Grid::new(b, a + b, 120).unwrap();
    let moved =
        |mu: &Measure| Measure::new(g, mu.quantiles().iter().map(|q| a * q + b).collect()).unwrap();
    let pairs = data
        .dataset
        .pairs()
        .iter()
        .map(|p| RegressionPair::new(moved(&p.predictor), moved(&p.response)).unwrap())
        .collect();
    let f = fit(&data.dataset).unwrap();
    let h = fit(&RegressionDataset::new(pairs).unwrap()).unwrap();
    for (z, w) in f.map.values().iter().zip(h.map.values()) {
        assert!((a * z + b - w).abs() < 1e-9, "{} vs {w}", a * z + b);
    }
    assert_eq!(f.coverage_mask, h.coverage_mask);
}

#[test]
fn fit_ignores_pair_order() {
    let data = noiseless(9, 200, 41);
    let mut pairs = data.dataset.pairs().to_vec();
    pairs.reverse();
    let f = fit(&data.dataset).unwrap();
    let h = fit(&RegressionDataset::new(pairs).unwrap()).unwrap();
    for (z, w) in f.map.values().iter().zip(h.map.values()) {
        assert!((z - w).abs() < 1e-12);
    }
}

#[test]
fn noise_maps_average_to_identity() {
    let g = Grid::unit(200).unwrap();
    let spec = NoiseSpec::default();
    let mut sums = vec![0.0; g.len()];
    let draws = 10_000;
    for i in 0..draws {
        let mut rng = SeedStream::new(7).child(i).rng();
        let t = sample_noise_map(&mut rng, &spec, g).unwrap();
        for (s, v) in sums.iter_mut().zip(t.values()) {
            *s += v;
        }
    }
    let sup = sums
        .iter()
        .zip(g.nodes())
        .map(|(s, x)| (s / draws as f64 - x).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 0.01, "sup deviation {sup}");
}

#[test]
fn noise_maps_fix_endpoints() {
    let spec = NoiseSpec::default();
    let mut rng = SeedStream::new(1).rng();
    for _ in 0..1000 {
        let t = draw_noise_map(&mut rng, &spec);
        assert!(t.evaluate(0.0).abs() <= 1e-9);
        assert!((t.evaluate(1.0) - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn more_pairs_give_smaller_error() {
    let cfg = ConvergenceConfig {
        observations: vec![Observation::Full],
        pair_counts: vec![10, 100],
        replications: 20,
        seed: 8,
        mixture: BetaMixtureSpec::default(),
        noise: NoiseSpec::default(),
        t0: zeta4(200),
    };
    let t = convergence_study(&cfg).unwrap();
    let small = t.median(Observation::Full, 10).unwrap();
    let large = t.median(Observation::Full, 100).unwrap();
    assert!(large < small, "N=100 median {large} vs N=10 median {small}");
}

#[test]
fn noiseless_fit_has_identity_residuals() {
    let data = noiseless(10, 500, 12);
    let f = fit(&data.dataset).unwrap();
    let r = residuals(&f, &data.dataset).unwrap();
    let report = goodness_of_fit_report(&f, &data.dataset).unwrap();
    assert!(report.validity_statistic <= 2e-2);
    assert!(r.per_pair_wd.iter().all(|&d| d <= 2e-2));
    assert_eq!(report.rows.len(), 10);
    assert!(report.rows.windows(2).all(|w| w[0].1 >= w[1].1));
}

#[test]
fn model_consistency_with_noise() {
    let t0 = zeta4(250);
    let data = generate_dataset(
        SeedStream::new(31),
        5,
        &t0,
        &BetaMixtureSpec::default(),
        &NoiseSpec::default(),
        Observation::Full,
    )
    .unwrap();
    for (p, eps) in data.dataset.pairs().iter().zip(&data.noise_maps) {
        let clean = pushforward(&t0, &p.predictor).unwrap();
        for (y, q) in p.response.quantiles().iter().zip(clean.quantiles()) {
            assert!((y - eps.evaluate(*q)).abs() <= 1e-9);
        }
    }
}
