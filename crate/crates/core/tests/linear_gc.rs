use longcause::data::{Individual, LongitudinalDataset};
use longcause::linear::{fit_and_test, fit_var, linear_gc, Conditioning, LaggedDesign, LinearGcConfig};
use longcause::simgen::{generate_dataset_with_graph, GroundTruthGraph, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, FisherSnedecor};

fn random_dataset(k: usize, n: usize, t: usize, seed: u64) -> LongitudinalDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inds = (0..n)
        .map(|i| {
            let rows: Vec<Vec<f64>> = (0..t)
                .map(|_| (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
                .collect();
            Individual::from_rows(format!("p{i:03}"), (0..t).map(|x| x as f64).collect(), &rows).unwrap()
        })
        .collect();
    LongitudinalDataset::new((0..k).map(|v| format!("v{v}")).collect(), inds).unwrap()
}

/// Residual sum of squares of `y` after projecting out `cols` by modified
/// Gram-Schmidt on the raw columns.
fn rss_by_projection(cols: &[Vec<f64>], y: &[f64]) -> f64 {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for c in cols {
        let mut q = c.clone();
        for b in &basis {
            let d: f64 = q.iter().zip(b).map(|(a, b)| a * b).sum();
            q.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
        }
        let norm = q.iter().map(|a| a * a).sum::<f64>().sqrt();
        q.iter_mut().for_each(|a| *a /= norm);
        basis.push(q);
    }
    let mut r = y.to_vec();
    for b in &basis {
        let d: f64 = r.iter().zip(b).map(|(a, b)| a * b).sum();
        r.iter_mut().zip(b).for_each(|(a, b)| *a -= d * b);
    }
    r.iter().map(|a| a * a).sum()
}

/// Independent F-test: regressor columns assembled by walking each
/// individual's series directly.
fn oracle_f(data: &LongitudinalDataset, p: usize, cause: usize, effect: usize, cond: Conditioning) -> (f64, f64) {
    let k = data.n_vars();
    let (full_vars, restricted_vars): (Vec<usize>, Vec<usize>) = match cond {
        Conditioning::Multivariate => ((0..k).collect(), (0..k).filter(|&u| u != cause).collect()),
        Conditioning::Bivariate => (vec![effect, cause], vec![effect]),
    };
    let columns = |vars: &[usize]| -> Vec<Vec<f64>> {
        let mut cols = vec![Vec::new()];
        for _ in 0..vars.len() * p {
            cols.push(Vec::new());
        }
        for ind in data.individuals() {
            for t in p..ind.n_timepoints() {
                cols[0].push(1.0);
                let mut c = 1;
                for &v in vars {
                    for l in 1..=p {
                        cols[c].push(ind.value(t - l, v).unwrap());
                        c += 1;
                    }
                }
            }
        }
        cols
    };
    let y: Vec<f64> = data
        .individuals()
        .iter()
        .flat_map(|ind| (p..ind.n_timepoints()).map(move |t| ind.value(t, effect).unwrap()))
        .collect();
    let full = columns(&full_vars);
    let rf = rss_by_projection(&full, &y);
    let rr = rss_by_projection(&columns(&restricted_vars), &y);
    let df2 = (y.len() - full.len()) as f64;
    let f = ((rr - rf) / p as f64) / (rf / df2);
    (f, FisherSnedecor::new(p as f64, df2).unwrap().sf(f))
}

#[test]
fn f_statistic_matches_two_regression_oracle() {
    for (seed, k, n, t, p) in [(1, 4, 30, 6, 1), (2, 3, 20, 7, 2), (3, 2, 1, 40, 1), (4, 5, 50, 6, 3)] {
        let data = random_dataset(k, n, t, seed);
        for cond in [Conditioning::Multivariate, Conditioning::Bivariate] {
            let cfg = LinearGcConfig {
                lag: p,
                conditioning: cond,
                ..Default::default()
            };
            let res = fit_and_test(&data, &cfg).unwrap();
            assert_eq!(res.tests.len(), k * (k - 1));
            for pt in &res.tests {
                let (f, pv) = oracle_f(&data, p, pt.cause, pt.effect, cond);
                assert!(
                    (pt.f - f).abs() <= 1e-8 * f.abs().max(1.0),
                    "{cond:?} p={p} {}->{}: {} vs {f}",
                    pt.cause,
                    pt.effect,
                    pt.f
                );
                assert!((pt.p - pv).abs() <= 1e-8);
                assert_eq!(res.graph.has_edge(pt.cause, pt.effect), pt.p < cfg.alpha);
            }
        }
    }
}

#[test]
fn restricted_rss_never_below_full() {
    for seed in 0..5 {
        let data = random_dataset(4, 25, 6, 100 + seed);
        for cond in [Conditioning::Multivariate, Conditioning::Bivariate] {
            let cfg = LinearGcConfig {
                conditioning: cond,
                ..Default::default()
            };
            for pt in fit_and_test(&data, &cfg).unwrap().tests {
                assert!(pt.rss_restricted >= pt.rss_full - 1e-12 * pt.rss_full);
                assert!(pt.f >= 0.0);
            }
        }
    }
}

#[test]
fn lagged_rows_stay_within_one_individual() {
    // Individual i's values all lie in [100 i, 100 i + 10).
    let inds: Vec<Individual> = (0..6)
        .map(|i| {
            let t = 3 + i % 3;
            let rows: Vec<Vec<f64>> = (0..t)
                .map(|s| vec![100.0 * i as f64 + s as f64, 100.0 * i as f64 + 5.0 + s as f64 * 0.5])
                .collect();
            Individual::from_rows(format!("p{i}"), (0..t).map(|x| x as f64).collect(), &rows).unwrap()
        })
        .collect();
    let data = LongitudinalDataset::new(vec!["a".into(), "b".into()], inds).unwrap();
    for p in 1..=2 {
        let d = LaggedDesign::build(&data, p).unwrap();
        let expected: usize = data
            .individuals()
            .iter()
            .map(|i| i.n_timepoints().saturating_sub(p))
            .sum();
        assert_eq!(d.rows(), expected);
        for r in 0..d.rows() {
            let lo = 100.0 * d.owner[r] as f64;
            let row_ok = |x: f64| (lo..lo + 10.0).contains(&x);
            assert!(
                (1..d.x.ncols()).all(|c| row_ok(d.x[(r, c)])),
                "row {r} crosses a boundary"
            );
            assert!((0..2).all(|c| row_ok(d.y[(r, c)])));
        }
    }
}

#[test]
fn missing_cells_are_rejected_before_interpolation() {
    let ind = Individual::new("p", vec![0.0, 1.0], 1, vec![1.0, 0.0], vec![true, false]).unwrap();
    let data = LongitudinalDataset::new(vec!["a".into()], vec![ind]).unwrap();
    assert!(fit_and_test(&data, &LinearGcConfig::default()).is_err());
}

#[test]
fn collinear_design_falls_back_to_ridge() {
    // Two identical variables make the full design singular.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inds: Vec<Individual> = (0..20)
        .map(|i| {
            let rows: Vec<Vec<f64>> = (0..5)
                .map(|_| {
                    let x: f64 = rng.sample(StandardNormal);
                    vec![x, x, rng.sample(StandardNormal)]
                })
                .collect();
            Individual::from_rows(format!("p{i}"), (0..5).map(|x| x as f64).collect(), &rows).unwrap()
        })
        .collect();
    let data = LongitudinalDataset::new(vec!["a".into(), "b".into(), "c".into()], inds).unwrap();
    let res = fit_and_test(&data, &LinearGcConfig::default()).unwrap();
    assert!(res.tests.iter().all(|t| t.f.is_finite() && t.p.is_finite()));
}

#[test]
fn pure_noise_false_positive_rate_near_alpha() {
    let cfg = LinearGcConfig::default();
    let mut hits = 0u64;
    let mut total = 0u64;
    for seed in 0..10 {
        let data = random_dataset(7, 200, 6, 1000 + seed);
        let res = fit_and_test(&data, &cfg).unwrap();
        hits += res.graph.n_edges() as u64;
        total += res.tests.len() as u64;
    }
    let b = Binomial::new(cfg.alpha, total).unwrap();
    assert!(b.cdf(hits) > 0.0005 && b.sf(hits) > 0.0005, "{hits} of {total}");
}

#[test]
fn strong_lag_one_chain_is_found_in_one_direction() {
    let graph = GroundTruthGraph::from_names(&["x", "y"], &[("x", "y")]).unwrap();
    let mut forward = 0;
    let mut backward = 0;
    for seed in 0..5 {
        let sim = SimConfig {
            n_individuals: 300,
            lag: 1,
            noise_sigma: 0.1,
            seed,
            ..Default::default()
        };
        let (data, _) = generate_dataset_with_graph(&graph, &sim).unwrap();
        let (res, _) = linear_gc(&data, &LinearGcConfig::default()).unwrap();
        forward += res.graph.has_edge(0, 1) as usize;
        backward += res.graph.has_edge(1, 0) as usize;
    }
    assert!(forward >= 3 && backward <= 2, "forward {forward}, backward {backward}");
}

#[test]
fn var_fit_recovers_known_coefficients() {
    // x_t = 0.5 + 0.8 x_{t-1} - 0.3 y_{t-1}; y_t = 0.6 y_{t-1}; tiny noise.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inds: Vec<Individual> = (0..40)
        .map(|i| {
            let mut rows = vec![vec![
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            ]];
            for t in 1..8 {
                let (x, y) = (rows[t - 1][0], rows[t - 1][1]);
                let e: f64 = rng.sample(StandardNormal);
                let f: f64 = rng.sample(StandardNormal);
                rows.push(vec![0.5 + 0.8 * x - 0.3 * y + 1e-3 * e, 0.6 * y + 1e-3 * f]);
            }
            Individual::from_rows(format!("p{i}"), (0..8).map(|x| x as f64).collect(), &rows).unwrap()
        })
        .collect();
    let data = LongitudinalDataset::new(vec!["x".into(), "y".into()], inds).unwrap();
    let m = fit_var(&data, 1).unwrap();
    let close = |a: f64, b: f64| (a - b).abs() < 1e-2;
    assert!(close(m.intercept[0], 0.5) && close(m.intercept[1], 0.0));
    assert!(close(m.coefficients[0][0][0], 0.8) && close(m.coefficients[0][0][1], -0.3));
    assert!(close(m.coefficients[0][1][0], 0.0) && close(m.coefficients[0][1][1], 0.6));
    assert!(m.residual_variance.iter().all(|&v| v < 1e-5));
}

#[test]
fn interpolated_pipeline_handles_missing_cells() {
    let graph = GroundTruthGraph::from_names(&["x", "y", "z"], &[("x", "y"), ("y", "z")]).unwrap();
    let sim = SimConfig {
        n_individuals: 200,
        lag: 1,
        missing_rate: 0.3,
        seed: 3,
        ..Default::default()
    };
    let (data, _) = generate_dataset_with_graph(&graph, &sim).unwrap();
    let (res, filled) = linear_gc(&data, &LinearGcConfig::default()).unwrap();
    assert_eq!(filled.data.observed_cells(), filled.data.total_cells());
    assert_eq!(res.tests.len(), 6);
}
