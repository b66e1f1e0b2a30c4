use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use torus_layer::codec::{aligned_windings, build_code, TorusLayerCode};
use torus_layer::geometry::{AmbientPoint, TorusSpec};
use torus_layer::lattice::WindingVector;
use torus_layer::sim::{
    analytic_low_noise, awgn, companding, gaussian_intervals, linear_baseline, run_sweep,
    SourceModel, SweepOptions,
};
use torus_layer::spherical::{load_code, permutation_code, SphericalCodePlus};

fn reference_code() -> TorusLayerCode {
    let layers = permutation_code(3, 0.6).unwrap();
    let u = WindingVector::new(vec![1, 2, 198]).unwrap();
    build_code(layers.clone(), aligned_windings(&layers, &u), 1.0, 0.75).unwrap()
}

fn second_code() -> TorusLayerCode {
    let layers = permutation_code(3, 1.75).unwrap();
    let u = WindingVector::new(vec![1, 4, 34]).unwrap();
    build_code(layers.clone(), aligned_windings(&layers, &u), 1.0, 0.75).unwrap()
}

#[test]
fn awgn_moments() {
    let zero = AmbientPoint(vec![0.0; 4]);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let draws = 250_000;
    let mut sum = [0.0; 4];
    let mut sq = [0.0; 4];
    for _ in 0..draws {
        let y = awgn(&zero, 1.0, &mut rng);
        for i in 0..4 {
            sum[i] += y.0[i];
            sq[i] += y.0[i] * y.0[i];
        }
    }
    // 10^6 draws in total over four coordinates
    let total = (4 * draws) as f64;
    let mean: f64 = sum.iter().sum::<f64>() / total;
    let var: f64 = sq.iter().sum::<f64>() / total - mean * mean;
    assert!(mean.abs() < 4.0 / total.sqrt(), "{mean}");
    assert!((var - 1.0).abs() < 0.01, "{var}");
}

#[test]
fn sweeps_do_not_depend_on_thread_count() {
    let code = second_code();
    let grid = [20.0, 30.0, 45.0];
    let opts = SweepOptions::new(30_000, 42);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                (
                    run_sweep(&code, &SourceModel::Uniform, &grid, &opts).unwrap(),
                    run_sweep(&code, &SourceModel::Gaussian { sigma_s: 0.5 }, &grid, &opts).unwrap(),
                )
            })
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    assert_eq!(one.0.to_csv(&[]), four.0.to_csv(&[]));
}

/// Quantile of `N(0, s^2)` from Simpson integration of the density and
/// bisection, sharing nothing with the library's distribution code.
fn quadrature_quantile(q: f64, s: f64) -> f64 {
    let pdf = |x: f64| (-(x * x) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let cdf = |x: f64| {
        let lo = -12.0 * s;
        let n = 20_000;
        let h = (x - lo) / n as f64;
        let mut acc = pdf(lo) + pdf(x);
        for i in 1..n {
            acc += pdf(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    let (mut a, mut b) = (-10.0 * s, 10.0 * s);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if cdf(m) < q {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn gaussian_cut_points_match_quadrature() {
    let code = reference_code();
    let g = companding(0.5).unwrap();
    let cuts = gaussian_intervals(&g, &code);
    assert_eq!(cuts.len(), 5);
    for (k, &x) in cuts.iter().enumerate() {
        let oracle = quadrature_quantile((k + 1) as f64 / 6.0, 0.5);
        assert!((x - oracle).abs() < 1e-8, "cut {k}: {x} vs {oracle}");
    }

    let single = build_code(
        SphericalCodePlus::single(TorusSpec::centered(3).unwrap()),
        vec![WindingVector::new(vec![1, 2, 5]).unwrap()],
        1.0,
        0.75,
    )
    .unwrap();
    assert!(gaussian_intervals(&g, &single).is_empty());
}

#[test]
fn layered_code_beats_single_torus_by_squared_length() {
    let layered = reference_code();
    let u = WindingVector::new(vec![1, 2, 198]).unwrap();
    let single = build_code(
        SphericalCodePlus::single(TorusSpec::centered(3).unwrap()),
        vec![u],
        1.0,
        0.75,
    )
    .unwrap();
    let db = 70.0;
    let opts = SweepOptions::new(20_000, 5);
    let a = run_sweep(&layered, &SourceModel::Uniform, &[db], &opts).unwrap();
    let b = run_sweep(&single, &SourceModel::Uniform, &[db], &opts).unwrap();
    let expect = (layered.total_length() / single.total_length()).powi(2);
    let got = b.mse[0] / a.mse[0];
    assert!((got / expect - 1.0).abs() < 0.25, "ratio {got}, expected {expect}");
}

#[test]
fn uniform_sweep_tracks_low_noise_law() {
    let code = second_code();
    let opts = SweepOptions::new(50_000, 6);
    let grid = [40.0, 50.0];
    let r = run_sweep(&code, &SourceModel::Uniform, &grid, &opts).unwrap();
    for (i, &db) in grid.iter().enumerate() {
        let a = analytic_low_noise(&code, &SourceModel::Uniform, 10f64.powf(-db / 10.0)).unwrap();
        assert!((r.mse[i] / a - 1.0).abs() < 0.15);
    }
}

#[test]
fn mse_is_monotone_in_snr() {
    let code = second_code();
    let grid: Vec<f64> = (0..=10).map(|i| 5.0 * i as f64).collect();
    let r = run_sweep(&code, &SourceModel::Uniform, &grid, &SweepOptions::new(20_000, 8)).unwrap();
    for i in 0..grid.len() - 1 {
        let se = (r.stderr[i].powi(2) + r.stderr[i + 1].powi(2)).sqrt();
        assert!(r.mse[i + 1] - r.mse[i] <= 3.0 * se, "{} dB", grid[i + 1]);
    }
    assert!(r.mse.iter().all(|&m| m > 0.0));
}

#[test]
fn gaussian_noiseless_limit() {
    let code = second_code();
    let r = run_sweep(
        &code,
        &SourceModel::Gaussian { sigma_s: 0.5 },
        &[150.0],
        &SweepOptions::new(10_000, 12),
    )
    .unwrap();
    assert!(r.mse[0] < 1e-12, "{}", r.mse[0]);
}

#[test]
fn power_constraint_holds() {
    let code = reference_code().with_power(3.0).unwrap();
    let n = 10_000;
    let mean: f64 = (0..n)
        .map(|i| code.encode(i as f64 / n as f64).unwrap().norm().powi(2))
        .sum::<f64>()
        / n as f64;
    assert!((mean - 3.0).abs() < 1e-9);
}

#[test]
fn linear_baseline_high_snr() {
    let r = linear_baseline(2.0, 3, &[30.0], &SweepOptions::new(50_000, 13)).unwrap();
    let sigma2 = 2.0 / 1000.0;
    assert!((r.mse[0] / (sigma2 / 8.0) - 1.0).abs() < 0.1);
}

#[test]
fn files_round_trip() {
    let dir = std::env::temp_dir().join(format!("torus-layer-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let layers = permutation_code(4, 0.3).unwrap();
    layers.save(dir.join("layers.txt")).unwrap();
    assert_eq!(load_code(dir.join("layers.txt")).unwrap(), layers);

    let code = reference_code();
    code.save(dir.join("code.txt")).unwrap();
    assert_eq!(TorusLayerCode::load(dir.join("code.txt")).unwrap(), code);
    std::fs::remove_dir_all(&dir).unwrap();
}
