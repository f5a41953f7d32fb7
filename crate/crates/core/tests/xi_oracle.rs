//! Straight-line re-derivations of both loss-gap estimators on a toy dataset,
//! compared against the library to 1e-12, plus determinism across thread
//! counts and the exact-fit case.

use vcdim::xi::{draw_halves, estimate_xi, estimate_xi_legacy, legacy_replicate_rng, replicate_rng, XiConfig};
use vcdim::{Dataset, ModelSpec, SyntheticConfig};

const X: [f64; 4] = [0.0, 1.0, 2.0, 3.0];
const Y: [f64; 4] = [1.0, 2.0, 0.0, 5.0];

fn toy() -> Dataset {
    Dataset::new(vec![("x".into(), X.to_vec()), ("y".into(), Y.to_vec())], "y").unwrap()
}

/// Least squares for `y ~ a + b x` in closed form. When every `x` in the
/// sample is equal the normal equations are singular and the minimum-norm
/// solution is returned instead.
fn line_fit(rows: &[usize]) -> (f64, f64) {
    let n = rows.len() as f64;
    let mx = rows.iter().map(|&r| X[r]).sum::<f64>() / n;
    let my = rows.iter().map(|&r| Y[r]).sum::<f64>() / n;
    let sxx: f64 = rows.iter().map(|&r| (X[r] - mx).powi(2)).sum();
    if sxx == 0.0 {
        let s = 1.0 + mx * mx;
        return (my / s, my * mx / s);
    }
    let sxy: f64 = rows.iter().map(|&r| (X[r] - mx) * (Y[r] - my)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn mean_fit(rows: &[usize]) -> (f64, f64) {
    (rows.iter().map(|&r| Y[r]).sum::<f64>() / rows.len() as f64, 0.0)
}

fn losses(coef: (f64, f64), rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&r| (coef.0 + coef.1 * X[r] - Y[r]).powi(2)).collect()
}

fn interval_risks(q: &[f64], m: usize, bound: f64) -> Vec<f64> {
    let mut risk = vec![0.0; m];
    for &v in q {
        let j = ((v * m as f64 / bound).floor() as usize).min(m - 1);
        risk[j] += (2 * j + 1) as f64 * bound / (2 * m) as f64 / q.len() as f64;
    }
    risk
}

fn oracle_primary(cfg: &XiConfig, fitter: fn(&[usize]) -> (f64, f64)) -> Vec<f64> {
    let mut out = Vec::new();
    for (l, &n) in cfg.design_points.iter().enumerate() {
        let mut total = 0.0;
        for o in 0..cfg.b2 {
            let mut acc = vec![0.0; cfg.m];
            for i in 0..cfg.b1 {
                let draws = draw_halves(&mut replicate_rng(cfg.seed, l, o, i), 4, n);
                let (g1, g2) = draws.split_at(n);
                let q1 = losses(fitter(g1), g2);
                let q2 = losses(fitter(g2), g1);
                let bound = q1.iter().chain(&q2).fold(0.0_f64, |a, &b| a.max(b));
                if bound == 0.0 {
                    continue;
                }
                let (r1, r2) = (interval_risks(&q1, cfg.m, bound), interval_risks(&q2, cfg.m, bound));
                for j in 0..cfg.m {
                    acc[j] += (r1[j] - r2[j]).abs();
                }
            }
            total += acc.iter().map(|a| a / cfg.b1 as f64).sum::<f64>();
        }
        out.push(total / cfg.b2 as f64);
    }
    out
}

fn oracle_legacy(cfg: &XiConfig, flip: bool) -> Vec<f64> {
    let mut out = Vec::new();
    for (l, &n) in cfg.design_points.iter().enumerate() {
        let mut total = 0.0;
        for o in 0..cfg.b2 {
            for i in 0..cfg.b1 {
                let draws = draw_halves(&mut legacy_replicate_rng(cfg.seed, l, o, i), 4, n);
                let mut y: Vec<f64> = draws.iter().map(|&r| Y[r]).collect();
                if flip {
                    let centre = y[n..].iter().sum::<f64>() / n as f64;
                    y[n..].iter_mut().for_each(|v| *v = 2.0 * centre - *v);
                }
                // Line fit on the merged sample with the (possibly flipped) response.
                let k = (2 * n) as f64;
                let xs: Vec<f64> = draws.iter().map(|&r| X[r]).collect();
                let mx = xs.iter().sum::<f64>() / k;
                let my = y.iter().sum::<f64>() / k;
                let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
                let (a, b) = if sxx == 0.0 {
                    let s = 1.0 + mx * mx;
                    (my / s, my * mx / s)
                } else {
                    let b = xs.iter().zip(&y).map(|(x, v)| (x - mx) * (v - my)).sum::<f64>() / sxx;
                    (my - b * mx, b)
                };
                let mse = |rows: &[usize]| losses((a, b), rows).iter().sum::<f64>() / rows.len() as f64;
                total += (mse(&draws[..n]) - mse(&draws[n..])).abs();
            }
        }
        out.push(total / (cfg.b1 * cfg.b2) as f64);
    }
    out
}

fn close(a: &[f64], b: &[f64]) {
    assert_eq!(a.len(), b.len());
    assert!(b.iter().any(|&v| v > 0.0), "degenerate oracle {b:?}");
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "{a:?} vs {b:?}");
    }
}

#[test]
fn primary_matches_trace_oracle_single_replicate() {
    let d = toy();
    let cfg = XiConfig { b1: 1, b2: 1, m: 4, ..XiConfig::new(vec![2, 3, 4], 11) };
    for (spec, fitter) in [
        (ModelSpec::prefix(1), line_fit as fn(&[usize]) -> (f64, f64)),
        (ModelSpec::new(vec![], true).unwrap(), mean_fit),
    ] {
        close(&estimate_xi(&d, &spec, &cfg).unwrap().values(), &oracle_primary(&cfg, fitter));
    }
}

#[test]
fn primary_matches_trace_oracle_with_averaging() {
    let d = toy();
    for seed in [0, 5, 99] {
        let cfg = XiConfig { b1: 3, b2: 4, m: 5, ..XiConfig::new(vec![2, 4], seed) };
        close(&estimate_xi(&d, &ModelSpec::prefix(1), &cfg).unwrap().values(), &oracle_primary(&cfg, line_fit));
    }
}

#[test]
fn legacy_matches_trace_oracle() {
    let d = toy();
    for flip in [false, true] {
        let cfg = XiConfig { b1: 2, b2: 3, ..XiConfig::new(vec![2, 3, 4], 4) };
        close(
            &estimate_xi_legacy(&d, &ModelSpec::prefix(1), &cfg, flip).unwrap().values(),
            &oracle_legacy(&cfg, flip),
        );
    }
}

#[test]
fn bit_identical_across_thread_counts() {
    let d = vcdim::dataset::generate_synthetic(&SyntheticConfig::new(4, 120, 8)).unwrap();
    let cfg = XiConfig { b1: 4, b2: 6, ..XiConfig::new(vec![20, 40, 60], 21) };
    let spec = ModelSpec::prefix(4);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            (
                estimate_xi(&d, &spec, &cfg).unwrap(),
                estimate_xi_legacy(&d, &spec, &cfg, true).unwrap(),
            )
        })
    };
    let one = run(1);
    for threads in [2, 8] {
        let other = run(threads);
        let bits = |c: &vcdim::XiCurve| c.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&one.0), bits(&other.0));
        assert_eq!(bits(&one.1), bits(&other.1));
    }
}

#[test]
fn exact_fit_gives_vanishing_gap() {
    let n = 80;
    let x1: Vec<f64> = (0..n).map(|i| (i % 7) as f64).collect();
    let x2: Vec<f64> = (0..n).map(|i| ((i * 5) % 11) as f64).collect();
    let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 1.0 + 2.0 * a - 3.0 * b).collect();
    let d = Dataset::new(vec![("x1".into(), x1), ("x2".into(), x2), ("y".into(), y)], "y").unwrap();
    let cfg = XiConfig { b1: 5, b2: 5, ..XiConfig::new(vec![20, 40, 80], 2) };
    let curve = estimate_xi(&d, &ModelSpec::prefix(2), &cfg).unwrap();
    assert!(curve.values().iter().all(|&v| v < 1e-8), "{:?}", curve.values());
}
