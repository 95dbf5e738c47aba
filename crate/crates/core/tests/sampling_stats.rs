//! Statistical checks of the two-part source: goodness of fit of the drawn
//! nonzero counts against the exact binomial-convolution law, bitwise
//! reproducibility, and monotonicity of the finite-length rate.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use seplab::rng::derive;
use seplab::source::{finite_rate, nonzero_count_pmf, sample_concat, ConcatSpec, ContinuousLaw, MixtureSpec};

fn test_spec() -> ConcatSpec {
    ConcatSpec {
        spec_y: MixtureSpec::sparse(0.4, ContinuousLaw::Uniform { lo: -1.0, hi: 1.0 }),
        spec_z: MixtureSpec::sparse(0.7, ContinuousLaw::Uniform { lo: -1.0, hi: 1.0 }),
        lambda: 0.3,
    }
}

/// Pearson chi-square against expected counts, merging adjacent cells until
/// every merged cell has expected mass at least 5.
fn chi_square(observed: &[u64], expected: &[f64]) -> (f64, usize) {
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs_acc, mut exp_acc) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        obs_acc += o as f64;
        exp_acc += e;
        if exp_acc >= 5.0 {
            cells.push((obs_acc, exp_acc));
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 || obs_acc > 0.0 {
        if let Some(last) = cells.last_mut() {
            last.0 += obs_acc;
            last.1 += exp_acc;
        } else {
            cells.push((obs_acc, exp_acc));
        }
    }
    let stat = cells.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    (stat, cells.len())
}

#[test]
fn nonzero_counts_match_exact_law() {
    let spec = test_spec();
    let n = 10;
    let draws = 10_000u64;
    let master = 7u64;

    let mut observed = vec![0u64; n + 1];
    for i in 0..draws {
        let sample = sample_concat(&spec, n, derive(master, &[i])).unwrap();
        let nonzeros = sample.x.iter().filter(|&&v| v != 0.0).count();
        observed[nonzeros] += 1;
    }
    let pmf = nonzero_count_pmf(&spec, n).unwrap();
    let expected: Vec<f64> = pmf.iter().map(|p| p * draws as f64).collect();

    let (stat, cells) = chi_square(&observed, &expected);
    assert!(cells >= 4, "law collapsed to {cells} cells");
    let df = (cells - 1) as f64;
    let critical = ChiSquared::new(df).unwrap().inverse_cdf(0.999);
    assert!(
        stat < critical,
        "chi-square {stat:.2} exceeds 0.1% critical value {critical:.2} (df {df})"
    );
}

#[test]
fn draws_are_bitwise_reproducible() {
    let spec = test_spec();
    let a = sample_concat(&spec, 24, 99).unwrap();
    let b = sample_concat(&spec, 24, 99).unwrap();
    assert_eq!(a.split, b.split);
    for (u, v) in a.x.iter().zip(&b.x) {
        assert_eq!(u.to_bits(), v.to_bits(), "same-seed draws must be identical bits");
    }

    let c = sample_concat(&spec, 24, 100).unwrap();
    assert!(
        a.x.iter().zip(&c.x).any(|(u, v)| u != v),
        "distinct seeds produced identical draws"
    );
}

#[test]
fn finite_rate_is_nonincreasing_in_failure_budget() {
    let spec = test_spec();
    for n in [10usize, 50, 200] {
        let mut last = f64::INFINITY;
        for i in 1..20 {
            let eps = i as f64 / 20.0;
            let est = finite_rate(&spec, n, eps).unwrap();
            assert!(
                est.rate <= last + 1e-15,
                "rate rose from {last} to {} at eps={eps}, n={n}",
                est.rate
            );
            last = est.rate;
        }
    }
}

#[test]
fn median_rate_tracks_asymptote() {
    let spec = test_spec();
    for n in [50usize, 200, 1000] {
        let est = finite_rate(&spec, n, 0.5).unwrap();
        let rho = est.asymptote;
        let slack = 3.0 * (rho * (1.0 - rho) / n as f64).sqrt() + 2.0 / n as f64;
        assert!(
            (est.rate - rho).abs() <= slack,
            "n={n}: rate {} vs asymptote {rho}, slack {slack}",
            est.rate
        );
    }
}
