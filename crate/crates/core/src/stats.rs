//! Statistical verification helpers: Kolmogorov-Smirnov tests and
//! Monte-Carlo confidence intervals.
//!
//! The simulator and the analytical expressions are cross-checked by
//! distribution tests throughout the suite, so the KS machinery lives in the
//! library rather than in test code.

/// Result of a KS test.
#[derive(Debug, Clone, Copy)]
pub struct KsOutcome {
    /// Supremum distance between the compared CDFs.
    pub statistic: f64,
    /// Asymptotic two-sided p-value (Stephens' small-sample correction).
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution,
/// Q(x) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 x^2).
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.2 {
        // series converges too slowly to matter; Q is 1 to machine precision
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let term = (-2.0 * (j as f64) * (j as f64) * x * x).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-14 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p_value(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS test of `samples` against the continuous CDF `cdf`.
pub fn ks_test_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsOutcome {
    assert!(!samples.is_empty(), "KS test needs samples");
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    KsOutcome {
        statistic: d,
        p_value: ks_p_value(d, n),
    }
}

/// Two-sample KS test.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> KsOutcome {
    assert!(!a.is_empty() && !b.is_empty(), "KS test needs samples");
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let n_eff = na * nb / (na + nb);
    KsOutcome {
        statistic: d,
        p_value: ks_p_value(d, n_eff),
    }
}

/// Half-width of the normal-approximation 95% confidence interval for a
/// probability estimated from `n` Bernoulli trials.
pub fn ci95_half_width(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    1.96 * (p * (1.0 - p) / n as f64).sqrt()
}

/// Standard deviation of a Bernoulli mean estimate, for k-sigma checks.
pub fn bernoulli_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kolmogorov_sf_reference_values() {
        // series evaluated independently to high precision
        assert!((kolmogorov_sf(1.0) - 0.26999967167735456).abs() < 1e-12);
        assert!((kolmogorov_sf(1.36) - 0.049485876755377876).abs() < 1e-12);
        assert!(kolmogorov_sf(0.05) == 1.0);
        assert!(kolmogorov_sf(4.0) < 1e-12);
    }

    #[test]
    fn uniform_samples_pass_one_sample_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let out = ks_test_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!(out.p_value > 0.01, "p = {}", out.p_value);
    }

    #[test]
    fn shifted_samples_fail_one_sample_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>() * 0.97).collect();
        let out = ks_test_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!(out.p_value < 1e-6, "p = {}", out.p_value);
    }

    #[test]
    fn two_sample_ks_same_law_passes_different_laws_fail() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a: Vec<f64> = (0..15_000).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..12_000).map(|_| rng.random::<f64>()).collect();
        let c: Vec<f64> = (0..12_000).map(|_| rng.random::<f64>().powf(1.1)).collect();
        assert!(ks_test_two_sample(&a, &b).p_value > 0.01);
        assert!(ks_test_two_sample(&a, &c).p_value < 1e-6);
    }

    #[test]
    fn ci_half_width_formula() {
        let hw = ci95_half_width(0.5, 1_000_000);
        assert!((hw - 1.96 * 0.0005).abs() < 1e-12);
    }
}
