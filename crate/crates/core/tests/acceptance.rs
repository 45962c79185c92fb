//! Acceptance suite: every criterion the artifact must meet, one test per
//! criterion, each printing a `[PASS]` line with the measured margin when
//! it holds (run with `-- --nocapture` to see them).
//!
//! Tolerances are pinned here, not calibrated elsewhere. All Monte-Carlo
//! runs are seeded and bit-reproducible, so these are deterministic checks.

use istn::analytics::{
    association_weight, coverage_approx, coverage_closed_form, coverage_exact, first_touch_cdf,
    laplace_derivatives, laplace_interference, KappaPolicy, TierConfig,
};
use istn::experiments::presets::{
    closed_form_two_tier, reference_two_tier, satellite_tier, terrestrial_tier,
};
use istn::experiments::units::db_to_linear;
use istn::fading::{FadingLaw, AS, FHS, ILS};
use istn::quadrature::{integrate_vec, Tolerance};
use istn::simulator::{
    estimate_association_proportions, estimate_coverage, estimate_coverage_grid, matched_density,
    probes, SpatialRep, WalkerStarConfig,
};
use istn::stats::{bernoulli_sigma, ks_test_two_sample};
use num_complex::Complex64;
use std::f64::consts::PI;

fn db_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

#[test]
fn criterion_01_exact_coverage_within_mc_confidence_interval() {
    let tiers = reference_two_tier(50.0, 10.0, AS);
    let grid = [-10.0, -5.0, 0.0, 5.0, 10.0, 20.0];
    let n = 1_000_000u64;
    let mc = estimate_coverage(&tiers, &grid, n, 20_240_101, SpatialRep::Annulus).unwrap();
    let mut worst_ratio = 0.0f64;
    for (i, &t_db) in grid.iter().enumerate() {
        let exact = coverage_exact(&tiers, db_to_linear(t_db)).unwrap().total;
        let est = &mc.per_point[i];
        let gap = (exact - est.value).abs();
        assert!(
            gap <= est.half_width_95,
            "T = {t_db} dB: exact {exact} vs MC {} +- {}",
            est.value,
            est.half_width_95
        );
        worst_ratio = worst_ratio.max(gap / est.half_width_95);
    }
    println!(
        "[PASS] criterion 1: exact coverage inside the 95% CI of a 1e6-snapshot \
         run at all 6 thresholds (worst |gap|/CI = {worst_ratio:.2})"
    );
}

#[test]
fn criterion_02_exact_equals_approx_for_unit_shape() {
    let tiers = reference_two_tier(50.0, 10.0, FHS);
    let mut worst = 0.0f64;
    for t_db in db_grid(-10.0, 30.0, 2.0) {
        let t = db_to_linear(t_db);
        let e = coverage_exact(&tiers, t).unwrap().total;
        let a = coverage_approx(&tiers, t, &KappaPolicy::default()).unwrap().total;
        worst = worst.max((e - a).abs());
    }
    assert!(worst < 1e-6, "max |exact - approx| = {worst}");
    println!(
        "[PASS] criterion 2: |exact - approx| < 1e-6 across the grid for m = 1 \
         (max = {worst:.2e})"
    );
}

#[test]
fn criterion_03_approximation_tightness_with_default_kappa() {
    for preset in [AS, ILS] {
        let tiers = reference_two_tier(50.0, 10.0, preset);
        let mut worst = 0.0f64;
        for t_db in db_grid(-10.0, 30.0, 2.0) {
            let t = db_to_linear(t_db);
            let e = coverage_exact(&tiers, t).unwrap().total;
            let a = coverage_approx(&tiers, t, &KappaPolicy::default()).unwrap().total;
            worst = worst.max((e - a).abs());
        }
        assert!(worst <= 0.02, "m = {}: max gap {worst}", preset.m);
        println!(
            "[PASS] criterion 3 (m = {}): max |approx - exact| = {worst:.4} <= 0.02",
            preset.m
        );
    }
}

#[test]
fn criterion_04_displacement_preserves_nearest_distance_law() {
    let cases: [(&str, TierConfig); 3] = [
        ("h = 0.03 km, full visibility", terrestrial_tier(20.0)),
        ("h = 530 km, full visibility", satellite_tier(10.0, AS, 530.0)),
        ("h = 530 km, half visibility", {
            let mut t = satellite_tier(0.0, AS, 530.0);
            t.theta_rad = t.shell.theta_max_rad() / 2.0;
            istn::experiments::presets::set_mean_visible_count(&mut t, 10.0);
            t
        }),
    ];
    for (label, tier) in cases {
        let cap = probes::nearest_distance_samples(&tier, SpatialRep::Cap, 10_000, 404);
        let ann = probes::nearest_distance_samples(&tier, SpatialRep::Annulus, 10_000, 405);
        let out = ks_test_two_sample(&cap, &ann);
        assert!(out.p_value > 0.01, "{label}: KS p = {}", out.p_value);
        println!("[PASS] criterion 4 ({label}): two-sample KS p = {:.3}", out.p_value);
    }
}

#[test]
fn criterion_05_first_touch_conditional_distance_and_laplace_oracles() {
    let tiers = reference_two_tier(50.0, 10.0, AS);
    let sat = &tiers[1];
    let ann = sat.annulus();

    // first-touch law (nearest distance conditioned on visibility)
    let nearest = probes::nearest_distance_samples(sat, SpatialRep::Annulus, 20_000, 505);
    let ks = istn::stats::ks_test_one_sample(&nearest, |r| first_touch_cdf(&ann, r));
    assert!(ks.p_value > 0.01, "first-touch KS p = {}", ks.p_value);

    // serving distance conditioned on association, against the
    // association-weighted density integrated on a fine grid
    let serving = probes::serving_distance_samples(&tiers, 1, SpatialRep::Annulus, 10_000, 506);
    let lam = ann.density_per_km2;
    let grid_n = 4000;
    let step = (ann.r_max_km - ann.r_min_km) / grid_n as f64;
    let density = |r: f64| {
        r * (-PI * lam * (r * r - ann.r_min_km * ann.r_min_km)).exp()
            * association_weight(&tiers, 1, r)
    };
    let mut cdf_grid = vec![0.0f64; grid_n + 1];
    for i in 1..=grid_n {
        let a = ann.r_min_km + (i - 1) as f64 * step;
        let b = a + step;
        cdf_grid[i] = cdf_grid[i - 1] + 0.5 * (density(a) + density(b)) * step;
    }
    let total = *cdf_grid.last().unwrap();
    let cond_cdf = |r: f64| {
        if r <= ann.r_min_km {
            return 0.0;
        }
        if r >= ann.r_max_km {
            return 1.0;
        }
        let x = (r - ann.r_min_km) / step;
        let i = (x as usize).min(grid_n - 1);
        let frac = x - i as f64;
        (cdf_grid[i] * (1.0 - frac) + cdf_grid[i + 1] * frac) / total
    };
    let ks2 = istn::stats::ks_test_one_sample(&serving, cond_cdf);
    assert!(ks2.p_value > 0.01, "conditional-distance KS p = {}", ks2.p_value);

    // empirical Laplace functional at pinned serving distances
    let rate = sat.fading.ccdf_series().rate;
    let mut worst_sigmas = 0.0f64;
    for (j, &r) in [600.0, 900.0, 1500.0].iter().enumerate() {
        let nu = rate * r * r; // tilt scale at T = 0 dB
        let svals = [0.3 * nu, nu, 3.0 * nu];
        let samples =
            probes::laplace_functional_samples(sat, &ann, r, &svals, 20_000, 507 + j as u64);
        for (&s, &(mean, se)) in svals.iter().zip(&samples) {
            let formula = laplace_interference(sat, &ann, r, s).unwrap();
            let sigmas = (mean - formula).abs() / se.max(1e-12);
            assert!(
                sigmas < 3.0,
                "r = {r}, s = {s:.3e}: {mean} vs {formula} ({sigmas:.1} sigma)"
            );
            worst_sigmas = worst_sigmas.max(sigmas);
        }
    }
    println!(
        "[PASS] criterion 5: first-touch KS p = {:.3}, conditional-distance KS p = {:.3}, \
         Laplace functional within 3 sigma at 9 (r, s) points (worst {worst_sigmas:.2} sigma)",
        ks.p_value, ks2.p_value
    );
}

/// Cauchy-integral derivative oracle: `d^q L / ds^q` from transform values
/// on a circle in the complex plane, independent of the closed-form
/// derivative assembly under test.
fn cauchy_derivative_oracle(
    tier: &TierConfig,
    annulus: &istn::geometry::AnnulusGeometry,
    r: f64,
    s: f64,
    q_max: usize,
) -> Vec<f64> {
    let (m, b, omega) = match tier.fading {
        FadingLaw::ShadowedRician(p) => (p.m as f64, p.b, p.omega),
        FadingLaw::Nakagami(_) => unreachable!("oracle exercised on the satellite tier"),
    };
    let g_tilde = tier.g_tilde();
    let alpha = tier.path_loss_exp;
    let lam = annulus.density_per_km2;
    let sigma2 = tier.sigma_hat_sq();
    let bm = 2.0 * b * m;
    let c1 = bm + omega;
    let laplace_at = |z: Complex64| -> Complex64 {
        let parts = integrate_vec(
            |v: f64, out: &mut [f64]| {
                let g = g_tilde * v.powf(-alpha);
                let u = Complex64::new(1.0, 0.0) + z * (2.0 * b * g);
                let mgf = (Complex64::new(m * bm.ln(), 0.0) + u.ln() * (m - 1.0)
                    - (u * c1 - omega).ln() * m)
                    .exp();
                let val = (Complex64::new(1.0, 0.0) - mgf) * v;
                out[0] = val.re;
                out[1] = val.im;
            },
            2,
            r,
            annulus.r_max_km,
            Tolerance::new(1e-11, 1e-14),
        )
        .unwrap();
        let eta = -z * sigma2 - Complex64::new(parts[0], parts[1]) * (2.0 * PI * lam);
        eta.exp()
    };
    let n_nodes = 128;
    let rho = 0.5 * s;
    let mut out = vec![0.0; q_max + 1];
    let ring: Vec<Complex64> = (0..n_nodes)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_nodes as f64;
            laplace_at(Complex64::new(s + rho * th.cos(), rho * th.sin()))
        })
        .collect();
    let mut q_factorial = 1.0;
    for (q, slot) in out.iter_mut().enumerate() {
        if q > 0 {
            q_factorial *= q as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, lz) in ring.iter().enumerate() {
            let th = 2.0 * PI * j as f64 / n_nodes as f64;
            acc += lz * Complex64::new(0.0, -(q as f64) * th).exp();
        }
        *slot = (acc / n_nodes as f64).re * q_factorial / rho.powi(q as i32);
    }
    out
}

#[test]
fn criterion_06_derivative_stack_matches_independent_oracle() {
    use rand::Rng;
    use rand::SeedableRng;
    let tiers = reference_two_tier(50.0, 10.0, AS); // m = 10
    let sat = &tiers[1];
    let ann = sat.annulus();
    let rate = sat.fading.ccdf_series().rate;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for point in 0..5 {
        let r = ann.r_min_km + rng.random::<f64>() * (0.8 * ann.r_max_km - ann.r_min_km);
        let t_db = -3.0 + 13.0 * rng.random::<f64>();
        let s = rate * r * r * db_to_linear(t_db);
        let derivs = laplace_derivatives(sat, &ann, r, s, 9).unwrap();
        let oracle = cauchy_derivative_oracle(sat, &ann, r, s, 9);
        for q in 0..=9 {
            // complete monotonicity: signs alternate with the order
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            assert!(sign * derivs[q] > 0.0, "sign pattern broken at q = {q}");
            let rel = (derivs[q] - oracle[q]).abs() / oracle[q].abs();
            assert!(
                rel < 1e-3,
                "point {point} (r = {r:.1}, s = {s:.3e}), q = {q}: \
                 {} vs oracle {} (rel {rel:.2e})",
                derivs[q],
                oracle[q]
            );
            worst = worst.max(rel);
        }
    }
    println!(
        "[PASS] criterion 6: derivatives up to q = 9 match the Cauchy-circle \
         oracle at 5 random (r, s) points (worst rel err {worst:.2e}); \
         sign pattern alternates throughout"
    );
}

#[test]
fn criterion_07_closed_form_tracks_exact_coverage() {
    let cases = [
        (200.0, (2.9282, 1.4089)),
        (530.0, (1.9521, 0.0)),
        (1000.0, (2.1474, 1.3535)),
    ];
    let mut failures = Vec::new();
    for (alt, eps) in cases {
        let tiers = closed_form_two_tier(alt, 30.0);
        let mut worst = (0.0f64, 0.0f64);
        for t_db in db_grid(-10.0, 20.0, 0.5) {
            let t = db_to_linear(t_db);
            let cf = coverage_closed_form(&tiers, t, eps).unwrap();
            let ex = coverage_exact(&tiers, t).unwrap().total;
            if (cf - ex).abs() > worst.1 {
                worst = (t_db, (cf - ex).abs());
            }
        }
        if worst.1 <= 0.05 {
            println!(
                "[PASS] criterion 7 (h = {alt} km): max |closed form - exact| = {:.4} <= 0.05",
                worst.1
            );
        } else {
            println!(
                "[FAIL] criterion 7 (h = {alt} km): max |closed form - exact| = {:.4} > 0.05 \
                 (at T = {} dB; the exact reference is Monte-Carlo confirmed, and no \
                 admissible correction pair reaches 0.05 here)",
                worst.1, worst.0
            );
            failures.push((alt, worst));
        }
    }
    assert!(
        failures.is_empty(),
        "closed form exceeded the 0.05 tracking bar with the calibrated correction \
         constants: {failures:?}"
    );
}

#[test]
fn criterion_08_poisson_model_lower_bounds_the_grid_model() {
    let cfg = WalkerStarConfig {
        n_sats: 1000,
        n_orbits: 20,
        altitude_km: 530.0,
        reference_lat_deg: 36.0,
        reference_lon_deg: 126.0,
        terrestrial_spacing_km: 4.9,
        terrestrial_height_km: 0.03,
        interplane_phase_rad: 0.0,
    };
    let radio = vec![terrestrial_tier(50.0), satellite_tier(10.0, AS, 530.0)];
    let grid_t = db_grid(-10.0, 10.0, 1.0);
    let n = 200_000u64;

    let densities = matched_density(&cfg, &radio, 4000, 808).unwrap();
    let mut ppp_tiers = radio.clone();
    for (t, d) in ppp_tiers.iter_mut().zip(densities) {
        t.density_per_km2 = d;
    }
    let grid_mc = estimate_coverage_grid(&cfg, &radio, &grid_t, n, 809).unwrap();
    let ppp_mc = estimate_coverage(&ppp_tiers, &grid_t, n, 810, SpatialRep::Annulus).unwrap();

    let mut min_gap = f64::INFINITY;
    for i in 0..grid_t.len() {
        let g = grid_mc.curve.total[i].unwrap();
        let p = ppp_mc.curve.total[i].unwrap();
        let sigma = (bernoulli_sigma(g, n).powi(2) + bernoulli_sigma(p, n).powi(2)).sqrt();
        assert!(
            p <= g + 3.0 * sigma,
            "T = {} dB: PPP {p} above grid {g} beyond noise",
            grid_t[i]
        );
        min_gap = min_gap.min(g - p);
    }
    // the bound must be informative, not merely within noise
    let mid = grid_t.len() / 2;
    let mid_gap =
        grid_mc.curve.total[mid].unwrap() - ppp_mc.curve.total[mid].unwrap();
    assert!(mid_gap > 0.0, "no strict ordering at the grid midpoint");
    println!(
        "[PASS] criterion 8: density-matched PPP curve lower-bounds the grid curve \
         on [-10, 10] dB (min gap {min_gap:.4}, midpoint gap {mid_gap:.4})"
    );
}

#[test]
fn criterion_09_association_orderings() {
    // power-of-two snapshot count makes the proportion sum exact in f64
    let n = 1u64 << 17;

    // terrestrial association grows with its bias
    let mut last = -1.0;
    for bias in [0.1, 1.0, 10.0, 100.0] {
        let mut tiers = reference_two_tier(50.0, 10.0, AS);
        tiers[0].bias = bias;
        let props = estimate_association_proportions(&tiers, n, 909, SpatialRep::Annulus).unwrap();
        assert!(
            props.per_tier[0] > last,
            "terrestrial share not increasing at bias {bias}"
        );
        last = props.per_tier[0];
        let sum: f64 = props.per_tier.iter().sum::<f64>() + props.none;
        assert_eq!(sum, 1.0, "proportions must sum to one exactly");
    }

    // lighter satellite shadowing pulls users away from the terrestrial tier
    let mut shares = Vec::new();
    for preset in [FHS, AS, ILS] {
        let tiers = reference_two_tier(50.0, 10.0, preset);
        let props = estimate_association_proportions(&tiers, n, 910, SpatialRep::Annulus).unwrap();
        shares.push(props.per_tier[0]);
    }
    assert!(
        shares[0] > shares[1] && shares[1] > shares[2],
        "expected FHS > AS > ILS terrestrial shares, got {shares:?}"
    );
    println!(
        "[PASS] criterion 9: terrestrial share monotone in bias; \
         shares FHS {:.3} > AS {:.3} > ILS {:.3}; proportions sum to 1 exactly",
        shares[0], shares[1], shares[2]
    );
}

#[test]
fn criterion_10_bit_reproducibility_under_parallelism() {
    let tiers = reference_two_tier(50.0, 10.0, AS);
    let grid = [-5.0, 0.0, 5.0];
    let with_threads = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let cov = estimate_coverage(&tiers, &grid, 100_000, 1010, SpatialRep::Annulus)
                .unwrap();
            let assoc =
                estimate_association_proportions(&tiers, 50_000, 1011, SpatialRep::Annulus)
                    .unwrap();
            (cov.curve.total, cov.curve.per_tier, assoc.per_tier, assoc.none)
        })
    };
    let a = with_threads(1);
    let b = with_threads(4);
    let c = with_threads(3);
    assert_eq!(a, b);
    assert_eq!(a, c);

    // the grid baseline estimator obeys the same contract
    let cfg = WalkerStarConfig {
        n_sats: 200,
        n_orbits: 10,
        altitude_km: 530.0,
        reference_lat_deg: 36.0,
        reference_lon_deg: 126.0,
        terrestrial_spacing_km: 4.9,
        terrestrial_height_km: 0.03,
        interplane_phase_rad: 0.0,
    };
    let radio = vec![terrestrial_tier(50.0), satellite_tier(10.0, AS, 530.0)];
    let grid_run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            estimate_coverage_grid(&cfg, &radio, &grid, 20_000, 1012)
                .unwrap()
                .curve
                .total
        })
    };
    assert_eq!(grid_run(1), grid_run(4));
    println!(
        "[PASS] criterion 10: coverage, association, and grid estimates are \
         bit-identical across 1, 3, and 4 worker threads"
    );
}
