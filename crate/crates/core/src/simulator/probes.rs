//! Targeted samplers used to cross-check the analytical distributions:
//! nearest-distance draws in both spatial representations, serving
//! distances conditioned on association, and the empirical Laplace
//! functional of interference at a pinned serving distance.

use super::{observe_all, observe_tier, snapshot_rng, LeanTier, SpatialRep};
use crate::analytics::TierConfig;
use crate::fading::FadingSampler;
use crate::geometry::AnnulusGeometry;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// Nearest-point distances over non-empty realizations of one tier.
pub fn nearest_distance_samples(
    tier: &TierConfig,
    rep: SpatialRep,
    n_samples: usize,
    seed: u64,
) -> Vec<f64> {
    let lean = LeanTier::new(tier);
    let mut out = Vec::with_capacity(n_samples);
    let mut idx = 0u64;
    while out.len() < n_samples {
        let mut rng = snapshot_rng(seed, idx);
        idx += 1;
        if let Some(o) = observe_tier(&lean, rep, &mut rng) {
            out.push(o.nearest_km);
        }
    }
    out
}

/// Serving distances conditioned on association with tier `k` (and tier-`k`
/// visibility).
pub fn serving_distance_samples(
    tiers: &[TierConfig],
    k: usize,
    rep: SpatialRep,
    n_samples: usize,
    seed: u64,
) -> Vec<f64> {
    let lean: Vec<LeanTier> = tiers.iter().map(LeanTier::new).collect();
    let mut out = Vec::with_capacity(n_samples);
    let mut idx = 0u64;
    while out.len() < n_samples {
        let mut rng = snapshot_rng(seed, idx);
        idx += 1;
        let (obs, serving) = observe_all(&lean, rep, &mut rng);
        if serving == Some(k) {
            out.push(obs[k].expect("serving tier is non-empty").nearest_km);
        }
    }
    out
}

/// Empirical mean and standard error of `exp(-s (I + sigma^2))` where `I`
/// aggregates side-lobe interference from tier points beyond the pinned
/// serving distance `r`.
///
/// Returns one `(mean, standard_error)` pair per requested `s`.
pub fn laplace_functional_samples(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    svals: &[f64],
    n_snapshots: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let sampler = FadingSampler::new(&tier.fading);
    let alpha = tier.path_loss_exp;
    let g_tilde = tier.g_tilde();
    let sigma2 = tier.sigma_hat_sq();
    let lam = annulus.density_per_km2;
    let (a2, b2) = (r * r, annulus.r_max_km * annulus.r_max_km);
    let mean_count = lam * std::f64::consts::PI * (b2 - a2);

    let mut sums = vec![0.0f64; svals.len()];
    let mut sq_sums = vec![0.0f64; svals.len()];
    for idx in 0..n_snapshots {
        let mut rng = snapshot_rng(seed, idx as u64);
        let n = if mean_count > 0.0 {
            Poisson::new(mean_count).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        let mut interference = 0.0;
        for _ in 0..n {
            let v = (a2 + rng.random::<f64>() * (b2 - a2)).sqrt();
            let h = sampler.sample(&mut rng);
            interference += g_tilde * h * v.powf(-alpha);
        }
        let x = interference + sigma2;
        for (j, &s) in svals.iter().enumerate() {
            let e = (-s * x).exp();
            sums[j] += e;
            sq_sums[j] += e * e;
        }
    }
    let n = n_snapshots as f64;
    svals
        .iter()
        .enumerate()
        .map(|(j, _)| {
            let mean = sums[j] / n;
            let var = (sq_sums[j] / n - mean * mean).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}
