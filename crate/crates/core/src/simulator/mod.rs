//! Monte-Carlo snapshot engine over the full system model.
//!
//! One snapshot samples every tier's visible stations (in either the 3-D
//! cap or the displaced-annulus representation), draws per-link fading,
//! associates the user with the tier of maximum biased mean received power,
//! and evaluates the SINR of the serving link against same-tier
//! interference on side lobes plus normalized noise.
//!
//! Determinism: every estimator derives the RNG of snapshot `i` from
//! `(seed, i)` via an independent ChaCha stream, and accumulates integer
//! counts only, so results are bit-identical for any parallel schedule.

pub mod probes;
mod walker;

pub use walker::{
    estimate_coverage_grid, matched_density, matched_ppp_tiers, walker_star_snapshot,
    WalkerStarConfig,
};

use crate::analytics::{CoverageCurve, Method, TierConfig};
use crate::fading::FadingSampler;
use crate::geometry::{sample_annulus_ppp, sample_cap_ppp, AnnulusGeometry, PointSet2D, PointSet3D};
use crate::stats::ci95_half_width;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SimError {
    #[error("invalid simulation configuration: {0}")]
    Config(String),
}

/// Which spatial representation the sampler draws from.
///
/// The displaced annulus is the fast path; the cap is kept as a full-system
/// check of the displacement transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpatialRep {
    #[default]
    Annulus,
    Cap,
}

/// One tier's realization inside a snapshot.
#[derive(Debug, Clone, Default)]
pub struct TierSample {
    /// User distances of all visible stations (sampling order).
    pub distances_km: Vec<f64>,
    /// Per-link fading power draws, aligned with `distances_km`.
    pub fading: Vec<f64>,
    pub nearest_km: Option<f64>,
    /// Biased mean received power of the nearest station.
    pub erp: Option<f64>,
    /// Candidate SINR when served by this tier.
    pub sinr: Option<f64>,
    /// Planar positions (annulus representation).
    pub points_2d: Option<PointSet2D>,
    /// On-shell positions (cap representation).
    pub points_3d: Option<PointSet3D>,
}

/// A full sampled network realization.
#[derive(Debug, Clone)]
pub struct NetworkSnapshot {
    pub tiers: Vec<TierSample>,
    /// Index of the max-ERP tier, `None` when every tier is empty.
    pub serving: Option<usize>,
}

impl NetworkSnapshot {
    /// SINR of the serving link, if any tier is visible.
    pub fn serving_sinr(&self) -> Option<f64> {
        self.serving.and_then(|k| self.tiers[k].sinr)
    }
}

/// A Monte-Carlo probability estimate with its sampling pedigree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    pub half_width_95: f64,
    pub n_snapshots: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(count: u64, n: u64, seed: u64) -> Self {
        let p = count as f64 / n as f64;
        McEstimate {
            value: p,
            half_width_95: ci95_half_width(p, n),
            n_snapshots: n,
            seed,
        }
    }
}

/// Coverage curve plus the per-point estimates it was built from.
#[derive(Debug, Clone)]
pub struct McCoverageCurve {
    pub curve: CoverageCurve,
    pub per_point: Vec<McEstimate>,
}

/// Empirical association proportions.
#[derive(Debug, Clone)]
pub struct AssociationProportions {
    /// `P[J = k]` per tier.
    pub per_tier: Vec<f64>,
    /// Probability that no tier is visible.
    pub none: f64,
    /// `P[J = k | tier k visible]`, directly comparable to the analytical
    /// association probability.
    pub conditional_on_visible: Vec<f64>,
    pub n_snapshots: u64,
    pub seed: u64,
}

/// Precomputed per-tier state for the hot sampling loop.
pub(crate) struct LeanTier {
    pub annulus: AnnulusGeometry,
    pub alpha: f64,
    pub g_tilde: f64,
    pub sigma_hat_sq: f64,
    pub erp_coeff: f64,
    pub sampler: FadingSampler,
    // cap representation constants
    pub shell_radius: f64,
    pub earth_radius: f64,
    pub cos_theta: f64,
    pub cap_mean: f64,
}

impl LeanTier {
    pub(crate) fn new(cfg: &TierConfig) -> Self {
        let cap = cfg.cap();
        LeanTier {
            annulus: cfg.annulus(),
            alpha: cfg.path_loss_exp,
            g_tilde: cfg.g_tilde(),
            sigma_hat_sq: cfg.sigma_hat_sq(),
            erp_coeff: cfg.erp_coeff(),
            sampler: FadingSampler::new(&cfg.fading),
            shell_radius: cfg.shell.radius_km,
            earth_radius: cfg.shell.earth_radius_km,
            cos_theta: cfg.theta_rad.cos(),
            cap_mean: cfg.density_per_km2 * cap.area_km2(),
        }
    }

    fn draw_count<R: Rng + ?Sized>(&self, rep: SpatialRep, rng: &mut R) -> usize {
        let mean = match rep {
            SpatialRep::Annulus => self.annulus.mean_count(),
            SpatialRep::Cap => self.cap_mean,
        };
        if mean <= 0.0 {
            return 0;
        }
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    }

    fn draw_distance<R: Rng + ?Sized>(&self, rep: SpatialRep, rng: &mut R) -> f64 {
        match rep {
            SpatialRep::Annulus => {
                let a2 = self.annulus.r_min_km * self.annulus.r_min_km;
                let b2 = self.annulus.r_max_km * self.annulus.r_max_km;
                (a2 + rng.random::<f64>() * (b2 - a2)).sqrt()
            }
            SpatialRep::Cap => {
                let cos_phi = 1.0 - rng.random::<f64>() * (1.0 - self.cos_theta);
                let (r, re) = (self.shell_radius, self.earth_radius);
                (r * r + re * re - 2.0 * r * re * cos_phi).sqrt()
            }
        }
    }
}

/// Minimal per-tier record the estimators accumulate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LeanObservation {
    pub nearest_km: f64,
    pub erp: f64,
    pub sinr: f64,
}

/// Sample one tier and reduce it on the fly: nearest link, its fading, and
/// the aggregate interference of everything else.
pub(crate) fn observe_tier<R: Rng + ?Sized>(
    tier: &LeanTier,
    rep: SpatialRep,
    rng: &mut R,
) -> Option<LeanObservation> {
    let n = tier.draw_count(rep, rng);
    if n == 0 {
        return None;
    }
    let mut nearest = f64::INFINITY;
    let mut nearest_power = 0.0;
    let mut power_sum = 0.0;
    for _ in 0..n {
        let d = tier.draw_distance(rep, rng);
        let h = tier.sampler.sample(rng);
        let p = h * d.powf(-tier.alpha);
        power_sum += p;
        if d < nearest {
            nearest = d;
            nearest_power = p;
        }
    }
    let interference = tier.g_tilde * (power_sum - nearest_power);
    Some(LeanObservation {
        nearest_km: nearest,
        erp: tier.erp_coeff * nearest.powf(-tier.alpha),
        sinr: nearest_power / (interference + tier.sigma_hat_sq),
    })
}

pub(crate) fn observe_all<R: Rng + ?Sized>(
    tiers: &[LeanTier],
    rep: SpatialRep,
    rng: &mut R,
) -> (Vec<Option<LeanObservation>>, Option<usize>) {
    let obs: Vec<_> = tiers.iter().map(|t| observe_tier(t, rep, rng)).collect();
    let serving = obs
        .iter()
        .enumerate()
        .filter_map(|(k, o)| o.map(|o| (k, o.erp)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k);
    (obs, serving)
}

pub(crate) fn snapshot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sample one full network realization, retaining positions and fading.
pub fn run_snapshot<R: Rng + ?Sized>(
    tiers: &[TierConfig],
    rep: SpatialRep,
    rng: &mut R,
) -> NetworkSnapshot {
    let mut samples = Vec::with_capacity(tiers.len());
    for cfg in tiers {
        let lean = LeanTier::new(cfg);
        let mut sample = TierSample::default();
        match rep {
            SpatialRep::Annulus => {
                let pts = sample_annulus_ppp(&lean.annulus, rng);
                sample.distances_km = pts
                    .coordinates
                    .iter()
                    .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
                    .collect();
                sample.points_2d = Some(pts);
            }
            SpatialRep::Cap => {
                let cap = cfg.cap();
                let user = cfg.shell.user_position();
                let pts = sample_cap_ppp(&cap, cfg.density_per_km2, rng);
                sample.distances_km = pts
                    .coordinates
                    .iter()
                    .map(|&p| crate::geometry::user_distance(p, user))
                    .collect();
                sample.points_3d = Some(pts);
            }
        }
        sample.fading = sample
            .distances_km
            .iter()
            .map(|_| lean.sampler.sample(rng))
            .collect();
        if !sample.distances_km.is_empty() {
            let (i_min, &d_min) = sample
                .distances_km
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1))
                .expect("non-empty");
            let serving_power = sample.fading[i_min] * d_min.powf(-lean.alpha);
            let total: f64 = sample
                .distances_km
                .iter()
                .zip(&sample.fading)
                .map(|(&d, &h)| h * d.powf(-lean.alpha))
                .sum();
            let interference = lean.g_tilde * (total - serving_power);
            sample.nearest_km = Some(d_min);
            sample.erp = Some(lean.erp_coeff * d_min.powf(-lean.alpha));
            sample.sinr = Some(serving_power / (interference + lean.sigma_hat_sq));
        }
        samples.push(sample);
    }
    let serving = samples
        .iter()
        .enumerate()
        .filter_map(|(k, s)| s.erp.map(|e| (k, e)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(k, _)| k);
    NetworkSnapshot {
        tiers: samples,
        serving,
    }
}

fn validate_thresholds(thresholds_db: &[f64]) -> Result<(), SimError> {
    if thresholds_db.is_empty() {
        return Err(SimError::Config("empty threshold grid".into()));
    }
    if thresholds_db.windows(2).any(|w| w[0] > w[1]) {
        return Err(SimError::Config("threshold grid must be sorted".into()));
    }
    Ok(())
}

const PAR_CHUNK: u64 = 4096;

/// Estimate the coverage curve by Monte Carlo.
///
/// The same snapshot set serves every threshold. Counts are accumulated per
/// `(tier, threshold)` cell, so the per-tier columns sum to the total
/// exactly and the result is reproducible bit for bit from `(seed, config)`
/// under any parallelism.
pub fn estimate_coverage(
    tiers: &[TierConfig],
    thresholds_db: &[f64],
    n_snapshots: u64,
    seed: u64,
    rep: SpatialRep,
) -> Result<McCoverageCurve, SimError> {
    validate_thresholds(thresholds_db)?;
    if n_snapshots == 0 {
        return Err(SimError::Config("need at least one snapshot".into()));
    }
    let lean: Vec<LeanTier> = tiers.iter().map(LeanTier::new).collect();
    let t_lin: Vec<f64> = thresholds_db.iter().map(|&t| 10f64.powf(t / 10.0)).collect();
    let n_tier = tiers.len();
    let n_thr = t_lin.len();

    let n_chunks = n_snapshots.div_ceil(PAR_CHUNK) as usize;
    let cells = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk as u64 * PAR_CHUNK;
            let mut counts = vec![0u64; n_tier * n_thr];
            for idx in start..(start + PAR_CHUNK).min(n_snapshots) {
                let mut rng = snapshot_rng(seed, idx);
                let (obs, serving) = observe_all(&lean, rep, &mut rng);
                if let Some(k) = serving {
                    let sinr = obs[k].expect("serving tier is non-empty").sinr;
                    for (i, &t) in t_lin.iter().enumerate() {
                        if sinr > t {
                            counts[k * n_thr + i] += 1;
                        }
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; n_tier * n_thr],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let mut total = Vec::with_capacity(n_thr);
    let mut per_tier = vec![Vec::with_capacity(n_thr); n_tier];
    let mut per_point = Vec::with_capacity(n_thr);
    for i in 0..n_thr {
        let mut sum = 0u64;
        for (k, col) in per_tier.iter_mut().enumerate() {
            let c = cells[k * n_thr + i];
            sum += c;
            col.push(Some(c as f64 / n_snapshots as f64));
        }
        let est = McEstimate::from_count(sum, n_snapshots, seed);
        total.push(Some(est.value));
        per_point.push(est);
    }
    Ok(McCoverageCurve {
        curve: CoverageCurve {
            method: Method::MonteCarlo,
            thresholds_db: thresholds_db.to_vec(),
            total,
            per_tier,
            ci95: Some(per_point.iter().map(|e| e.half_width_95).collect()),
        },
        per_point,
    })
}

/// Empirical association proportions, overall and conditioned on per-tier
/// visibility. Proportions plus the all-empty mass sum to one exactly.
pub fn estimate_association_proportions(
    tiers: &[TierConfig],
    n_snapshots: u64,
    seed: u64,
    rep: SpatialRep,
) -> Result<AssociationProportions, SimError> {
    if n_snapshots == 0 {
        return Err(SimError::Config("need at least one snapshot".into()));
    }
    let lean: Vec<LeanTier> = tiers.iter().map(LeanTier::new).collect();
    let n_tier = tiers.len();

    // layout: [serving counts per tier | visible counts per tier | none]
    let n_chunks = n_snapshots.div_ceil(PAR_CHUNK) as usize;
    let cells = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk as u64 * PAR_CHUNK;
            let mut counts = vec![0u64; 2 * n_tier + 1];
            for idx in start..(start + PAR_CHUNK).min(n_snapshots) {
                let mut rng = snapshot_rng(seed, idx);
                let (obs, serving) = observe_all(&lean, rep, &mut rng);
                match serving {
                    Some(k) => counts[k] += 1,
                    None => counts[2 * n_tier] += 1,
                }
                for (k, o) in obs.iter().enumerate() {
                    if o.is_some() {
                        counts[n_tier + k] += 1;
                    }
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; 2 * n_tier + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let n = n_snapshots as f64;
    Ok(AssociationProportions {
        per_tier: (0..n_tier).map(|k| cells[k] as f64 / n).collect(),
        none: cells[2 * n_tier] as f64 / n,
        conditional_on_visible: (0..n_tier)
            .map(|k| {
                let vis = cells[n_tier + k];
                if vis == 0 {
                    0.0
                } else {
                    cells[k] as f64 / vis as f64
                }
            })
            .collect(),
        n_snapshots,
        seed,
    })
}

/// Uniform direction inside the cap of half-angle `theta` around `axis`.
pub(crate) fn sample_cap_direction<R: Rng + ?Sized>(
    axis: [f64; 3],
    theta: f64,
    rng: &mut R,
) -> [f64; 3] {
    let cos_phi = 1.0 - rng.random::<f64>() * (1.0 - theta.cos());
    let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
    let az = rng.random::<f64>() * TAU;
    // orthonormal frame around the axis
    let a = axis;
    let helper = if a[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = normalize(cross(a, helper));
    let e2 = cross(a, e1);
    [
        a[0] * cos_phi + sin_phi * (az.cos() * e1[0] + az.sin() * e2[0]),
        a[1] * cos_phi + sin_phi * (az.cos() * e1[1] + az.sin() * e2[1]),
        a[2] * cos_phi + sin_phi * (az.cos() * e1[2] + az.sin() * e2[2]),
    ]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}
