//! Nearest-distance and tier-association distributions on the displaced
//! annuli: void probability, the conditional first-touch density, the
//! max-biased-power association probability, and the serving-distance
//! density given association.

use super::{build_ctx, AnalyticsError, TierConfig, TierCtx};
use crate::geometry::AnnulusGeometry;
use crate::quadrature::{integrate_with_breakpoints, Tolerance};
use std::f64::consts::PI;

/// Probability that the annulus holds no point, `exp(-pi lambda (b^2 - a^2))`.
pub fn void_probability(annulus: &AnnulusGeometry) -> f64 {
    (-annulus.mean_count()).exp()
}

/// `1 - void_probability`, evaluated without cancellation for sparse tiers.
pub fn visibility_probability(annulus: &AnnulusGeometry) -> f64 {
    -(-annulus.mean_count()).exp_m1()
}

/// Density of the nearest-point distance conditioned on the annulus being
/// non-empty; zero outside `(r_min, r_max)`.
pub fn first_touch_pdf(annulus: &AnnulusGeometry, r: f64) -> f64 {
    if r <= annulus.r_min_km || r >= annulus.r_max_km {
        return 0.0;
    }
    let lam = annulus.density_per_km2;
    let num = 2.0 * PI * lam * r
        * (-PI * lam * (r * r - annulus.r_min_km * annulus.r_min_km)).exp();
    num / visibility_probability(annulus)
}

/// CDF companion of [`first_touch_pdf`], used by the distribution oracles.
pub fn first_touch_cdf(annulus: &AnnulusGeometry, r: f64) -> f64 {
    if r <= annulus.r_min_km {
        return 0.0;
    }
    if r >= annulus.r_max_km {
        return 1.0;
    }
    let lam = annulus.density_per_km2;
    let hit = -(-PI * lam * (r * r - annulus.r_min_km * annulus.r_min_km)).exp_m1();
    hit / visibility_probability(annulus)
}

/// Normalized ratios of tier `j` relative to anchor tier `k`, with the
/// induced association-boundary radii.
///
/// A user at distance `r` from its nearest tier-`k` station prefers tier `k`
/// over tier `j` iff the nearest tier-`j` station is farther than
/// `(p g b e)^{1/alpha_j} r^{alpha_k / alpha_j}`; `u_bound_km` / `l_bound_km`
/// are the `r` values at which that threshold crosses the tier-`j` annulus
/// edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierRatios {
    pub p_hat: f64,
    pub g_hat: f64,
    pub b_hat: f64,
    pub e_hat: f64,
    pub alpha_hat: f64,
    pub u_bound_km: f64,
    pub l_bound_km: f64,
}

impl TierRatios {
    pub fn hat_product(&self) -> f64 {
        self.p_hat * self.g_hat * self.b_hat * self.e_hat
    }
}

pub fn tier_ratios(tiers: &[TierConfig], k: usize, j: usize) -> TierRatios {
    let tk = &tiers[k];
    let tj = &tiers[j];
    let p_hat = tj.tx_power_w / tk.tx_power_w;
    let g_hat = tj.main_lobe_gain / tk.main_lobe_gain;
    let b_hat = tj.bias / tk.bias;
    let e_hat = tj.fading.mean_power() / tk.fading.mean_power();
    let alpha_hat = tj.path_loss_exp / tk.path_loss_exp;
    let hat = p_hat * g_hat * b_hat * e_hat;
    let ann_j = tj.annulus();
    let u_bound_km =
        (ann_j.r_max_km.powf(tj.path_loss_exp) / hat).powf(1.0 / tk.path_loss_exp);
    let l_bound_km =
        (ann_j.r_min_km.powf(tj.path_loss_exp) / hat).powf(1.0 / tk.path_loss_exp);
    TierRatios {
        p_hat,
        g_hat,
        b_hat,
        e_hat,
        alpha_hat,
        u_bound_km,
        l_bound_km,
    }
}

/// One pairwise factor of the association product: the probability that
/// tier `j` does not beat tier `k` when the nearest tier-`k` station sits at
/// distance `r`.
pub(crate) fn pair_factor(ctx_j: &TierCtx, hat: f64, alpha_k: f64, r: f64) -> f64 {
    let ann = &ctx_j.annulus;
    // threshold distance in tier j
    let d = hat.powf(1.0 / ctx_j.alpha) * r.powf(alpha_k / ctx_j.alpha);
    if d < ann.r_min_km {
        1.0
    } else if d <= ann.r_max_km {
        (-PI * ctx_j.density_per() * (d * d - ann.r_min_km * ann.r_min_km)).exp()
    } else {
        0.0
    }
}

impl TierCtx {
    fn density_per(&self) -> f64 {
        self.annulus.density_per_km2
    }
}

/// Product over competitor tiers of the pairwise survival factors,
/// evaluated at serving distance `r` in tier `k`.
pub fn association_weight(tiers: &[TierConfig], k: usize, r: f64) -> f64 {
    let ctxs = build_ctx(tiers).expect("valid tiers");
    association_weight_ctx(&ctxs, k, r)
}

pub(crate) fn association_weight_ctx(ctxs: &[TierCtx], k: usize, r: f64) -> f64 {
    let alpha_k = ctxs[k].alpha;
    let erp_k = ctxs[k].erp_coeff;
    let mut w = 1.0;
    for (j, ctx_j) in ctxs.iter().enumerate() {
        if j == k {
            continue;
        }
        w *= pair_factor(ctx_j, ctx_j.erp_coeff / erp_k, alpha_k, r);
        if w == 0.0 {
            break;
        }
    }
    w
}

/// The association product including tier `k`'s own nearest-distance factor
/// `exp(-pi lambda_k (r^2 - r_min^2))`; this is the integrand core shared by
/// the association probability, the serving-distance density, and both
/// coverage expressions.
pub(crate) fn serving_weight_ctx(ctxs: &[TierCtx], k: usize, r: f64) -> f64 {
    let ann = &ctxs[k].annulus;
    let own = (-PI
        * ann.density_per_km2
        * (r * r - ann.r_min_km * ann.r_min_km))
        .exp();
    own * association_weight_ctx(ctxs, k, r)
}

/// Association-boundary radii of tier `k` that fall strictly inside its
/// annulus; the integrands are smooth between consecutive knots.
pub(crate) fn breakpoints_ctx(ctxs: &[TierCtx], k: usize) -> Vec<f64> {
    let ann = &ctxs[k].annulus;
    let alpha_k = ctxs[k].alpha;
    let erp_k = ctxs[k].erp_coeff;
    let mut pts = vec![ann.r_min_km];
    for (j, ctx_j) in ctxs.iter().enumerate() {
        if j == k {
            continue;
        }
        let hat = ctx_j.erp_coeff / erp_k;
        let u = (ctx_j.annulus.r_max_km.powf(ctx_j.alpha) / hat).powf(1.0 / alpha_k);
        let l = (ctx_j.annulus.r_min_km.powf(ctx_j.alpha) / hat).powf(1.0 / alpha_k);
        for knot in [l, u] {
            if knot > ann.r_min_km && knot < ann.r_max_km {
                pts.push(knot);
            }
        }
    }
    pts.push(ann.r_max_km);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    pts
}

pub(crate) const ASSOC_TOL: Tolerance = Tolerance {
    rel: 1e-10,
    abs: 1e-14,
};

pub(crate) fn association_probability_ctx(
    ctxs: &[TierCtx],
    k: usize,
) -> Result<f64, AnalyticsError> {
    let ann = &ctxs[k].annulus;
    if ann.mean_count() == 0.0 {
        return Ok(if ctxs.len() == 1 { 1.0 } else { 0.0 });
    }
    let xi = 2.0 * PI * ann.density_per_km2 / visibility_probability(ann);
    let pts = breakpoints_ctx(ctxs, k);
    let integral = integrate_with_breakpoints(
        |r| r * serving_weight_ctx(ctxs, k, r),
        &pts,
        ASSOC_TOL,
    )?;
    Ok((xi * integral).clamp(0.0, 1.0))
}

/// Probability that the typical user associates with tier `k`, conditioned
/// on tier `k` having at least one visible station.
pub fn association_probability(tiers: &[TierConfig], k: usize) -> Result<f64, AnalyticsError> {
    let ctxs = build_ctx(tiers)?;
    association_probability_ctx(&ctxs, k)
}

/// Density of the serving distance given association with tier `k` (and
/// tier-`k` visibility).
pub fn conditional_distance_pdf(
    tiers: &[TierConfig],
    k: usize,
    r: f64,
) -> Result<f64, AnalyticsError> {
    let ctxs = build_ctx(tiers)?;
    let ann = &ctxs[k].annulus;
    if r <= ann.r_min_km || r >= ann.r_max_km {
        return Ok(0.0);
    }
    let assoc = association_probability_ctx(&ctxs, k)?;
    let xi = 2.0 * PI * ann.density_per_km2 / visibility_probability(ann);
    Ok(xi * r * serving_weight_ctx(&ctxs, k, r) / assoc)
}
