//! Two-tier closed-form coverage in the interference-limited regime.
//!
//! Preconditions: exactly two tiers, both with path-loss exponent 2, both
//! with exponential fading power of equal mean (`m = 1` in either family),
//! noise treated as zero. Under those conditions the interference exponent
//! is elementary and, after freezing the slowly varying logarithm at
//! `r = r_min + epsilon`, every tier integral is of the form
//! `Int r exp(c r^2) dr` over one association branch:
//!
//! ```text
//! P_cov(T) ~ (1 - void_1) Xi_1 [ e^{chi_1} Int_{r_min,1}^{L_12} r e^{(psi_1+omega_1) r^2} dr
//!                              + e^{chi}   Int_{L_12}^{U_12}    r e^{(psi_1+omega)  r^2} dr ]
//!          + (1 - void_2) Xi_2   e^{chi}   Int_{r_min,2}^{r_max,2} r e^{(psi_2+mu) r^2} dr
//! ```
//!
//! with `chi_k = pi lambda_k r_min,k^2`, `omega_j = -pi lambda_j (P G B)_j /
//! (P G B)_1`, `mu_j` the same against tier 2, and
//!
//! ```text
//! psi_k = -pi lambda_k T g~_k ln[ (T g~_k + (r_max,k / (r_min,k + eps_k))^2) / (1 + T g~_k) ]
//! ```
//!
//! The expression assumes the tier-1 integration range is split by both
//! association knots and that tier 2 sees its middle branch throughout;
//! configurations violating that layout are rejected.

use super::association::tier_ratios;
use super::{AnalyticsError, CoveragePoint, TierConfig};
use crate::fading::FadingLaw;
use std::f64::consts::PI;

fn fading_shape(law: &FadingLaw) -> u32 {
    match law {
        FadingLaw::ShadowedRician(p) => p.m,
        FadingLaw::Nakagami(p) => p.m,
    }
}

/// `Int_a^b r exp(c r^2) dr` with the leading factor `exp(ln_front)` folded
/// into the exponent. Equals `e^{ln_front} (e^{c b^2} - e^{c a^2}) / (2c)`,
/// evaluated through `expm1` so the `c -> 0` limit `(b^2 - a^2) / 2` is
/// reached without cancellation.
fn ring_integral(c: f64, a: f64, b: f64, ln_front: f64) -> f64 {
    let d = c * (b * b - a * a);
    let ratio = if d == 0.0 { 1.0 } else { d.exp_m1() / d };
    (ln_front + c * a * a).exp() * 0.5 * (b * b - a * a) * ratio
}

pub(crate) fn closed_form_point(
    tiers: &[TierConfig],
    t_linear: f64,
    epsilon: (f64, f64),
) -> Result<CoveragePoint, AnalyticsError> {
    let fail = |msg: String| Err(AnalyticsError::PreconditionViolation(msg));
    if tiers.len() != 2 {
        return fail(format!("closed form needs exactly 2 tiers, got {}", tiers.len()));
    }
    if !(t_linear > 0.0) {
        return fail(format!("threshold must be positive, got {t_linear}"));
    }
    for (k, t) in tiers.iter().enumerate() {
        let violations = t.violations();
        if !violations.is_empty() {
            return Err(AnalyticsError::InvalidTier(format!(
                "tier {k}: {}",
                violations.join("; ")
            )));
        }
        if (t.path_loss_exp - 2.0).abs() > 1e-12 {
            return fail(format!(
                "tier {k} path-loss exponent {} != 2",
                t.path_loss_exp
            ));
        }
        if fading_shape(&t.fading) != 1 {
            return fail(format!("tier {k} fading is not exponential (m != 1)"));
        }
    }
    let e0 = tiers[0].fading.mean_power();
    let e1 = tiers[1].fading.mean_power();
    if (e0 - e1).abs() > 1e-9 * e0.max(e1) {
        return fail(format!(
            "mean fading powers differ ({e0} vs {e1}); the closed form drops the ratio"
        ));
    }

    let ann: Vec<_> = tiers.iter().map(|t| t.annulus()).collect();
    let lam: Vec<f64> = ann.iter().map(|a| a.density_per_km2).collect();
    let pgb: Vec<f64> = tiers
        .iter()
        .map(|t| t.tx_power_w * t.main_lobe_gain * t.bias)
        .collect();

    // association knots of tier 1 against tier 2 and the layout checks
    let r12 = tier_ratios(tiers, 0, 1);
    let r21 = tier_ratios(tiers, 1, 0);
    let (l12, u12) = (r12.l_bound_km, r12.u_bound_km);
    if !(ann[0].r_min_km <= l12 && l12 <= u12 && u12 <= ann[0].r_max_km) {
        return fail(format!(
            "tier-1 knots ({l12:.3}, {u12:.3}) km not interior to its annulus \
             [{:.3}, {:.3}]",
            ann[0].r_min_km, ann[0].r_max_km
        ));
    }
    if !(r21.l_bound_km <= ann[1].r_min_km && r21.u_bound_km >= ann[1].r_max_km) {
        return fail(format!(
            "tier-2 range not contained in its middle association branch \
             (knots {:.3}, {:.3} km)",
            r21.l_bound_km, r21.u_bound_km
        ));
    }

    let chi: Vec<f64> = (0..2)
        .map(|k| PI * lam[k] * ann[k].r_min_km * ann[k].r_min_km)
        .collect();
    let chi_sum = chi[0] + chi[1];
    let omega: Vec<f64> = (0..2).map(|j| -PI * lam[j] * pgb[j] / pgb[0]).collect();
    let mu: Vec<f64> = (0..2).map(|j| -PI * lam[j] * pgb[j] / pgb[1]).collect();
    let omega_sum = omega[0] + omega[1];
    let mu_sum = mu[0] + mu[1];

    let psi = |k: usize, eps: f64| -> f64 {
        let tg = t_linear * tiers[k].g_tilde();
        let ratio = ann[k].r_max_km / (ann[k].r_min_km + eps);
        -PI * lam[k] * tg * ((tg + ratio * ratio) / (1.0 + tg)).ln()
    };
    let psi1 = psi(0, epsilon.0);
    let psi2 = psi(1, epsilon.1);

    // (1 - void_k) Xi_k = 2 pi lambda_k
    let tier1 = 2.0
        * PI
        * lam[0]
        * (ring_integral(psi1 + omega[0], ann[0].r_min_km, l12, chi[0])
            + ring_integral(psi1 + omega_sum, l12, u12, chi_sum));
    let tier2 = 2.0
        * PI
        * lam[1]
        * ring_integral(psi2 + mu_sum, ann[1].r_min_km, ann[1].r_max_km, chi_sum);

    let per_tier = vec![tier1, tier2];
    let total = tier1 + tier2;
    Ok(CoveragePoint { total, per_tier })
}

/// Closed-form coverage probability; see the module docs for the exact
/// structural preconditions.
pub fn coverage_closed_form(
    tiers: &[TierConfig],
    t_linear: f64,
    epsilon: (f64, f64),
) -> Result<f64, AnalyticsError> {
    closed_form_point(tiers, t_linear, epsilon).map(|p| p.total)
}
