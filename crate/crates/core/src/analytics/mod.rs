//! Analytical coverage machinery: association probabilities, interference
//! Laplace transforms with their high-order derivatives, and the exact,
//! approximated, and two-tier closed-form coverage probability expressions.
//!
//! Everything here works in the displaced-annulus picture. A tier is fully
//! described by [`TierConfig`]; the coverage of a threshold `T` decomposes
//! per tier as
//!
//! ```text
//! P_cov(T) = sum_k P[SINR_k > T | served by k] * P[J = k | k visible] * P[k visible]
//! ```
//!
//! and "no visible base station in any tier" counts as outage.

mod association;
mod closed_form;
mod coverage;
mod laplace;

pub use association::{
    association_probability, association_weight, conditional_distance_pdf, first_touch_cdf,
    first_touch_pdf, tier_ratios, visibility_probability, void_probability, TierRatios,
};
pub use closed_form::coverage_closed_form;
pub use coverage::{
    coverage_approx, coverage_curve, coverage_exact, kappa_lower_bound, kappas_for,
    total_association_mass, CurveSpec, KappaPolicy,
};
pub use laplace::{laplace_interference, laplace_derivatives};

use crate::fading::{CcdfSeries, FadingLaw};
use crate::geometry::{visible_cap, AnnulusGeometry, SphereShell, VisibleCap};
use crate::quadrature::QuadratureError;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum AnalyticsError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("Laplace derivative stack produced a non-finite value at order {order}")]
    DerivativeOverflow { order: usize },
    #[error("kappa[{l}] = {kappa} outside admissible range [{lower}, 1]")]
    KappaOutOfRange { l: usize, kappa: f64, lower: f64 },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("invalid tier configuration: {0}")]
    InvalidTier(String),
}

/// Full physical and statistical description of one network tier.
///
/// `main_lobe_gain` and `side_lobe_gain` are the *composite* dimensionful
/// link gains: transmitter lobe gain x user lobe gain x `(c / 4 pi f)^2`
/// with `c` in km/s, so that `gain * r^{-alpha}` with `r` in km is the full
/// propagation factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierConfig {
    pub shell: SphereShell,
    /// Visibility half-angle (rad); at most the shell's geometric maximum.
    pub theta_rad: f64,
    /// Density of the on-sphere process (km^-2).
    pub density_per_km2: f64,
    pub tx_power_w: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Composite serving-link gain (km^2).
    pub main_lobe_gain: f64,
    /// Composite interfering-link gain (km^2), at most `main_lobe_gain`.
    pub side_lobe_gain: f64,
    /// Path-loss exponent, `>= 2`.
    pub path_loss_exp: f64,
    /// Association bias factor, `> 0`.
    pub bias: f64,
    pub fading: FadingLaw,
    /// Noise power spectral density (W/Hz); zero selects the
    /// interference-limited regime.
    pub noise_psd_w_per_hz: f64,
}

impl TierConfig {
    /// All violated invariants, empty when the configuration is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.shell.earth_radius_km > 0.0) {
            v.push("earth radius must be positive".into());
        }
        if !(self.shell.radius_km > self.shell.earth_radius_km) {
            v.push("shell radius must exceed the user sphere radius".into());
        }
        let tmax = self.shell.theta_max_rad();
        if !(self.theta_rad > 0.0 && self.theta_rad <= tmax * (1.0 + 1e-12)) {
            v.push(format!(
                "theta {} rad outside (0, {tmax}]",
                self.theta_rad
            ));
        }
        if !(self.density_per_km2 >= 0.0) {
            v.push("density must be nonnegative".into());
        }
        if !(self.tx_power_w > 0.0) {
            v.push("transmit power must be positive".into());
        }
        if !(self.carrier_hz > 0.0) {
            v.push("carrier frequency must be positive".into());
        }
        if !(self.bandwidth_hz >= 0.0) {
            v.push("bandwidth must be nonnegative".into());
        }
        if !(self.main_lobe_gain > 0.0 && self.side_lobe_gain > 0.0) {
            v.push("lobe gains must be positive".into());
        }
        if self.side_lobe_gain > self.main_lobe_gain {
            v.push("side-lobe gain must not exceed main-lobe gain".into());
        }
        if !(self.path_loss_exp >= 2.0) {
            v.push(format!("path-loss exponent {} below 2", self.path_loss_exp));
        }
        if !(self.bias > 0.0) {
            v.push("bias must be positive".into());
        }
        if !(self.noise_psd_w_per_hz >= 0.0) {
            v.push("noise spectral density must be nonnegative".into());
        }
        match self.fading {
            FadingLaw::ShadowedRician(p) => {
                if p.m < 1 || !(p.b > 0.0) || !(p.omega >= 0.0) {
                    v.push("invalid shadowed-Rician parameters".into());
                }
            }
            FadingLaw::Nakagami(p) => {
                if p.m < 1 || !(p.mean_power > 0.0) {
                    v.push("invalid Nakagami parameters".into());
                }
            }
        }
        v
    }

    pub fn cap(&self) -> VisibleCap {
        visible_cap(self.shell, Some(self.theta_rad)).expect("validated tier geometry")
    }

    pub fn annulus(&self) -> AnnulusGeometry {
        crate::geometry::displace(&self.cap(), self.density_per_km2)
    }

    /// Normalized interferer gain `side / main`, at most one.
    pub fn g_tilde(&self) -> f64 {
        self.side_lobe_gain / self.main_lobe_gain
    }

    /// Thermal noise power `N0 W` (W).
    pub fn noise_power_w(&self) -> f64 {
        self.noise_psd_w_per_hz * self.bandwidth_hz
    }

    /// Noise normalized by the serving-link budget, `sigma^2 / (G P)`.
    pub fn sigma_hat_sq(&self) -> f64 {
        self.noise_power_w() / (self.main_lobe_gain * self.tx_power_w)
    }

    /// Biased mean received-power coefficient `P G B E` used by the
    /// association rule.
    pub fn erp_coeff(&self) -> f64 {
        self.tx_power_w * self.main_lobe_gain * self.bias * self.fading.mean_power()
    }

    /// Expected number of visible base stations.
    pub fn mean_visible_count(&self) -> f64 {
        self.annulus().mean_count()
    }
}

/// Method tag carried by every produced curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    AnalyticExact,
    AnalyticApprox,
    ClosedForm,
    MonteCarlo,
    GridBaseline,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::AnalyticExact => "exact",
            Method::AnalyticApprox => "approx",
            Method::ClosedForm => "closed_form",
            Method::MonteCarlo => "mc",
            Method::GridBaseline => "grid_baseline",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Method::AnalyticExact),
            "approx" => Ok(Method::AnalyticApprox),
            "closed_form" => Ok(Method::ClosedForm),
            "mc" => Ok(Method::MonteCarlo),
            "grid_baseline" => Ok(Method::GridBaseline),
            other => Err(format!(
                "unknown method '{other}' (expected exact|approx|closed_form|mc|grid_baseline)"
            )),
        }
    }
}

/// Coverage at a single threshold, decomposed per tier.
///
/// `per_tier[k]` is the unconditional contribution
/// `P[SINR_k > T | J=k, visible] * P[J=k | visible] * P[visible]`;
/// the contributions sum to `total`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoveragePoint {
    pub total: f64,
    pub per_tier: Vec<f64>,
}

/// A `(threshold, probability)` series with per-tier decomposition.
///
/// Failed points carry `None` instead of aborting a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub method: Method,
    pub thresholds_db: Vec<f64>,
    pub total: Vec<Option<f64>>,
    /// Indexed `[tier][point]`.
    pub per_tier: Vec<Vec<Option<f64>>>,
    /// 95% CI half-widths for Monte-Carlo curves.
    pub ci95: Option<Vec<f64>>,
}

/// Precomputed per-tier state shared by the analytical operations.
pub(crate) struct TierCtx {
    pub annulus: AnnulusGeometry,
    pub erp_coeff: f64,
    pub alpha: f64,
    pub series: CcdfSeries,
}

pub(crate) fn build_ctx(tiers: &[TierConfig]) -> Result<Vec<TierCtx>, AnalyticsError> {
    if tiers.is_empty() {
        return Err(AnalyticsError::InvalidTier("no tiers configured".into()));
    }
    let mut out = Vec::with_capacity(tiers.len());
    for (idx, t) in tiers.iter().enumerate() {
        let violations = t.violations();
        if !violations.is_empty() {
            return Err(AnalyticsError::InvalidTier(format!(
                "tier {idx}: {}",
                violations.join("; ")
            )));
        }
        out.push(TierCtx {
            annulus: t.annulus(),
            erp_coeff: t.erp_coeff(),
            alpha: t.path_loss_exp,
            series: t.fading.ccdf_series(),
        });
    }
    Ok(out)
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
