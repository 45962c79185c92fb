//! Exact and approximated coverage probability of the typical user.
//!
//! Per tier `k`, the unconditional contribution at threshold `T` is
//!
//! ```text
//! 2 pi lambda_k Int_{r_min}^{r_max} bracket_k(r, T) r W_k(r) dr
//! ```
//!
//! where `W_k` is the serving weight (own nearest-distance factor times the
//! association survival product) and `bracket_k` is the conditional tail
//! probability `P[H > nu (I + sigma^2)]` averaged over interference:
//!
//! - exact: `sum_q S_q t_q` with the scaled Laplace derivatives `t_q`
//!   evaluated at `nu = c r^alpha T` and the CCDF-series suffix weights
//!   `S_q`;
//! - approximated: the lower incomplete gamma in the CCDF is replaced by
//!   `Gamma(l+1) [1 - e^{-kappa(l) c x}]^{l+1}`, which binomial-expands into
//!   plain transform evaluations at `kappa(l) nu q`, `q = 0..=l+1`. Each
//!   `kappa(l)` must lie in `[(Gamma(l+2))^{-1/(l+1)}, 1]`.

use super::association::{breakpoints_ctx, serving_weight_ctx, visibility_probability};
use super::closed_form::closed_form_point;
use super::laplace::{eta_batch, scaled_laplace_stack};
use super::{build_ctx, AnalyticsError, CoverageCurve, CoveragePoint, Method, TierConfig, TierCtx};
use crate::fading::ln_factorial;
use crate::quadrature::{integrate_with_breakpoints, Tolerance};
use statrs::function::gamma::gamma_lr;
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

const OUTER_TOL: Tolerance = Tolerance {
    rel: 1e-8,
    abs: 1e-12,
};

/// Choice of the per-order tuning constants `kappa(l)` for the approximated
/// coverage expression.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaPolicy {
    /// Always-admissible lower bound `(Gamma(l+2))^{-1/(l+1)}`; exact at
    /// `l = 0`, increasingly loose (one-sided) at higher orders.
    LowerBound,
    /// Per-order minimax fit of the CDF surrogate
    /// `[1 - e^{-kappa x}]^{l+1}` against the regularized incomplete gamma.
    /// Parameter-free and two-sided; the default.
    CdfFit,
    /// Geometric interpolation `lb(l)^t` between one (`t = 0`) and the lower
    /// bound (`t = 1`).
    Interpolate(f64),
    /// Explicit per-order values, validated against the admissible range.
    Explicit(Vec<f64>),
}

impl Default for KappaPolicy {
    fn default() -> Self {
        KappaPolicy::CdfFit
    }
}

/// Admissible lower bound for `kappa(l)`.
pub fn kappa_lower_bound(l: usize) -> f64 {
    (-ln_factorial(l + 1) / (l + 1) as f64).exp()
}

/// Minimax-fit kappa for one order, memoized: the objective depends only
/// on `l`.
fn kappa_cdf_fit(l: usize) -> f64 {
    static CACHE: OnceLock<Mutex<Vec<Option<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(vec![None; 128]));
    if let Some(v) = cache.lock().unwrap().get(l).copied().flatten() {
        return v;
    }
    let fitted = if l == 0 {
        1.0
    } else {
        let a = (l + 1) as f64;
        let hi_x = 4.0 * (a + 2.0);
        let grid: Vec<f64> = (1..=120).map(|i| hi_x * i as f64 / 120.0).collect();
        let sup_err = |kappa: f64| -> f64 {
            grid.iter()
                .map(|&x| {
                    let surrogate = (-(-kappa * x).exp_m1()).powi(l as i32 + 1);
                    (surrogate - gamma_lr(a, x)).abs()
                })
                .fold(0.0, f64::max)
        };
        // golden-section search on [lower bound, 1]
        let inv_phi = 0.618_033_988_749_894_9;
        let (mut lo, mut hi) = (kappa_lower_bound(l), 1.0);
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (sup_err(x1), sup_err(x2));
        for _ in 0..70 {
            if f1 < f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = sup_err(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = sup_err(x2);
            }
        }
        0.5 * (lo + hi)
    };
    if let Some(slot) = cache.lock().unwrap().get_mut(l) {
        *slot = Some(fitted);
    }
    fitted
}

/// Resolve a policy into per-order values for a law with `m` mixture terms.
pub fn kappas_for(policy: &KappaPolicy, m: usize) -> Result<Vec<f64>, AnalyticsError> {
    let values: Vec<f64> = match policy {
        KappaPolicy::LowerBound => (0..m).map(kappa_lower_bound).collect(),
        KappaPolicy::CdfFit => (0..m).map(kappa_cdf_fit).collect(),
        KappaPolicy::Interpolate(t) => {
            if !(0.0..=1.0).contains(t) {
                return Err(AnalyticsError::KappaOutOfRange {
                    l: 0,
                    kappa: *t,
                    lower: 0.0,
                });
            }
            (0..m).map(|l| kappa_lower_bound(l).powf(*t)).collect()
        }
        KappaPolicy::Explicit(v) => {
            if v.len() < m {
                return Err(AnalyticsError::PreconditionViolation(format!(
                    "explicit kappa list has {} entries, need {m}",
                    v.len()
                )));
            }
            v[..m].to_vec()
        }
    };
    for (l, &kappa) in values.iter().enumerate() {
        let lower = kappa_lower_bound(l);
        if kappa < lower - 1e-12 || kappa > 1.0 + 1e-12 {
            return Err(AnalyticsError::KappaOutOfRange { l, kappa, lower });
        }
    }
    Ok(values)
}

fn bracket_exact(
    tier: &TierConfig,
    ctx: &TierCtx,
    suffix_w: &[f64],
    r: f64,
    t_lin: f64,
) -> Result<f64, AnalyticsError> {
    let nu = ctx.series.rate * r.powf(ctx.alpha) * t_lin;
    let stack = scaled_laplace_stack(tier, &ctx.annulus, r, nu, ctx.series.max_order())?;
    Ok(suffix_w.iter().zip(&stack).map(|(s, t)| s * t).sum())
}

fn bracket_approx(
    tier: &TierConfig,
    ctx: &TierCtx,
    kappas: &[f64],
    r: f64,
    t_lin: f64,
) -> Result<f64, AnalyticsError> {
    let base = ctx.series.rate * r.powf(ctx.alpha) * t_lin;
    let weights = &ctx.series.weights;
    let mut svals = Vec::with_capacity(weights.len() * (weights.len() + 1) / 2);
    for (l, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for q in 1..=l + 1 {
            svals.push(kappas[l] * base * q as f64);
        }
    }
    let etas = eta_batch(tier, &ctx.annulus, r, &svals)?;
    let mut acc = 0.0;
    let mut idx = 0;
    for (l, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        // sum_{q=0}^{l+1} C(l+1, q) (-1)^q L(kappa nu q); the q = 0 term is 1
        let mut inner = 1.0;
        let mut binom = 1.0f64;
        for q in 1..=l + 1 {
            binom *= (l + 2 - q) as f64 / q as f64;
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            inner += sign * binom * etas[idx].exp();
            idx += 1;
        }
        acc += w * inner;
    }
    Ok(1.0 - acc)
}

enum BracketMode<'a> {
    Exact,
    Approx(&'a [f64]),
}

fn tier_point(
    tiers: &[TierConfig],
    ctxs: &[TierCtx],
    k: usize,
    t_lin: f64,
    mode: &BracketMode,
) -> Result<f64, AnalyticsError> {
    let ctx = &ctxs[k];
    let ann = &ctx.annulus;
    if ann.mean_count() <= 0.0 {
        return Ok(0.0);
    }
    let suffix_w = ctx.series.suffix_weights();
    let pts = breakpoints_ctx(ctxs, k);
    let failure: RefCell<Option<AnalyticsError>> = RefCell::new(None);
    let integrand = |r: f64| {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let w = serving_weight_ctx(ctxs, k, r);
        if w == 0.0 {
            return 0.0;
        }
        let bracket = match mode {
            BracketMode::Exact => bracket_exact(&tiers[k], ctx, &suffix_w, r, t_lin),
            BracketMode::Approx(kappas) => bracket_approx(&tiers[k], ctx, kappas, r, t_lin),
        };
        match bracket {
            Ok(b) => b * r * w,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let integral = integrate_with_breakpoints(integrand, &pts, OUTER_TOL)?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok((2.0 * PI * ann.density_per_km2 * integral).clamp(0.0, 1.0))
}

/// Exact coverage probability at linear threshold `t_linear`, decomposed
/// per tier. "No visible station anywhere" counts as outage.
pub fn coverage_exact(tiers: &[TierConfig], t_linear: f64) -> Result<CoveragePoint, AnalyticsError> {
    if !(t_linear > 0.0) {
        return Err(AnalyticsError::PreconditionViolation(format!(
            "threshold must be positive, got {t_linear}"
        )));
    }
    let ctxs = build_ctx(tiers)?;
    let per_tier: Vec<f64> = (0..tiers.len())
        .map(|k| tier_point(tiers, &ctxs, k, t_linear, &BracketMode::Exact))
        .collect::<Result<_, _>>()?;
    Ok(CoveragePoint {
        total: per_tier.iter().sum(),
        per_tier,
    })
}

/// Approximated coverage probability under the given kappa policy.
pub fn coverage_approx(
    tiers: &[TierConfig],
    t_linear: f64,
    policy: &KappaPolicy,
) -> Result<CoveragePoint, AnalyticsError> {
    if !(t_linear > 0.0) {
        return Err(AnalyticsError::PreconditionViolation(format!(
            "threshold must be positive, got {t_linear}"
        )));
    }
    let ctxs = build_ctx(tiers)?;
    let mut per_tier = Vec::with_capacity(tiers.len());
    for k in 0..tiers.len() {
        let kappas = kappas_for(policy, ctxs[k].series.weights.len())?;
        per_tier.push(tier_point(
            tiers,
            &ctxs,
            k,
            t_linear,
            &BracketMode::Approx(&kappas),
        )?);
    }
    Ok(CoveragePoint {
        total: per_tier.iter().sum(),
        per_tier,
    })
}

/// Analytical method selector for [`coverage_curve`].
#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Exact,
    Approx(KappaPolicy),
    ClosedForm { epsilon: (f64, f64) },
}

impl CurveSpec {
    pub fn method(&self) -> Method {
        match self {
            CurveSpec::Exact => Method::AnalyticExact,
            CurveSpec::Approx(_) => Method::AnalyticApprox,
            CurveSpec::ClosedForm { .. } => Method::ClosedForm,
        }
    }
}

/// Sweep a sorted threshold grid; failures mark their point instead of
/// aborting the sweep.
pub fn coverage_curve(
    tiers: &[TierConfig],
    thresholds_db: &[f64],
    spec: &CurveSpec,
) -> CoverageCurve {
    let n_tier = tiers.len();
    let mut total = Vec::with_capacity(thresholds_db.len());
    let mut per_tier = vec![Vec::with_capacity(thresholds_db.len()); n_tier];
    for &t_db in thresholds_db {
        let t_lin = super::db_to_linear(t_db);
        let point = match spec {
            CurveSpec::Exact => coverage_exact(tiers, t_lin),
            CurveSpec::Approx(policy) => coverage_approx(tiers, t_lin, policy),
            CurveSpec::ClosedForm { epsilon } => closed_form_point(tiers, t_lin, *epsilon),
        };
        match point {
            Ok(p) => {
                total.push(Some(p.total));
                for (k, col) in per_tier.iter_mut().enumerate() {
                    col.push(Some(p.per_tier[k]));
                }
            }
            Err(_) => {
                total.push(None);
                for col in per_tier.iter_mut() {
                    col.push(None);
                }
            }
        }
    }
    CoverageCurve {
        method: spec.method(),
        thresholds_db: thresholds_db.to_vec(),
        total,
        per_tier,
        ci95: None,
    }
}

/// Total association mass `sum_k P[J=k | visible] P[visible]`; the coverage
/// limit as the threshold vanishes.
pub fn total_association_mass(tiers: &[TierConfig]) -> Result<f64, AnalyticsError> {
    let ctxs = build_ctx(tiers)?;
    let mut total = 0.0;
    for k in 0..tiers.len() {
        let assoc = super::association::association_probability_ctx(&ctxs, k)?;
        total += assoc * visibility_probability(&ctxs[k].annulus);
    }
    Ok(total)
}
