//! Laplace transform of the aggregate same-tier interference plus
//! normalized noise, conditioned on the serving station sitting at distance
//! `r`, together with its derivatives of arbitrary order.
//!
//! With interferers forming a Poisson process on the annulus beyond `r`,
//! the probability generating functional gives
//!
//! ```text
//! L(s) = exp(eta(s))
//! eta(s) = -s sigma_hat^2
//!          - 2 pi lambda Int_r^{r_max} [1 - E exp(-s g_tilde v^{-alpha} H)] v dv
//! ```
//!
//! Derivatives: `L = exp(eta)` composed with the closed-form derivatives of
//! the fading MGF under the integral. The complete Bell polynomial
//! recurrence assembles `d^q L / ds^q` from `eta^{(n)}`; the coverage path
//! uses the scaled variant `t_q = (s^q / q!) (-1)^q L^{(q)}(s)`, whose
//! inputs `e_n = (-s)^n eta^{(n)}(s)` stay O(1) across orders:
//!
//! ```text
//! b_0 = 1,   b_n = (1/n) sum_{i=0}^{n-1} (e_{i+1} / i!) b_{n-1-i},   t_q = L b_q
//! ```

use super::{AnalyticsError, TierConfig};
use crate::fading::ln_factorial;
use crate::geometry::AnnulusGeometry;
use crate::quadrature::{integrate, integrate_vec, Tolerance};
use std::f64::consts::PI;

const INNER_REL_TOL: f64 = 1e-9;

fn check_serving_distance(annulus: &AnnulusGeometry, r: f64) -> Result<(), AnalyticsError> {
    let slack = 1e-9 * annulus.r_max_km;
    if r < annulus.r_min_km - slack || r > annulus.r_max_km + slack {
        return Err(AnalyticsError::PreconditionViolation(format!(
            "serving distance {r} km outside annulus [{}, {}]",
            annulus.r_min_km, annulus.r_max_km
        )));
    }
    Ok(())
}

/// Exponent `eta(s)`; separate so the coverage code can batch-evaluate it.
pub(crate) fn eta(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    s: f64,
) -> Result<f64, AnalyticsError> {
    let lam = annulus.density_per_km2;
    let g_tilde = tier.g_tilde();
    let alpha = tier.path_loss_exp;
    let fading = tier.fading;
    let hi = annulus.r_max_km.max(r);
    let tol = Tolerance::new(INNER_REL_TOL, 1e-11 / (2.0 * PI * lam).max(1e-12));
    let integral = integrate(
        |v| (1.0 - fading.mgf_term(s, g_tilde * v.powf(-alpha))) * v,
        r,
        hi,
        tol,
    )?;
    Ok(-s * tier.sigma_hat_sq() - 2.0 * PI * lam * integral)
}

/// `eta(s_i)` for a batch of transform arguments, sharing one subdivision.
pub(crate) fn eta_batch(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    svals: &[f64],
) -> Result<Vec<f64>, AnalyticsError> {
    let lam = annulus.density_per_km2;
    let g_tilde = tier.g_tilde();
    let alpha = tier.path_loss_exp;
    let fading = tier.fading;
    let hi = annulus.r_max_km.max(r);
    let tol = Tolerance::new(INNER_REL_TOL, 1e-12 / (2.0 * PI * lam).max(1e-12));
    let integrals = integrate_vec(
        |v, out| {
            let g = g_tilde * v.powf(-alpha);
            for (slot, &s) in out.iter_mut().zip(svals) {
                *slot = (1.0 - fading.mgf_term(s, g)) * v;
            }
        },
        svals.len(),
        r,
        hi,
        tol,
    )?;
    let sigma = tier.sigma_hat_sq();
    Ok(svals
        .iter()
        .zip(integrals)
        .map(|(&s, i0)| -s * sigma - 2.0 * PI * lam * i0)
        .collect())
}

/// Laplace transform of interference plus normalized noise at argument `s`,
/// conditioned on the nearest station of the tier at distance `r`.
pub fn laplace_interference(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    s: f64,
) -> Result<f64, AnalyticsError> {
    check_serving_distance(annulus, r)?;
    Ok(eta(tier, annulus, r, s)?.exp())
}

/// Derivatives `d^q L / ds^q` for `q = 0..=q_max`.
///
/// The exponent derivatives come from one vector quadrature of the
/// closed-form MGF derivatives; the exponential composition is assembled by
/// the complete Bell polynomial recurrence rather than nested numerical
/// differentiation. Signs alternate with `q` (the transform of a
/// nonnegative random variable is completely monotone).
pub fn laplace_derivatives(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    s: f64,
    q_max: usize,
) -> Result<Vec<f64>, AnalyticsError> {
    check_serving_distance(annulus, r)?;
    let lam = annulus.density_per_km2;
    let g_tilde = tier.g_tilde();
    let alpha = tier.path_loss_exp;
    let fading = tier.fading;
    let hi = annulus.r_max_km.max(r);
    let dim = q_max + 1;

    let tol = Tolerance::new(INNER_REL_TOL, 1e-11 / (2.0 * PI * lam).max(1e-12));
    let integrals = integrate_vec(
        |v, out| {
            let g = g_tilde * v.powf(-alpha);
            fading.mgf_derivatives(s, g, q_max, out);
            out[0] = (1.0 - out[0]) * v;
            for slot in out.iter_mut().skip(1) {
                *slot *= v;
            }
        },
        dim,
        r,
        hi,
        tol,
    )?;

    let sigma = tier.sigma_hat_sq();
    let l0 = (-s * sigma - 2.0 * PI * lam * integrals[0]).exp();
    let mut out = vec![l0; dim];
    if q_max == 0 {
        return Ok(out);
    }

    // eta^{(n)}: the n = 1 term carries the noise slope
    let mut eta_d = vec![0.0; dim];
    for n in 1..=q_max {
        eta_d[n] = 2.0 * PI * lam * integrals[n];
    }
    eta_d[1] -= sigma;

    // complete Bell polynomials: B_{n+1} = sum_i C(n,i) eta^{(i+1)} B_{n-i}
    let mut bell = vec![0.0; dim];
    bell[0] = 1.0;
    for n in 0..q_max {
        let mut acc = 0.0;
        for i in 0..=n {
            let ln_c = ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i);
            acc += ln_c.exp() * eta_d[i + 1] * bell[n - i];
        }
        bell[n + 1] = acc;
    }
    for q in 1..=q_max {
        out[q] = l0 * bell[q];
        if !out[q].is_finite() {
            return Err(AnalyticsError::DerivativeOverflow { order: q });
        }
    }
    Ok(out)
}

/// Scaled derivative stack for the exact coverage bracket:
/// `t_q = (s^q / q!) (-1)^q d^q L / ds^q` for `q = 0..=q_max`, evaluated at
/// the tilt argument `s`.
pub(crate) fn scaled_laplace_stack(
    tier: &TierConfig,
    annulus: &AnnulusGeometry,
    r: f64,
    s: f64,
    q_max: usize,
) -> Result<Vec<f64>, AnalyticsError> {
    let lam = annulus.density_per_km2;
    let g_tilde = tier.g_tilde();
    let alpha = tier.path_loss_exp;
    let fading = tier.fading;
    let hi = annulus.r_max_km.max(r);
    let dim = q_max + 1;

    if s == 0.0 {
        // L(0) = 1 and every scaled derivative above order zero vanishes
        let mut out = vec![0.0; dim];
        out[0] = 1.0;
        return Ok(out);
    }

    let tol = Tolerance::new(INNER_REL_TOL, 1e-11 / (2.0 * PI * lam).max(1e-12));
    let integrals = integrate_vec(
        |v, out| {
            let g = g_tilde * v.powf(-alpha);
            fading.mgf_scaled_derivatives(s, g, q_max, out);
            out[0] = (1.0 - out[0]) * v;
            for slot in out.iter_mut().skip(1) {
                *slot *= v;
            }
        },
        dim,
        r,
        hi,
        tol,
    )?;

    let sigma = tier.sigma_hat_sq();
    let eta0 = -s * sigma - 2.0 * PI * lam * integrals[0];
    let mut out = vec![eta0.exp(); dim];
    if q_max == 0 {
        return Ok(out);
    }

    // e_n = (-s)^n eta^{(n)}(s); all nonnegative
    let mut e = vec![0.0; dim];
    for n in 1..=q_max {
        e[n] = 2.0 * PI * lam * integrals[n];
    }
    e[1] += s * sigma;

    // The scaled Bell recurrence
    //   b_n = (1/n) sum_i (e_{i+1} / i!) b_{n-1-i}
    // has only nonnegative terms, so it runs in the log domain: b_n can
    // overflow while exp(eta) underflows even though t_q = e^eta b_q is a
    // bounded probability-like quantity.
    let ln_e: Vec<f64> = e.iter().map(|&v| v.ln()).collect();
    let mut ln_b = vec![f64::NEG_INFINITY; dim];
    ln_b[0] = 0.0;
    let mut scratch = Vec::with_capacity(q_max);
    for n in 1..=q_max {
        scratch.clear();
        for i in 0..n {
            let term = ln_e[i + 1] - ln_factorial(i) + ln_b[n - 1 - i];
            if term.is_finite() {
                scratch.push(term);
            }
        }
        ln_b[n] = log_sum_exp(&scratch) - (n as f64).ln();
    }
    for q in 1..=q_max {
        out[q] = (eta0 + ln_b[q]).exp();
        if !out[q].is_finite() {
            return Err(AnalyticsError::DerivativeOverflow { order: q });
        }
    }
    Ok(out)
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}
