//! Channel fading power laws: shadowed-Rician for satellite links and
//! Nakagami-m (Gamma power) for terrestrial links.
//!
//! Shadowed-Rician power with integer shape `m`, half multipath power `b`
//! and line-of-sight power `omega` has density
//!
//! ```text
//! f(x) = Z e^{-(beta - delta) x} sum_{l=0}^{m-1} (-delta x)^l (1-m)_l / (l!)^2
//! Z     = ((2bm) / (2bm + omega))^m / (2b)
//! beta  = 1 / (2b)
//! delta = omega / (2b (2bm + omega))
//! ```
//!
//! With integer `m` the law is exactly a finite mixture of Gamma(l+1)
//! distributions with common rate `beta - delta`:
//!
//! ```text
//! f(x) = sum_l w_l Gamma(l+1, rate) pdf,   w_l = Z delta^l C(m-1, l) / rate^{l+1}
//! ```
//!
//! which is the representation every coverage expression consumes (the
//! mixture weights multiply partial Poisson sums of the CCDF). Weights are
//! assembled in log space so the large-`m` Pochhammer products stay finite.
//!
//! The moment generating function of the power under an exponential tilt,
//! `E[exp(-s g H)]`, is rational in `s`; its derivatives of every order are
//! closed-form by the general Leibniz rule, which feeds the
//! interference-Laplace derivative stack.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use statrs::function::gamma::gamma_lr;
use std::f64::consts::TAU;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FadingError {
    #[error("fading power argument must be nonnegative, got {0}")]
    NegativeInput(f64),
    #[error("invalid fading parameter: {0}")]
    InvalidParameter(String),
}

/// ln(n!) from a lazily built table.
pub(crate) fn ln_factorial(n: usize) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; 257];
        for i in 1..t.len() {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    table[n]
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Shadowed-Rician power parameters (integer Nakagami shape).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowedRicianParams {
    /// Nakagami shape of the line-of-sight component, `m >= 1`.
    pub m: u32,
    /// Half average multipath power.
    pub b: f64,
    /// Average line-of-sight power.
    pub omega: f64,
}

/// Table-style presets for land-mobile-satellite shadowing conditions.
pub const FHS: ShadowedRicianParams = ShadowedRicianParams {
    m: 1,
    b: 0.063,
    omega: 8.97e-4,
};
pub const AS: ShadowedRicianParams = ShadowedRicianParams {
    m: 10,
    b: 0.126,
    omega: 0.835,
};
pub const ILS: ShadowedRicianParams = ShadowedRicianParams {
    m: 19,
    b: 0.158,
    omega: 1.29,
};

impl ShadowedRicianParams {
    pub fn new(m: u32, b: f64, omega: f64) -> Result<Self, FadingError> {
        if m < 1 {
            return Err(FadingError::InvalidParameter("m must be >= 1".into()));
        }
        if !(b > 0.0) {
            return Err(FadingError::InvalidParameter(format!(
                "b must be positive, got {b}"
            )));
        }
        if !(omega >= 0.0) {
            return Err(FadingError::InvalidParameter(format!(
                "omega must be nonnegative, got {omega}"
            )));
        }
        Ok(Self { m, b, omega })
    }

    pub fn beta(&self) -> f64 {
        1.0 / (2.0 * self.b)
    }

    pub fn delta(&self) -> f64 {
        self.omega / (2.0 * self.b * (2.0 * self.b * self.m as f64 + self.omega))
    }

    pub fn z_const(&self) -> f64 {
        let bm = 2.0 * self.b * self.m as f64;
        (bm / (bm + self.omega)).powi(self.m as i32) / (2.0 * self.b)
    }

    /// Mixture rate `beta - delta`, always positive.
    pub fn rate(&self) -> f64 {
        self.beta() - self.delta()
    }

    /// Gamma-mixture weights `w_l`, log-space assembly.
    ///
    /// The weights are nonnegative and sum to one (up to rounding); for
    /// `omega = 0` only the `l = 0` term survives and the law degenerates to
    /// an exponential with mean `2b`.
    pub fn mixture_weights(&self) -> Vec<f64> {
        let m = self.m as usize;
        let rate = self.rate();
        let ln_z = self.z_const().ln();
        let delta = self.delta();
        let mut w = vec![0.0; m];
        for (l, slot) in w.iter_mut().enumerate() {
            if delta == 0.0 && l > 0 {
                break;
            }
            let ln_w = ln_z + if l == 0 { 0.0 } else { l as f64 * delta.ln() }
                + ln_binomial(m - 1, l)
                - (l as f64 + 1.0) * rate.ln();
            *slot = ln_w.exp();
        }
        w
    }

    /// Mean power `2b + omega`.
    pub fn mean_power(&self) -> f64 {
        2.0 * self.b + self.omega
    }

    pub fn pdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 {
            return Err(FadingError::NegativeInput(x));
        }
        let rate = self.rate();
        let delta = self.delta();
        let ln_z = self.z_const().ln();
        let m = self.m as usize;
        let mut sum = 0.0;
        for l in 0..m {
            if (delta == 0.0 || x == 0.0) && l > 0 {
                break;
            }
            // a_l x^l = Z (delta x)^l C(m-1, l) / l!
            let ln_term = ln_z
                + if l == 0 { 0.0 } else { l as f64 * (delta * x).ln() }
                + ln_binomial(m - 1, l)
                - ln_factorial(l)
                - rate * x;
            sum += ln_term.exp();
        }
        Ok(sum)
    }

    pub fn cdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 {
            return Err(FadingError::NegativeInput(x));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let rate = self.rate();
        let sum: f64 = self
            .mixture_weights()
            .iter()
            .enumerate()
            .map(|(l, &w)| w * gamma_lr((l + 1) as f64, rate * x))
            .sum();
        Ok(sum.clamp(0.0, 1.0))
    }

    /// CCDF in the expanded finite-sum form,
    /// `1 - sum_l w_l (1 - e^{-x~} sum_{q<=l} x~^q / q!)` with
    /// `x~ = (beta - delta) x`.
    ///
    /// This is the series the exact coverage expression consumes; it is an
    /// independent evaluation route from [`Self::cdf`], which goes through
    /// the regularized incomplete gamma.
    pub fn ccdf_expanded(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 {
            return Err(FadingError::NegativeInput(x));
        }
        let xt = self.rate() * x;
        let weights = self.mixture_weights();
        let m = weights.len();
        // partial Poisson sums e^{-xt} sum_{q<=l} xt^q/q!, built incrementally
        let mut poisson_term = (-xt).exp();
        let mut poisson_partial = poisson_term;
        let mut acc = 0.0;
        for (l, &w) in weights.iter().enumerate() {
            acc += w * (1.0 - poisson_partial);
            if l + 1 < m {
                poisson_term *= xt / (l + 1) as f64;
                poisson_partial += poisson_term;
            }
        }
        Ok((1.0 - acc).clamp(0.0, 1.0))
    }

    /// `E[exp(-s g H)]` for the power `H`, evaluated in log space:
    ///
    /// `(2bm)^m (1 + 2bsg)^{m-1} / [(2bm + omega)(1 + 2bsg) - omega]^m`.
    pub fn mgf_term(&self, s: f64, g: f64) -> f64 {
        debug_assert!(s >= 0.0 && g >= 0.0);
        let mf = self.m as f64;
        let bm = 2.0 * self.b * mf;
        let u = 1.0 + 2.0 * self.b * s * g;
        let c1 = bm + self.omega;
        (mf * bm.ln() + (mf - 1.0) * u.ln() - mf * (c1 * u - self.omega).ln()).exp()
    }

    /// Draw a power sample: `H = |X + xi e^{j phi}|^2` with `X` a circular
    /// complex Gaussian of power `2b`, `xi^2 ~ Gamma(m, omega/m)`, and
    /// uniform phase.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        FadingSampler::shadowed_rician(self).sample(rng)
    }
}

/// Nakagami-m power parameters: `H ~ Gamma(m, mean_power / m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    pub m: u32,
    pub mean_power: f64,
}

impl NakagamiParams {
    pub fn new(m: u32, mean_power: f64) -> Result<Self, FadingError> {
        if m < 1 {
            return Err(FadingError::InvalidParameter("m must be >= 1".into()));
        }
        if !(mean_power > 0.0) {
            return Err(FadingError::InvalidParameter(format!(
                "mean power must be positive, got {mean_power}"
            )));
        }
        Ok(Self { m, mean_power })
    }

    /// Unit-mean Rayleigh power (exponential with mean one).
    pub fn rayleigh() -> Self {
        Self {
            m: 1,
            mean_power: 1.0,
        }
    }

    pub fn rate(&self) -> f64 {
        self.m as f64 / self.mean_power
    }

    pub fn pdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 {
            return Err(FadingError::NegativeInput(x));
        }
        let rate = self.rate();
        let m = self.m as f64;
        if x == 0.0 {
            return Ok(if self.m == 1 { rate } else { 0.0 });
        }
        Ok((m * rate.ln() + (m - 1.0) * x.ln() - rate * x - ln_factorial(self.m as usize - 1)).exp())
    }

    pub fn cdf(&self, x: f64) -> Result<f64, FadingError> {
        if x < 0.0 {
            return Err(FadingError::NegativeInput(x));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        Ok(gamma_lr(self.m as f64, self.rate() * x))
    }

    /// Gamma MGF under the tilt: `(1 + s g mean / m)^{-m}`.
    pub fn mgf_term(&self, s: f64, g: f64) -> f64 {
        debug_assert!(s >= 0.0 && g >= 0.0);
        (-(self.m as f64) * (s * g / self.rate()).ln_1p()).exp()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        FadingSampler::nakagami(self).sample(rng)
    }
}

/// A tier's fading law; uniform dispatch over the two families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingLaw {
    ShadowedRician(ShadowedRicianParams),
    Nakagami(NakagamiParams),
}

/// The CCDF of either law as a Gamma mixture:
/// `P[H > x] = sum_l w_l e^{-cx} sum_{q<=l} (cx)^q / q!` with rate `c`.
///
/// Shadowed-Rician populates all of `l = 0..m-1`; Nakagami-m is the single
/// term `l = m-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfSeries {
    pub rate: f64,
    pub weights: Vec<f64>,
}

impl CcdfSeries {
    /// Highest derivative order the exact coverage expression needs.
    pub fn max_order(&self) -> usize {
        self.weights.len() - 1
    }

    /// Suffix sums `S_q = sum_{l >= q} w_l`; the exact coverage bracket is
    /// `sum_q S_q t_q` for the scaled Laplace derivatives `t_q`.
    pub fn suffix_weights(&self) -> Vec<f64> {
        let mut s = self.weights.clone();
        for i in (0..s.len().saturating_sub(1)).rev() {
            s[i] += s[i + 1];
        }
        s
    }
}

impl FadingLaw {
    pub fn mean_power(&self) -> f64 {
        match self {
            FadingLaw::ShadowedRician(p) => p.mean_power(),
            FadingLaw::Nakagami(p) => p.mean_power,
        }
    }

    pub fn pdf(&self, x: f64) -> Result<f64, FadingError> {
        match self {
            FadingLaw::ShadowedRician(p) => p.pdf(x),
            FadingLaw::Nakagami(p) => p.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64, FadingError> {
        match self {
            FadingLaw::ShadowedRician(p) => p.cdf(x),
            FadingLaw::Nakagami(p) => p.cdf(x),
        }
    }

    pub fn ccdf(&self, x: f64) -> Result<f64, FadingError> {
        match self {
            FadingLaw::ShadowedRician(p) => p.ccdf_expanded(x),
            FadingLaw::Nakagami(p) => Ok(1.0 - p.cdf(x)?),
        }
    }

    pub fn mgf_term(&self, s: f64, g: f64) -> f64 {
        match self {
            FadingLaw::ShadowedRician(p) => p.mgf_term(s, g),
            FadingLaw::Nakagami(p) => p.mgf_term(s, g),
        }
    }

    pub fn ccdf_series(&self) -> CcdfSeries {
        match self {
            FadingLaw::ShadowedRician(p) => CcdfSeries {
                rate: p.rate(),
                weights: p.mixture_weights(),
            },
            FadingLaw::Nakagami(p) => {
                let mut weights = vec![0.0; p.m as usize];
                *weights.last_mut().expect("m >= 1") = 1.0;
                CcdfSeries {
                    rate: p.rate(),
                    weights,
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        FadingSampler::new(self).sample(rng)
    }

    /// Scaled tilt-MGF derivatives `D_n = (-s)^n d^n/ds^n E[e^{-s g H}]` for
    /// `n = 0..=n_max`, written into `out`.
    ///
    /// The scaling keeps every order O(1) wherever `s g H` is O(1), which is
    /// exactly the regime the coverage integrals evaluate; the unscaled
    /// derivatives would overflow/underflow across orders. All `D_n` are
    /// nonnegative (complete monotonicity of the MGF).
    pub fn mgf_scaled_derivatives(&self, s: f64, g: f64, n_max: usize, out: &mut [f64]) {
        debug_assert!(out.len() > n_max);
        match self {
            FadingLaw::ShadowedRician(p) => sr_scaled_derivatives(p, s, g, n_max, out),
            FadingLaw::Nakagami(p) => nakagami_scaled_derivatives(p, s, g, n_max, out),
        }
    }

    /// Raw tilt-MGF derivatives `d^n/ds^n E[e^{-s g H}]` for `n = 0..=n_max`.
    pub fn mgf_derivatives(&self, s: f64, g: f64, n_max: usize, out: &mut [f64]) {
        debug_assert!(out.len() > n_max);
        match self {
            FadingLaw::ShadowedRician(p) => sr_raw_derivatives(p, s, g, n_max, out),
            FadingLaw::Nakagami(p) => nakagami_raw_derivatives(p, s, g, n_max, out),
        }
    }
}

/// Simple-pole weights of the tilt MGF.
///
/// In the variable `y = 2bm + c1 a s` (with `a = 2bg`, `c1 = 2bm + omega`)
/// the MGF is exactly `sum_j B_j y^{-(j+1)}` with nonnegative weights
///
/// ```text
/// B_j = (2bm)^m C(m-1, j) omega^j / c1^{m-1},  j = 0..m-1.
/// ```
///
/// Every s-derivative then keeps one sign per term, so arbitrary orders
/// evaluate without cancellation; the Leibniz form on
/// `u^{m-1} (c1 u - omega)^{-m}` alternates and loses all precision at
/// heavy shapes and large tilts.
fn sr_pole_weights(p: &ShadowedRicianParams, ln_y: f64) -> Vec<f64> {
    let m = p.m as usize;
    let mf = p.m as f64;
    let bm = 2.0 * p.b * mf;
    let c1 = bm + p.omega;
    let ln_front = mf * bm.ln() - (mf - 1.0) * c1.ln();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        if p.omega == 0.0 && j > 0 {
            out.push(0.0);
            continue;
        }
        let ln_bj = ln_front
            + ln_binomial(m - 1, j)
            + if j == 0 { 0.0 } else { j as f64 * p.omega.ln() };
        out.push((ln_bj - (j as f64 + 1.0) * ln_y).exp());
    }
    out
}

fn sr_scaled_derivatives(
    p: &ShadowedRicianParams,
    s: f64,
    g: f64,
    n_max: usize,
    out: &mut [f64],
) {
    let w = 2.0 * p.b * s * g;
    if w == 0.0 {
        out[0] = 1.0;
        out[1..=n_max].fill(0.0);
        return;
    }
    let bm = 2.0 * p.b * p.m as f64;
    let c1 = bm + p.omega;
    let y = bm + c1 * w;
    // P_j = B_j y^{-(j+1)}; D_n = sum_j P_j (j+1)_n (c1 w / y)^n
    let mut terms = sr_pole_weights(p, y.ln());
    let q = c1 * w / y;
    out[0] = terms.iter().sum();
    for n in 1..=n_max {
        let mut acc = 0.0;
        for (j, t) in terms.iter_mut().enumerate() {
            *t *= q * (j + n) as f64;
            acc += *t;
        }
        out[n] = acc;
    }
}

fn sr_raw_derivatives(p: &ShadowedRicianParams, s: f64, g: f64, n_max: usize, out: &mut [f64]) {
    out[0] = p.mgf_term(s, g);
    if n_max == 0 {
        return;
    }
    if g == 0.0 {
        out[1..=n_max].fill(0.0);
        return;
    }
    let a = 2.0 * p.b * g;
    let bm = 2.0 * p.b * p.m as f64;
    let c1 = bm + p.omega;
    let y = bm + c1 * a * s;
    let mut terms = sr_pole_weights(p, y.ln());
    let q = c1 * a / y;
    for n in 1..=n_max {
        let mut acc = 0.0;
        for (j, t) in terms.iter_mut().enumerate() {
            *t *= q * (j + n) as f64;
            acc += *t;
        }
        out[n] = if n % 2 == 0 { acc } else { -acc };
    }
}

fn nakagami_scaled_derivatives(
    p: &NakagamiParams,
    s: f64,
    g: f64,
    n_max: usize,
    out: &mut [f64],
) {
    out[0] = p.mgf_term(s, g);
    if n_max == 0 {
        return;
    }
    let theta = g / p.rate();
    let w = s * theta;
    if w == 0.0 {
        out[1..=n_max].fill(0.0);
        return;
    }
    let m = p.m as usize;
    let ln_w = w.ln();
    let ln_up = w.ln_1p();
    for n in 1..=n_max {
        out[n] = (n as f64 * ln_w + ln_factorial(m + n - 1) - ln_factorial(m - 1)
            - (m + n) as f64 * ln_up)
            .exp();
    }
}

fn nakagami_raw_derivatives(p: &NakagamiParams, s: f64, g: f64, n_max: usize, out: &mut [f64]) {
    out[0] = p.mgf_term(s, g);
    if n_max == 0 {
        return;
    }
    if g == 0.0 {
        out[1..=n_max].fill(0.0);
        return;
    }
    let theta = g / p.rate();
    let m = p.m as usize;
    let ln_theta = theta.ln();
    let ln_up = (s * theta).ln_1p();
    for n in 1..=n_max {
        let mag = (n as f64 * ln_theta + ln_factorial(m + n - 1) - ln_factorial(m - 1)
            - (m + n) as f64 * ln_up)
            .exp();
        out[n] = if n % 2 == 0 { mag } else { -mag };
    }
}

/// Reusable sampler for a fading law; build once per hot loop.
#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    Sr {
        sqrt_b: f64,
        /// LOS power distribution; `None` when `omega = 0`.
        los: Option<Gamma<f64>>,
    },
    Nakagami { power: Gamma<f64> },
}

impl FadingSampler {
    pub fn new(law: &FadingLaw) -> Self {
        match law {
            FadingLaw::ShadowedRician(p) => Self::shadowed_rician(p),
            FadingLaw::Nakagami(p) => Self::nakagami(p),
        }
    }

    pub fn shadowed_rician(p: &ShadowedRicianParams) -> Self {
        let los = if p.omega > 0.0 {
            Some(
                Gamma::new(p.m as f64, p.omega / p.m as f64)
                    .expect("validated shadowed-Rician parameters"),
            )
        } else {
            None
        };
        FadingSampler::Sr {
            sqrt_b: p.b.sqrt(),
            los,
        }
    }

    pub fn nakagami(p: &NakagamiParams) -> Self {
        FadingSampler::Nakagami {
            power: Gamma::new(p.m as f64, p.mean_power / p.m as f64)
                .expect("validated Nakagami parameters"),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Sr { sqrt_b, los } => {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                let xi = match los {
                    Some(g) => g.sample(rng).sqrt(),
                    None => 0.0,
                };
                let phase = rng.random::<f64>() * TAU;
                let re = sqrt_b * re + xi * phase.cos();
                let im = sqrt_b * im + xi * phase.sin();
                re * re + im * im
            }
            FadingSampler::Nakagami { power } => power.sample(rng),
        }
    }
}
