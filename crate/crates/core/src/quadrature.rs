//! Globally adaptive Gauss-Kronrod quadrature on finite intervals.
//!
//! The 7-15 rule pair gives an embedded error estimate per segment; the
//! adaptive driver keeps a worst-first queue of segments and bisects until
//! the summed error estimate meets the requested tolerance. Integrands that
//! are only piecewise smooth are handled by seeding the segment list at the
//! known breakpoints ([`integrate_with_breakpoints`]).
//!
//! A vector-valued variant ([`integrate_vec`]) shares one subdivision across
//! all components, which is what the interference-Laplace derivative stack
//! needs: every component is an integral of the same kernel at a different
//! derivative order, so they share the difficult regions.

use thiserror::Error;

/// 15-point Kronrod abscissae on [-1, 1] (positive half, descending).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// 7-point Gauss weights for the embedded rule.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Hard cap on adaptive subdivisions before giving up.
const MAX_SEGMENTS: usize = 4096;

#[derive(Debug, Clone, Error)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature did not reach tolerance (best estimate {estimate:e}, \
         error bound {error:e} after {segments} segments)"
    )]
    DidNotConverge {
        estimate: f64,
        error: f64,
        segments: usize,
    },
    #[error("invalid integration interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },
}

/// Requested accuracy for an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Self { rel, abs }
    }

    fn met(&self, err: f64, total: f64) -> bool {
        err <= self.abs.max(self.rel * total.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-14 }
    }
}

/// One 15-point Kronrod evaluation of `f` on [a, b].
///
/// Returns `(integral, error_estimate)` where the error estimate follows the
/// QUADPACK rescaling of the Gauss/Kronrod difference.
fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut fv = [0.0f64; 15];
    for (i, &x) in XGK.iter().enumerate() {
        let dx = half * x;
        fv[i] = f(center - dx);
        if i < 7 {
            fv[14 - i] = f(center + dx);
        }
    }

    let mut kronrod = WGK[7] * fv[7];
    let mut gauss = 0.0;
    let mut resabs = WGK[7] * fv[7].abs();
    for i in 0..7 {
        let pair = fv[i] + fv[14 - i];
        kronrod += WGK[i] * pair;
        resabs += WGK[i] * (fv[i].abs() + fv[14 - i].abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    gauss += WG[3] * fv[7];

    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fv[7] - mean).abs();
    for i in 0..7 {
        resasc += WGK[i] * ((fv[i] - mean).abs() + (fv[14 - i] - mean).abs());
    }

    let raw_err = ((kronrod - gauss) * half).abs();
    resasc *= half.abs();
    resabs *= half.abs();

    let mut err = raw_err;
    if resasc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / resasc).powf(1.5);
        err = if scale < 1.0 { resasc * scale } else { resasc };
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }

    (kronrod * half, err)
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

/// Adaptive integral of `f` over [a, b].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<f64, QuadratureError> {
    integrate_segments(&mut f, &[a, b], tol)
}

/// Adaptive integral with the segment list seeded at `points`.
///
/// `points` must be sorted ascending; it includes both endpoints. Knots of a
/// piecewise-smooth integrand should be listed so no initial segment
/// straddles a kink.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64, QuadratureError> {
    integrate_segments(&mut f, points, tol)
}

fn integrate_segments<F: FnMut(f64) -> f64>(
    f: &mut F,
    points: &[f64],
    tol: Tolerance,
) -> Result<f64, QuadratureError> {
    if points.len() < 2 {
        return Err(QuadratureError::BadInterval {
            a: f64::NAN,
            b: f64::NAN,
        });
    }
    for w in points.windows(2) {
        if !(w[0] <= w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(QuadratureError::BadInterval { a: w[0], b: w[1] });
        }
    }

    let mut segs: Vec<Segment> = Vec::with_capacity(64);
    let mut total = 0.0;
    let mut err_total = 0.0;
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (v, e) = gk15(f, w[0], w[1]);
        total += v;
        err_total += e;
        segs.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            err: e,
        });
    }
    if segs.is_empty() {
        return Ok(0.0);
    }

    while !tol.met(err_total, total) {
        if segs.len() >= MAX_SEGMENTS {
            return Err(QuadratureError::DidNotConverge {
                estimate: total,
                error: err_total,
                segments: segs.len(),
            });
        }
        // bisect the segment with the largest error estimate
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty segment list");
        let Segment { a, b, value, err } = segs.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval at floating-point resolution; accept its estimate
            total += 0.0;
            segs.push(Segment {
                a,
                b,
                value,
                err: 0.0,
            });
            err_total -= err;
            continue;
        }
        let (v1, e1) = gk15(f, a, mid);
        let (v2, e2) = gk15(f, mid, b);
        total += v1 + v2 - value;
        err_total += e1 + e2 - err;
        segs.push(Segment {
            a,
            b: mid,
            value: v1,
            err: e1,
        });
        segs.push(Segment {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
    }

    Ok(total)
}

/// One Kronrod pass for a vector integrand; fills `value` and `err` (length `dim`).
fn gk15_vec<F: FnMut(f64, &mut [f64])>(
    f: &mut F,
    a: f64,
    b: f64,
    dim: usize,
    value: &mut [f64],
    err: &mut [f64],
) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    // 15 nodes * dim values
    let mut fv = vec![0.0f64; 15 * dim];
    for (i, &x) in XGK.iter().enumerate() {
        let dx = half * x;
        f(center - dx, &mut fv[i * dim..(i + 1) * dim]);
        if i < 7 {
            let j = 14 - i;
            f(center + dx, &mut fv[j * dim..(j + 1) * dim]);
        }
    }

    for c in 0..dim {
        let node = |i: usize| fv[i * dim + c];
        let mut kronrod = WGK[7] * node(7);
        let mut gauss = 0.0;
        let mut resabs = WGK[7] * node(7).abs();
        for i in 0..7 {
            let pair = node(i) + node(14 - i);
            kronrod += WGK[i] * pair;
            resabs += WGK[i] * (node(i).abs() + node(14 - i).abs());
            if i % 2 == 1 {
                gauss += WG[i / 2] * pair;
            }
        }
        gauss += WG[3] * node(7);

        let mean = kronrod * 0.5;
        let mut resasc = WGK[7] * (node(7) - mean).abs();
        for i in 0..7 {
            resasc += WGK[i] * ((node(i) - mean).abs() + (node(14 - i) - mean).abs());
        }
        resasc *= half.abs();
        resabs *= half.abs();

        let mut e = ((kronrod - gauss) * half).abs();
        if resasc != 0.0 && e != 0.0 {
            let scale = (200.0 * e / resasc).powf(1.5);
            e = if scale < 1.0 { resasc * scale } else { resasc };
        }
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            e = e.max(50.0 * f64::EPSILON * resabs);
        }

        value[c] = kronrod * half;
        err[c] = e;
    }
}

struct VecSegment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: Vec<f64>,
}

/// Adaptive integral of a vector-valued integrand over [a, b].
///
/// `f(x, out)` writes the `dim` components at `x` into `out`. Convergence
/// requires every component to satisfy the tolerance relative to its own
/// magnitude; the subdivision is shared.
pub fn integrate_vec<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    dim: usize,
    a: f64,
    b: f64,
    tol: Tolerance,
) -> Result<Vec<f64>, QuadratureError> {
    if !(a <= b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::BadInterval { a, b });
    }
    if a == b || dim == 0 {
        return Ok(vec![0.0; dim]);
    }

    let mut value = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    gk15_vec(&mut f, a, b, dim, &mut value, &mut err);

    let mut segs = vec![VecSegment {
        a,
        b,
        value: value.clone(),
        err: err.clone(),
    }];
    let mut total = value;
    let mut err_total = err;

    let converged = |total: &[f64], err_total: &[f64]| {
        (0..dim).all(|c| tol.met(err_total[c], total[c]))
    };

    while !converged(&total, &err_total) {
        if segs.len() >= MAX_SEGMENTS {
            return Err(QuadratureError::DidNotConverge {
                estimate: total[0],
                error: err_total.iter().cloned().fold(0.0, f64::max),
                segments: segs.len(),
            });
        }
        // worst segment by error relative to the current component scales
        let score = |s: &VecSegment| {
            (0..dim)
                .map(|c| s.err[c] / total[c].abs().max(tol.abs))
                .fold(0.0, f64::max)
        };
        let (worst, _) = segs
            .iter()
            .enumerate()
            .map(|(i, s)| (i, score(s)))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty segment list");
        let seg = segs.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            for c in 0..dim {
                err_total[c] -= seg.err[c];
            }
            segs.push(VecSegment {
                err: vec![0.0; dim],
                ..seg
            });
            continue;
        }
        let mut v1 = vec![0.0; dim];
        let mut e1 = vec![0.0; dim];
        let mut v2 = vec![0.0; dim];
        let mut e2 = vec![0.0; dim];
        gk15_vec(&mut f, seg.a, mid, dim, &mut v1, &mut e1);
        gk15_vec(&mut f, mid, seg.b, dim, &mut v2, &mut e2);
        for c in 0..dim {
            total[c] += v1[c] + v2[c] - seg.value[c];
            err_total[c] += e1[c] + e2[c] - seg.err[c];
        }
        segs.push(VecSegment {
            a: seg.a,
            b: mid,
            value: v1,
            err: e1,
        });
        segs.push(VecSegment {
            a: mid,
            b: seg.b,
            value: v2,
            err: e2,
        });
    }

    Ok(total)
}
