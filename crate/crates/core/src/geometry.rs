//! Spherical network geometry: concentric base-station shells, the visible
//! cap seen by a user on the ground sphere, and the displacement transform
//! that maps a cap Poisson process to an annulus process in the plane while
//! preserving every user-distance statistic.
//!
//! All lengths are kilometres. The typical user sits at `(0, 0, R_E)`;
//! rotation invariance of the homogeneous process makes that choice lossless.
//!
//! Cap-to-annulus displacement: a shell of radius `R` with cap half-angle
//! `theta` (measured at the Earth's centre from the user's zenith) maps to
//! the annulus with
//!
//! ```text
//! r_min   = R - R_E
//! r_max   = sqrt(R^2 + R_E^2 - 2 R R_E cos(theta))
//! lambda~ = (R / R_E) * lambda
//! ```
//!
//! The map preserves the distance-to-user law point by point, so nearest,
//! second-nearest, and aggregate statistics all agree between the two
//! representations.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    #[error("shell radius {radius_km} km equals the user sphere radius; the visible cap is empty")]
    DegenerateShell { radius_km: f64 },
    #[error("visibility angle {theta_rad} rad outside (0, {theta_max_rad}]")]
    OutOfRangeTheta { theta_rad: f64, theta_max_rad: f64 },
    #[error("invalid geometry parameter: {0}")]
    InvalidParameter(String),
}

/// A base-station shell concentric with the user sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereShell {
    /// Shell radius `R_k` (km), at or above the user sphere.
    pub radius_km: f64,
    /// User sphere radius `R_E` (km).
    pub earth_radius_km: f64,
}

impl SphereShell {
    pub fn new(radius_km: f64, earth_radius_km: f64) -> Result<Self, GeometryError> {
        if !(earth_radius_km > 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "earth radius must be positive, got {earth_radius_km}"
            )));
        }
        if !(radius_km >= earth_radius_km) {
            return Err(GeometryError::InvalidParameter(format!(
                "shell radius {radius_km} km below user sphere {earth_radius_km} km"
            )));
        }
        Ok(Self {
            radius_km,
            earth_radius_km,
        })
    }

    /// Shell at `altitude_km` above the user sphere.
    pub fn from_altitude(altitude_km: f64, earth_radius_km: f64) -> Result<Self, GeometryError> {
        Self::new(earth_radius_km + altitude_km, earth_radius_km)
    }

    pub fn altitude_km(&self) -> f64 {
        self.radius_km - self.earth_radius_km
    }

    /// Maximum visible polar angle `acos(R_E / R_k)`: beyond it a shell point
    /// drops below the user's horizon.
    pub fn theta_max_rad(&self) -> f64 {
        (self.earth_radius_km / self.radius_km).clamp(-1.0, 1.0).acos()
    }

    /// The typical user position on this shell's user sphere.
    pub fn user_position(&self) -> [f64; 3] {
        [0.0, 0.0, self.earth_radius_km]
    }
}

/// The portion of a shell visible to the typical user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibleCap {
    pub shell: SphereShell,
    /// Geometric visibility limit for this shell.
    pub theta_max_rad: f64,
    /// Configured cap half-angle, `0 < theta <= theta_max`.
    pub theta_rad: f64,
}

impl VisibleCap {
    /// Cap surface area `2 pi R^2 (1 - cos theta)` (km^2).
    pub fn area_km2(&self) -> f64 {
        TAU * self.shell.radius_km * self.shell.radius_km * (1.0 - self.theta_rad.cos())
    }
}

/// Construct the visible cap of a shell.
///
/// `theta_override` narrows the cap below the geometric maximum; `None`
/// uses the full field of view.
pub fn visible_cap(
    shell: SphereShell,
    theta_override: Option<f64>,
) -> Result<VisibleCap, GeometryError> {
    let theta_max = shell.theta_max_rad();
    if theta_max <= 0.0 {
        return Err(GeometryError::DegenerateShell {
            radius_km: shell.radius_km,
        });
    }
    let theta = match theta_override {
        None => theta_max,
        Some(t) => {
            // tolerate round-off at the top of the range
            if !(t > 0.0) || t > theta_max * (1.0 + 1e-12) {
                return Err(GeometryError::OutOfRangeTheta {
                    theta_rad: t,
                    theta_max_rad: theta_max,
                });
            }
            t.min(theta_max)
        }
    };
    Ok(VisibleCap {
        shell,
        theta_max_rad: theta_max,
        theta_rad: theta,
    })
}

/// The planar annulus equivalent of a visible cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGeometry {
    pub r_min_km: f64,
    pub r_max_km: f64,
    /// Displaced density (km^-2).
    pub density_per_km2: f64,
}

impl AnnulusGeometry {
    pub fn new(r_min_km: f64, r_max_km: f64, density_per_km2: f64) -> Result<Self, GeometryError> {
        if !(r_min_km > 0.0) || !(r_max_km >= r_min_km) || !(density_per_km2 >= 0.0) {
            return Err(GeometryError::InvalidParameter(format!(
                "annulus ({r_min_km}, {r_max_km}) with density {density_per_km2}"
            )));
        }
        Ok(Self {
            r_min_km,
            r_max_km,
            density_per_km2,
        })
    }

    pub fn area_km2(&self) -> f64 {
        std::f64::consts::PI * (self.r_max_km * self.r_max_km - self.r_min_km * self.r_min_km)
    }

    /// Expected number of points.
    pub fn mean_count(&self) -> f64 {
        self.density_per_km2 * self.area_km2()
    }

    /// CDF of the distance from the origin to a uniformly placed point.
    pub fn distance_cdf(&self, r: f64) -> f64 {
        let (a, b) = (self.r_min_km, self.r_max_km);
        if r <= a {
            0.0
        } else if r >= b {
            1.0
        } else {
            (r * r - a * a) / (b * b - a * a)
        }
    }
}

/// Displace a cap process to its annulus equivalent with density
/// `(R_k / R_E) * density`.
pub fn displace(cap: &VisibleCap, density_per_km2: f64) -> AnnulusGeometry {
    let shell = cap.shell;
    let r_min = shell.radius_km - shell.earth_radius_km;
    let r_max = slant_range(shell, cap.theta_rad);
    AnnulusGeometry {
        r_min_km: r_min,
        r_max_km: r_max,
        density_per_km2: shell.radius_km / shell.earth_radius_km * density_per_km2,
    }
}

/// User-to-shell distance at polar angle `theta` (law of cosines).
pub fn slant_range(shell: SphereShell, theta: f64) -> f64 {
    let (r, re) = (shell.radius_km, shell.earth_radius_km);
    (r * r + re * re - 2.0 * r * re * theta.cos()).sqrt()
}

/// Points of one tier in the 3-D cap representation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet3D {
    pub coordinates: Vec<[f64; 3]>,
    pub tier_index: usize,
}

/// Points of one tier in the displaced planar representation.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet2D {
    pub coordinates: Vec<[f64; 2]>,
    pub tier_index: usize,
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// Sample a homogeneous Poisson process of the given density on the cap.
///
/// The count is Poisson with mean `density * area`; positions are uniform on
/// the cap, drawn by inverting the area element in `cos(polar angle)`.
pub fn sample_cap_ppp<R: Rng + ?Sized>(
    cap: &VisibleCap,
    density_per_km2: f64,
    rng: &mut R,
) -> PointSet3D {
    let n = poisson_count(density_per_km2 * cap.area_km2(), rng);
    let radius = cap.shell.radius_km;
    let cos_lo = cap.theta_rad.cos();
    let mut coordinates = Vec::with_capacity(n);
    for _ in 0..n {
        let cos_phi = 1.0 - rng.random::<f64>() * (1.0 - cos_lo);
        let sin_phi = (1.0 - cos_phi * cos_phi).max(0.0).sqrt();
        let azimuth = rng.random::<f64>() * TAU;
        coordinates.push([
            radius * sin_phi * azimuth.cos(),
            radius * sin_phi * azimuth.sin(),
            radius * cos_phi,
        ]);
    }
    PointSet3D {
        coordinates,
        tier_index: 0,
    }
}

/// Sample a homogeneous Poisson process on the displaced annulus.
///
/// Radius has density `2 r / (r_max^2 - r_min^2)`; azimuth is uniform.
pub fn sample_annulus_ppp<R: Rng + ?Sized>(annulus: &AnnulusGeometry, rng: &mut R) -> PointSet2D {
    let n = poisson_count(annulus.mean_count(), rng);
    let (a2, b2) = (
        annulus.r_min_km * annulus.r_min_km,
        annulus.r_max_km * annulus.r_max_km,
    );
    let mut coordinates = Vec::with_capacity(n);
    for _ in 0..n {
        let r = (a2 + rng.random::<f64>() * (b2 - a2)).sqrt();
        let azimuth = rng.random::<f64>() * TAU;
        coordinates.push([r * azimuth.cos(), r * azimuth.sin()]);
    }
    PointSet2D {
        coordinates,
        tier_index: 0,
    }
}

/// Euclidean distance between a shell point and the user (km).
pub fn user_distance(point: [f64; 3], user: [f64; 3]) -> f64 {
    let dx = point[0] - user[0];
    let dy = point[1] - user[1];
    let dz = point[2] - user[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_test_one_sample, ks_test_two_sample};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RE: f64 = 6371.0;

    fn cap(h: f64, theta: Option<f64>) -> VisibleCap {
        visible_cap(SphereShell::from_altitude(h, RE).unwrap(), theta).unwrap()
    }

    #[test]
    fn theta_max_matches_direct_arccos() {
        let c = cap(530.0, None);
        assert!((c.theta_max_rad - (RE / 6901.0).acos()).abs() < 1e-15);
        let t = cap(0.03, None);
        assert!((t.theta_max_rad - (RE / 6371.03).acos()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_shell_is_rejected() {
        let shell = SphereShell::new(RE, RE).unwrap();
        assert!(matches!(
            visible_cap(shell, None),
            Err(GeometryError::DegenerateShell { .. })
        ));
    }

    #[test]
    fn theta_above_max_is_rejected() {
        let shell = SphereShell::from_altitude(530.0, RE).unwrap();
        let max = shell.theta_max_rad();
        assert!(matches!(
            visible_cap(shell, Some(max * 1.01)),
            Err(GeometryError::OutOfRangeTheta { .. })
        ));
        assert!(visible_cap(shell, Some(max * 0.5)).is_ok());
    }

    #[test]
    fn displacement_density_scaling() {
        let shell = SphereShell::new(2.0 * RE, RE).unwrap();
        let c = visible_cap(shell, None).unwrap();
        let ann = displace(&c, 1e-6);
        assert!((ann.density_per_km2 - 2e-6).abs() < 1e-18);
    }

    #[test]
    fn displacement_radii_at_full_visibility() {
        // cos(theta_max) = R_E / R_k collapses r_max to sqrt(R_k^2 - R_E^2)
        let c = cap(530.0, None);
        let ann = displace(&c, 1e-6);
        assert!((ann.r_min_km - 530.0).abs() < 1e-12);
        let expect = (6901.0f64 * 6901.0 - RE * RE).sqrt();
        assert!((ann.r_max_km - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn r_max_approaches_r_min_as_theta_vanishes() {
        let shell = SphereShell::from_altitude(530.0, RE).unwrap();
        let c = visible_cap(shell, Some(1e-9)).unwrap();
        let ann = displace(&c, 1e-6);
        assert!((ann.r_max_km - ann.r_min_km) / ann.r_min_km < 1e-6);
    }

    #[test]
    fn user_distance_cases() {
        let u = [0.0, 0.0, RE];
        assert_eq!(user_distance(u, u), 0.0);
        assert!((user_distance([0.0, 0.0, 6901.0], u) - 530.0).abs() < 1e-12);
        // cap edge at full visibility: law of cosines gives sqrt(R_k^2 - R_E^2)
        let theta = (RE / 6901.0f64).acos();
        let p = [6901.0 * theta.sin(), 0.0, 6901.0 * theta.cos()];
        let expect = (6901.0f64 * 6901.0 - RE * RE).sqrt();
        assert!((user_distance(p, u) - expect).abs() < 1e-9);
    }

    #[test]
    fn zero_density_always_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = cap(530.0, None);
        for _ in 0..100 {
            assert!(sample_cap_ppp(&c, 0.0, &mut rng).coordinates.is_empty());
        }
        let degenerate = AnnulusGeometry {
            r_min_km: 100.0,
            r_max_km: 100.0,
            density_per_km2: 1.0,
        };
        assert!(sample_annulus_ppp(&degenerate, &mut rng)
            .coordinates
            .is_empty());
    }

    #[test]
    fn sampled_points_lie_on_shell_inside_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = cap(530.0, Some(0.2));
        for _ in 0..50 {
            let pts = sample_cap_ppp(&c, 2e-6, &mut rng);
            for p in &pts.coordinates {
                let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                assert!((norm - 6901.0).abs() <= 1e-9 * 6901.0);
                let polar = (p[2] / norm).clamp(-1.0, 1.0).acos();
                assert!(polar <= c.theta_rad + 1e-12);
            }
        }
    }

    #[test]
    fn cap_count_mean_and_poisson_dispersion() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = cap(530.0, None);
        let density = 8.0 / c.area_km2(); // mean 8 per snapshot
        let n = 100_000;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let k = sample_cap_ppp(&c, density, &mut rng).coordinates.len() as f64;
            sum += k;
            sum2 += k * k;
        }
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((mean - 8.0).abs() / 8.0 < 0.01, "mean {mean}");
        assert!((var / mean - 1.0).abs() < 0.05, "dispersion {}", var / mean);
    }

    #[test]
    fn annulus_void_probability_and_dispersion() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = cap(530.0, None);
        let mut ann = displace(&c, 1e-6);
        ann.density_per_km2 = 3.0 / ann.area_km2(); // mean 3
        let n = 100_000;
        let mut empty = 0u32;
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let k = sample_annulus_ppp(&ann, &mut rng).coordinates.len();
            if k == 0 {
                empty += 1;
            }
            sum += k as f64;
            sum2 += (k * k) as f64;
        }
        let p = (-3.0f64).exp();
        let got = empty as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((got - p).abs() < 3.0 * sigma, "got {got}, want {p}");
        // Poisson dispersion for the annulus sampler
        let mean = sum / n as f64;
        let var = sum2 / n as f64 - mean * mean;
        assert!((var / mean - 1.0).abs() < 0.05, "dispersion {}", var / mean);
    }

    #[test]
    fn pooled_cap_distances_follow_displaced_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = cap(530.0, None);
        let ann = displace(&c, 5e-7);
        let user = c.shell.user_position();
        let mut distances = Vec::new();
        while distances.len() < 20_000 {
            for p in sample_cap_ppp(&c, 5e-7, &mut rng).coordinates {
                distances.push(user_distance(p, user));
            }
        }
        let out = ks_test_one_sample(&distances, |r| ann.distance_cdf(r));
        assert!(out.p_value > 0.01, "p = {}", out.p_value);
    }

    #[test]
    fn nearest_distance_law_agrees_between_representations() {
        // Displacement fidelity: nearest-distance samples from the cap and
        // from the displaced annulus are exchangeable.
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = cap(530.0, None);
        let density = 10.0 / c.area_km2();
        let ann = displace(&c, density);
        let user = c.shell.user_position();
        let mut from_cap = Vec::new();
        let mut from_annulus = Vec::new();
        while from_cap.len() < 10_000 {
            let pts = sample_cap_ppp(&c, density, &mut rng);
            if let Some(d) = pts
                .coordinates
                .iter()
                .map(|&p| user_distance(p, user))
                .min_by(f64::total_cmp)
            {
                from_cap.push(d);
            }
        }
        while from_annulus.len() < 10_000 {
            let pts = sample_annulus_ppp(&ann, &mut rng);
            if let Some(d) = pts
                .coordinates
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
                .min_by(f64::total_cmp)
            {
                from_annulus.push(d);
            }
        }
        let out = ks_test_two_sample(&from_cap, &from_annulus);
        assert!(out.p_value > 0.01, "p = {}", out.p_value);
    }

    proptest! {
        #[test]
        fn displacement_invariants_hold(
            h in 0.01f64..36_000.0,
            theta_frac in 0.05f64..1.0,
            density in 1e-9f64..1e-3,
        ) {
            let shell = SphereShell::from_altitude(h, RE).unwrap();
            let theta = shell.theta_max_rad() * theta_frac;
            let c = visible_cap(shell, Some(theta)).unwrap();
            let ann = displace(&c, density);
            prop_assert!((ann.r_min_km - h).abs() <= 1e-9 * h.max(1.0));
            let expect_rmax = slant_range(shell, theta);
            prop_assert!((ann.r_max_km - expect_rmax).abs() <= 1e-12 * expect_rmax);
            prop_assert!(ann.r_max_km > ann.r_min_km);
            // displaced annulus mean equals cap mean: lambda scaling exactly
            // offsets the area change
            let cap_mean = density * c.area_km2();
            prop_assert!((ann.mean_count() - cap_mean).abs() <= 1e-9 * cap_mean.max(1e-12));
        }

        #[test]
        fn r_max_is_strictly_increasing_in_theta(
            h in 0.01f64..36_000.0,
            f1 in 0.01f64..0.99,
            df in 0.005f64..0.5,
        ) {
            let shell = SphereShell::from_altitude(h, RE).unwrap();
            let tmax = shell.theta_max_rad();
            let t1 = tmax * f1;
            let t2 = tmax * (f1 + df).min(1.0);
            prop_assume!(t2 > t1);
            prop_assert!(slant_range(shell, t2) > slant_range(shell, t1));
        }
    }
}
