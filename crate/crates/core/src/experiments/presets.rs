//! Reference tier parameter sets used by the built-in recipes and the test
//! suites: a terrestrial cellular tier and a direct-to-cell LEO satellite
//! tier, with the three land-mobile-satellite shadowing presets.

use super::units::{db_to_linear, dbm_to_watts, ghz_to_hz, mhz_to_hz};
use crate::analytics::TierConfig;
use crate::fading::{FadingLaw, NakagamiParams, ShadowedRicianParams};
use crate::geometry::SphereShell;
use std::f64::consts::PI;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const SPEED_OF_LIGHT_KM_S: f64 = 3.0e5;

/// Composite dimensionful link gain: both lobe gains plus the free-space
/// wavelength factor `(c / 4 pi f)^2` in km^2.
pub fn composite_gain(tx_dbi: f64, rx_dbi: f64, carrier_hz: f64) -> f64 {
    db_to_linear(tx_dbi)
        * db_to_linear(rx_dbi)
        * (SPEED_OF_LIGHT_KM_S / (4.0 * PI * carrier_hz)).powi(2)
}

/// Set a tier's sphere density so that its expected visible count is `n`.
pub fn set_mean_visible_count(tier: &mut TierConfig, n: f64) {
    tier.density_per_km2 = 0.0;
    if n > 0.0 {
        let cap_area = tier.cap().area_km2();
        tier.density_per_km2 = n / cap_area;
    }
}

/// Terrestrial cellular tier: 3.5 GHz, 100 MHz, 46 dBm, 0 dBi lobes,
/// exponent 4, unit-mean Rayleigh fading, 30 m mast height.
pub fn terrestrial_tier(mean_visible: f64) -> TierConfig {
    let f = ghz_to_hz(3.5);
    let shell = SphereShell::from_altitude(0.03, EARTH_RADIUS_KM).expect("valid shell");
    let mut t = TierConfig {
        shell,
        theta_rad: shell.theta_max_rad(),
        density_per_km2: 0.0,
        tx_power_w: dbm_to_watts(46.0),
        carrier_hz: f,
        bandwidth_hz: mhz_to_hz(100.0),
        main_lobe_gain: composite_gain(0.0, 0.0, f),
        side_lobe_gain: composite_gain(0.0, 0.0, f),
        path_loss_exp: 4.0,
        bias: 1.0,
        fading: FadingLaw::Nakagami(NakagamiParams::rayleigh()),
        noise_psd_w_per_hz: dbm_to_watts(-174.0),
    };
    set_mean_visible_count(&mut t, mean_visible);
    t
}

/// LEO satellite tier: 1.9925 GHz, 5 MHz, 50 dBm, 38/28 dBi lobes,
/// exponent 2, shadowed-Rician fading.
pub fn satellite_tier(
    mean_visible: f64,
    fading: ShadowedRicianParams,
    altitude_km: f64,
) -> TierConfig {
    let f = ghz_to_hz(1.9925);
    let shell = SphereShell::from_altitude(altitude_km, EARTH_RADIUS_KM).expect("valid shell");
    let mut t = TierConfig {
        shell,
        theta_rad: shell.theta_max_rad(),
        density_per_km2: 0.0,
        tx_power_w: dbm_to_watts(50.0),
        carrier_hz: f,
        bandwidth_hz: mhz_to_hz(5.0),
        main_lobe_gain: composite_gain(38.0, 0.0, f),
        side_lobe_gain: composite_gain(28.0, 0.0, f),
        path_loss_exp: 2.0,
        bias: 1.0,
        fading: FadingLaw::ShadowedRician(fading),
        noise_psd_w_per_hz: dbm_to_watts(-174.0),
    };
    set_mean_visible_count(&mut t, mean_visible);
    t
}

/// The reference two-tier network: terrestrial plus a 530 km satellite
/// shell, parameterized by mean visible counts and the satellite shadowing
/// preset.
pub fn reference_two_tier(
    terr_count: f64,
    sat_count: f64,
    sat_fading: ShadowedRicianParams,
) -> Vec<TierConfig> {
    vec![
        terrestrial_tier(terr_count),
        satellite_tier(sat_count, sat_fading, 530.0),
    ]
}

/// The closed-form comparison setup: both tiers with exponent 2, unit-mean
/// Rayleigh fading, no noise, equal mean visible counts.
pub fn closed_form_two_tier(sat_altitude_km: f64, mean_each: f64) -> Vec<TierConfig> {
    let mut terr = terrestrial_tier(mean_each);
    terr.path_loss_exp = 2.0;
    terr.noise_psd_w_per_hz = 0.0;
    let mut sat = satellite_tier(
        mean_each,
        ShadowedRicianParams { m: 1, b: 0.5, omega: 0.0 },
        sat_altitude_km,
    );
    sat.fading = FadingLaw::Nakagami(NakagamiParams::rayleigh());
    sat.noise_psd_w_per_hz = 0.0;
    vec![terr, sat]
}

/// Resolve a shadowing preset by its table name.
pub fn shadowing_preset(name: &str) -> Option<ShadowedRicianParams> {
    match name.to_ascii_uppercase().as_str() {
        "FHS" => Some(crate::fading::FHS),
        "AS" => Some(crate::fading::AS),
        "ILS" => Some(crate::fading::ILS),
        _ => None,
    }
}
