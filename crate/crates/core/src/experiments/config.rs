//! Experiment configuration: a TOML schema in the units of the problem
//! domain (GHz, MHz, km, dBm, dBi, dB), converted to linear quantities once
//! at load time.
//!
//! A config describes one tier list, one sweep, the methods to run, and
//! optionally a list of cases (labelled parameter variations) plus a grid
//! baseline. Validation is exhaustive: every violated invariant is
//! reported, not just the first.

use super::presets::{composite_gain, set_mean_visible_count, shadowing_preset, EARTH_RADIUS_KM};
use super::units::{dbm_to_watts, ghz_to_hz, mhz_to_hz};
use crate::analytics::{KappaPolicy, Method, TierConfig};
use crate::fading::{FadingLaw, NakagamiParams, ShadowedRicianParams};
use crate::geometry::SphereShell;
use crate::simulator::{SpatialRep, WalkerStarConfig};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Validation(Vec<String>),
}

// ---------------------------------------------------------------------------
// Raw (serde) layer
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    label: Option<String>,
    /// "coverage" (default) or "association".
    metric: Option<String>,
    methods: Vec<String>,
    sweep: RawSweep,
    #[serde(default)]
    mc: RawMc,
    output: Option<RawOutput>,
    tier: Vec<RawTier>,
    #[serde(default)]
    case: Vec<RawCase>,
    walker: Option<RawWalker>,
    kappa: Option<RawKappa>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    variable: String,
    values: Option<Vec<f64>>,
    start: Option<f64>,
    stop: Option<f64>,
    step: Option<f64>,
    /// Fixed threshold for bias / density sweeps.
    threshold_db: Option<f64>,
    /// Tier whose bias or density takes the sweep value.
    tier: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    snapshots: Option<u64>,
    seed: Option<u64>,
    representation: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTier {
    name: String,
    altitude_km: f64,
    carrier_ghz: f64,
    bandwidth_mhz: f64,
    tx_power_dbm: f64,
    tx_gain_main_dbi: f64,
    tx_gain_side_dbi: f64,
    rx_gain_main_dbi: Option<f64>,
    rx_gain_side_dbi: Option<f64>,
    path_loss_exp: f64,
    bias: Option<f64>,
    theta_rad: Option<f64>,
    mean_visible_count: Option<f64>,
    density_per_km2: Option<f64>,
    fading: RawFading,
    noise_psd_dbm_per_hz: Option<f64>,
    /// Omit the noise term entirely (interference-limited).
    #[serde(default)]
    interference_limited: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawFading {
    /// "rayleigh", "FHS", "AS", or "ILS".
    Preset(String),
    ShadowedRician { m: u32, b: f64, omega: f64 },
    Nakagami { nakagami_m: u32, mean_power: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCase {
    label: String,
    /// Closed-form correction constants, one per tier.
    epsilon: Option<Vec<f64>>,
    #[serde(default)]
    tiers: BTreeMap<String, RawTierOverride>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTierOverride {
    fading: Option<RawFading>,
    mean_visible_count: Option<f64>,
    density_per_km2: Option<f64>,
    bias: Option<f64>,
    altitude_km: Option<f64>,
    /// `false` removes the tier in this case.
    enabled: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWalker {
    n_sats: usize,
    n_orbits: usize,
    reference_lat_deg: Option<f64>,
    reference_lon_deg: Option<f64>,
    terrestrial_spacing_km: f64,
    interplane_phase_rad: Option<f64>,
    probe_snapshots: Option<usize>,
    /// Derive Poisson densities for the `mc` method from grid snapshots.
    match_density: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawKappa {
    Name(String),
    Interpolate { interpolate: f64 },
    Explicit { explicit: Vec<f64> },
}

// ---------------------------------------------------------------------------
// Resolved layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    Association,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    ThresholdDb,
    /// The named tier's bias takes the sweep value; a value of zero removes
    /// the tier.
    BiasRatio { tier: String },
    /// The named tier's mean visible count is the sweep value times the
    /// reference count (the first other tier); zero removes the tier.
    DensityRatio { tier: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub threshold_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub snapshots: u64,
    pub seed: u64,
    pub rep: SpatialRep,
}

/// One labelled tier-parameter variation of the experiment.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub label: String,
    pub tier_names: Vec<String>,
    pub tiers: Vec<TierConfig>,
    pub epsilon: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct WalkerSettings {
    pub config: WalkerStarConfig,
    pub probe_snapshots: usize,
    pub match_density: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub label: String,
    pub metric: Metric,
    pub methods: Vec<Method>,
    pub sweep: Sweep,
    pub mc: McSettings,
    pub output_dir: PathBuf,
    pub cases: Vec<CaseSpec>,
    pub walker: Option<WalkerSettings>,
    pub kappa: KappaPolicy,
}

/// Command-line overrides applied after parsing.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub snapshots: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub methods: Option<Vec<Method>>,
}

impl ExperimentConfig {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.mc.seed = s;
        }
        if let Some(n) = o.snapshots {
            self.mc.snapshots = n;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(m) = &o.methods {
            self.methods = m.clone();
        }
    }
}

fn resolve_fading(raw: &RawFading, errs: &mut Vec<String>, at: &str) -> Option<FadingLaw> {
    match raw {
        RawFading::Preset(name) => {
            if name.eq_ignore_ascii_case("rayleigh") {
                return Some(FadingLaw::Nakagami(NakagamiParams::rayleigh()));
            }
            match shadowing_preset(name) {
                Some(p) => Some(FadingLaw::ShadowedRician(p)),
                None => {
                    errs.push(format!(
                        "{at}: unknown fading preset '{name}' (expected rayleigh|FHS|AS|ILS)"
                    ));
                    None
                }
            }
        }
        RawFading::ShadowedRician { m, b, omega } => {
            match ShadowedRicianParams::new(*m, *b, *omega) {
                Ok(p) => Some(FadingLaw::ShadowedRician(p)),
                Err(e) => {
                    errs.push(format!("{at}: {e}"));
                    None
                }
            }
        }
        RawFading::Nakagami {
            nakagami_m,
            mean_power,
        } => match NakagamiParams::new(*nakagami_m, *mean_power) {
            Ok(p) => Some(FadingLaw::Nakagami(p)),
            Err(e) => {
                errs.push(format!("{at}: {e}"));
                None
            }
        },
    }
}

fn resolve_tier(raw: &RawTier, errs: &mut Vec<String>) -> Option<TierConfig> {
    let at = format!("tier '{}'", raw.name);
    let f_hz = ghz_to_hz(raw.carrier_ghz);
    let shell = match SphereShell::from_altitude(raw.altitude_km, EARTH_RADIUS_KM) {
        Ok(s) => s,
        Err(e) => {
            errs.push(format!("{at}: {e}"));
            return None;
        }
    };
    let fading = resolve_fading(&raw.fading, errs, &at)?;
    let rx_main = raw.rx_gain_main_dbi.unwrap_or(0.0);
    let rx_side = raw.rx_gain_side_dbi.unwrap_or(0.0);
    let mut tier = TierConfig {
        shell,
        theta_rad: raw.theta_rad.unwrap_or_else(|| shell.theta_max_rad()),
        density_per_km2: raw.density_per_km2.unwrap_or(0.0),
        tx_power_w: dbm_to_watts(raw.tx_power_dbm),
        carrier_hz: f_hz,
        bandwidth_hz: mhz_to_hz(raw.bandwidth_mhz),
        main_lobe_gain: composite_gain(raw.tx_gain_main_dbi, rx_main, f_hz),
        side_lobe_gain: composite_gain(raw.tx_gain_side_dbi, rx_side, f_hz),
        path_loss_exp: raw.path_loss_exp,
        // absent bias defaults to one (unbiased association)
        bias: raw.bias.unwrap_or(1.0),
        fading,
        noise_psd_w_per_hz: if raw.interference_limited {
            0.0
        } else {
            dbm_to_watts(raw.noise_psd_dbm_per_hz.unwrap_or(-174.0))
        },
    };
    match (raw.mean_visible_count, raw.density_per_km2) {
        (Some(n), None) => set_mean_visible_count(&mut tier, n),
        (None, Some(_)) => {}
        (None, None) => errs.push(format!(
            "{at}: set either mean_visible_count or density_per_km2"
        )),
        (Some(_), Some(_)) => errs.push(format!(
            "{at}: mean_visible_count and density_per_km2 are mutually exclusive"
        )),
    }
    for v in tier.violations() {
        errs.push(format!("{at}: {v}"));
    }
    Some(tier)
}

fn build_case(
    label: String,
    base: &[RawTier],
    overrides: &BTreeMap<String, RawTierOverride>,
    epsilon: Option<&Vec<f64>>,
    errs: &mut Vec<String>,
) -> Option<CaseSpec> {
    let at = format!("case '{label}'");
    for name in overrides.keys() {
        if !base.iter().any(|t| &t.name == name) {
            errs.push(format!("{at}: override names unknown tier '{name}'"));
        }
    }
    let mut tier_names = Vec::new();
    let mut tiers = Vec::new();
    for raw in base {
        let mut raw = raw.clone();
        let mut enabled = true;
        if let Some(o) = overrides.get(&raw.name) {
            enabled = o.enabled.unwrap_or(true);
            if let Some(f) = &o.fading {
                raw.fading = f.clone();
            }
            if let Some(n) = o.mean_visible_count {
                raw.mean_visible_count = Some(n);
                raw.density_per_km2 = None;
            }
            if let Some(d) = o.density_per_km2 {
                raw.density_per_km2 = Some(d);
                raw.mean_visible_count = None;
            }
            if let Some(b) = o.bias {
                raw.bias = Some(b);
            }
            if let Some(a) = o.altitude_km {
                raw.altitude_km = a;
            }
        }
        if !enabled {
            continue;
        }
        if let Some(t) = resolve_tier(&raw, errs) {
            tier_names.push(raw.name.clone());
            tiers.push(t);
        }
    }
    if tiers.is_empty() {
        errs.push(format!("{at}: no enabled tiers"));
        return None;
    }
    let epsilon = match epsilon {
        None => (0.0, 0.0),
        Some(v) if v.len() == 2 => (v[0], v[1]),
        Some(v) => {
            errs.push(format!(
                "{at}: epsilon needs exactly two entries, got {}",
                v.len()
            ));
            (0.0, 0.0)
        }
    };
    Some(CaseSpec {
        label,
        tier_names,
        tiers,
        epsilon,
    })
}

/// Parse and validate a config document.
pub fn parse_config(text: &str, default_label: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut errs: Vec<String> = Vec::new();

    let metric = match raw.metric.as_deref() {
        None | Some("coverage") => Metric::Coverage,
        Some("association") => Metric::Association,
        Some(other) => {
            errs.push(format!(
                "unknown metric '{other}' (expected coverage|association)"
            ));
            Metric::Coverage
        }
    };

    let mut methods = Vec::new();
    if raw.methods.is_empty() {
        errs.push("at least one method is required".into());
    }
    for m in &raw.methods {
        match m.parse::<Method>() {
            Ok(m) => methods.push(m),
            Err(e) => errs.push(e),
        }
    }
    for m in &methods {
        let ok = match metric {
            Metric::Coverage => true,
            Metric::Association => matches!(m, Method::AnalyticExact | Method::MonteCarlo),
        };
        if !ok {
            errs.push(format!(
                "method '{}' is not defined for the association metric",
                m.as_str()
            ));
        }
    }

    // sweep values: explicit list or start/stop/step
    let values = match (&raw.sweep.values, raw.sweep.start, raw.sweep.stop, raw.sweep.step) {
        (Some(v), None, None, None) => v.clone(),
        (None, Some(a), Some(b), Some(h)) if h > 0.0 && b >= a => {
            let n = ((b - a) / h).round() as usize;
            (0..=n).map(|i| a + i as f64 * h).collect()
        }
        _ => {
            errs.push("sweep needs either `values` or `start`/`stop`/`step`".into());
            Vec::new()
        }
    };
    if values.is_empty() {
        errs.push("sweep grid is empty".into());
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        errs.push("sweep grid must be strictly increasing".into());
    }

    let tier_name = |name: &Option<String>, errs: &mut Vec<String>| -> String {
        match name {
            None => {
                errs.push("this sweep variable needs `sweep.tier`".into());
                String::new()
            }
            Some(n) => {
                if !raw.tier.iter().any(|t| &t.name == n) {
                    errs.push(format!("sweep.tier '{n}' is not a configured tier"));
                }
                n.clone()
            }
        }
    };
    let variable = match raw.sweep.variable.as_str() {
        "threshold_db" => SweepVariable::ThresholdDb,
        "bias_ratio" => SweepVariable::BiasRatio {
            tier: tier_name(&raw.sweep.tier, &mut errs),
        },
        "density_ratio" => SweepVariable::DensityRatio {
            tier: tier_name(&raw.sweep.tier, &mut errs),
        },
        other => {
            errs.push(format!(
                "unknown sweep variable '{other}' \
                 (expected threshold_db|bias_ratio|density_ratio)"
            ));
            SweepVariable::ThresholdDb
        }
    };
    if matches!(variable, SweepVariable::ThresholdDb) && metric == Metric::Association {
        errs.push("association proportions do not depend on the threshold; \
                   sweep bias_ratio or density_ratio instead"
            .into());
    }
    let threshold_db = raw.sweep.threshold_db.unwrap_or(0.0);

    let rep = match raw.mc.representation.as_deref() {
        None | Some("annulus") => SpatialRep::Annulus,
        Some("cap") => SpatialRep::Cap,
        Some(other) => {
            errs.push(format!(
                "unknown representation '{other}' (expected annulus|cap)"
            ));
            SpatialRep::Annulus
        }
    };
    let mc = McSettings {
        snapshots: raw.mc.snapshots.unwrap_or(100_000),
        seed: raw.mc.seed.unwrap_or(1),
        rep,
    };

    if raw.tier.is_empty() {
        errs.push("at least one tier is required".into());
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for t in &raw.tier {
            if !seen.insert(&t.name) {
                errs.push(format!("duplicate tier name '{}'", t.name));
            }
        }
    }

    let mut cases = Vec::new();
    if raw.case.is_empty() {
        if let Some(c) = build_case("base".into(), &raw.tier, &BTreeMap::new(), None, &mut errs) {
            cases.push(c);
        }
    } else {
        let mut seen = std::collections::BTreeSet::new();
        for rc in &raw.case {
            if !seen.insert(&rc.label) {
                errs.push(format!("duplicate case label '{}'", rc.label));
            }
            if let Some(c) = build_case(
                rc.label.clone(),
                &raw.tier,
                &rc.tiers,
                rc.epsilon.as_ref(),
                &mut errs,
            ) {
                cases.push(c);
            }
        }
    }

    let walker = raw.walker.as_ref().map(|w| WalkerSettings {
        config: WalkerStarConfig {
            n_sats: w.n_sats,
            n_orbits: w.n_orbits.max(1),
            // the grid baseline convention is [terrestrial, satellite]
            altitude_km: raw.tier.get(1).map(|t| t.altitude_km).unwrap_or(530.0),
            reference_lat_deg: w.reference_lat_deg.unwrap_or(36.0),
            reference_lon_deg: w.reference_lon_deg.unwrap_or(126.0),
            terrestrial_spacing_km: w.terrestrial_spacing_km,
            terrestrial_height_km: 0.03,
            interplane_phase_rad: w.interplane_phase_rad.unwrap_or(0.0),
        },
        probe_snapshots: w.probe_snapshots.unwrap_or(2000),
        match_density: w.match_density.unwrap_or(true),
    });
    if let Some(w) = &raw.walker {
        if w.n_orbits == 0 || w.n_sats % w.n_orbits.max(1) != 0 {
            errs.push(format!(
                "walker: {} satellites do not divide into {} orbits",
                w.n_sats, w.n_orbits
            ));
        }
    }
    if methods.contains(&Method::GridBaseline) {
        if walker.is_none() {
            errs.push("method grid_baseline requires a [walker] section".into());
        }
        if !matches!(variable, SweepVariable::ThresholdDb) {
            errs.push("method grid_baseline only supports threshold sweeps".into());
        }
        for c in &cases {
            if c.tiers.len() != 2 {
                errs.push(format!(
                    "case '{}': grid_baseline needs exactly two tiers",
                    c.label
                ));
            }
        }
    }
    if methods.contains(&Method::ClosedForm) {
        for c in &cases {
            if c.tiers.len() != 2 {
                errs.push(format!(
                    "case '{}': closed_form needs exactly two tiers",
                    c.label
                ));
            }
        }
    }

    let kappa = match raw.kappa {
        None => KappaPolicy::default(),
        Some(RawKappa::Name(n)) => match n.as_str() {
            "cdf_fit" => KappaPolicy::CdfFit,
            "lower_bound" => KappaPolicy::LowerBound,
            other => {
                errs.push(format!(
                    "unknown kappa policy '{other}' (expected cdf_fit|lower_bound)"
                ));
                KappaPolicy::default()
            }
        },
        Some(RawKappa::Interpolate { interpolate }) => KappaPolicy::Interpolate(interpolate),
        Some(RawKappa::Explicit { explicit }) => KappaPolicy::Explicit(explicit),
    };

    if !errs.is_empty() {
        return Err(ConfigError::Validation(errs));
    }

    Ok(ExperimentConfig {
        label: raw.label.unwrap_or_else(|| default_label.to_string()),
        metric,
        methods,
        sweep: Sweep {
            variable,
            values,
            threshold_db,
        },
        mc,
        output_dir: raw
            .output
            .and_then(|o| o.dir)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out")),
        cases,
        walker,
        kappa,
    })
}

/// Load a config from disk.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".into());
    parse_config(&text, &label)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
methods = ["exact", "mc"]

[sweep]
variable = "threshold_db"
start = -10.0
stop = 10.0
step = 5.0

[[tier]]
name = "terrestrial"
altitude_km = 0.03
carrier_ghz = 3.5
bandwidth_mhz = 100.0
tx_power_dbm = 46.0
tx_gain_main_dbi = 0.0
tx_gain_side_dbi = 0.0
path_loss_exp = 4.0
mean_visible_count = 50.0
fading = "rayleigh"

[[tier]]
name = "satellite"
altitude_km = 530.0
carrier_ghz = 1.9925
bandwidth_mhz = 5.0
tx_power_dbm = 50.0
tx_gain_main_dbi = 38.0
tx_gain_side_dbi = 28.0
path_loss_exp = 2.0
mean_visible_count = 10.0
fading = "AS"
"#;

    #[test]
    fn minimal_config_parses_with_expected_conversions() {
        let cfg = parse_config(MINIMAL, "unit").unwrap();
        assert_eq!(cfg.cases.len(), 1);
        let tiers = &cfg.cases[0].tiers;
        // 46 dBm is 39.81 W
        assert!((tiers[0].tx_power_w - 39.810_717_055_349_73).abs() < 1e-9);
        // preset expansion
        match tiers[1].fading {
            FadingLaw::ShadowedRician(p) => {
                assert_eq!(p.m, 10);
                assert!((p.b - 0.126).abs() < 1e-12);
                assert!((p.omega - 0.835).abs() < 1e-12);
            }
            _ => panic!("expected shadowed-Rician preset"),
        }
        // missing bias defaults to one
        assert_eq!(tiers[0].bias, 1.0);
        assert_eq!(tiers[1].bias, 1.0);
        // sweep grid from start/stop/step
        assert_eq!(cfg.sweep.values, vec![-10.0, -5.0, 0.0, 5.0, 10.0]);
        // default noise density
        assert!(tiers[0].noise_psd_w_per_hz > 0.0);
    }

    #[test]
    fn validation_collects_every_violation() {
        let broken = MINIMAL
            .replace("methods = [\"exact\", \"mc\"]", "methods = [\"bogus\"]")
            .replace("path_loss_exp = 4.0", "path_loss_exp = 1.0")
            .replace("mean_visible_count = 10.0\nfading = \"AS\"", "fading = \"XYZ\"");
        let err = parse_config(&broken, "unit").unwrap_err();
        match err {
            ConfigError::Validation(v) => {
                assert!(v.len() >= 3, "{v:?}");
                assert!(v.iter().any(|e| e.contains("bogus")));
                assert!(v.iter().any(|e| e.contains("below 2")));
                assert!(v.iter().any(|e| e.contains("XYZ")));
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn empty_sweep_grid_is_rejected() {
        let broken = MINIMAL.replace(
            "start = -10.0\nstop = 10.0\nstep = 5.0",
            "values = []",
        );
        assert!(matches!(
            parse_config(&broken, "unit"),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn cases_override_tiers_by_name() {
        let text = format!(
            "{MINIMAL}\n[[case]]\nlabel = \"fhs-50\"\n[case.tiers.satellite]\nfading = \"FHS\"\nmean_visible_count = 50.0\n\n[[case]]\nlabel = \"terr-only\"\n[case.tiers.satellite]\nenabled = false\n"
        );
        let cfg = parse_config(&text, "unit").unwrap();
        assert_eq!(cfg.cases.len(), 2);
        let fhs = &cfg.cases[0];
        assert_eq!(fhs.label, "fhs-50");
        match fhs.tiers[1].fading {
            FadingLaw::ShadowedRician(p) => assert_eq!(p.m, 1),
            _ => panic!(),
        }
        assert!((fhs.tiers[1].mean_visible_count() - 50.0).abs() < 1e-9);
        let solo = &cfg.cases[1];
        assert_eq!(solo.tiers.len(), 1);
        assert_eq!(solo.tier_names, vec!["terrestrial".to_string()]);
    }

    #[test]
    fn association_metric_rejects_threshold_sweep() {
        let text = MINIMAL
            .replace("methods = [\"exact\", \"mc\"]", "metric = \"association\"\nmethods = [\"mc\"]");
        assert!(matches!(
            parse_config(&text, "unit"),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn interference_limited_flag_zeroes_noise() {
        let text = MINIMAL.replace(
            "fading = \"rayleigh\"",
            "fading = \"rayleigh\"\ninterference_limited = true",
        );
        let cfg = parse_config(&text, "unit").unwrap();
        assert_eq!(cfg.cases[0].tiers[0].noise_psd_w_per_hz, 0.0);
        assert!(cfg.cases[0].tiers[1].noise_psd_w_per_hz > 0.0);
    }
}
