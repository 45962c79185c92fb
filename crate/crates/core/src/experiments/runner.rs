//! Experiment execution: materialize each case, evaluate every requested
//! method at every sweep point, and collect a [`ResultTable`] per case.
//!
//! Analytic failures mark their cells rather than aborting; the failure
//! messages are retained in the run metadata and count toward a nonzero
//! exit status in the CLI.

use super::config::{CaseSpec, ExperimentConfig, Metric, SweepVariable};
use super::emit::{emit_csv, emit_plotdata, format_value};
use super::table::ResultTable;
use crate::analytics::{
    association_probability, coverage_curve, kappas_for, visibility_probability, CoverageCurve,
    CurveSpec, Method, TierConfig,
};
use crate::simulator::{
    estimate_association_proportions, estimate_coverage, estimate_coverage_grid,
    matched_ppp_tiers,
};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("simulation error: {0}")]
    Sim(#[from] crate::simulator::SimError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("emit error: {0}")]
    Emit(#[from] super::emit::EmitError),
    #[error("metadata serialization error: {0}")]
    Meta(#[from] toml::ser::Error),
}

/// Everything worth recording about how a case was produced.
#[derive(Debug, Clone, Serialize)]
pub struct RunMeta {
    pub experiment: String,
    pub case: String,
    pub metric: String,
    pub methods: Vec<String>,
    pub seed: u64,
    pub snapshots: u64,
    pub sweep_variable: String,
    pub threshold_db: f64,
    /// Resolved kappa values per tier (approximated coverage only).
    pub kappa_by_tier: Vec<KappaRecord>,
    pub epsilon: Option<(f64, f64)>,
    /// Poisson densities derived from the grid baseline, when matched.
    pub matched_density_per_km2: Option<Vec<f64>>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaRecord {
    pub tier: String,
    pub kappa: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub label: String,
    pub table: ResultTable,
    pub meta: RunMeta,
}

fn curve_rows(
    table: &mut ResultTable,
    names: &[String],
    sweep_values: &[f64],
    curve: &CoverageCurve,
) {
    for (i, &sv) in sweep_values.iter().enumerate() {
        let ci = curve.ci95.as_ref().map(|c| c[i]);
        table.push(sv, curve.method, "total", curve.total[i], ci);
        for (k, name) in names.iter().enumerate() {
            table.push(sv, curve.method, name.clone(), curve.per_tier[k][i], None);
        }
    }
}

/// Apply a bias or density sweep value to the case's tier list. Returns the
/// surviving tiers with their names; a value of zero removes the swept tier
/// entirely (a "ratio 0" point means that network is absent).
fn materialize(
    case: &CaseSpec,
    variable: &SweepVariable,
    value: f64,
) -> (Vec<TierConfig>, Vec<String>) {
    let mut tiers = case.tiers.clone();
    let mut names = case.tier_names.clone();
    let target = match variable {
        SweepVariable::ThresholdDb => None,
        SweepVariable::BiasRatio { tier } | SweepVariable::DensityRatio { tier } => {
            names.iter().position(|n| n == tier)
        }
    };
    if let Some(idx) = target {
        match variable {
            SweepVariable::BiasRatio { .. } => {
                if value == 0.0 {
                    tiers.remove(idx);
                    names.remove(idx);
                } else {
                    tiers[idx].bias = value;
                }
            }
            SweepVariable::DensityRatio { .. } => {
                let reference = tiers
                    .iter()
                    .enumerate()
                    .find(|(i, _)| *i != idx)
                    .map(|(_, t)| t.mean_visible_count())
                    .unwrap_or(1.0);
                let count = value * reference;
                if count == 0.0 {
                    tiers.remove(idx);
                    names.remove(idx);
                } else {
                    super::presets::set_mean_visible_count(&mut tiers[idx], count);
                }
            }
            SweepVariable::ThresholdDb => {}
        }
    }
    (tiers, names)
}

fn record_failures(meta: &mut RunMeta, method: Method, curve: &CoverageCurve) {
    for (i, v) in curve.total.iter().enumerate() {
        if v.is_none() {
            meta.failures.push(format!(
                "{} at sweep value {}",
                method.as_str(),
                format_value(curve.thresholds_db[i])
            ));
        }
    }
}

fn run_case(cfg: &ExperimentConfig, case: &CaseSpec) -> Result<CaseResult, RunError> {
    let mut table = ResultTable::default();
    let mut meta = RunMeta {
        experiment: cfg.label.clone(),
        case: case.label.clone(),
        metric: match cfg.metric {
            Metric::Coverage => "coverage".into(),
            Metric::Association => "association".into(),
        },
        methods: cfg.methods.iter().map(|m| m.as_str().to_string()).collect(),
        seed: cfg.mc.seed,
        snapshots: cfg.mc.snapshots,
        sweep_variable: match &cfg.sweep.variable {
            SweepVariable::ThresholdDb => "threshold_db".into(),
            SweepVariable::BiasRatio { tier } => format!("bias_ratio:{tier}"),
            SweepVariable::DensityRatio { tier } => format!("density_ratio:{tier}"),
        },
        threshold_db: cfg.sweep.threshold_db,
        kappa_by_tier: Vec::new(),
        epsilon: None,
        matched_density_per_km2: None,
        failures: Vec::new(),
    };

    if cfg.methods.contains(&Method::AnalyticApprox) {
        for (name, tier) in case.tier_names.iter().zip(&case.tiers) {
            let m = tier.fading.ccdf_series().weights.len();
            if let Ok(kappa) = kappas_for(&cfg.kappa, m) {
                meta.kappa_by_tier.push(KappaRecord {
                    tier: name.clone(),
                    kappa,
                });
            }
        }
    }
    if cfg.methods.contains(&Method::ClosedForm) {
        meta.epsilon = Some(case.epsilon);
    }

    // Poisson tiers for the mc method, optionally density-matched to the grid
    let mc_tiers = match &cfg.walker {
        Some(w) if w.match_density && cfg.methods.contains(&Method::MonteCarlo) => {
            let matched =
                matched_ppp_tiers(&w.config, &case.tiers, w.probe_snapshots, cfg.mc.seed)?;
            meta.matched_density_per_km2 =
                Some(matched.iter().map(|t| t.density_per_km2).collect());
            matched
        }
        _ => case.tiers.clone(),
    };

    match (&cfg.sweep.variable, cfg.metric) {
        (SweepVariable::ThresholdDb, Metric::Coverage) => {
            let grid = &cfg.sweep.values;
            for method in &cfg.methods {
                match method {
                    Method::AnalyticExact => {
                        let c = coverage_curve(&case.tiers, grid, &CurveSpec::Exact);
                        record_failures(&mut meta, *method, &c);
                        curve_rows(&mut table, &case.tier_names, grid, &c);
                    }
                    Method::AnalyticApprox => {
                        let c = coverage_curve(
                            &case.tiers,
                            grid,
                            &CurveSpec::Approx(cfg.kappa.clone()),
                        );
                        record_failures(&mut meta, *method, &c);
                        curve_rows(&mut table, &case.tier_names, grid, &c);
                    }
                    Method::ClosedForm => {
                        let c = coverage_curve(
                            &case.tiers,
                            grid,
                            &CurveSpec::ClosedForm {
                                epsilon: case.epsilon,
                            },
                        );
                        record_failures(&mut meta, *method, &c);
                        curve_rows(&mut table, &case.tier_names, grid, &c);
                    }
                    Method::MonteCarlo => {
                        let mc = estimate_coverage(
                            &mc_tiers,
                            grid,
                            cfg.mc.snapshots,
                            cfg.mc.seed,
                            cfg.mc.rep,
                        )?;
                        curve_rows(&mut table, &case.tier_names, grid, &mc.curve);
                    }
                    Method::GridBaseline => {
                        let w = cfg.walker.as_ref().expect("validated at parse time");
                        let mc = estimate_coverage_grid(
                            &w.config,
                            &case.tiers,
                            grid,
                            cfg.mc.snapshots,
                            cfg.mc.seed,
                        )?;
                        curve_rows(&mut table, &case.tier_names, grid, &mc.curve);
                    }
                }
            }
        }
        (_, Metric::Coverage) => {
            let t_db = [cfg.sweep.threshold_db];
            for &value in &cfg.sweep.values {
                let (tiers, names) = materialize(case, &cfg.sweep.variable, value);
                for method in &cfg.methods {
                    let one = |spec: &CurveSpec| coverage_curve(&tiers, &t_db, spec);
                    let curve = match method {
                        Method::AnalyticExact => Some(one(&CurveSpec::Exact)),
                        Method::AnalyticApprox => {
                            Some(one(&CurveSpec::Approx(cfg.kappa.clone())))
                        }
                        Method::ClosedForm => Some(one(&CurveSpec::ClosedForm {
                            epsilon: case.epsilon,
                        })),
                        Method::MonteCarlo => {
                            let mc = estimate_coverage(
                                &tiers,
                                &t_db,
                                cfg.mc.snapshots,
                                cfg.mc.seed,
                                cfg.mc.rep,
                            )?;
                            Some(mc.curve)
                        }
                        Method::GridBaseline => None,
                    };
                    if let Some(c) = curve {
                        if c.total[0].is_none() {
                            meta.failures.push(format!(
                                "{} at sweep value {}",
                                method.as_str(),
                                format_value(value)
                            ));
                        }
                        let ci = c.ci95.as_ref().map(|v| v[0]);
                        table.push(value, c.method, "total", c.total[0], ci);
                        for (name, col) in names.iter().zip(&c.per_tier) {
                            table.push(value, c.method, name.clone(), col[0], None);
                        }
                        // a removed tier contributes exactly nothing
                        for name in case.tier_names.iter().filter(|n| !names.contains(n)) {
                            table.push(value, c.method, name.clone(), Some(0.0), None);
                        }
                    }
                }
            }
        }
        (_, Metric::Association) => {
            for &value in &cfg.sweep.values {
                let (tiers, names) = materialize(case, &cfg.sweep.variable, value);
                for method in &cfg.methods {
                    match method {
                        Method::AnalyticExact => {
                            let mut total = 0.0;
                            let mut cells = Vec::with_capacity(tiers.len());
                            let mut failed = false;
                            for k in 0..tiers.len() {
                                match association_probability(&tiers, k) {
                                    Ok(p) => {
                                        let mass =
                                            p * visibility_probability(&tiers[k].annulus());
                                        total += mass;
                                        cells.push(Some(mass));
                                    }
                                    Err(e) => {
                                        failed = true;
                                        meta.failures.push(format!(
                                            "exact association at {}: {e}",
                                            format_value(value)
                                        ));
                                        cells.push(None);
                                    }
                                }
                            }
                            for (name, cell) in names.iter().zip(cells) {
                                table.push(value, Method::AnalyticExact, name.clone(), cell, None);
                            }
                            for name in case.tier_names.iter().filter(|n| !names.contains(n)) {
                                table.push(value, Method::AnalyticExact, name.clone(), Some(0.0), None);
                            }
                            table.push(
                                value,
                                Method::AnalyticExact,
                                "none",
                                if failed { None } else { Some(1.0 - total) },
                                None,
                            );
                        }
                        Method::MonteCarlo => {
                            let props = estimate_association_proportions(
                                &tiers,
                                cfg.mc.snapshots,
                                cfg.mc.seed,
                                cfg.mc.rep,
                            )?;
                            for (name, &p) in names.iter().zip(&props.per_tier) {
                                let ci =
                                    crate::stats::ci95_half_width(p, cfg.mc.snapshots);
                                table.push(value, Method::MonteCarlo, name.clone(), Some(p), Some(ci));
                            }
                            for name in case.tier_names.iter().filter(|n| !names.contains(n)) {
                                table.push(value, Method::MonteCarlo, name.clone(), Some(0.0), None);
                            }
                            table.push(
                                value,
                                Method::MonteCarlo,
                                "none",
                                Some(props.none),
                                Some(crate::stats::ci95_half_width(props.none, cfg.mc.snapshots)),
                            );
                        }
                        _ => {}
                    }
                }
            }
        }
    }

    Ok(CaseResult {
        label: case.label.clone(),
        table,
        meta,
    })
}

/// Execute every case of the experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CaseResult>, RunError> {
    cfg.cases.iter().map(|c| run_case(cfg, c)).collect()
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

/// Write CSV, plot data, and metadata for each case under `dir`.
/// Returns the written file names.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    results: &[CaseResult],
    dir: &Path,
) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for r in results {
        let stem = format!("{}__{}", sanitize(&cfg.label), sanitize(&r.label));
        let csv_path = dir.join(format!("{stem}.csv"));
        emit_csv(&r.table, &csv_path)?;
        written.push(csv_path);
        for name in emit_plotdata(&r.table, dir, &stem)? {
            written.push(dir.join(name));
        }
        let meta_path = dir.join(format!("{stem}.meta.toml"));
        std::fs::write(&meta_path, toml::to_string(&r.meta)?)?;
        written.push(meta_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::parse_config;

    fn small_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"
label = "unit"
methods = ["exact", "mc"]

[sweep]
variable = "threshold_db"
values = [-5.0, 0.0, 5.0]

[mc]
snapshots = 4000
seed = 3

{extra}

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
fading = "FHS"
"#
        );
        parse_config(&text, "unit").unwrap()
    }

    #[test]
    fn threshold_sweep_produces_rows_for_all_cells() {
        let cfg = small_config("");
        let results = run_experiment(&cfg).unwrap();
        assert_eq!(results.len(), 1);
        let t = &results[0].table;
        // 2 methods x 3 points x (total + 2 tiers)
        assert_eq!(t.rows.len(), 2 * 3 * 3);
        assert_eq!(t.failed_cells(), 0);
        // analytic and MC totals agree loosely even at this tiny sample size
        for i in 0..3 {
            let exact = t.rows[i * 3].value.unwrap();
            let mc = t
                .rows
                .iter()
                .find(|r| {
                    r.method == Method::MonteCarlo
                        && r.tier == "total"
                        && r.sweep_value == t.rows[i * 3].sweep_value
                })
                .unwrap()
                .value
                .unwrap();
            assert!((exact - mc).abs() < 0.05, "{exact} vs {mc}");
        }
    }

    #[test]
    fn association_sweep_sums_to_one() {
        let text = r#"
label = "assoc"
metric = "association"
methods = ["exact", "mc"]

[sweep]
variable = "bias_ratio"
tier = "terrestrial"
values = [0.1, 1.0, 10.0]

[mc]
snapshots = 3000
seed = 5

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
        let cfg = parse_config(text, "assoc").unwrap();
        let results = run_experiment(&cfg).unwrap();
        let t = &results[0].table;
        for &v in &[0.1, 1.0, 10.0] {
            for method in [Method::AnalyticExact, Method::MonteCarlo] {
                let sum: f64 = t
                    .rows
                    .iter()
                    .filter(|r| r.sweep_value == v && r.method == method)
                    .map(|r| r.value.unwrap())
                    .sum();
                assert!((sum - 1.0).abs() < 1e-9, "{method:?} at {v}: {sum}");
            }
        }
        // terrestrial association grows with its bias
        let terr: Vec<f64> = t
            .rows
            .iter()
            .filter(|r| r.method == Method::MonteCarlo && r.tier == "terrestrial")
            .map(|r| r.value.unwrap())
            .collect();
        assert!(terr[0] < terr[1] && terr[1] < terr[2], "{terr:?}");
    }

    #[test]
    fn outputs_are_written_and_reparse() {
        let cfg = {
            let mut c = small_config("");
            c.mc.snapshots = 500;
            c
        };
        let results = run_experiment(&cfg).unwrap();
        let dir = std::env::temp_dir().join(format!("istn-run-{}", std::process::id()));
        let files = write_outputs(&cfg, &results, &dir).unwrap();
        assert!(files.iter().any(|f| f.extension().unwrap() == "csv"));
        assert!(files.iter().any(|f| f.to_string_lossy().ends_with(".meta.toml")));
        let back = super::super::emit::parse_csv(&files[0]).unwrap();
        assert_eq!(back.rows.len(), results[0].table.rows.len());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn rerun_with_same_seed_is_byte_identical() {
        let cfg = {
            let mut c = small_config("");
            c.mc.snapshots = 2000;
            c
        };
        let dir = std::env::temp_dir().join(format!("istn-det-{}", std::process::id()));
        let r1 = run_experiment(&cfg).unwrap();
        write_outputs(&cfg, &r1, &dir.join("a")).unwrap();
        let r2 = run_experiment(&cfg).unwrap();
        write_outputs(&cfg, &r2, &dir.join("b")).unwrap();
        let csv_a = std::fs::read(dir.join("a/unit__base.csv")).unwrap();
        let csv_b = std::fs::read(dir.join("b/unit__base.csv")).unwrap();
        assert_eq!(csv_a, csv_b);
        std::fs::remove_dir_all(&dir).ok();
    }
}
