//! `istn`: run coverage experiments from a config file or a built-in recipe.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use istn::analytics::Method;
use istn::experiments::{
    config::{load_config, parse_config, Overrides},
    recipes,
    runner::{run_experiment, write_outputs},
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "istn",
    about = "Downlink coverage of multi-tier satellite-terrestrial networks: \
             analytical expressions and Monte-Carlo simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file path or a built-in recipe name.
    Run {
        /// Path to a config file, or a recipe name from `istn recipes`.
        config: String,
        /// Override the Monte-Carlo seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte-Carlo snapshot count.
        #[arg(long)]
        snapshots: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated method list
        /// (exact,approx,closed_form,mc,grid_baseline).
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
    },
    /// List the built-in figure recipes.
    Recipes,
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Recipes => {
            for r in recipes::RECIPES {
                println!("{:<6} {}", r.name, r.description);
            }
            0
        }
        Command::Run {
            config,
            seed,
            snapshots,
            out,
            methods,
        } => match run(config, seed, snapshots, out, methods) {
            Ok(failed_cells) => {
                if failed_cells > 0 {
                    eprintln!("{failed_cells} cell(s) failed");
                    1
                } else {
                    0
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                2
            }
        },
    };
    std::process::exit(code);
}

fn run(
    config: String,
    seed: Option<u64>,
    snapshots: Option<u64>,
    out: Option<PathBuf>,
    methods: Option<Vec<String>>,
) -> Result<usize> {
    let path = PathBuf::from(&config);
    let mut cfg = if path.is_file() {
        load_config(&path).with_context(|| format!("loading {}", path.display()))?
    } else if let Some(recipe) = recipes::find(&config) {
        parse_config(recipe.source, recipe.name).context("parsing built-in recipe")?
    } else {
        bail!(
            "'{config}' is neither a config file nor a known recipe \
             (see `istn recipes`)"
        );
    };

    let methods = methods
        .map(|list| {
            list.iter()
                .map(|m| m.parse::<Method>().map_err(|e| anyhow!(e)))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    cfg.apply(&Overrides {
        seed,
        snapshots,
        output_dir: out,
        methods,
    });

    eprintln!(
        "running '{}': {} case(s), {} sweep point(s), methods [{}]",
        cfg.label,
        cfg.cases.len(),
        cfg.sweep.values.len(),
        cfg.methods
            .iter()
            .map(|m| m.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let results = run_experiment(&cfg)?;
    let out_dir = cfg.output_dir.clone();
    let files = write_outputs(&cfg, &results, &out_dir)?;
    let mut failed = 0;
    for r in &results {
        failed += r.table.failed_cells();
        eprintln!(
            "  case '{}': {} rows{}",
            r.label,
            r.table.rows.len(),
            if r.meta.failures.is_empty() {
                String::new()
            } else {
                format!(", {} failed cell(s)", r.meta.failures.len())
            }
        );
    }
    for f in &files {
        println!("{}", f.display());
    }
    Ok(failed)
}
