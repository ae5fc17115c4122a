//! Command-line front end: parse a config or preset, run the experiment,
//! and write CSV/JSON artifacts into the output directory.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};

use damdc_core::config::{parse_config, ExperimentConfig};
use damdc_core::harness::{artifact_files, run_experiment, ExperimentOutput};
use damdc_core::presets;

/// Environment variable providing the default output directory.
const OUT_DIR_ENV: &str = "DAMDC_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "damdc",
    about = "Diffusion-network spectrum estimation simulator",
    group(ArgGroup::new("source").required(true).args(["config", "preset"]))
)]
struct Cli {
    /// Path to a JSON experiment configuration.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Built-in experiment preset: fig3-msd, fig4-psd, or fig5-tracking.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory (default: $DAMDC_OUT_DIR, then ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Run only these algorithms (comma-separated subset of
    /// standard, oracle, rza, l0, damdc).
    #[arg(long, value_delimiter = ',', value_name = "a,b,c")]
    algorithms: Vec<String>,

    /// Suppress the progress summary.
    #[arg(long)]
    quiet: bool,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let text = match (&cli.config, &cli.preset) {
        (Some(path), None) => fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        (None, Some(name)) => presets::preset_text(name)
            .ok_or_else(|| {
                format!("unknown preset '{name}' (expected one of {:?})", presets::NAMES)
            })?
            .to_string(),
        _ => unreachable!("clap enforces exactly one source"),
    };
    let mut cfg = parse_config(&text).map_err(|e| e.to_string())?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if !cli.algorithms.is_empty() {
        cfg.retain_algorithms(&cli.algorithms).map_err(|e| e.to_string())?;
    }
    Ok(cfg)
}

fn write_artifacts(out_dir: &PathBuf, output: &ExperimentOutput) -> Result<(), String> {
    fs::create_dir_all(out_dir)
        .map_err(|e| format!("cannot create {}: {e}", out_dir.display()))?;
    for (name, contents) in artifact_files(output) {
        let path = out_dir.join(&name);
        fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let cfg = load_config(cli)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let output = run_experiment(&cfg).map_err(|e| e.to_string())?;
    write_artifacts(&out_dir, &output)?;

    if !cli.quiet {
        println!(
            "ran {} iterations x {} runs over {} nodes (seed {})",
            cfg.n_iterations,
            cfg.n_runs,
            cfg.topology.n_nodes,
            cfg.master_seed
        );
        for alg in &output.report.algorithms {
            let sr = alg
                .final_support_recovery
                .map(|v| format!(", support recovery {v:.3}"))
                .unwrap_or_default();
            println!(
                "  {:<8} steady-state MSD {:>8.2} dB ({} runs averaged{}{})",
                alg.name,
                alg.steady_state_msd_db,
                alg.runs_averaged,
                if alg.divergent_runs > 0 {
                    format!(", {} divergent", alg.divergent_runs)
                } else {
                    String::new()
                },
                sr
            );
        }
        println!("artifacts written to {}", out_dir.display());
    }

    if output.report.total_divergent_runs > 0 {
        eprintln!(
            "error: {} divergent runs recorded",
            output.report.total_divergent_runs
        );
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
