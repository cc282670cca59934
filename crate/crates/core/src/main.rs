//! Command-line front end: run scenarios, list presets, sweep parameters.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use geodez::runner::{self, RunOutcome};
use geodez::scenario::{self, parse_config_with_overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "geodez", version, about = "Geodesic flows on the periodic integer lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a config file, a run.json manifest, or a preset
    Run {
        /// Flat key=value config file (or a previous run.json)
        config: Option<PathBuf>,
        /// Use a bundled preset instead of a config file
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Override config keys, e.g. --set flow.r=2.5 (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the bundled presets
    ListPresets,
    /// Run one scenario per value of a varied key, concurrently
    Sweep {
        /// Flat key=value config file
        config: PathBuf,
        /// KEY=V1,V2,... - the key takes each value in turn
        #[arg(long, value_name = "KEY=V1,V2,...")]
        vary: String,
        /// Override config keys applied to every run (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}

fn dispatch(cli: Cli) -> Result<(), u8> {
    match cli.command {
        Command::Run {
            config,
            preset,
            set,
        } => run_command(config, preset, set),
        Command::ListPresets => {
            for (name, description) in scenario::list_presets() {
                println!("{name:<24} {description}");
            }
            Ok(())
        }
        Command::Sweep { config, vary, set } => sweep_command(&config, &vary, set),
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> u8 {
    eprintln!("error: {message}");
    code
}

fn parse_overrides(set: &[String]) -> Result<Vec<(String, String)>, u8> {
    set.iter()
        .map(|entry| {
            entry
                .split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| fail(2, format!("--set expects KEY=VALUE, got `{entry}`")))
        })
        .collect()
}

/// Base config text from a file (flat text or a run.json manifest) or a
/// preset name.
fn base_text(config: Option<&Path>, preset: Option<&str>) -> Result<String, u8> {
    match (config, preset) {
        (Some(path), None) => {
            if path.extension().is_some_and(|e| e == "json") {
                let manifest = runner::load_manifest(path)
                    .map_err(|e| fail(e.exit_code(), e))?;
                Ok(manifest.config.to_flat_text())
            } else {
                std::fs::read_to_string(path)
                    .map_err(|e| fail(1, format!("cannot read {}: {e}", path.display())))
            }
        }
        (None, Some(name)) => scenario::preset_text(name).ok_or_else(|| {
            fail(
                2,
                format!("unknown preset `{name}`; see `geodez list-presets`"),
            )
        }),
        (None, None) => Err(fail(2, "pass a config file or --preset <name>")),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn resolve_config(
    config: Option<&Path>,
    preset: Option<&str>,
    set: &[String],
) -> Result<ScenarioConfig, u8> {
    let text = base_text(config, preset)?;
    let mut overrides = parse_overrides(set)?;
    if let Ok(dir) = std::env::var("OUTPUT_DIR") {
        overrides.push(("output.dir".to_string(), dir));
    }
    parse_config_with_overrides(&text, &overrides).map_err(|e| fail(2, e))
}

fn report(outcome: &RunOutcome) {
    let dir = outcome.out_dir.display();
    println!("wrote {dir}/fields.csv, {dir}/summary.csv, {dir}/run.json");
    if let Some(d) = &outcome.manifest.diagnostics {
        let velocity = d
            .peak_velocity_estimate
            .map_or("n/a".to_string(), |v| format!("{v:.4}"));
        println!(
            "final s = {:.4}  norm drift = {:.3e}  imag mass = {:.3e}  peak velocity = {velocity}",
            d.final_s, d.max_norm_drift, d.imag_mass_final
        );
        if d.seam_warning {
            eprintln!(
                "warning: boundary density reached {:.2e} of the norm; bump support is \
                 within reach of the periodic seam",
                d.max_boundary_density_fraction
            );
        }
        if d.norm_drift_warning {
            eprintln!(
                "warning: norm drift {:.3e} exceeds 1e-6; decrease integrator.ds",
                d.max_norm_drift
            );
        }
    }
}

fn run_command(
    config: Option<PathBuf>,
    preset: Option<String>,
    set: Vec<String>,
) -> Result<(), u8> {
    let cfg = resolve_config(config.as_deref(), preset.as_deref(), &set)?;
    match runner::run_scenario(&cfg) {
        Ok(outcome) => {
            report(&outcome);
            Ok(())
        }
        Err(e) => Err(fail(e.exit_code(), e)),
    }
}

fn sweep_command(config: &Path, vary: &str, set: Vec<String>) -> Result<(), u8> {
    let Some((key, values)) = vary.split_once('=') else {
        return Err(fail(2, format!("--vary expects KEY=V1,V2,..., got `{vary}`")));
    };
    let key = key.trim();
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if values.is_empty() || values.iter().any(String::is_empty) {
        return Err(fail(2, "--vary needs at least one non-empty value"));
    }

    let text = std::fs::read_to_string(config)
        .map_err(|e| fail(1, format!("cannot read {}: {e}", config.display())))?;
    let base_overrides = parse_overrides(&set)?;
    let root = match std::env::var("OUTPUT_DIR") {
        Ok(dir) => dir,
        Err(_) => {
            parse_config_with_overrides(&text, &base_overrides)
                .map_err(|e| fail(2, e))?
                .output
                .dir
        }
    };

    let mut jobs = Vec::new();
    for value in &values {
        let label = format!("{key}={value}");
        let subdir = Path::new(&root).join(label.replace('/', "_"));
        let mut overrides = base_overrides.clone();
        overrides.push((key.to_string(), value.clone()));
        overrides.push((
            "output.dir".to_string(),
            subdir.to_string_lossy().into_owned(),
        ));
        let cfg = parse_config_with_overrides(&text, &overrides).map_err(|e| fail(2, e))?;
        jobs.push((label, cfg));
    }

    let mut worst = 0u8;
    for (label, result) in runner::run_many(jobs) {
        match result {
            Ok(outcome) => {
                println!("[{label}]");
                report(&outcome);
            }
            Err(e) => {
                eprintln!("[{label}] failed: {e}");
                worst = worst.max(e.exit_code());
            }
        }
    }
    if worst == 0 {
        Ok(())
    } else {
        Err(worst)
    }
}
