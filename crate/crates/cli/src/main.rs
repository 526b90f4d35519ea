mod manifest;
mod output;
mod report;
mod values;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use shelter_core::experiment::{run_scenario_with_jobs, sweep_with_jobs, ExperimentError};
use shelter_core::{ScenarioConfig, SweepParam};

use manifest::{manifest_path, Outputs, RunManifest, SweepRecord};

#[derive(Parser)]
#[command(
    name = "shelter-sim",
    version,
    about = "Youth crisis shelter simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and report per-resource statistics.
    Simulate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run one scenario per value of a capacity parameter.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        /// `bed_capacity` or `service:<name>`.
        #[arg(long)]
        param: String,
        /// `start:stop:step` (stop included) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Check a config and print it with all defaults filled in.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file (JSON). Built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a field, e.g. `bed_capacity=81` or `services.psychiatric.capacity_units=72`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    /// Results CSV; a manifest is written beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    reps: Option<u32>,
    /// Replications run at once.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
}

enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_)
            | ExperimentError::UnknownParameter(_)
            | ExperimentError::EmptySweep => Failure::Config(e.into()),
            ExperimentError::Model(_) | ExperimentError::Pool(_) => Failure::Runtime(e.into()),
        }
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn load_config(args: &ConfigArgs, run: Option<&RunArgs>) -> Result<ScenarioConfig, Failure> {
    let base = match &args.config {
        Some(path) => ScenarioConfig::load(path)
            .map_err(|e| Failure::Config(anyhow!("{}: {e}", path.display())))?,
        None => ScenarioConfig::default(),
    };
    let mut config = base
        .with_overrides(&args.set)
        .map_err(|e| Failure::Config(e.into()))?;
    if let Some(run) = run {
        if let Some(seed) = run.seed {
            config.master_seed = seed;
        }
        if let Some(reps) = run.reps {
            config.replications = reps;
        }
    }
    config.validate().map_err(|e| Failure::Config(e.into()))?;
    Ok(config)
}

fn jobs(run: &RunArgs) -> Option<usize> {
    run.jobs.map(|j| j as usize)
}

fn describe(config: &ScenarioConfig) -> String {
    format!(
        "{} beds, {} replications, seed {}, config {}",
        config.bed_capacity,
        config.replications,
        config.master_seed,
        &config.digest()[..12]
    )
}

fn write_outputs(out: &Path, csv: &[u8], mut manifest: RunManifest) -> Result<(), Failure> {
    let manifest_file = manifest_path(out);
    manifest.finished_at = now();
    manifest.outputs = Outputs {
        results_csv: out.to_path_buf(),
        manifest: manifest_file.clone(),
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| Failure::Runtime(e.into()))?;
    output::write_all(&[(out, csv), (&manifest_file, &json)]).map_err(Failure::Runtime)?;
    eprintln!("wrote {} and {}", out.display(), manifest_file.display());
    Ok(())
}

fn new_manifest(
    command: &str,
    args: &ConfigArgs,
    config: &ScenarioConfig,
    started_at: String,
) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.into(),
        config_path: args.config.clone(),
        overrides: args.set.clone(),
        config_digest: config.digest(),
        master_seed: config.master_seed,
        replications: config.replications,
        sweep: None,
        started_at,
        finished_at: String::new(),
        outputs: Outputs {
            results_csv: PathBuf::new(),
            manifest: PathBuf::new(),
        },
    }
}

fn simulate(args: &ConfigArgs, run: &RunArgs) -> Result<(), Failure> {
    let config = load_config(args, Some(run))?;
    let started_at = now();
    let summary = run_scenario_with_jobs(&config, jobs(run))?;
    println!("{}\n", describe(&config));
    print!("{}", report::text_table(&summary));
    if let Some(out) = &run.out {
        let csv = report::to_csv(&report::CSV_HEADER, &report::scenario_rows(&summary))
            .map_err(|e| Failure::Runtime(e.into()))?;
        write_outputs(
            out,
            &csv,
            new_manifest("simulate", args, &config, started_at),
        )?;
    }
    Ok(())
}

fn sweep(args: &ConfigArgs, run: &RunArgs, param: &str, values: &str) -> Result<(), Failure> {
    let config = load_config(args, Some(run))?;
    let param: SweepParam = param.parse()?;
    let values = values::parse_values(values).map_err(|e| Failure::Config(e.into()))?;
    let started_at = now();
    let results = sweep_with_jobs(&config, &param, &values, jobs(run))?;

    println!("{}", describe(&config));
    let mut rows = Vec::new();
    for (value, summary) in &results {
        println!("\n== {param} = {value} ==");
        print!("{}", report::text_table(summary));
        for row in report::scenario_rows(summary) {
            rows.push(
                [param.to_string(), value.to_string()]
                    .into_iter()
                    .chain(row)
                    .collect(),
            );
        }
    }
    if let Some(out) = &run.out {
        let header: Vec<&str> = ["param", "value"]
            .into_iter()
            .chain(report::CSV_HEADER)
            .collect();
        let csv = report::to_csv(&header, &rows).map_err(|e| Failure::Runtime(e.into()))?;
        let mut manifest = new_manifest("sweep", args, &config, started_at);
        manifest.sweep = Some(SweepRecord {
            param: param.to_string(),
            values,
        });
        write_outputs(out, &csv, manifest)?;
    }
    Ok(())
}

fn validate(args: &ConfigArgs) -> Result<(), Failure> {
    let config = load_config(args, None)?;
    println!("{}", config.to_json_pretty());
    eprintln!("valid; digest {}", config.digest());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config, run } => simulate(config, run),
        Command::Sweep {
            config,
            run,
            param,
            values,
        } => sweep(config, run, param, values),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
