use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use qrc_harness::config::ExperimentConfig;
use qrc_harness::correlate::correlate_files;
use qrc_harness::emit::{emit, write_states_csv, write_timetrace_csv};
use qrc_harness::simulate::run_simulate;
use qrc_harness::sweep::{run_sweep, sample_ensemble, SweepKind};
use qrc_harness::timetrace::run_timetrace;
use qrc_harness::{resolve_workers, with_workers, HarnessError};

#[derive(Parser)]
#[command(name = "qrc", version, about = "Reservoir sweeps over driven dissipative qubit networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (overrides QRC_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Root seed (overrides `root_seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Leave `generated_at_unix` null so identical runs give identical files.
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write the state collect matrix of one reservoir on its training inputs.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        reservoir: usize,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Memory capacities over the ensemble and γ grid.
    StmcSweep(Common),
    /// Resonant absorption over the ensemble, γ grid and signal grid.
    AbsorptionSweep(Common),
    /// Both sweeps plus their Spearman correlation.
    FullSweep(Common),
    /// Readout of qubit 0 under the rest / input / rest protocol.
    Timetrace(Common),
    /// Recompute Spearman correlations from stmc.csv and absorption.csv in --out.
    Correlate(Common),
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        config.root_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn timestamp(common: &Common) -> Option<u64> {
    (!common.no_timestamp).then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()))
}

fn sweep(common: &Common, kind: SweepKind) -> Result<(), HarnessError> {
    let config = load(common)?;
    let workers = resolve_workers(common.workers)?;
    let result = with_workers(workers, || run_sweep(&config, kind))??;
    for e in &result.errors {
        eprintln!("cell {} reservoir {} gamma index {}: {}", e.kind, e.reservoir, e.gamma_index, e.message);
    }
    for path in emit(&result, kind, &config.output_dir, timestamp(common))? {
        println!("{}", path.display());
    }
    if kind == SweepKind::Full {
        for &d in &config.degrees {
            match result.correlate(d) {
                Ok(rho) => println!("spearman degree {d}: {rho:.6}"),
                Err(e) => println!("spearman degree {d}: undefined ({e})"),
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { common, reservoir, gamma } => {
            let config = load(&common)?;
            let table = run_simulate(&config, reservoir, gamma)?;
            std::fs::create_dir_all(&config.output_dir).map_err(|e| HarnessError::Io(config.output_dir.clone(), e))?;
            let path = config.output_dir.join("states.csv");
            write_states_csv(&table, &path)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::StmcSweep(common) => sweep(&common, SweepKind::Stmc),
        Command::AbsorptionSweep(common) => sweep(&common, SweepKind::Absorption),
        Command::FullSweep(common) => sweep(&common, SweepKind::Full),
        Command::Timetrace(common) => {
            let config = load(&common)?;
            let spec = sample_ensemble(&config)?.swap_remove(config.timetrace.reservoir);
            let points = run_timetrace(&spec, &config.timetrace, config.root_seed)?;
            std::fs::create_dir_all(&config.output_dir).map_err(|e| HarnessError::Io(config.output_dir.clone(), e))?;
            let path = config.output_dir.join("timetrace.csv");
            write_timetrace_csv(&points, &path)?;
            println!("{}", path.display());
            Ok(())
        }
        Command::Correlate(common) => {
            let config = load(&common)?;
            for (degree, rho) in correlate_files(&config.output_dir)? {
                match rho {
                    Ok(rho) => println!("spearman degree {degree}: {rho:.6}"),
                    Err(e) => println!("spearman degree {degree}: undefined ({e})"),
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
