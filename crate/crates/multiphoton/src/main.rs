//! Command-line front end; all logic lives in the library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use multiphoton::error::Result;
use multiphoton::mesh::{clements_decompose, haar_random, sample_haar_mesh, MeshParams};
use multiphoton::pipeline::{
    run_characterize, run_compare, run_sample, run_simulate, sidecar_manifest, CharacterizeOptions,
    ExperimentConfig,
};

#[derive(Parser)]
#[command(
    name = "multiphoton",
    version,
    about = "Multi-photon interference toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a Haar-random unitary and write it as matrix JSON.
    Haar {
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dial Haar-random mesh parameters and write them as mesh JSON.
    MeshSample {
        #[arg(long)]
        modes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decompose a unitary matrix JSON into mesh parameters.
    Decompose {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute per-model outcome distributions from a config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Draw samples from a distribution CSV.
    Sample {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Config supplying defaults for --count and --seed.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compare sampled data against the configured models.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        bootstrap_seed: Option<u64>,
    },
    /// Reconstruct a transfer matrix from counts and visibilities.
    Characterize {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        visibilities: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        x_assumed: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Haar { modes, seed, out } => {
            let u = haar_random(modes, seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&u)? + "\n")?;
            sidecar_manifest(
                &out,
                "haar",
                &serde_json::json!({"modes": modes, "seed": seed}),
            )?;
        }
        Command::MeshSample { modes, seed, out } => {
            let params = sample_haar_mesh(modes, seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&params)? + "\n")?;
            sidecar_manifest(
                &out,
                "mesh-sample",
                &serde_json::json!({"modes": modes, "seed": seed}),
            )?;
        }
        Command::Decompose { matrix, out } => {
            let u: multiphoton::matrix::TransferMatrix =
                serde_json::from_str(&std::fs::read_to_string(&matrix)?)?;
            let params: MeshParams = clements_decompose(&u)?;
            std::fs::write(&out, serde_json::to_string_pretty(&params)? + "\n")?;
            sidecar_manifest(
                &out,
                "decompose",
                &serde_json::json!({"matrix": matrix.display().to_string()}),
            )?;
        }
        Command::Simulate { config, out_dir } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(dir) = out_dir {
                config.output_dir = dir;
            }
            for file in run_simulate(&config)?.files {
                println!("{}", file.display());
            }
        }
        Command::Sample {
            dist,
            count,
            seed,
            out,
            config,
        } => {
            let defaults = config.map(|p| ExperimentConfig::load(&p)).transpose()?;
            let count = count
                .or(defaults.as_ref().map(|c| c.samples))
                .unwrap_or(1000);
            let seed = seed
                .or(defaults.as_ref().map(|c| c.seeds.sampling))
                .unwrap_or(0);
            for file in run_sample(&dist, count, seed, &out)?.files {
                println!("{}", file.display());
            }
        }
        Command::Compare {
            config,
            samples,
            out_dir,
            bootstrap_seed,
        } => {
            let mut config = ExperimentConfig::load(&config)?;
            if let Some(dir) = out_dir {
                config.output_dir = dir;
            }
            if let Some(seed) = bootstrap_seed {
                config.seeds.bootstrap = seed;
            }
            for file in run_compare(&config, &samples)?.files {
                println!("{}", file.display());
            }
        }
        Command::Characterize {
            counts,
            visibilities,
            out_dir,
            x_assumed,
            restarts,
            seed,
        } => {
            let options = CharacterizeOptions {
                x_assumed,
                restarts,
                seed,
            };
            for file in run_characterize(&counts, &visibilities, &options, &out_dir)?.files {
                println!("{}", file.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = match &err {
                multiphoton::Error::InvalidConfig { field, message } => serde_json::json!({
                    "error": {"kind": err.kind(), "field": field, "message": message}
                }),
                _ => serde_json::json!({
                    "error": {"kind": err.kind(), "message": err.to_string()}
                }),
            };
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
