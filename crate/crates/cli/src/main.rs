use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use fraclap_cli::{run, Command, ConfigLayer, RunConfig, SGrid};

/// Spectral eigenvalue sweeps, logistic branches and oracle comparisons for
/// the Neumann fractional Laplacian on an interval. Output is CSV.
#[derive(Debug, Parser)]
#[command(name = "fraclap", version)]
struct Cli {
    /// eigen | sweep | branch | compare | extend (may come from --config)
    command: Option<Command>,

    /// Interval length(s), comma separated.
    #[arg(long = "L", value_delimiter = ',')]
    lengths: Option<Vec<f64>>,

    /// Fractional power in (0, 1].
    #[arg(long)]
    s: Option<f64>,

    /// Grid of powers as min:max:step.
    #[arg(long = "s-grid")]
    s_grid: Option<SGrid>,

    /// m1 | m2 | const:<c> | series:<c>;<j>=<a>,... (repeatable)
    #[arg(long = "weight")]
    weights: Option<Vec<String>>,

    /// Number of cosine modes.
    #[arg(long = "K")]
    k: Option<usize>,

    /// Upper end of the logistic branch.
    #[arg(long = "lambda-max")]
    lambda_max: Option<f64>,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long = "oracle-nx")]
    oracle_nx: Option<usize>,

    #[arg(long = "oracle-ny")]
    oracle_ny: Option<usize>,

    /// Cylinder height; defaults to 8/sqrt(mu_1).
    #[arg(long = "oracle-Y")]
    oracle_y: Option<f64>,

    /// key=value file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Cli {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            command: self.command,
            lengths: self.lengths.clone(),
            s: self.s,
            s_grid: self.s_grid,
            weights: self.weights.clone(),
            k: self.k,
            lambda_max: self.lambda_max,
            out: self.out.clone(),
            oracle_nx: self.oracle_nx,
            oracle_ny: self.oracle_ny,
            oracle_y: self.oracle_y,
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("fraclap: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let file = match &cli.config {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    let config = RunConfig::resolve(file.overlay(cli.layer()))?;
    let table = run(&config);
    match &config.out {
        Some(path) => {
            let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write(BufWriter::new(f))?;
        }
        None => table.write(io::stdout().lock())?,
    }
    let errors = table.error_count();
    if errors > 0 {
        eprintln!("fraclap: {errors} row(s) failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}
