use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ctl_cli::commands::{self, OutputFormat};
use ctl_cli::report::AnalyzeOptions;
use ctl_cli::CliError;
use ctlvol::spectral::DEFAULT_CLUSTER_TOL;
use ctlvol::{Convention, RegionKind};

/// Reachable- and controllable-set volumes of single-input linear
/// discrete-time systems.
#[derive(Parser)]
#[command(name = "ctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic volume, oracle check, shape factors and warnings.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        /// Oracle horizon; 0 skips the oracle.
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = Region::Reach)]
        region: Region,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Shape factors only.
    Factors {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value_t = Region::Reach)]
        region: Region,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Boundary of the finite-horizon region of a planar system, as CSV.
    Region {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ConventionArg::Symmetric)]
        convention: ConventionArg,
        #[arg(long, value_enum, default_value_t = Region::Reach)]
        region: Region,
    },
    /// Oracle volume against horizon, next to the analytic limit.
    Converge {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        max_horizon: usize,
        #[arg(long)]
        step: usize,
        #[arg(long, value_enum, default_value_t = Region::Reach)]
        region: Region,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Perturbed-spectrum volumes approaching a single Jordan block.
    Limit {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        size: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        b_last: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Region {
    Reach,
    Control,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Symmetric,
    UnitCube,
}

impl From<Region> for RegionKind {
    fn from(r: Region) -> Self {
        match r {
            Region::Reach => RegionKind::Reach,
            Region::Control => RegionKind::Control,
        }
    }
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Table => OutputFormat::Table,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CTL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Parse(format!(
            "CTL_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Parse(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<String, CliError> {
    init_threads()?;
    match cli.command {
        Command::Analyze {
            system,
            horizon,
            region,
            format,
            cluster_tol,
        } => {
            let opts = AnalyzeOptions {
                horizon,
                region: region.into(),
                cluster_tol,
            };
            commands::analyze_cmd(&system, opts, format.into())
        }
        Command::Factors {
            system,
            region,
            format,
            cluster_tol,
        } => {
            let opts = AnalyzeOptions {
                horizon: 0,
                region: region.into(),
                cluster_tol,
            };
            commands::factors_cmd(&system, opts, format.into())
        }
        Command::Region {
            system,
            horizon,
            out,
            convention,
            region,
        } => {
            let convention = match convention {
                ConventionArg::Symmetric => Convention::Symmetric,
                ConventionArg::UnitCube => Convention::UnitCube,
            };
            commands::region_cmd(&system, horizon, region.into(), convention, &out)
        }
        Command::Converge {
            system,
            max_horizon,
            step,
            region,
            format,
            cluster_tol,
        } => commands::converge_cmd(
            &system,
            max_horizon,
            step,
            region.into(),
            cluster_tol,
            format.into(),
        ),
        Command::Limit {
            lambda,
            size,
            deltas,
            b_last,
            format,
        } => commands::limit_cmd(lambda, size, &deltas, b_last, format.into()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
