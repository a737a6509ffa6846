use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mprlab_cli::{figures, scenario, CliError, Config, Csv};

/// Throughput, backoff and multiuser-detection experiments for
/// multipacket-reception WLANs. Results are written as CSV.
#[derive(Parser)]
#[command(name = "mprlab", version)]
struct Cli {
    /// Scenario config file (TOML sections, see docs/config.md).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; a directory for `reproduce`. Defaults to stdout (or the
    /// current directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed for simulations and synthetic signal blocks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal throughput versus MPR capability M.
    Analyze,
    /// Backoff fixed point against simulation over an (N, M, r, W0) grid.
    FixedPoint,
    /// Optimal backoff factor per M and access mode.
    OptimizeR {
        /// Report BEB efficiency instead.
        #[arg(long)]
        efficiency: bool,
    },
    /// Repeated simulation runs of one configuration.
    Simulate,
    /// MPR versus SIMO throughput.
    Simo,
    /// Detector error and recovery rates on synthetic blocks.
    Phy,
    /// Regenerate the dataset behind a figure or table.
    Reproduce {
        /// fig1, fig2, fig3, fig5, ..., fig11 or table1.
        figure: String,
    },
}

fn write_csv(csv: &Csv, out: Option<&Path>) -> Result<(), CliError> {
    let text = csv.render();
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("MPRLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("MPRLAB_THREADS = {v}: requires an integer >= 1")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = match &cli.config {
        None => Config::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Config::parse(&text)?
        }
    };
    let seed = cli.seed;
    let out = cli.out.as_deref();
    let csv = match &cli.command {
        Command::Analyze => scenario::scaling(&cfg, &cfg.scaling, seed)?,
        Command::FixedPoint => scenario::fixed_point(&cfg, &cfg.fixed_point, seed)?,
        Command::OptimizeR { efficiency: false } => scenario::optimal_r(&cfg, &cfg.optimal_r, seed)?,
        Command::OptimizeR { efficiency: true } => {
            scenario::beb_efficiency(&cfg, &cfg.beb_efficiency, seed)?
        }
        Command::Simulate => scenario::simulate(&cfg, seed)?,
        Command::Simo => scenario::simo_compare(&cfg, seed)?,
        Command::Phy => scenario::phy_demo(&cfg, seed)?,
        Command::Reproduce { figure } => {
            let dir = out.unwrap_or(Path::new("."));
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                path: dir.display().to_string(),
                source,
            })?;
            for (stem, csv) in figures::reproduce(figure, &cfg, seed)? {
                let path = dir.join(format!("{stem}.csv"));
                write_csv(&csv, Some(&path))?;
                println!("{}", path.display());
            }
            return Ok(());
        }
    };
    write_csv(&csv, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mprlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
