//! `b92`: curve data, sweeps, simulation and oracle checks for the modified
//! B92 protocol. Angles are in degrees; CSV goes to stdout unless `--output`
//! is given.

mod commands;
mod config;
mod error;
mod grid;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use b92_core::keyrate::EstimationMode;
use clap::{Parser, Subcommand, ValueEnum};

use commands::{Bits, Format, Schema};
use config::{LinkFile, SimFile};
use error::{input, CliResult};
use grid::Grid;

#[derive(Parser)]
#[command(
    name = "b92",
    version,
    about = "Eavesdropping bounds and key gain for the modified B92 protocol"
)]
struct Cli {
    /// Write results here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Print the output columns of the subcommand and exit.
    #[arg(long, global = true)]
    schema: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Collision,
    Shannon,
}

impl From<Mode> for EstimationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Collision => EstimationMode::Collision,
            Mode::Shannon => EstimationMode::Shannon,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Eve's maximum information gain against noise.
    Infogain {
        #[arg(long, default_value_t = 10.0)]
        alpha: f64,
        /// Alice's angle; defaults to --alpha.
        #[arg(long)]
        alpha_prime: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        transmission: f64,
        /// `start:stop:step` or a comma list.
        #[arg(long, default_value = "0:1:0.01")]
        eps_grid: Grid,
        /// Bound Eve's gain on correct or on flipped bits.
        #[arg(long, value_enum, default_value = "correct")]
        mode: Bits,
    },
    /// Full-information region as a 0/1 matrix (rows: alpha, columns: eps).
    Region {
        #[arg(long, default_value = "1:89:1")]
        alpha_grid: Grid,
        #[arg(long, default_value = "0:1:0.01")]
        eps_grid: Grid,
        #[arg(long = "T", default_value_t = 1.0)]
        transmission: f64,
    },
    /// Secret key gain at a fixed angle against noise.
    Keygain {
        #[arg(long, default_value_t = 12.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long = "T", default_value_t = 0.3)]
        transmission: f64,
        #[arg(long, default_value = "0:1:0.01")]
        eps_grid: Grid,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// Optimal protocol angle against noise.
    Optangle {
        #[arg(long = "T", default_value_t = 0.8)]
        transmission: f64,
        #[arg(long, default_value = "0:0.05:0.001")]
        eps_grid: Grid,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// Optimal angles at zero noise and at the largest tolerable noise, against transmission.
    Bpoint {
        #[arg(long, default_value = "0.1:1:0.05")]
        t_grid: Grid,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// B92 and BB84 key gain against fiber length.
    Distance {
        /// Named link preset.
        #[arg(long, default_value = "kth", conflicts_with = "link")]
        preset: String,
        /// Link preset file (TOML).
        #[arg(long)]
        link: Option<PathBuf>,
        #[arg(long, default_value_t = 11.0)]
        alpha: f64,
        #[arg(long, default_value = "0:60:1")]
        l_grid: Grid,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// Monte-Carlo run of the protocol under an attack pipeline.
    Simulate {
        /// Simulation config (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// Channel estimate and key gain from disclosed counts (CSV or JSON; `-` reads stdin).
    Estimate {
        #[arg(long)]
        counts: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "collision")]
        mode: Mode,
    },
    /// Closed-form minimum against brute-force search on random channels.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

impl Command {
    fn schema(&self) -> &'static Schema {
        match self {
            Command::Infogain { .. } => &commands::INFOGAIN,
            Command::Region { .. } => &commands::REGION,
            Command::Keygain { .. } => &commands::KEYGAIN,
            Command::Optangle { .. } => &commands::OPTANGLE,
            Command::Bpoint { .. } => &commands::BPOINT,
            Command::Distance { .. } => &commands::DISTANCE,
            Command::Simulate { .. } | Command::Estimate { .. } => &commands::COUNTS,
            Command::OracleCheck { .. } => &commands::ORACLE_CHECK,
        }
    }
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("B92_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| input(format!("B92_THREADS = {v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| input(e.to_string()))
}

fn read_source(path: &str) -> CliResult<String> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    Ok(text)
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    let mut out: Box<dyn Write> = match &cli.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let out = out.as_mut();
    if cli.schema {
        cli.command.schema().print(out)?;
        out.flush()?;
        return Ok(());
    }
    let result = match cli.command {
        Command::Infogain {
            alpha,
            alpha_prime,
            theta,
            transmission,
            eps_grid,
            mode,
        } => commands::infogain(
            &commands::InfoGainArgs {
                alpha,
                alpha_prime: alpha_prime.unwrap_or(alpha),
                theta,
                transmission,
                eps: eps_grid,
                bits: mode,
            },
            out,
        ),
        Command::Region {
            alpha_grid,
            eps_grid,
            transmission,
        } => commands::region(&alpha_grid, &eps_grid, transmission, out),
        Command::Keygain {
            alpha,
            theta,
            transmission,
            eps_grid,
            mode,
        } => commands::keygain(alpha, theta, transmission, &eps_grid, mode.into(), out),
        Command::Optangle {
            transmission,
            eps_grid,
            mode,
        } => commands::optangle(transmission, &eps_grid, mode.into(), out),
        Command::Bpoint { t_grid, mode } => commands::bpoint(&t_grid, mode.into(), out),
        Command::Distance {
            preset,
            link,
            alpha,
            l_grid,
            mode,
        } => {
            let link = match link {
                Some(p) => LinkFile::parse(&std::fs::read_to_string(p)?)?,
                None => LinkFile::preset(&preset)?,
            };
            commands::distance(&link, alpha, &l_grid, mode.into(), out)
        }
        Command::Simulate { config, format, mode } => {
            let path = config.ok_or_else(|| input("simulate needs --config"))?;
            commands::simulate(&SimFile::load(&path)?, format, mode.into(), out)
        }
        Command::Estimate { counts, alpha, mode } => {
            let path = counts.ok_or_else(|| input("estimate needs --counts"))?;
            let alpha = alpha.ok_or_else(|| input("estimate needs --alpha"))?;
            commands::estimate(&read_source(&path)?, alpha, mode.into(), out)
        }
        Command::OracleCheck {
            samples,
            resolution,
            seed,
        } => commands::oracle_check(samples, resolution, seed, out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("b92: {e}");
            e.exit_code()
        }
    }
}
