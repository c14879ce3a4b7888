mod commands;
mod output;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use bitomo::counting::SystemDims;
use bitomo::tomography::FieldKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "bitomo",
    version,
    about = "Parameter counting, bilocal bases, tomography and ideality coefficients"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Seed for random states. Identical seeds give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Tolerance override such as `rank=1e-9`. Takes precedence over
    /// BITOMO_TOLERANCE_RANK.
    #[arg(long = "tol", global = true, value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// K and L for a composite system, optionally with the bilocal audit.
    Count {
        #[arg(long)]
        dims: SystemDims,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
        #[arg(long, default_value_t = 1)]
        alpha: u64,
        /// Compare the naive bilocal parameter count with the true K.
        #[arg(long)]
        audit: bool,
    },
    /// Fits (r, s) to a table of `N K` lines read from a file or stdin.
    Fit {
        /// Input file; stdin when omitted or `-`.
        file: Option<PathBuf>,
    },
    /// Builds an operator basis.
    Basis {
        #[arg(long)]
        dims: SystemDims,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Site pairs for y factors, e.g. `0-2,1-3`. Adjacent pairing if omitted.
        #[arg(long)]
        pairing: Option<String>,
        /// Runs the rank, idempotence and reality checks.
        #[arg(long)]
        check: bool,
        /// Writes the operators as JSON to this file.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Round-trip tomography of random or supplied states.
    Tomo {
        #[arg(long)]
        dims: SystemDims,
        #[arg(long, value_enum, default_value_t = FieldArg::Real)]
        field: FieldArg,
        #[arg(long, value_enum, default_value_t = FrameArg::BilocalProjector)]
        frame: FrameArg,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Reconstructs this state file instead of random states.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Writes the last reconstructed state to this file.
        #[arg(long)]
        write_state: Option<PathBuf>,
    },
    /// Two real states that local measurements cannot tell apart.
    Witness {
        #[arg(long, default_value = "2,2")]
        dims: SystemDims,
    },
    /// Exact ideality coefficients, optionally checked on a theory.
    Ideality {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        level: u8,
        /// Four components on which to evaluate the level-3 condition.
        #[arg(long)]
        verify_dims: Option<SystemDims>,
        #[arg(long, default_value_t = 2)]
        r: u32,
        #[arg(long, default_value_t = 1)]
        s: u32,
    },
    /// Reruns every headline number and reports pass or fail for each.
    Report {
        /// Random states per round-trip item.
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Complex,
    Sigma,
    Real,
    BilocalProjector,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Real => FieldKind::Real,
            FieldArg::Complex => FieldKind::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FrameArg {
    Complex,
    BilocalProjector,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    if name != "rank" {
        return Err(format!("unknown tolerance {name:?} (known: rank)"));
    }
    let value: f64 = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
    Ok((name.to_owned(), value))
}

fn run(cli: Cli) -> Result<Outcome, String> {
    for (_, value) in &cli.global.tolerances {
        bitomo::set_rank_tolerance(*value).map_err(|e| e.to_string())?;
    }
    let seed = cli.global.seed;
    match cli.command {
        Command::Count {
            dims,
            r,
            s,
            alpha,
            audit,
        } => commands::count(&dims, r, s, alpha, audit),
        Command::Fit { file } => commands::fit(file.as_deref()),
        Command::Basis {
            dims,
            kind,
            pairing,
            check,
            dump,
        } => commands::basis(&dims, kind, pairing.as_deref(), check, dump.as_deref()),
        Command::Tomo {
            dims,
            field,
            frame,
            trials,
            state,
            write_state,
        } => commands::tomo(commands::TomoArgs {
            dims,
            field: field.into(),
            frame,
            trials,
            seed,
            state,
            write_state,
        }),
        Command::Witness { dims } => commands::witness(&dims),
        Command::Ideality {
            level,
            verify_dims,
            r,
            s,
        } => commands::ideality(level as usize, verify_dims.as_ref(), r, s),
        Command::Report { trials } => Ok(report::run_report(seed, trials)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.global.format;
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.render(format));
            if outcome.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
