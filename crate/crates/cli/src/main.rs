use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use splitorder::commands::{self, CliError, Common, Mode, Outcome, EXIT_INPUT};
use splitorder_core::scheme::Interpretation;
use splitorder_core::words::Weight;

#[derive(Parser)]
#[command(name = "splitorder", version, about = "Order conditions of splitting integrators for SDEs")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include a timestamp in JSON reports (makes output non-reproducible).
    #[arg(long, global = true)]
    timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Strong,
    Weak,
    Both,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Strong => Mode::Strong,
            ModeArg::Weak => Mode::Weak,
            ModeArg::Both => Mode::Both,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    #[value(alias = "strat")]
    Stratonovich,
    Ito,
}

impl From<InterpArg> for Interpretation {
    fn from(i: InterpArg) -> Interpretation {
        match i {
            InterpArg::Stratonovich => Interpretation::Stratonovich,
            InterpArg::Ito => Interpretation::Ito,
        }
    }
}

/// `3/2`, `1` or `1.5`.
fn parse_weight(s: &str) -> Result<Weight, String> {
    if let Ok(x) = s.parse::<f64>() {
        let halves = 2.0 * x;
        if x >= 0.0 && halves.fract() == 0.0 && halves <= f64::from(u32::MAX) {
            return Ok(Weight(halves as u32));
        }
    }
    Weight::parse(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Strong and weak order of a scheme.
    Analyze {
        /// Scheme file, `builtin:NAME` or a catalog name.
        scheme: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Largest weight checked (default 3).
        #[arg(long, value_parser = parse_weight)]
        max_weight: Option<Weight>,
        /// Override the interpretation declared by the scheme.
        #[arg(long, value_enum)]
        interpretation: Option<InterpArg>,
    },
    /// List order-condition words of an alphabet such as `a,b|A`.
    Conditions {
        #[arg(long)]
        alphabet: String,
        /// Weight cap.
        #[arg(long, value_parser = parse_weight)]
        order: Option<Weight>,
        /// Length cap (all words of at most this many letters).
        #[arg(long)]
        max_length: Option<usize>,
        /// Keep Lyndon words only.
        #[arg(long)]
        lyndon: bool,
        #[arg(long, value_enum, default_value_t = InterpArg::Stratonovich)]
        interpretation: InterpArg,
    },
    /// Local error expansion of a scheme.
    LocalError {
        scheme: String,
        #[arg(long, value_parser = parse_weight)]
        max_weight: Option<Weight>,
        #[arg(long, value_enum)]
        interpretation: Option<InterpArg>,
        /// Also print the series of each stage.
        #[arg(long)]
        stages: bool,
    },
    /// Convert an Ito system to the equivalent Stratonovich system.
    Convert {
        /// System file (alphabet and interpretation) or a catalog scheme.
        system: String,
        /// Declare the noise additive (overrides the file).
        #[arg(long)]
        additive: Option<bool>,
    },
    /// Monte Carlo check of predicted orders.
    VerifyMc {
        scheme: String,
        /// `builtin:NAME`, a system name, or `witness:WORD`.
        #[arg(long)]
        system: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long, default_value_t = 10_000)]
        paths: usize,
        /// Comma separated step sizes, e.g. `T/8,T/16,T/32,T/64`.
        #[arg(long)]
        h_list: Option<String>,
        #[arg(long, env = "SPLITORDER_SEED", default_value_t = 1)]
        seed: u64,
        /// Weak observable, `xK` or `xK^2` (default: the system's own).
        #[arg(long)]
        observable: Option<String>,
        #[arg(long, value_enum)]
        interpretation: Option<InterpArg>,
        /// Also check canonical coefficients of plain words of weight ≤ 2.
        #[arg(long)]
        coefficients: bool,
        #[arg(long, default_value_t = 2000)]
        coefficient_paths: usize,
    },
    /// Run the internal property suite.
    Selfcheck {
        #[arg(long, value_parser = parse_weight, default_value = "2")]
        max_weight: Weight,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let common = Common { timestamp: cli.timestamp };
    match cli.command {
        Command::Analyze { scheme, mode, max_weight, interpretation } => commands::analyze(
            &commands::AnalyzeOptions { scheme, mode: mode.into(), max_weight, interpretation: interpretation.map(Into::into) },
            &common,
        ),
        Command::Conditions { alphabet, order, max_length, lyndon, interpretation } => commands::conditions(
            &commands::ConditionsOptions { alphabet, order, max_length, lyndon, interpretation: interpretation.into() },
            &common,
        ),
        Command::LocalError { scheme, max_weight, interpretation, stages } => commands::local_error(
            &commands::LocalErrorOptions { scheme, max_weight, interpretation: interpretation.map(Into::into), stages },
            &common,
        ),
        Command::Convert { system, additive } => {
            commands::convert(&commands::ConvertOptions { system, additive }, &common)
        }
        Command::VerifyMc {
            scheme,
            system,
            mode,
            paths,
            h_list,
            seed,
            observable,
            interpretation,
            coefficients,
            coefficient_paths,
        } => commands::verify_mc(
            &commands::VerifyMcOptions {
                scheme,
                system,
                mode: mode.into(),
                paths,
                h_list,
                seed,
                observable,
                interpretation: interpretation.map(Into::into),
                coefficients,
                coefficient_paths,
            },
            &common,
        ),
        Command::Selfcheck { max_weight, inject_fault } => {
            commands::selfcheck(max_weight, inject_fault.as_deref(), &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    let format = cli.format;
    match run(cli) {
        Ok(out) => {
            let body = match format {
                Format::Text => out.text,
                Format::Json => out.json,
            };
            let _ = std::io::stdout().write_all(body.as_bytes());
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
