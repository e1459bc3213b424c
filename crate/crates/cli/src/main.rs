//! `einsub`: build and verify Einstein warped-product submanifolds.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ParamFlags, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "einsub",
    version,
    about = "Construct and verify Einstein warped-product submanifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a warping function; writes warp.csv and warp.json.
    Warp {
        #[command(flatten)]
        params: ParamFlags,
        /// Compare against sqrt(t^2 - c) (n = 5, eps = 1, rho = 0).
        #[arg(long)]
        compare_closed_form: bool,
    },
    /// Finite-difference Einstein checks on a chart or a pullback metric.
    VerifyIntrinsic {
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Build an immersion; writes its descriptor and a mesh slice.
    Build {
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Shape operators, umbilical structure, Gauss, Codazzi and Dupin checks.
    VerifyExtrinsic {
        #[command(flatten)]
        params: ParamFlags,
    },
    /// Normal form of a pair of diagonal shape operators.
    ClassifyAppendix {
        #[command(flatten)]
        params: ParamFlags,
        /// Diagonal of A_1, e.g. "2,1,1,1".
        #[arg(long, allow_hyphen_values = true)]
        a1: Option<String>,
        /// Diagonal of A_2, e.g. "0,1,1,1".
        #[arg(long, allow_hyphen_values = true)]
        a2: Option<String>,
    },
    /// Every suite; writes report.json.
    Report {
        #[command(flatten)]
        params: ParamFlags,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_COMPUTE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Warp {
            params,
            compare_closed_form,
        } => commands::warp(&Settings::resolve(&params)?, compare_closed_form),
        Command::VerifyIntrinsic { params } => commands::verify_intrinsic(&Settings::resolve(&params)?),
        Command::Build { params } => commands::build(&Settings::resolve(&params)?),
        Command::VerifyExtrinsic { params } => commands::verify_extrinsic(&Settings::resolve(&params)?),
        Command::ClassifyAppendix { params, a1, a2 } => {
            commands::classify_appendix(&Settings::resolve(&params)?, a1.as_deref(), a2.as_deref())
        }
        Command::Report { params } => commands::report(&Settings::resolve(&params)?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<einsub::Error>() {
        Some(
            einsub::Error::Config(_)
            | einsub::Error::BadDimension(_)
            | einsub::Error::BadRange(_)
            | einsub::Error::WrongFamily(_)
            | einsub::Error::WrongRegime
            | einsub::Error::OutOfDomain { .. }
            | einsub::Error::Inconsistent { .. },
        ) => EXIT_CONFIG,
        _ => EXIT_COMPUTE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
