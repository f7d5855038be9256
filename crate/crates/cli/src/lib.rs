//! Command-line front end: argument parsing, config resolution and output.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
pub mod error;
pub mod output;
pub mod params;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

pub use commands::dispatch;
pub use error::{CliError, CliResult};
pub use output::{Formats, Outcome, Table};
pub use params::Params;

/// Exit status when every check holds (or a requested violation was found).
pub const EXIT_PASS: i32 = 0;
/// Exit status when a mathematical contract is violated.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for configuration or numerical failures.
pub const EXIT_ERROR: i32 = 2;

fn subcommand(name: &'static str) -> Command {
    let about = match name {
        "alpha-curve" => "Tabulate the critical exponent α*(ε) and the critical cone angle",
        "psd-scan" => "Scan the smallest eigenvalue of the weight's spatial Hessian",
        "a3-scan" => "Scan the sign of the lower-order coefficient A₃",
        "check-carleman" => "Check the weighted Carleman inequality on a bump suite",
        "check-identity" => "Check the conjugated-operator energy identity",
        "counterexample" => "Check the explicit backward solution and its sector bounds",
        "crosscheck" => "Compare a finite-difference solve against the explicit solution",
        "decay" => "Fit the decay rate of a heat solution with boundary data in a ball",
        "control" => "Bounded boundary control of the heat equation in sectors",
        _ => "Check monotonicity of the auxiliary function g for a prescribed a",
    };
    let mut cmd = Command::new(name)
        .about(about)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("key=value or JSON config file"),
        )
        .arg(Arg::new("out").long("out").value_name("DIR").help(format!(
            "output directory (default ${} or {})",
            output::OUT_ENV,
            output::DEFAULT_OUT
        )))
        .arg(
            Arg::new("format")
                .long("format")
                .value_name("LIST")
                .default_value("json,csv")
                .help("comma-separated output formats"),
        )
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("N")
                .help("random seed (default 7)"),
        )
        .arg(
            Arg::new("expect-violation")
                .long("expect-violation")
                .action(ArgAction::SetTrue)
                .help("exit 0 when the contract is violated and 1 when it holds"),
        );
    for d in params::table(name).expect("listed command") {
        let arg = Arg::new(d.name).long(d.name).help(d.help);
        let arg = match d.kind {
            params::Kind::Bool => arg.num_args(0..=1).default_missing_value("true").value_name("BOOL"),
            params::Kind::FloatList => arg.value_name("LIST"),
            params::Kind::Choice(options) => arg
                .value_parser(clap::builder::PossibleValuesParser::new(options.iter().copied()))
                .value_name("CHOICE"),
            _ => arg.value_name("VALUE"),
        };
        cmd = cmd.arg(arg.help(format!("{} [default: {}]", d.help, d.default)));
    }
    cmd
}

pub fn cli() -> Command {
    params::COMMANDS.iter().fold(
        Command::new("conelab")
            .version(env!("CARGO_PKG_VERSION"))
            .about("Numerical checks for backward uniqueness of the heat equation in cones")
            .subcommand_required(true),
        |c, name| c.subcommand(subcommand(name)),
    )
}

/// Everything needed to run one subcommand.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub params: Params,
    pub out: PathBuf,
    pub formats: Formats,
    pub expect_violation: bool,
}

fn resolve(name: &str, m: &ArgMatches) -> CliResult<Invocation> {
    let mut params = Params::defaults(name)?;
    if let Some(path) = m.get_one::<String>("config") {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
        params.apply_config(&text)?;
    }
    for d in params::table(name).expect("listed command") {
        if let Some(v) = m.get_one::<String>(d.name) {
            params.set_text(d.name, v)?;
        }
    }
    if let Some(s) = m.get_one::<String>("seed") {
        params.set_text("seed", s)?;
    }
    let formats = Formats::parse(m.get_one::<String>("format").expect("defaulted")).map_err(CliError::Usage)?;
    Ok(Invocation {
        params,
        out: output::resolve_out(m.get_one::<String>("out").map(String::as_str)),
        formats,
        expect_violation: m.get_flag("expect-violation"),
    })
}

/// Parses arguments into an [`Invocation`]; `Ok(None)` after printing help or
/// the version.
pub fn parse<I, T>(args: I) -> CliResult<Option<Invocation>>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    Ok(None)
                }
                _ => Err(CliError::Usage(e.render().to_string())),
            };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    resolve(name, sub).map(Some)
}

/// Runs the subcommand, writes its artifacts and returns the exit status.
pub fn execute(inv: &Invocation) -> CliResult<(Outcome, PathBuf, i32)> {
    let outcome = dispatch(&inv.params)?;
    let code = if outcome.pass != inv.expect_violation {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    };
    let dir = output::write_all(&inv.out, &inv.params, inv.formats, inv.expect_violation, &outcome, code)?;
    Ok((outcome, dir, code))
}

/// Full command-line entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = match parse(args) {
        Ok(Some(inv)) => inv,
        Ok(None) => return EXIT_PASS,
        Err(CliError::Usage(msg)) => {
            eprint!("{msg}");
            if !msg.ends_with('\n') {
                eprintln!();
            }
            return EXIT_ERROR;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    match execute(&inv) {
        Ok((outcome, dir, code)) => {
            let verdict = if outcome.pass { "pass" } else { "violation" };
            println!("{}: {verdict} (exit {code}) -> {}", inv.params.command, dir.display());
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
