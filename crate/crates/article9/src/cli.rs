//! The `a9r` command line.
//!
//! Subcommands: `check`, `report`, `scope`, `fine`, `simulate`,
//! `grammar`. Reports go to standard output, diagnostics to standard
//! error. Exit codes: 0 conformant with no findings, 1 findings or
//! process ABORT, 2 schema errors (E1xx), 3 parse errors (E0xx), 4 usage
//! errors. `--date` is mandatory where a clock would otherwise leak in;
//! the engine never reads one.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};

use crate::conformity::{render_report, run_rules, ProcessSummary, ReportFormat};
use crate::diag::Diagnostic;
use crate::enforcement::fine_exposure;
use crate::model::{lower, Regime, Register};
use crate::risk::{run_process, run_process_assuming};
use crate::scope::{assess_scope, ScopeQuery};
use crate::syntax::parse_source;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FINDINGS: u8 = 1;
pub const EXIT_SCHEMA: u8 = 2;
pub const EXIT_PARSE: u8 = 3;
pub const EXIT_USAGE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "a9r",
    about = "Article 9 conformity engine for .a9r risk registers",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the conformity rule suite and print a human-readable summary
    Check {
        file: PathBuf,
        /// Check date (YYYY-MM-DD); pins the run in time
        #[arg(long, value_parser = parse_date)]
        date: NaiveDate,
        /// Overrides policy.entry_into_force
        #[arg(long = "entry-into-force", value_parser = parse_date)]
        entry_into_force: Option<NaiveDate>,
        /// Overrides policy.regime
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Emit the conformity report in text or machine (JSON) format
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        #[arg(long, value_parser = parse_date)]
        date: NaiveDate,
        #[arg(long = "entry-into-force", value_parser = parse_date)]
        entry_into_force: Option<NaiveDate>,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Decide whether Article 9 applies (material/personal/regional/temporal)
    Scope {
        file: PathBuf,
        #[arg(long, value_parser = parse_date)]
        date: NaiveDate,
        #[arg(long = "entry-into-force", value_parser = parse_date)]
        entry_into_force: Option<NaiveDate>,
        #[arg(long, value_enum)]
        regime: Option<RegimeArg>,
    },
    /// Compute maximum administrative-fine exposure
    Fine {
        /// Total worldwide annual turnover in whole EUR
        #[arg(long)]
        turnover: u64,
        /// The offender is a company (enables the 4% branch)
        #[arg(long)]
        company: bool,
        /// The offender is a small or medium-sized enterprise
        #[arg(long)]
        sme: bool,
        #[arg(long, value_enum, default_value_t = RegimeArg::EcDraft)]
        regime: RegimeArg,
    },
    /// What-if: re-run the process with planned measures assumed adopted
    Simulate {
        file: PathBuf,
        /// Comma-separated measure ids to treat as adopted at iteration 1
        #[arg(long = "assume-adopted", value_delimiter = ',')]
        assume_adopted: Vec<String>,
        #[arg(long, value_parser = parse_date)]
        date: Option<NaiveDate>,
    },
    /// Print the register grammar and schema key catalog
    Grammar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RegimeArg {
    #[value(name = "ec-draft")]
    EcDraft,
    Council,
}

impl From<RegimeArg> for Regime {
    fn from(value: RegimeArg) -> Self {
        match value {
            RegimeArg::EcDraft => Regime::EcDraft,
            RegimeArg::Council => Regime::Council,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| format!("invalid date `{s}`; expected YYYY-MM-DD"))
}

/// Parses arguments and runs one command, returning the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };

    let result = match cli.command {
        Command::Check {
            file,
            date,
            entry_into_force,
            regime,
        } => cmd_check(&file, date, entry_into_force, regime.map(Into::into)),
        Command::Report {
            file,
            format,
            date,
            entry_into_force,
            regime,
        } => cmd_report(&file, format, date, entry_into_force, regime.map(Into::into)),
        Command::Scope {
            file,
            date,
            entry_into_force,
            regime,
        } => cmd_scope(&file, date, entry_into_force, regime.map(Into::into)),
        Command::Fine {
            turnover,
            company,
            sme,
            regime,
        } => cmd_fine(turnover, company, sme, regime.into()),
        Command::Simulate {
            file,
            assume_adopted,
            date,
        } => cmd_simulate(&file, &assume_adopted, date),
        Command::Grammar => cmd_grammar(),
    };
    result.unwrap_or_else(|code| code)
}

fn load_register(path: &Path) -> Result<Register, u8> {
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot read {}: {e}", path.display());
            return Err(EXIT_USAGE);
        }
    };
    let tree = match parse_source(&source) {
        Ok(t) => t,
        Err(diags) => {
            print_diagnostics(path, &diags);
            return Err(EXIT_PARSE);
        }
    };
    match lower(&tree) {
        Ok(register) => Ok(register),
        Err(diags) => {
            print_diagnostics(path, &diags);
            Err(EXIT_SCHEMA)
        }
    }
}

fn print_diagnostics(path: &Path, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{}: {d}", path.display());
    }
}

fn scope_query(
    register: &Register,
    check_date: NaiveDate,
    entry_flag: Option<NaiveDate>,
    regime_flag: Option<Regime>,
) -> Result<ScopeQuery, u8> {
    let entry_into_force = match entry_flag.or(register.policy.entry_into_force) {
        Some(d) => d,
        None => {
            eprintln!(
                "entry into force date required: set policy.entry_into_force in the register or pass --entry-into-force"
            );
            return Err(EXIT_USAGE);
        }
    };
    Ok(ScopeQuery {
        check_date,
        entry_into_force,
        regime: regime_flag.unwrap_or(register.policy.regime),
    })
}

fn cmd_check(
    file: &Path,
    date: NaiveDate,
    entry_flag: Option<NaiveDate>,
    regime_flag: Option<Regime>,
) -> Result<u8, u8> {
    let register = load_register(file)?;
    let query = scope_query(&register, date, entry_flag, regime_flag)?;
    let trace = run_process(&register);
    let scope = assess_scope(&register, &query);
    let report = run_rules(&register, &trace, scope, date);
    print!("{}", render_report(&report, ReportFormat::Text));
    if report.findings.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FINDINGS)
    }
}

fn cmd_report(
    file: &Path,
    format: FormatArg,
    date: NaiveDate,
    entry_flag: Option<NaiveDate>,
    regime_flag: Option<Regime>,
) -> Result<u8, u8> {
    let register = load_register(file)?;
    let query = scope_query(&register, date, entry_flag, regime_flag)?;
    let trace = run_process(&register);
    let scope = assess_scope(&register, &query);
    let report = run_rules(&register, &trace, scope, date);
    let fmt = match format {
        FormatArg::Text => ReportFormat::Text,
        FormatArg::Json => ReportFormat::Machine,
    };
    print!("{}", render_report(&report, fmt));
    if report.findings.is_empty() {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FINDINGS)
    }
}

fn cmd_scope(
    file: &Path,
    date: NaiveDate,
    entry_flag: Option<NaiveDate>,
    regime_flag: Option<Regime>,
) -> Result<u8, u8> {
    let register = load_register(file)?;
    let query = scope_query(&register, date, entry_flag, regime_flag)?;
    let decision = assess_scope(&register, &query);
    println!(
        "{}",
        if decision.applies {
            "APPLIES"
        } else {
            "DOES NOT APPLY"
        }
    );
    for (name, prong) in decision.prongs() {
        println!(
            "  {name}: {} - {}",
            if prong.holds { "holds" } else { "fails" },
            prong.reason
        );
    }
    Ok(EXIT_OK)
}

fn cmd_fine(turnover: u64, company: bool, sme: bool, regime: Regime) -> Result<u8, u8> {
    let exposure = fine_exposure(turnover, company, sme, regime);
    println!("maximum exposure: {exposure}");
    Ok(EXIT_OK)
}

fn cmd_simulate(
    file: &Path,
    assume_adopted: &[String],
    _date: Option<NaiveDate>,
) -> Result<u8, u8> {
    let register = load_register(file)?;
    let after = match run_process_assuming(&register, assume_adopted) {
        Ok(trace) => trace,
        Err(e) => {
            eprintln!("{e}");
            return Err(EXIT_USAGE);
        }
    };
    if assume_adopted.is_empty() {
        // no assumption: identical to the plain process summary of `check`
        let summary = ProcessSummary::from_trace(&after);
        print!("{}", crate::conformity::process_summary_text(&summary));
    } else {
        let before = run_process(&register);
        println!("assuming adopted: {}", assume_adopted.join(", "));
        println!("--- before ---");
        print!(
            "{}",
            crate::conformity::process_summary_text(&ProcessSummary::from_trace(&before))
        );
        println!("--- after ---");
        print!(
            "{}",
            crate::conformity::process_summary_text(&ProcessSummary::from_trace(&after))
        );
    }
    Ok(EXIT_OK)
}

fn cmd_grammar() -> Result<u8, u8> {
    print!("{}", include_str!("../docs/schema.md"));
    Ok(EXIT_OK)
}
