//! `magictrap` command-line front end.

pub mod commands;
pub mod config;
pub mod emit;
pub mod units;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use commands::Cli;
use config::Config;
use emit::Format;

/// Failure classes, mapped to exit codes by [`CliError::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags, config, units or physically invalid input.
    Invalid(String),
    /// A solver or root refinement failed on valid input.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<magictrap::atomdata::AtomDataError> for CliError {
    fn from(e: magictrap::atomdata::AtomDataError) -> Self {
        CliError::Invalid(format!("atomdata: {e}"))
    }
}

impl From<magictrap::polarizability::PolarizabilityError> for CliError {
    fn from(e: magictrap::polarizability::PolarizabilityError) -> Self {
        use magictrap::polarizability::PolarizabilityError as E;
        match e {
            E::Root(_) => CliError::Numerical(format!("polarizability: {e}")),
            _ => CliError::Invalid(format!("polarizability: {e}")),
        }
    }
}

impl From<magictrap::fieldtrap::FieldTrapError> for CliError {
    fn from(e: magictrap::fieldtrap::FieldTrapError) -> Self {
        CliError::Invalid(format!("fieldtrap: {e}"))
    }
}

impl From<magictrap::clockspec::ClockSpecError> for CliError {
    fn from(e: magictrap::clockspec::ClockSpecError) -> Self {
        CliError::Invalid(format!("clockspec: {e}"))
    }
}

impl From<magictrap::cavityqed::CavityError> for CliError {
    fn from(e: magictrap::cavityqed::CavityError) -> Self {
        use magictrap::cavityqed::CavityError as E;
        match e {
            E::Singular { .. } | E::UndefinedG2 => CliError::Numerical(format!("cavityqed: {e}")),
            _ => CliError::Invalid(format!("cavityqed: {e}")),
        }
    }
}

/// Result of one subcommand: the data table plus a short human summary.
#[derive(Debug, Clone)]
pub struct Output {
    pub table: emit::Table,
    pub summary: Vec<String>,
    pub default_format: Format,
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// process exit code: 0 success, 1 invalid input, 2 numerical failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let verbose = cli.verbose || cfg.top_bool("verbose")?.unwrap_or(false);
    let out = match cli.jobs {
        Some(0) => return Err(CliError::Invalid("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(&cli.command, &cfg))?,
        None => commands::dispatch(&cli.command, &cfg)?,
    };

    let format = match (cli.format, cfg.top_string("format")?) {
        (Some(f), _) => f,
        (None, Some(name)) => match name.to_ascii_lowercase().as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::Invalid(format!("config format {other:?}: expected csv or json"))),
        },
        (None, None) => out.default_format,
    };
    if verbose {
        for (k, v) in &out.table.meta {
            eprintln!("{k} = {v}");
        }
    }
    let data = emit::render(&out.table, format);
    let output = cli.output.clone().or(cfg.top_string("output")?.map(Into::into));
    match output {
        Some(path) => {
            emit::write_outputs(&path, &data, argv, cli.jobs)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut stdout = std::io::stdout().lock();
            for line in &out.summary {
                let _ = writeln!(stdout, "{line}");
            }
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
        None => {
            std::io::stdout().write_all(data.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
            for line in &out.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}
