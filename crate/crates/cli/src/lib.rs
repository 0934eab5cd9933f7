//! Command-line driver for the aggtree simulator: loads or generates a
//! field, injects failures, runs one or many trials and writes a JSON
//! report, a CSV summary and message traces.

pub mod config;
pub mod report;
pub mod run;

pub use config::{resolve, ConfigError, FaultSpec, GraphSource, Mode, Overrides, RunConfig};
pub use report::{render_trace, write_outputs, RunReport, TrialReport, CSV_HEADER};
pub use run::{build_trials, execute, CliError, Outcome};

/// Reads an optional config file and merges the flags over it.
pub fn load_config(path: Option<&std::path::Path>, flags: Overrides) -> Result<RunConfig, CliError> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(run::io_err(p))?;
            Some(config::parse_config_file(&text)?)
        }
        None => None,
    };
    Ok(resolve(file, flags)?)
}

/// Full pipeline behind the binary; returns the process exit code.
pub fn main_with(path: Option<&std::path::Path>, flags: Overrides) -> Result<(Outcome, i32), CliError> {
    let cfg = load_config(path, flags)?;
    let outcome = execute(&cfg)?;
    write_outputs(&outcome)?;
    let code = outcome.exit_code();
    Ok((outcome, code))
}
