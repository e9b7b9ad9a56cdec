//! Scenario-driven front end for `triality-core`: JSON scenario files,
//! dotted-path overrides, and JSON/CSV reports.

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod sweep;

pub use config::{resolve, Command, Overrides, ScenarioConfig};
pub use error::CliError;
pub use run::{run, RunOutput, VERSION};

/// Resolves, runs and writes the outputs of one invocation.
///
/// Without an output path the JSON report goes to standard output.
pub fn execute(command: Command, config_path: Option<&std::path::Path>, ov: &Overrides) -> Result<(), CliError> {
    let config = resolve(command, config_path, ov)?;
    let origin = config_path.map_or_else(|| "<command line>".to_string(), |p| p.display().to_string());
    let out = run(&config, &origin)?;
    match &config.output.json {
        Some(p) => output::write_atomic(p, &out.report_json())?,
        None => print!("{}", out.report_json()),
    }
    if let (Some(p), Some(csv)) = (&config.output.csv, &out.csv) {
        output::write_atomic(p, csv)?;
    }
    Ok(())
}
