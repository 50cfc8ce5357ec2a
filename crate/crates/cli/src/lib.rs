//! Shared plumbing of the `node`, `deal` and `bench` binaries.

use std::process::ExitCode;

/// Log filter variable, e.g. `TCS_LOG=debug` or `TCS_LOG=tcs_service=trace`.
pub const ENV_LOG: &str = "TCS_LOG";

pub fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env(ENV_LOG)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();
}

/// Prints the error and maps it to a failing exit status.
pub fn finish<E: std::fmt::Display>(r: Result<(), E>) -> ExitCode {
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
