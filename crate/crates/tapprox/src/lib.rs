//! File formats, synthetic data and subcommands behind the `tapprox` binary.

pub mod commands;
mod error;
pub mod gen;
pub mod io;
pub mod report;

pub use error::{CliError, CliResult};

/// Parses `a,b,c` into a triple of positive integers.
pub fn parse_triple(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated integers, got `{s}`"));
    }
    let mut out = [0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.parse().map_err(|_| format!("invalid integer `{part}` in `{s}`"))?;
    }
    Ok(out)
}
