use std::io::Write;

use clap::Parser;
use opslab::cli::Cli;

fn main() {
    let cli = Cli::parse();
    let report = cli.run();
    let text = if cli.json { format!("{}\n", report.to_json()) } else { report.to_human() };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    std::process::exit(report.exit_code);
}
