use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use driftlab::cli::{exit_code, report_exit_code, run, Command, RunOptions, Source};

/// Hypothesis checks, truncated boundary-value solves and uniqueness versus
/// multiplicity experiments for radial drift-diffusion equations.
#[derive(Parser, Debug)]
#[command(name = "driftlab", version)]
#[command(group(ArgGroup::new("input").required(true).args(["config", "preset"])))]
struct Args {
    /// Scenario (or, for `reproduce`, reproduction) JSON document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in document instead of `--config`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    command: Command,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the number of solver grid nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Fail on an inconclusive classification.
    #[arg(long)]
    strict: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let source = match (args.config, args.preset) {
        (Some(p), _) => Source::Path(p),
        (None, Some(n)) => Source::Preset(n),
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let options = RunOptions {
        source,
        command: args.command,
        out: args.out,
        nodes: args.nodes,
        strict: args.strict,
    };
    match run(&options) {
        Ok(report) => {
            for f in &report.failures {
                eprintln!("FAIL {f}");
            }
            println!(
                "{} {} on {}: {}",
                if report.pass { "ok" } else { "failed" },
                options.command.name(),
                report.scenario,
                options.out.display()
            );
            ExitCode::from(report_exit_code(&report) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
