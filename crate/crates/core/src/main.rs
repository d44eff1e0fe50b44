use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use trdiff::cli_io::{apply_long_running, parse_config, run, summary};
use trdiff::Error;

/// Three-temperature radiation diffusion solver.
#[derive(Parser, Debug)]
#[command(name = "trdiff", version)]
struct Args {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 if any implicit step fails to converge.
    #[arg(long)]
    strict: bool,
    /// Use the full-resolution, full-length ICF configuration.
    #[arg(long)]
    long_running: bool,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Io {
            path: args.config.clone(),
            source: e,
        })
        .and_then(|text| parse_config(&text))
        .and_then(|mut spec| {
            if let Some(out) = &args.out {
                spec.output.dir = out.clone();
            }
            if args.long_running {
                apply_long_running(&mut spec)?;
            }
            run(&spec)
        });
    match result {
        Ok(outcome) => {
            print!("{}", summary(&outcome.report));
            if args.strict && !outcome.report.all_converged() {
                eprintln!("error: implicit iterations did not converge in every step");
                return ExitCode::from(4);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            // a missing config file is a configuration problem, not a solver one
            let code = if matches!(err, Error::Io { ref path, .. } if *path == args.config) { 2 } else { exit_code(&err) };
            ExitCode::from(code)
        }
    }
}
