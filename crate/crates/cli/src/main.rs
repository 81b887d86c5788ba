use std::process::ExitCode;

use clap::Parser;
use regdet_cli::{render, run, Command, RunConfig};

#[derive(Parser)]
#[command(name = "regdet", version, allow_negative_numbers = true, about = "Regularized determinants and anomaly checks on model surfaces")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.config.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.config.threads).build_global() {
            eprintln!("error: --threads: {e}");
            return ExitCode::from(1);
        }
    }
    let report = match run(cli.command, &cli.config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = render(&report, cli.config.format);
    match &cli.config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: --out {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(if report.pass { 0 } else { 2 })
}
