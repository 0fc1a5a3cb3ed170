use std::process::ExitCode;

use chairsearch_service::cli::{self, Cli, Command};
use clap::Parser;

fn run(cli: Cli) -> chairsearch_service::Result<bool> {
    match cli.command {
        Command::Serve(config) => {
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(chairsearch_service::serve(config))?;
        }
        Command::GenerateDataset(args) => println!("{}", cli::generate_dataset(&args)?),
        Command::BuildIndexCheck(args) => println!("{}", cli::build_index_check(&args)?),
        Command::RunSim(args) => print!("{}", cli::run_sim(&args)?),
        Command::ReplayLog(args) => {
            let report = cli::replay(&args.log, &args.data)?;
            println!(
                "{} queries replayed, state {:?}, exact {}, shape {}",
                report.queries_replayed, report.outcome.state, report.outcome.exact_success, report.outcome.shape_success
            );
            for m in &report.mismatches {
                println!("mismatch: {m}");
            }
            if !report.is_faithful() {
                println!("replay diverged from the recorded session");
                return Ok(false);
            }
            println!("replay faithful");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
