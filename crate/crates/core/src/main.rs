use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tubeflow::cli::{list_builtins, load_scenario, run_scenario, RunOptions, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Simulate,
    Relax,
    Chatter,
    Tube,
    Horizon,
    OriginCheck,
    Completeness,
    ListBuiltins,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Simulate => Subcommand::Simulate,
            Command::Relax => Subcommand::Relax,
            Command::Chatter => Subcommand::Chatter,
            Command::Tube => Subcommand::Tube,
            Command::Horizon => Subcommand::Horizon,
            Command::OriginCheck => Subcommand::OriginCheck,
            Command::Completeness => Subcommand::Completeness,
            Command::ListBuiltins => Subcommand::ListBuiltins,
        }
    }
}

/// Relaxation and tube-shadowing runs for polytopic differential inclusions.
#[derive(Debug, Parser)]
#[command(name = "tubeflow", version)]
struct Args {
    command: Command,
    /// Scenario JSON file, or `builtin:NAME`.
    #[arg(long)]
    scenario: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Integration step.
    #[arg(long)]
    step: Option<f64>,
    /// Worker threads for parallel stages.
    #[arg(long)]
    jobs: Option<usize>,
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = Subcommand::from(args.command);
    if command == Subcommand::ListBuiltins {
        let list = list_builtins();
        for entry in list.as_array().unwrap() {
            println!("{}\t{}", entry["name"].as_str().unwrap(), entry["description"].as_str().unwrap());
        }
        if let Some(out) = &args.out {
            let written = std::fs::create_dir_all(out)
                .map_err(tubeflow::Error::from)
                .and_then(|_| tubeflow::cli::output::write_json(&out.join("builtins.json"), &list));
            if let Err(e) = written {
                return fail(e.kind(), e.to_string());
            }
        }
        return ExitCode::SUCCESS;
    }
    let (Some(source), Some(out)) = (&args.scenario, &args.out) else {
        return fail("usage", format!("`{command}` needs --scenario and --out"));
    };
    let options = RunOptions {
        seed: args.seed,
        step: args.step,
        jobs: args.jobs,
    };
    match load_scenario(source).and_then(|s| run_scenario(&s, command, out, &options)) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string(&manifest["result"]).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
