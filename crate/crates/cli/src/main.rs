mod commands;
mod failure;
mod opts;

use std::process::ExitCode;

use clap::Parser;

use failure::{Classify, Outcome};
use opts::{Cli, Command};

fn run(cli: Cli) -> Outcome {
    let o = cli.opts.with_config().invalid()?;
    match cli.command {
        Command::Gen { format } => commands::gen(&o, format),
        Command::Transform => commands::transform(&o),
        Command::Learn => commands::learn(&o),
        Command::Encode => commands::encode(&o),
        Command::Train => commands::train_cmd(&o),
        Command::Eval { candidate } => commands::eval(&o, &candidate),
        Command::Analyze { checkpoint } => commands::analyze(&o, &checkpoint),
        Command::Compare { warm, random } => commands::compare(&o, &warm, &random),
        Command::Suite => commands::suite(&o),
        Command::Fixture { name, list } => commands::fixture(&o, name.as_deref(), list),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("moore-ssm: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
