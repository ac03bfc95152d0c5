use std::process::ExitCode;

use clap::Parser;
use germ_equiv_cli::args::Cli;
use germ_equiv_cli::config::{read_file_layer, resolve};
use germ_equiv_cli::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let (command, config_path, flags) = cli.command.into_parts();
    let file = config_path.map(|p| read_file_layer(&p, command)).transpose()?;
    let config = resolve(command, file, flags)?;
    let outcome = run(&config)?;
    if let Some(text) = outcome.emit()? {
        print!("{text}");
    }
    eprintln!("{}", outcome.summary());
    Ok(outcome.exit_code())
}
