use anyhow::Context;
use bcmrt_cli::args::Cli;
use bcmrt_cli::{execute, CliError};
use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on malformed arguments
    let cli = Cli::parse();
    if let Err(err) = try_main(cli) {
        eprintln!("error: {err:#}");
        let code = err.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
        std::process::exit(code);
    }
}

fn try_main(cli: Cli) -> anyhow::Result<()> {
    let spec = cli.into_spec()?;
    log::info!("running {} with {:?}", spec.command, spec.params);
    let report = execute(&spec).with_context(|| format!("`{}` campaign failed", spec.command))?;
    if let Some(summary) = report.summary {
        // stderr keeps the row stream single-schema
        eprintln!("{}", serde_json::json!({ "summary": summary }));
    }
    Ok(())
}
