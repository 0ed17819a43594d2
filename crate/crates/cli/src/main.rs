use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shocklab_cli::{execute, parse_config, write_outcome, CliError, CliResult, Command, RunConfig};

#[derive(Parser)]
#[command(name = "shocklab", version, about = "String-equation, Volterra-flow and dispersive-shock numerics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (SHOCKLAB_OUT takes precedence).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Scale N, overriding the configuration.
    #[arg(long = "scale-N", global = true, value_name = "INT")]
    scale: Option<usize>,

    /// Figure preset supplying the couplings.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Reserved; recorded in the output.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Worker threads for grid sweeps.
    #[arg(long, global = true, value_name = "INT")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Solve the string equation and compare with the continuum branch.
    Solve,
    /// Integrate hierarchy flows.
    Flow,
    /// Moments, tau functions and recurrence coefficients of the weight.
    Oracle,
    /// Phase grid and critical set in the (x, T6) plane.
    Phase,
    /// Regenerate the data behind a figure preset.
    Reproduce,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Solve => Command::Solve,
            Sub::Flow => Command::Flow,
            Sub::Oracle => Command::Oracle,
            Sub::Phase => Command::Phase,
            Sub::Reproduce => Command::Reproduce,
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = cli.scale {
        cfg.scale = Some(n);
    }
    if let Some(p) = &cli.preset {
        cfg.preset = Some(p.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    if let Some(dir) = std::env::var_os("SHOCKLAB_OUT").filter(|d| !d.is_empty()) {
        return dir.into();
    }
    cli.out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("shocklab-out"))
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    let cfg = load_config(cli)?;
    let outcome = execute(cli.command.into(), &cfg)?;
    for path in write_outcome(&out_dir(cli, &cfg), &outcome)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::config(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
