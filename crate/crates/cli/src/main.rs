// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polaron_cli::{parse_config, run, CliError, Format, Mode};

/// Rate kernels, survival amplitudes and limit checks for the polaron decay model.
#[derive(Debug, Parser)]
#[command(name = "polaron-decay", version)]
struct Args {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `run.mode`.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `run.output`; stdout when neither is set.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides `run.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn execute(args: Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let mut config = parse_config(&text)?;
    if let Some(m) = args.mode {
        config.run.mode = m;
    }
    if let Some(f) = args.format {
        config.run.format = f;
    }
    if let Some(o) = args.output {
        config.run.output = Some(o);
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be > 0".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }

    let table = run(&config)?;
    match &config.run.output {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write(config.run.format, &mut w)?;
            w.flush()
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(config.run.format, &mut lock)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polaron-decay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
