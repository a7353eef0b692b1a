mod args;
mod commands;
mod error;
mod manifest;
mod plot;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use log::LevelFilter;

use args::{Cli, Command, GlobalArgs};
use error::{CliError, CliResult};
use manifest::RunManifest;

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Off,
        1 => LevelFilter::Warn,
        2 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

fn absolute(path: &Path) -> CliResult<PathBuf> {
    Ok(std::path::absolute(path)?)
}

/// Resolves every path so the recorded invocation does not depend on the
/// working directory.
fn resolve_paths(command: &mut Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => {
            a.out = absolute(&a.out)?;
            if let Some(m) = &a.manifest {
                a.manifest = Some(absolute(m)?);
            }
        }
        Command::Reduce(a) => {
            a.input = absolute(&a.input)?;
            a.out_dir = absolute(&a.out_dir)?;
        }
        Command::Index(a) => {
            a.input = absolute(&a.input)?;
            a.out_dir = absolute(&a.out_dir)?;
            if let Some(e) = &a.embedding {
                a.embedding = Some(absolute(e)?);
            }
        }
        Command::Rerun(_) => {}
    }
    Ok(())
}

/// Moves every output of `command` into `dir`, keeping file names.
fn redirect_outputs(command: &mut Command, dir: &Path) {
    let moved = |p: &Path| dir.join(p.file_name().unwrap_or_default());
    match command {
        Command::Generate(a) => {
            a.out = moved(&a.out);
            a.manifest = a.manifest.as_deref().map(moved);
        }
        Command::Reduce(a) => a.out_dir = dir.to_path_buf(),
        Command::Index(a) => a.out_dir = dir.to_path_buf(),
        Command::Rerun(_) => {}
    }
}

fn execute(global: &GlobalArgs, mut command: Command) -> CliResult<()> {
    if let Some(t) = global.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    resolve_paths(&mut command)?;
    let start = Instant::now();
    let seed = match &command {
        Command::Generate(a) => a.seed,
        Command::Reduce(a) => a.seed,
        Command::Index(a) => a.seed,
        Command::Rerun(_) => 0,
    };
    let mut m = RunManifest::new(global, &command, seed);
    let manifest_path = match &command {
        Command::Generate(a) => commands::run_generate(a, &mut m)?,
        Command::Reduce(a) => commands::run_reduce(global, a, &mut m)?,
        Command::Index(a) => commands::run_index(global, a, &mut m)?,
        Command::Rerun(_) => unreachable!("rerun is resolved before execution"),
    };
    m.duration_secs = start.elapsed().as_secs_f64();
    m.write(&manifest_path)?;
    println!("{}", manifest_path.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Rerun(r) => {
            let recorded = RunManifest::read(&r.manifest)?;
            let mut command = recorded.invocation;
            if let Some(dir) = &r.out_dir {
                std::fs::create_dir_all(dir).map_err(|e| CliError::at(dir, e.into()))?;
                redirect_outputs(&mut command, &absolute(dir)?);
            }
            let global = GlobalArgs {
                verbose: cli.global.verbose,
                threads: cli.global.threads.or(recorded.global.threads),
                strict: recorded.global.strict || cli.global.strict,
            };
            execute(&global, command)
        }
        command => execute(&cli.global, command),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                let _ = e.print();
                std::process::exit(0);
            }
            _ => {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or("invalid arguments");
                let err = CliError::usage(first.trim_start_matches("error: "));
                eprintln!("{err}");
                std::process::exit(err.code);
            }
        },
    };
    init_logging(cli.global.verbose);
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.code);
    }
}
