use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use decolab::lab::{self, parse_config_text, parse_overrides, Experiment, ExperimentConfig, EXIT_CONFIG, EXIT_IO};

const AFTER_HELP: &str = "\
Experiments: timescales, measure, discord, cat, wigner, sieve, chaos, entropy-production.

Parameters come from the experiment's defaults, then the config file
(`key = value` lines), then `--key value` flags. Unknown keys are rejected.

Exit status: 0 success, 2 invalid configuration (nothing written),
3 solver failure (partial outputs, manifest marked failed), 4 I/O error.

DECOLAB_THREADS caps the number of worker threads.";

#[derive(Parser, Debug)]
#[command(name = "decolab", version, about = "Numerical laboratory for environment-induced decoherence", after_help = AFTER_HELP)]
struct Cli {
    /// Experiment to run.
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,

    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory (default: decolab-<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Print the resolved parameters and exit.
    #[arg(long)]
    show_config: bool,

    /// Experiment parameters as `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "PARAMS")]
    params: Vec<String>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse::<Experiment>().map_err(|e| e.to_string())
}

fn fail(code: i32, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("decolab: {msg}");
    ExitCode::from(code as u8)
}

/// Moves `--config`, `--out` and `--show-config` out of the trailing
/// parameters, so they may appear anywhere on the command line.
fn hoist_options(cli: &mut Cli) -> Result<(), String> {
    let mut rest = Vec::new();
    let mut it = std::mem::take(&mut cli.params).into_iter();
    while let Some(arg) = it.next() {
        let (key, inline) = match arg.split_once('=') {
            Some((k, v)) => (k.to_owned(), Some(v.to_owned())),
            None => (arg.clone(), None),
        };
        match key.as_str() {
            "--show-config" if inline.is_none() => cli.show_config = true,
            "--config" | "--out" => {
                let value = inline.or_else(|| it.next()).ok_or_else(|| format!("{key} needs a value"))?;
                let slot = if key == "--config" { &mut cli.config } else { &mut cli.out };
                if slot.replace(PathBuf::from(value)).is_some() {
                    return Err(format!("{key} given twice"));
                }
            }
            _ => rest.push(arg),
        }
    }
    cli.params = rest;
    Ok(())
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    if let Err(e) = hoist_options(&mut cli) {
        return fail(EXIT_CONFIG, e);
    }

    if let Ok(threads) = std::env::var("DECOLAB_THREADS") {
        let n = match threads.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return fail(EXIT_CONFIG, format!("DECOLAB_THREADS must be a positive integer, got `{threads}`")),
        };
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(EXIT_CONFIG, e);
        }
    }

    let file_pairs = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => match parse_config_text(&text) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", path.display())),
            },
            Err(e) => return fail(EXIT_IO, format!("{}: {e}", path.display())),
        },
        None => Vec::new(),
    };
    let overrides = match parse_overrides(&cli.params) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let out = cli.out.unwrap_or_else(|| PathBuf::from(format!("decolab-{}", cli.experiment)));
    let cfg = match ExperimentConfig::resolve(cli.experiment, &file_pairs, &overrides, out) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    if cli.show_config {
        for (k, v) in cfg.resolved() {
            println!("{k} = {v}");
        }
        return ExitCode::SUCCESS;
    }

    let outcome = lab::run(&cfg);
    if let Some(m) = &outcome.manifest {
        for w in &m.warnings {
            eprintln!("decolab: warning: {w}");
        }
        println!("{} files in {}", m.outputs.len() + 1, cfg.out_dir.display());
    }
    match outcome.error {
        Some(e) => fail(e.exit_code(), e),
        None => ExitCode::SUCCESS,
    }
}
