use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpest::commands::{self, Report, SweepParam, SweepRange};
use mpest::config::{ModeName, ScenarioConfig};
use mpest::CliError;

/// Multipath channel estimation experiments.
///
/// Any configuration key can be overridden with a flag of the same dotted
/// name, e.g. `--ga.population_size 100` or `--noise.snr_db=20`.
#[derive(Debug, Parser)]
#[command(name = "mpest", version)]
struct Cli {
    /// TOML scenario file; built-in defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Mode {
    Full,
    Hybrid,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the pulse and the received record.
    Synth,
    /// Slice the error surface along one parameter.
    #[command(allow_negative_numbers = true)]
    Sweep {
        /// `tau<k>` or `a<k>`, 1-based.
        #[arg(long)]
        param: SweepParam,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Run one estimation.
    Estimate,
    /// Monte-Carlo MSE against SNR.
    Bench,
}

/// Splits `--section.key value` and `--section.key=value` pairs out of argv.
type Overrides = Vec<(String, String)>;

fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Overrides), CliError> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        match arg
            .strip_prefix("--")
            .filter(|k| k.split('=').next().is_some_and(|k| k.contains('.')))
        {
            Some(body) => match body.split_once('=') {
                Some((k, v)) => overrides.push((k.to_string(), v.to_string())),
                None => {
                    let v = it
                        .next()
                        .ok_or_else(|| CliError::Config(format!("--{body} needs a value")))?;
                    overrides.push((body.to_string(), v));
                }
            },
            None => rest.push(arg),
        }
    }
    Ok((rest, overrides))
}

fn run(cli: Cli, overrides: &[(String, String)]) -> Result<Report, CliError> {
    let mut cfg = ScenarioConfig::load(cli.config.as_deref(), overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.estimator.mode = match mode {
            Mode::Full => ModeName::Full,
            Mode::Hybrid => ModeName::Hybrid,
        };
    }
    match cli.command {
        Command::Synth => commands::synth(&cfg, &cli.out),
        Command::Sweep {
            param,
            from,
            to,
            steps,
        } => {
            let d = SweepRange::default_for(param, &cfg);
            let range = SweepRange {
                from: from.unwrap_or(d.from),
                to: to.unwrap_or(d.to),
                steps: steps.unwrap_or(d.steps),
            };
            commands::sweep(&cfg, &cli.out, param, range)
        }
        Command::Estimate => commands::estimate_once(&cfg, &cli.out),
        Command::Bench => commands::bench(&cfg, &cli.out),
    }
}

fn main() -> ExitCode {
    let result = split_overrides(std::env::args().collect()).and_then(|(args, overrides)| {
        let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
        run(cli, &overrides)
    });
    match result {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mpest: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
