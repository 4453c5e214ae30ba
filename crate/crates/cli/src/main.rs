use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chslab_cli::config::{Caps, ExperimentConfig, Format};
use chslab_cli::experiments::REGISTRY;
use chslab_cli::{run, run_suite, CliError, Report};

/// Runs chslab experiments and writes verdict reports.
#[derive(Debug, Parser)]
#[command(name = "chslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed; overrides the config file's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report path. Without it, the config's output path or
    /// $CHSLAB_OUT_DIR/<name>.<ext> is used.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Largest flat dimension of any state or operator.
    #[arg(long, global = true)]
    cap_dim: Option<usize>,

    /// Largest exhaustive enumeration.
    #[arg(long, global = true)]
    cap_enum: Option<usize>,

    /// Experiments run concurrently within a suite.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one experiment from a TOML config file.
    Run { config: PathBuf },
    /// Run a named suite: lemmas, bounds, montecarlo or all.
    Suite { name: String },
    /// List registered experiments with their default parameters.
    List,
}

fn apply_caps(mut caps: Caps, cli: &Cli) -> Caps {
    if let Some(d) = cli.cap_dim {
        caps.dim = d;
    }
    if let Some(e) = cli.cap_enum {
        caps.enumeration = e;
    }
    caps
}

fn output_target(
    cli: &Cli,
    configured: Option<(PathBuf, Option<Format>)>,
    name: &str,
) -> Option<(PathBuf, Format)> {
    let from_path = |p: &PathBuf| match p.extension().and_then(|e| e.to_str()) {
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        _ => None,
    };
    if let Some(p) = &cli.out {
        return Some((p.clone(), cli.format.or(from_path(p)).unwrap_or_default()));
    }
    if let Some((p, f)) = configured {
        let format = cli.format.or(f).or(from_path(&p)).unwrap_or_default();
        return Some((p, format));
    }
    let dir = std::env::var_os("CHSLAB_OUT_DIR")?;
    let format = cli.format.unwrap_or_default();
    let file = format!("{}.{}", name.replace(':', "-"), format.extension());
    Some((PathBuf::from(dir).join(file), format))
}

fn execute(cli: &Cli) -> Result<Option<Report>, CliError> {
    match &cli.command {
        Command::List => {
            for e in REGISTRY {
                let defaults: Vec<String> =
                    e.defaults.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<22} {}", e.name, defaults.join(" "));
                println!("{:<22} calls: {}", "", e.operation);
                println!("{:<22} checks: {}", "", e.asserts);
            }
            Ok(None)
        }
        Command::Run { config } => {
            let mut c = ExperimentConfig::load(config)?;
            if let Some(s) = cli.seed {
                c.seed = s;
            }
            c.caps = apply_caps(c.caps, cli);
            let report = run(&c)?;
            let configured = c.output.path.clone().map(|p| (p, c.output.format));
            if let Some((path, format)) = output_target(cli, configured, &report.name) {
                report.write(&path, format)?;
            }
            Ok(Some(report))
        }
        Command::Suite { name } => {
            let caps = apply_caps(Caps::default(), cli);
            let report = run_suite(name, cli.seed.unwrap_or(0), caps, cli.jobs.max(1))?;
            if let Some((path, format)) = output_target(cli, None, &report.name) {
                report.write(&path, format)?;
            }
            Ok(Some(report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(report)) => {
            print!("{}", report.summary_table());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("chslab: {e}");
            ExitCode::from(2)
        }
    }
}
