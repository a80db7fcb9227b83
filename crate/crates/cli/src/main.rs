use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Parser, Subcommand, ValueEnum};
use dipmirror::experiment::{self, ExperimentConfig, ExperimentData, Scale};
use dipmirror::Error;

#[derive(Parser)]
#[command(name = "dipmirror", version, about = "Dipole ensembles near a charged mirror")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a TOML experiment config or a named preset.
    Run(RunArgs),
    /// List the presets and their parameters.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Full,
    Desk,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (also accepts a manifest from an earlier run).
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum, default_value = "desk", requires = "preset")]
    scale: ScaleArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides output_path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    realizations: Option<u64>,
    /// No progress output.
    #[arg(long, short)]
    quiet: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Schema { .. } | Error::Config(_) => 3,
        Error::Io { .. } => 4,
        Error::Generation(_) | Error::Domain(_) | Error::CoincidentAtoms(..) => 5,
        Error::Numerical(_) | Error::TooManyFailures { .. } => 6,
    }
}

struct Reporter {
    quiet: bool,
    last: Mutex<(String, usize)>,
}

impl Reporter {
    fn report(&self, stage: &str, done: usize, total: usize) {
        if self.quiet {
            return;
        }
        let mut last = self.last.lock().unwrap();
        let step = (total / 20).max(1);
        if last.0 != stage || done == total || done >= last.1 + step {
            *last = (stage.to_string(), done);
            let mut err = std::io::stderr().lock();
            let _ = write!(err, "\r  {stage}: {done}/{total}");
            if done == total {
                let _ = writeln!(err);
            }
        }
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let mut configs = match (&args.config, &args.preset) {
        (Some(path), _) => vec![ExperimentConfig::from_file(path)?],
        (None, Some(name)) => {
            let scale = match args.scale {
                ScaleArg::Full => Scale::Full,
                ScaleArg::Desk => Scale::Desk,
            };
            experiment::preset(name, scale)?
        }
        (None, None) => unreachable!("clap requires one of them"),
    };
    for cfg in &mut configs {
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(n) = args.realizations {
            cfg.n_realizations = n as usize;
        }
        if let Some(out) = &args.out {
            cfg.output_path = out.clone();
        }
        cfg.validate()?;
    }

    let reporter = Reporter {
        quiet: args.quiet,
        last: Mutex::new((String::new(), 0)),
    };
    let progress = |stage: &str, done: usize, total: usize| reporter.report(stage, done, total);
    for cfg in &configs {
        if !args.quiet {
            eprintln!("{} ({} realizations, seed {})", cfg.file_stem(), cfg.n_realizations, cfg.seed);
        }
        let run = experiment::run_experiment(cfg, &progress)?;
        let files = experiment::write_outputs(&run, &cfg.output_path)?;
        if let ExperimentData::Decay { trapping, .. } = &run.data {
            if let Some(tau) = trapping.mean {
                eprintln!("  tau = {tau:.4} +- {:.4}", trapping.stderr.unwrap_or(f64::NAN));
            }
        }
        println!("{}", files.csv.display());
        println!("{}", files.manifest.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Presets => {
            print!("{}", experiment::list_presets());
            Ok(())
        }
        Command::Run(args) => run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
