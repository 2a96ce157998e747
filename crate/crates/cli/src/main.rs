use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flock_cli::{commands, CliError, Overrides, Source};

#[derive(Parser)]
#[command(name = "flock", version, about = "Flocking experiments: simulate, certify, compare against the reduced model")]
struct Cli {
    /// Worker threads; FLOCK_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled experiment, e.g. circle-tracking.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for random initial conditions.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write trajectory.csv and summary.json.
    Run {
        #[command(flatten)]
        common: Common,
        /// Override the model's eps.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Evaluate the flocking certificate and write certificate.json.
    Certify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Compare full and reduced models over an eps sweep; writes compare.csv.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated eps values.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Resolve the initial layer; writes transient.csv and transient.json.
    Transient {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        tau_end: Option<f64>,
    },
}

fn source(c: &Common) -> Source {
    match (&c.config, &c.preset) {
        (Some(p), _) => Source::File(p.clone()),
        (None, Some(name)) => Source::Preset(name.clone()),
        (None, None) => unreachable!("clap requires one of --config and --preset"),
    }
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("FLOCK_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("FLOCK_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

fn execute(command: Command) -> Result<String, CliError> {
    let common = match &command {
        Command::Run { common, .. }
        | Command::Certify { common, .. }
        | Command::Compare { common, .. }
        | Command::Transient { common, .. } => common,
    };
    let exp = source(common).load()?;
    let out = common.out.as_path();
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
    let seed = common.seed;
    match &command {
        Command::Run { eps, .. } => {
            let s = commands::run(&exp, &Overrides { seed, eps: *eps }, out)?;
            Ok(format!("wrote {} samples; final d_X = {}, d_V = {}", s.samples, s.last.d_x, s.last.d_v))
        }
        Command::Certify { eps, .. } => {
            let c = commands::certify(&exp, &Overrides { seed, eps: *eps }, out)?;
            Ok(serde_json::to_string_pretty(&c)?)
        }
        Command::Compare { eps, .. } => {
            let r = commands::compare(&exp, &Overrides { seed, eps: None }, eps.clone(), out)?;
            let lines: Vec<String> = r
                .rows
                .iter()
                .map(|row| {
                    format!("eps = {}: velocity error {}, position error {}", row.eps, row.velocity_error, row.position_error)
                })
                .collect();
            Ok(lines.join("\n"))
        }
        Command::Transient { eps, tau_end, .. } => {
            let r = commands::transient(&exp, &Overrides { seed, eps: *eps }, *tau_end, out)?;
            Ok(format!("formula {:?}, simulated limit {:?}, gap {}", r.formula, r.simulated_limit, r.gap))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = threads(cli.threads).and_then(|k| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(k) = k {
            if k == 0 {
                return Err(CliError::Config("thread count must be at least 1".into()));
            }
            builder = builder.num_threads(k);
        }
        let pool = builder.build().map_err(|e| CliError::Io(e.to_string()))?;
        pool.install(|| execute(cli.command))
    });
    match result {
        Ok(msg) => {
            println!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("flock: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
