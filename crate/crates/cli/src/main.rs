use std::path::PathBuf;
use std::process::ExitCode;

use affwalk::config::{parse_config, RunConfig};
use affwalk::error::{CliError, CliResult};
use affwalk::run::{self, Estimator, Options, Outcome};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "affwalk", version, about = "Random walks on affine buildings and lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact transition probabilities on the support.
    Exact(Flags),
    /// Heat kernel, local limit or Green function estimates at --omega.
    Estimate(Flags),
    /// Exact values against estimates on the admissible set.
    Compare(Flags),
    /// Green function series against its estimate along the --omega direction.
    Green(Flags),
    /// Rate function, saddle point and Hessian over the support hull.
    Rate(Flags),
    /// Random suite for the set-system union identity.
    Lemma5(Flags),
    /// The acceptance suite, or the checks for one config.
    Selftest(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Torus grid points per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated step counts.
    #[arg(long = "n", value_delimiter = ',')]
    n_list: Option<Vec<u64>>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long = "K")]
    big_k: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Term cap for the critical Green series.
    #[arg(long)]
    cap: Option<u64>,
    /// uniform, interior, llt or green.
    #[arg(long)]
    estimator: Option<Estimator>,
    /// Comma-separated coordinates.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    omega: Option<Vec<i64>>,
    /// zeta as a fraction of 1/rho.
    #[arg(long, default_value_t = 0.9)]
    zeta_frac: f64,
    #[arg(long, default_value_t = 40)]
    omega_max: u64,
    /// Random systems in the lemma5 suite.
    #[arg(long, default_value_t = 500)]
    count: usize,
}

impl Flags {
    fn options(&self) -> Options {
        Options {
            grid: self.grid,
            n_list: self.n_list.clone(),
            epsilon: self.epsilon,
            big_k: self.big_k,
            seed: self.seed,
            out: self.out.clone(),
            cap: self.cap,
            estimator: self.estimator,
            omega: self.omega.clone(),
            zeta_frac: self.zeta_frac,
            omega_max: self.omega_max,
            count: self.count,
        }
    }

    fn config(&self) -> CliResult<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Usage("--config is required".into()))?;
        parse_config(path)
    }
}

fn dispatch(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::Exact(f) => run::run_exact(&f.config()?, &f.options()),
        Command::Estimate(f) => run::run_estimate(&f.config()?, &f.options()),
        Command::Compare(f) => run::run_compare(&f.config()?, &f.options()),
        Command::Green(f) => run::run_green(&f.config()?, &f.options()),
        Command::Rate(f) => run::run_rate(&f.config()?, &f.options()),
        Command::Lemma5(f) => run::run_lemma5(f.out.as_deref(), &f.options()),
        Command::Selftest(f) => {
            let cfg = f.config.as_ref().map(|p| parse_config(p)).transpose()?;
            run::run_selftest(cfg.as_ref(), &f.options())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
