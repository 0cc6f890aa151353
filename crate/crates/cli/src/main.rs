mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Outcome, Session};

/// Pseudospectral laboratory for m_t + [sin(u² − u_x²) m]_x = 0.
#[derive(Debug, Parser)]
#[command(name = "smch", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario JSON document.
    #[arg(long)]
    scenario: PathBuf,
    /// Dotted-path override, e.g. `stepper.t_end=2`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory; overrides `outputs.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the scenario and write diagnostics, a CSV table and the final snapshot.
    Simulate(Common),
    /// Track characteristics from the scenario seeds and verify the closed forms.
    Characteristics(Common),
    /// Evaluate the wave-breaking certificate for the initial data.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Constant C inside C₁; overrides `certificate.c`.
        #[arg(long = "c-const")]
        c_const: Option<f64>,
    },
    /// Run the truncated Picard iteration and report its contraction.
    Picard(Common),
    /// Compare the sine model with its mCH and cubic truncations at small amplitude.
    LimitCheck {
        #[command(flatten)]
        common: Common,
        /// Comma-separated amplitude scalings; overrides `limit_check.epsilons`.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
    },
    /// Run the identity battery on the initial data.
    Identities(Common),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("SMCH_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("SMCH_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        commands::report_failure("configuration", None, &msg);
        return Outcome::Error.into();
    }
    let result = match cli.command {
        Command::Simulate(c) => Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.simulate()),
        Command::Characteristics(c) => {
            Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.characteristics())
        }
        Command::Certify { common: mut c, c_const } => {
            if let Some(v) = c_const {
                c.overrides.push(format!("certificate.c={v}"));
            }
            Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.certify())
        }
        Command::Picard(c) => Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.picard()),
        Command::LimitCheck { common: mut c, epsilons } => {
            if let Some(eps) = epsilons {
                let list: Vec<String> = eps.iter().map(f64::to_string).collect();
                c.overrides.push(format!("limit_check.epsilons=[{}]", list.join(",")));
            }
            Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.limit_check())
        }
        Command::Identities(c) => Session::open(&c.scenario, &c.overrides, c.out).and_then(|s| s.identities()),
    };
    match result {
        Ok(outcome) => outcome.into(),
        Err(e) => {
            commands::report_failure(e.kind(), e.path(), &e.to_string());
            Outcome::Error.into()
        }
    }
}
