use clap::{Parser, Subcommand};
use hmf_core::config::RunConfig;
use hmf_core::elliptic::checks::Check;
use hmf_core::experiments::{check_table, run_experiment, Experiment};
use hmf_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Environment variable holding the number of worker threads.
const THREADS_VAR: &str = "HMF_THREADS";

#[derive(Parser)]
#[command(name = "hmf", version, about = "Linear Landau damping experiments for the Vlasov-HMF model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file; see config/schema.toml for the keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Set one configuration key, e.g. --override state.beta=5.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Elliptic and Bessel identity suites.
    Ellcheck,
    /// Magnetization and stability functionals of the stationary state.
    Equilibrium,
    /// Action-angle spectral table, one CSV per chart.
    Spectral,
    /// Kernels of the Volterra equations and their decay.
    Kernels,
    /// Scan of the Penrose margins over the lower half-plane.
    Penrose,
    /// Linear damping of the field components.
    Damp,
    /// Decay of pairings along the pendulum flow.
    Dispersion,
    /// Scattering state of a damping run.
    Scatter,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::Ellcheck => Experiment::Ellcheck,
            Command::Equilibrium => Experiment::Equilibrium,
            Command::Spectral => Experiment::Spectral,
            Command::Kernels => Experiment::Kernels,
            Command::Penrose => Experiment::Penrose,
            Command::Damp => Experiment::Damp,
            Command::Dispersion => Experiment::Dispersion,
            Command::Scatter => Experiment::Scatter,
        }
    }
}

fn threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| format!("{THREADS_VAR}={raw} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = threads() {
        eprintln!("hmf: {e}");
        return ExitCode::from(1);
    }
    let config = match RunConfig::load(cli.config.as_deref(), &cli.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("hmf: {e}");
            return ExitCode::from(1);
        }
    };
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let experiment = Experiment::from(cli.command);
    match run_experiment(experiment, &config, &out) {
        Ok(outcome) => {
            if experiment == Experiment::Ellcheck {
                let checks: Vec<Check> = serde_json::from_value(outcome.report["checks"].clone()).unwrap_or_default();
                print!("{}", check_table(&checks));
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            println!("{}: {}", experiment.name(), if outcome.pass { "PASS" } else { "FAIL" });
            ExitCode::from(if outcome.pass { 0 } else { 2 })
        }
        Err(e @ (Error::Config(_) | Error::Io(_))) => {
            eprintln!("hmf: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("hmf {}: {e}", experiment.name());
            ExitCode::from(2)
        }
    }
}
