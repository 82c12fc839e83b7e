use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lv_lab::runner::{self, RunConfig, Suite};

#[derive(Parser)]
#[command(name = "lv-lab", version, about = "Waves, eigenpairs and entire solutions of the diffusive Lotka-Volterra competition system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (key = value text, `section.key` or `[section]` form).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for manifest.txt and CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; LV_LAB_WORKERS takes precedence.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form speeds and rates.
    Speeds,
    /// KPP wave (and the bistable system wave when a, b > 1).
    Wave,
    /// Eigenpair of the linearization for the configured scenario.
    Eigen,
    /// Fredholm region scan and polar shooting.
    Spectrum,
    /// Backward construction of the entire solution.
    Entire,
    /// Entire solution plus forward run and front metrics.
    Simulate,
    /// Acceptance criteria.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Acceptance)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Quick,
    Acceptance,
}

fn workers(flag: Option<usize>) -> Option<usize> {
    std::env::var("LV_LAB_WORKERS").ok().and_then(|s| s.trim().parse().ok()).or(flag)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = workers(cli.workers) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global() {
            eprintln!("worker pool: {e}");
        }
    }
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("stage config failed: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let name = match &cli.command {
        Command::Speeds => "speeds",
        Command::Wave => "wave",
        Command::Eigen => "eigen",
        Command::Spectrum => "spectrum",
        Command::Entire => "entire",
        Command::Simulate => "simulate",
        Command::Verify { .. } => "verify",
    };
    let out = cli.out.clone().unwrap_or_else(|| runner::default_out(name));
    let report = match cli.command {
        Command::Speeds => runner::run_speeds(&cfg, &out),
        Command::Wave => runner::run_wave(&cfg, &out),
        Command::Eigen => runner::run_eigen(&cfg, &out),
        Command::Spectrum => runner::run_spectrum(&cfg, &out),
        Command::Entire => runner::run_entire(&cfg, &out),
        Command::Simulate => runner::run_simulate(&cfg, &out),
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Quick => Suite::Quick,
                SuiteArg::Acceptance => Suite::Acceptance,
            };
            runner::run_verify(&cfg, suite, &out).map(|(rep, crit)| {
                for c in &crit {
                    println!("{}", c.line());
                }
                rep
            })
        }
    };
    match report {
        Ok(rep) => {
            if let Some(f) = &rep.failed_stage {
                eprintln!("{f}");
                return ExitCode::FAILURE;
            }
            println!("wrote {}", out.join("manifest.txt").display());
            if rep.all_pass() {
                ExitCode::SUCCESS
            } else {
                eprintln!("some checks failed; see the manifest");
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
