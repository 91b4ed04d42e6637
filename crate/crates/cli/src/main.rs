use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use farfield_core::harness::checks::{convergence_checks, run_checks, sweep_checks, Check};
use farfield_core::harness::{
    convergence_study, hopf_preset_config, hopf_verify, run_domain_sweep, run_single, summarize_dir, ExperimentConfig,
};
use farfield_core::hopf::run_corpus;
use farfield_core::Error;

/// Far-field vacuum lab: 1D Lagrangian Navier–Stokes runs, domain sweeps,
/// convergence studies and boundary-point lemma checks.
///
/// Exit codes: 0 success, 1 validation or other error, 2 solver abort,
/// 3 failed assertion with --check.
#[derive(Parser)]
#[command(name = "farfield", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its report.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Assert energy decay, the J bounds and finite norms.
        #[arg(long)]
        check: bool,
    },
    /// Run the expanding-domain sequence.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Assert the regime trend on the last two levels.
        #[arg(long)]
        check: bool,
    },
    /// Space and time refinement study.
    Converge {
        config: PathBuf,
        #[arg(long, default_value_t = 3)]
        refine: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Assert the observed orders.
        #[arg(long)]
        check: bool,
    },
    /// Barrier and comparison checks.
    Hopf {
        #[command(subcommand)]
        command: HopfCommand,
    },
    /// Report utilities.
    Report {
        #[command(subcommand)]
        command: ReportCommand,
    },
}

#[derive(Subcommand)]
enum HopfCommand {
    /// Verify the barrier for a preset (unit, scaling, kelvin) or a config file.
    Verify {
        target: String,
        /// ζ as a multiple of ζ₀, overriding the configuration.
        #[arg(long)]
        zeta_factor: Option<f64>,
        /// Assert that the barrier passes.
        #[arg(long)]
        check: bool,
    },
    /// Randomized barrier draws and comparison instances.
    Corpus {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Lens samples per barrier draw.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Assert that every instance passes.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Subcommand)]
enum ReportCommand {
    /// Digest every report below a directory.
    Summarize { dir: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SolverAbort { .. } | Error::StepRejected(_) => 2,
        _ => 1,
    }
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(path)?;
    if out.is_some() {
        cfg.output_dir = out;
    }
    Ok(cfg)
}

fn report_checks(checks: &[Check]) -> bool {
    for c in checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().all(|c| c.pass)
}

fn finish(check: bool, checks: Vec<Check>) -> ExitCode {
    if check && !report_checks(&checks) {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run { config, out, check } => {
            let cfg = load(&config, out)?;
            let report = run_single(&cfg)?;
            if let Some(last) = report.snapshots.last() {
                println!(
                    "t = {}: energy {:.6e}, sup|s| {:?}, inf theta (core) {:.6e}, steps {} ({} rejected)",
                    last.t, last.energy, last.sup_abs_s, last.inf_theta_core, report.accepted_steps, report.rejected_steps
                );
            }
            Ok(finish(check, run_checks(&report)))
        }
        Command::Sweep {
            config,
            levels,
            out,
            check,
        } => {
            let cfg = load(&config, out)?;
            let seq = cfg.domain_sequence(levels)?;
            let report = run_domain_sweep(&cfg, &seq)?;
            for l in &report.levels {
                println!(
                    "level {} L = {}: sup|s| {:?} -> {:?}, inf theta (core) {:?}, Kelvin slope {:?}, probes [{:?}, {:?}]{}",
                    l.level,
                    l.half_width,
                    l.sup_abs_s_initial,
                    l.sup_abs_s,
                    l.inf_theta_core,
                    l.kelvin_slope0,
                    l.probe_ratio_min,
                    l.probe_ratio_max,
                    l.error.as_ref().map(|e| format!(" FAILED: {e}")).unwrap_or_default()
                );
            }
            Ok(finish(check, sweep_checks(&cfg, &report)))
        }
        Command::Converge {
            config,
            refine,
            out,
            check,
        } => {
            let cfg = load(&config, out)?;
            match convergence_study(&cfg, refine) {
                Ok(report) => {
                    println!("{}", json(&report));
                    Ok(finish(check, convergence_checks(&report)))
                }
                Err(Error::Inconclusive(m)) => {
                    eprintln!("inconclusive: {m}");
                    Ok(ExitCode::from(if check { 3 } else { 1 }))
                }
                Err(e) => Err(e),
            }
        }
        Command::Hopf { command } => match command {
            HopfCommand::Verify {
                target,
                zeta_factor,
                check,
            } => {
                let mut cfg = match hopf_preset_config(&target) {
                    Some(c) => c,
                    None => load(Path::new(&target), None)?,
                };
                if let Some(z) = zeta_factor {
                    cfg.hopf.zeta_factor = z;
                }
                let report = hopf_verify(&cfg)?;
                println!("{}", json(&report));
                let checks = vec![Check {
                    name: "barrier".into(),
                    pass: report.pass == Some(true),
                    detail: report.hypothesis_violation.clone().unwrap_or_default(),
                }];
                Ok(finish(check, checks))
            }
            HopfCommand::Corpus {
                seed,
                count,
                samples,
                check,
            } => {
                let report = run_corpus(seed, count, samples)?;
                println!("{}", json(&report));
                let checks = vec![Check {
                    name: "corpus".into(),
                    pass: report.all_passed(),
                    detail: format!(
                        "barrier failures {:?}, comparison failures {:?}",
                        report.barrier_failures, report.comparison_failures
                    ),
                }];
                Ok(finish(check, checks))
            }
        },
        Command::Report { command } => match command {
            ReportCommand::Summarize { dir } => {
                print!("{}", summarize_dir(&dir)?);
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
