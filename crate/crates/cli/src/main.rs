//! Scenario runner for the half-line HNLS laboratory.
//!
//! Exit codes: 0 = all invariant checks passed, 2 = residual threshold
//! exceeded, 3 = config rejected.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hnls_core::boundary::calibrate_lambda0;
use hnls_core::diagnostics::{damped_wave_family, interpolation_probe};
use hnls_core::experiment::{
    continuous_dependence_experiment, ratio_spread, PerturbationFamily,
};
use hnls_core::nonlin::{FixedPointOptions, RegularizedNonlinearity};
use hnls_core::report::CalibrationJson;
use hnls_core::scenario::{convergence_table, run_scenario, ScenarioConfig};
use hnls_core::weight::WeightSpec;
use hnls_core::Error;

#[derive(Parser)]
#[command(name = "hnls", version, about = "Numerical laboratory for the higher-order NLS equation on the half-line")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario and write CSV/JSON artifacts.
    Run {
        /// path to a flat key = value config file
        config: Option<PathBuf>,
        /// built-in preset name instead of a file
        #[arg(long)]
        preset: Option<String>,
    },
    /// Dyadic-refinement convergence table against the scenario's oracle.
    Converge {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
    /// Calibrate the frequency cutoff for the boundary potential.
    CalibrateLambda0 {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Empirical constant of the weighted interpolation inequality.
    ProbeInterpolation {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Continuous-dependence experiment: perturb data and report ratios.
    Depend {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// which datum to perturb: u0 | mu | f | all
        #[arg(long, default_value = "all")]
        perturb: String,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.01, 0.001])]
        eps: Vec<f64>,
    },
}

fn load_config(config: Option<PathBuf>, preset: Option<String>) -> Result<ScenarioConfig, Error> {
    match (config, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)?;
            ScenarioConfig::parse(&text)
        }
        (None, Some(name)) => ScenarioConfig::preset(&name),
        _ => Err(Error::ConfigRejected(
            "pass exactly one of <config> or --preset NAME".into(),
        )),
    }
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::ConfigRejected(_) => ExitCode::from(3),
        _ => ExitCode::from(1),
    }
}

fn cmd_run(config: Option<PathBuf>, preset: Option<String>) -> ExitCode {
    let config = match load_config(config, preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    match run_scenario::<f64>(&config) {
        Ok(record) => {
            if let Err(e) = record.persist() {
                eprintln!("failed to write artifacts: {e}");
                return ExitCode::from(1);
            }
            println!(
                "{}: {} steps in {:.3}s, max identity residual {:.3e}",
                config.name,
                record.history.len() - 1,
                record.wall_seconds,
                record.max_residual
            );
            println!("artifacts under {}", config.output_dir.display());
            if let Some(threshold) = config.residual_threshold {
                if record.max_residual > threshold {
                    eprintln!(
                        "residual threshold exceeded: {:.3e} > {threshold:.3e}",
                        record.max_residual
                    );
                    return ExitCode::from(2);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("run failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_converge(config: Option<PathBuf>, preset: Option<String>, levels: usize) -> ExitCode {
    let config = match load_config(config, preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    match convergence_table::<f64>(&config, levels) {
        Ok(rows) => {
            println!("{:>12} {:>12} {:>14} {:>10}  flags", "dx", "dt", "error", "order");
            for row in &rows {
                let order = match (row.order, row.saturated) {
                    (_, true) => "saturated".to_string(),
                    (Some(o), _) => format!("{o:.2}"),
                    (None, _) => "-".to_string(),
                };
                let flag = if row.flagged { "non-monotone" } else { "" };
                println!(
                    "{:>12.5e} {:>12.5e} {:>14.6e} {:>10}  {}",
                    row.dx, row.dt, row.error, order, flag
                );
            }
            if rows.iter().any(|r| r.flagged) {
                eprintln!("warning: non-monotone errors (tail contamination suspected)");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("convergence study failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_calibrate(a: f64, b: f64) -> ExitCode {
    match calibrate_lambda0(a, b) {
        Ok(cal) => {
            let json = CalibrationJson { a, b, lambda0: cal.lambda0, eps: cal.eps };
            println!("{}", serde_json::to_string_pretty(&json).unwrap());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("calibration failed: {e}");
            exit_for(&e)
        }
    }
}

fn cmd_probe_interpolation(seed: u64, count: usize) -> ExitCode {
    let psi1 = WeightSpec::exponential(0.5f64);
    let psi2 = WeightSpec::one();
    println!("family: {count} damped waves, seed {seed}; psi1 = e^x, psi2 = 1");
    println!("{:>8} {:>8} {:>14} {:>14} {:>10}", "q", "nodes", "max ratio", "refined 2x", "change");
    for q in [4.0, f64::INFINITY] {
        let mut ratios = Vec::new();
        for &n in &[1024usize, 2048] {
            let xs: Vec<f64> = (0..=n).map(|j| j as f64 * 30.0 / n as f64).collect();
            let family = damped_wave_family(seed, count, &xs);
            match interpolation_probe(&family, &xs, &psi1, &psi2, q) {
                Ok(r) => ratios.push(r),
                Err(e) => {
                    eprintln!("probe failed: {e}");
                    return exit_for(&e);
                }
            }
        }
        let change = (ratios[0] - ratios[1]).abs() / ratios[1];
        println!(
            "{:>8} {:>8} {:>14.6e} {:>14.6e} {:>9.2}%",
            if q.is_infinite() { "inf".into() } else { format!("{q}") },
            1024,
            ratios[0],
            ratios[1],
            100.0 * change
        );
    }
    ExitCode::SUCCESS
}

fn cmd_depend(
    config: Option<PathBuf>,
    preset: Option<String>,
    perturb: String,
    eps: Vec<f64>,
) -> ExitCode {
    let config = match load_config(config, preset) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    let families: Vec<PerturbationFamily> = match perturb.as_str() {
        "u0" => vec![PerturbationFamily::InitialData],
        "mu" => vec![PerturbationFamily::BoundaryData],
        "f" => vec![PerturbationFamily::Source],
        "all" => vec![
            PerturbationFamily::InitialData,
            PerturbationFamily::BoundaryData,
            PerturbationFamily::Source,
        ],
        other => {
            eprintln!("config rejected: unknown perturbation family {other:?}");
            return ExitCode::from(3);
        }
    };
    // theorem-regime gate for the dependence experiment
    if config.p > 2.0 {
        eprintln!("config rejected: continuous dependence needs p in [1, 2], got {}", config.p);
        return ExitCode::from(3);
    }

    let base = match hnls_core::scenario::build_problem::<f64>(&config) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    let weight = match WeightSpec::<f64>::parse(&config.weight) {
        Ok(w) => w,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    let reg = match RegularizedNonlinearity::new(config.reg_h, config.p) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("config rejected: {e}");
            return exit_for(&e);
        }
    };
    let opts = FixedPointOptions::default();

    // independent families run as a small worker pool
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = families
            .iter()
            .map(|family| {
                let base = &base;
                let weight = &weight;
                let reg = &reg;
                let opts = &opts;
                let eps = &eps;
                scope.spawn(move || {
                    continuous_dependence_experiment(base, &[*family], eps, weight, reg, opts)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(mut chunk) => rows.append(&mut chunk),
            Err(e) => {
                eprintln!("experiment failed: {e}");
                return exit_for(&e);
            }
        }
    }

    println!(
        "{:>4} {:>10} {:>16} {:>16} {:>12}",
        "data", "epsilon", "data distance", "solution dist", "ratio"
    );
    for row in &rows {
        println!(
            "{:>4} {:>10.1e} {:>16.6e} {:>16.6e} {:>12.4}",
            row.family.label(),
            row.epsilon,
            row.data_distance,
            row.solution_distance,
            row.ratio
        );
    }
    for family in &families {
        let spread = ratio_spread(&rows, *family);
        println!("{}: ratio spread across sweep = {spread:.3}", family.label());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { config, preset } => cmd_run(config, preset),
        Cmd::Converge { config, preset, levels } => cmd_converge(config, preset, levels),
        Cmd::CalibrateLambda0 { a, b } => cmd_calibrate(a, b),
        Cmd::ProbeInterpolation { seed, count } => cmd_probe_interpolation(seed, count),
        Cmd::Depend { config, preset, perturb, eps } => cmd_depend(config, preset, perturb, eps),
    }
}
