//! Command-line front end: solve | evolve | sweep-r | barriers | validate.

use clap::{Parser, Subcommand};
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wilhelmy::asymptotics::{barrier_check, barrier_recipe, r_sweep, write_sweep_csv};
use wilhelmy::config::{parse_config, write_profile_csv, RunConfig};
use wilhelmy::report::CheckReport;
use wilhelmy::evolution::{run, write_trace_csv};
use wilhelmy::solver::{initial_state, solve_equilibrium, EquilibriumMode};
use wilhelmy::suite::run_validation;

#[derive(Parser)]
#[command(name = "wilhelmy", about = "Axisymmetric capillary meniscus simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config's outputs.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Forbid randomized probe ordering; use deterministic enumerations.
    #[arg(long, global = true)]
    seedless: bool,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one equilibrium and write the profile CSV plus a state summary.
    Solve,
    /// Run the forcing schedule and write the evolution trace CSV.
    Evolve,
    /// Run the container sweep and write the convergence table.
    SweepR,
    /// Evaluate the supersolution barrier margins.
    Barriers,
    /// Run the verification battery and write a pass/fail summary.
    Validate,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let doc = json!({"error": e.to_string()});
            eprintln!("{doc}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<bool> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("--config PATH is required"))?;
    let text = fs::read_to_string(config_path)?;
    let cfg = parse_config(&text)?;
    let out_dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.out_dir));
    fs::create_dir_all(&out_dir)?;

    let result = dispatch(cli, &cfg, &out_dir);
    let (command, pass) = match &result {
        Ok((cmd, pass)) => (cmd.to_string(), *pass),
        Err(e) => {
            let doc = json!({"error": e.to_string()});
            fs::write(out_dir.join("error.json"), format!("{doc}\n"))?;
            return result.map(|(_, p)| p);
        }
    };

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "command": command,
        "config": config_path.display().to_string(),
        "timestamp_unix": timestamp,
        "version": env!("CARGO_PKG_VERSION"),
        "pass": pass,
    });
    fs::write(out_dir.join("metadata.json"), format!("{meta}\n"))?;
    Ok(pass)
}

fn dispatch(cli: &Cli, cfg: &RunConfig, out_dir: &Path) -> anyhow::Result<(&'static str, bool)> {
    match cli.command {
        Command::Solve => {
            let grid = cfg.make_grid()?;
            let f0 = cfg.schedule.f0;
            let s = solve_equilibrium(
                f0,
                &cfg.params,
                &grid,
                EquilibriumMode::Band { l_prev: f0 },
                &cfg.solver,
            )?;
            let mut buf = Vec::new();
            write_profile_csv(&s.profile, &mut buf)?;
            fs::write(out_dir.join("profile.csv"), buf)?;
            let energy = wilhelmy::energy::total_energy(&s.profile, s.f, &cfg.params)?;
            let state = json!({
                "F": s.f,
                "ell": s.ell(),
                "lambda": s.lambda,
                "cos_plate": s.cos_plate,
                "cos_container": s.cos_container,
                "regime": format!("{}", s.regime),
                "newton_iters": s.newton_iters,
                "kkt_residual": s.kkt_residual,
                "energy": energy,
            });
            fs::write(out_dir.join("state.json"), format!("{state}\n"))?;
            if !cli.quiet {
                println!(
                    "solve: ell = {:.6}, lambda = {:.6e}, regime = {}",
                    s.ell(),
                    s.lambda,
                    s.regime
                );
            }
            Ok(("solve", true))
        }
        Command::Evolve => {
            let grid = cfg.make_grid()?;
            let schedule = cfg.schedule()?;
            let init = initial_state(schedule.value(0.0), &cfg.params, &grid, &cfg.solver)?;
            let trace = run(&schedule, cfg.delta(), &cfg.params, &init, &cfg.solver)?;
            let mut buf = Vec::new();
            write_trace_csv(&trace, &mut buf)?;
            fs::write(out_dir.join("trace.csv"), buf)?;
            if !cli.quiet {
                println!(
                    "evolve: {} steps, dissipation = {:.6e}",
                    trace.steps.len(),
                    trace.steps.last().unwrap().diss_cum
                );
            }
            Ok(("evolve", true))
        }
        Command::SweepR => {
            let schedule = cfg.schedule()?;
            let report = r_sweep(
                &schedule,
                &cfg.sweep.r_list,
                cfg.delta(),
                &cfg.params,
                cfg.grid.n,
                &cfg.solver,
            )?;
            let mut buf = Vec::new();
            write_sweep_csv(&report, &mut buf)?;
            fs::write(out_dir.join("sweep.csv"), buf)?;
            let pass = report.failed.is_empty() && report.dissipation_variation < 0.2;
            let doc = CheckReport::new("sweep-r")
                .params(&cfg.params)
                .inputs(&json!({"r_list": cfg.sweep.r_list, "delta": cfg.delta()}))
                .outputs(&report)
                .margins(&json!({"gap_slope": report.gap_slope,
                                 "dissipation_variation": report.dissipation_variation}))
                .pass(pass);
            fs::write(
                out_dir.join("sweep.json"),
                format!("{}\n", serde_json::to_string_pretty(&doc)?),
            )?;
            if !cli.quiet {
                println!(
                    "sweep-r: gap slope {:.3}, dissipation variation {:.3}",
                    report.gap_slope, report.dissipation_variation
                );
                for f in &report.failed {
                    println!("sweep-r: failed run {f}");
                }
            }
            Ok(("sweep-r", pass))
        }
        Command::Barriers => {
            let p = &cfg.params;
            let (a, ca, b, cb) = cfg.barriers.explicit.unwrap_or_else(|| barrier_recipe(p));
            let report = barrier_check(a, ca, b, cb, p);
            let doc = CheckReport::new("barriers")
                .params(p)
                .inputs(&json!({"a": a, "A": ca, "b": b, "B": cb}))
                .outputs(&report)
                .margins(&json!({"interior": report.interior_margin,
                                 "plate": report.plate_margin,
                                 "container": report.container_margin}))
                .pass(report.all_positive);
            fs::write(
                out_dir.join("barriers.json"),
                format!("{}\n", serde_json::to_string_pretty(&doc)?),
            )?;
            if !cli.quiet {
                println!(
                    "barriers: interior {:.4}, plate {:.4}, container {:.4}",
                    report.interior_margin, report.plate_margin, report.container_margin
                );
            }
            Ok(("barriers", report.all_positive))
        }
        Command::Validate => {
            let reports = run_validation(cfg, cli.seedless, cli.quiet)?;
            let all_pass = reports.iter().all(|r| r.pass);
            let doc = json!({
                "checks": reports,
                "all_pass": all_pass,
            });
            fs::write(
                out_dir.join("validate.json"),
                format!("{}\n", serde_json::to_string_pretty(&doc)?),
            )?;
            if !cli.quiet {
                println!("validate: {}", if all_pass { "ALL PASS" } else { "FAILURES" });
            }
            Ok(("validate", all_pass))
        }
    }
}
