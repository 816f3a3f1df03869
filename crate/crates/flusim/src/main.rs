//! Command-line front end for batch epidemic scenarios.

use clap::{Parser, Subcommand};
use flusim::error::Error;
use flusim::population::dump_population_csv;
use flusim::scenario::{
    compare_scenarios, initial_agents, parse_config, render_table, run_scenario,
    simulate_scenario, validate_alignment, ScenarioConfig,
};
use flusim::sir::{final_size, integrate, SirParams};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "flusim",
    version,
    about = "Stochastic agent-based influenza simulator with an SIR reference model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write census, aggregate and summary files.
    Run {
        /// Path to a scenario JSON document.
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the config's run seeds (comma-separated).
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Suppress the summary printout.
        #[arg(long)]
        quiet: bool,
        /// Also write the synthesized starting population as CSV.
        #[arg(long)]
        dump_population: bool,
    },
    /// Run two scenarios with paired seeds and print outcome deltas.
    Compare {
        /// Baseline scenario config.
        baseline: PathBuf,
        /// Variant scenario config; must share population, days and seeds.
        variant: PathBuf,
    },
    /// Run a control-free scenario against the SIR reference curve.
    ValidateAlignment {
        /// Path to a scenario JSON document without strategies.
        config: PathBuf,
    },
    /// Integrate the SIR reference model on its own.
    Sir {
        /// Basic reproduction number.
        #[arg(long, default_value_t = 3.0)]
        r0: f64,
        /// Mean infectious duration in days.
        #[arg(long, default_value_t = 9.5)]
        infectious_days: f64,
        /// Initially infected fraction.
        #[arg(long, default_value_t = 1e-4)]
        i0: f64,
        /// Initially immunized fraction.
        #[arg(long, default_value_t = 0.0)]
        m0: f64,
        /// Integration horizon in days.
        #[arg(long, default_value_t = 500.0)]
        t_end: f64,
        /// Integration step in days.
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// Write the trajectory as CSV here instead of summarizing only.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { config, output_dir, seeds, quiet, dump_population } => {
            let mut config = load_config(&config)?;
            if let Some(dir) = output_dir {
                config.output_dir = dir;
            }
            if let Some(seeds) = seeds {
                if seeds.is_empty() {
                    return Err(Error::config("--seeds", "at least one seed required"));
                }
                config.run_seeds = seeds;
            }
            let report = run_scenario(&config)?;
            if dump_population {
                let agents = initial_agents(&config)?;
                let mut out =
                    BufWriter::new(File::create(config.output_dir.join("population.csv"))?);
                dump_population_csv(&agents, &mut out)?;
                out.flush()?;
            }
            if !quiet {
                println!(
                    "scenario `{}`: {} seeds over {} days, population {}",
                    report.scenario,
                    report.seeds.len(),
                    report.days,
                    report.population
                );
                println!(
                    "  peak infected  median {:.0} (q10 {:.0}, q90 {:.0})",
                    report.stats.peak_infected.median,
                    report.stats.peak_infected.q10,
                    report.stats.peak_infected.q90
                );
                println!("  peak day       median {:.0}", report.stats.peak_day.median);
                println!(
                    "  attack rate    median {:.3}",
                    report.stats.attack_rate.median
                );
                println!("  dead           median {:.0}", report.stats.total_dead.median);
                match report.stats.estimated_r {
                    Some(r) => println!("  estimated R    mean {:.2}", r.mean),
                    None => println!("  estimated R    undefined (no resolved cases)"),
                }
                println!("  artifacts in {}", config.output_dir.display());
            }
            Ok(())
        }
        Command::Compare { baseline, variant } => {
            let base_config = load_config(&baseline)?;
            let var_config = load_config(&variant)?;
            let (base_report, _) = simulate_scenario(&base_config)?;
            let (var_report, _) = simulate_scenario(&var_config)?;
            let comparison = compare_scenarios(&base_report, &var_report)?;
            print!("{}", render_table(&comparison));
            Ok(())
        }
        Command::ValidateAlignment { config } => {
            let config = load_config(&config)?;
            let outcome = validate_alignment(&config)?;
            println!(
                "alignment `{}`: {} seeds vs SIR peak day {}",
                outcome.scenario,
                outcome.seeds.len(),
                outcome.ode_peak_day
            );
            println!("  unimodal fraction      {:.2}", outcome.unimodal_fraction);
            println!("  peak within ±5 days    {:.2}", outcome.within_5_days_fraction);
            println!("  mean infected RMSE     {:.4}", outcome.mean_rmse);
            println!("  artifacts in {}", config.output_dir.display());
            Ok(())
        }
        Command::Sir { r0, infectious_days, i0, m0, t_end, dt, output } => {
            let params = SirParams::from_r0(r0, infectious_days, i0, m0);
            let traj = integrate(&params, t_end, dt)?;
            let (t_peak, i_peak) = traj.peak_infected();
            let last = traj.samples.last().expect("integration yields samples");
            println!("SIR r0={r0} gamma={:.6}/day i0={i0} m0={m0}", params.gamma);
            println!("  peak infected fraction {i_peak:.6} at t = {t_peak:.2} days");
            println!("  integrated final size  {:.6}", last.r);
            println!("  analytic final size    {:.6}", final_size(r0));
            if let Some(path) = output {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                let mut out = BufWriter::new(File::create(&path)?);
                traj.write_csv(&mut out)?;
                out.flush()?;
                println!("  trajectory written to {}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            if err.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
