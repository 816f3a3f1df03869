//! Scenario configuration, batch execution and reporting.
//!
//! A scenario is a JSON document naming a population, a day count, a list
//! of run seeds and optional disease overrides and control strategies.
//! Every seed runs an independent world; summaries aggregate across the
//! seeds with means, medians and deciles, because single stochastic
//! trajectories are not reproducible claims.

use crate::control::{validate_strategies, ControlStrategy};
use crate::disease::{DiseaseParams, HealthState};
use crate::engine::{DailyCensus, Mode, World, WorldSettings};
use crate::error::Error;
use crate::output::{
    mean, mean_breakdown, social_breakdown, summarize, write_aggregate_csv, write_breakdown_csv,
    write_census_csv, write_json, Stats,
};
use crate::population::{synthesize_population, Agent, SocialType};
use crate::sir::{align_abm, integrate, AlignmentReport, SirParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::PathBuf;

/// Optional per-field replacements for the default disease parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiseaseOverrides {
    pub latent_days: Option<u32>,
    pub p_transmit: Option<f64>,
    pub p_quarantine: Option<f64>,
    pub p_recover: Option<f64>,
    pub p_dead: Option<f64>,
    pub p_immunize: Option<f64>,
    pub t_recover_min: Option<u32>,
    pub t_recover_max: Option<u32>,
}

impl DiseaseOverrides {
    pub fn apply(&self, mut params: DiseaseParams) -> DiseaseParams {
        if let Some(v) = self.latent_days {
            params.latent_days = v;
        }
        if let Some(v) = self.p_transmit {
            params.p_transmit = v;
        }
        if let Some(v) = self.p_quarantine {
            params.p_quarantine = v;
        }
        if let Some(v) = self.p_recover {
            params.p_recover = v;
        }
        if let Some(v) = self.p_dead {
            params.p_dead = v;
        }
        if let Some(v) = self.p_immunize {
            params.p_immunize = v;
        }
        if let Some(v) = self.t_recover_min {
            params.t_recover_min = v;
        }
        if let Some(v) = self.t_recover_max {
            params.t_recover_max = v;
        }
        params
    }
}

/// The scenario document as written on disk; unset fields take defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarioConfig {
    name: Option<String>,
    days: Option<u32>,
    population: Option<usize>,
    initial_infected: Option<usize>,
    population_seed: Option<u64>,
    run_seeds: Option<Vec<u64>>,
    mode: Option<Mode>,
    disease: Option<DiseaseOverrides>,
    strategies: Option<Vec<ControlStrategy>>,
    landscape_side: Option<f64>,
    output_dir: Option<PathBuf>,
}

/// A fully resolved, validated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub days: u32,
    pub population: usize,
    pub initial_infected: usize,
    pub population_seed: u64,
    pub run_seeds: Vec<u64>,
    pub mode: Mode,
    pub disease: DiseaseParams,
    pub strategies: Vec<ControlStrategy>,
    pub landscape_side: f64,
    pub output_dir: PathBuf,
}

/// Parses and validates a scenario JSON document. Schema violations are
/// reported with the offending key path.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Error> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawScenarioConfig = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::config(e.path().to_string(), e.inner().to_string()))?;
    resolve_config(raw)
}

fn resolve_config(raw: RawScenarioConfig) -> Result<ScenarioConfig, Error> {
    let name = raw.name.unwrap_or_else(|| "scenario".to_string());
    if name.trim().is_empty() {
        return Err(Error::config("name", "scenario name must not be blank"));
    }
    let days = raw.days.unwrap_or(50);
    if days == 0 {
        return Err(Error::config("days", "at least one simulated day required"));
    }
    let population = raw
        .population
        .ok_or_else(|| Error::config("population", "population is required"))?;
    if population == 0 {
        return Err(Error::config("population", "population must be at least 1"));
    }
    let initial_infected = raw.initial_infected.unwrap_or(3);
    if initial_infected == 0 || initial_infected > population {
        return Err(Error::config(
            "initial_infected",
            format!("initial_infected must lie in [1, {population}], got {initial_infected}"),
        ));
    }
    let run_seeds = raw.run_seeds.unwrap_or_default();
    if run_seeds.is_empty() {
        return Err(Error::config("run_seeds", "at least one seed required"));
    }
    let mut sorted = run_seeds.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::config("run_seeds", "seeds must be distinct"));
    }
    let landscape_side = raw.landscape_side.unwrap_or(1000.0);
    if !(landscape_side.is_finite() && landscape_side > 0.0) {
        return Err(Error::config(
            "landscape_side",
            format!("landscape side must be positive, got {landscape_side}"),
        ));
    }
    let disease = raw.disease.unwrap_or_default().apply(DiseaseParams::default());
    disease
        .validate()
        .map_err(|(field, message)| Error::config(format!("disease.{field}"), message))?;
    let strategies = raw.strategies.unwrap_or_default();
    validate_strategies(&strategies)?;
    let output_dir = raw
        .output_dir
        .unwrap_or_else(|| PathBuf::from("out").join(&name));
    Ok(ScenarioConfig {
        name,
        days,
        population,
        initial_infected,
        population_seed: raw.population_seed.unwrap_or(0),
        run_seeds,
        mode: raw.mode.unwrap_or(Mode::Closed),
        disease,
        strategies,
        landscape_side,
        output_dir,
    })
}

/// Outcome of a single seeded run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    /// Maximum simultaneous infections (all infected states) over the run.
    pub peak_infected: u32,
    /// Earliest day attaining the peak.
    pub peak_day: u32,
    /// Fraction of the final population ever infected (seeds included).
    pub attack_rate: f64,
    /// Distinct agents ever infected during the run, seeds included.
    pub cumulative_infected: u32,
    pub total_dead: u32,
    /// Mean secondary infections per resolved case, when any resolved.
    pub estimated_r: Option<f64>,
    /// End-of-run head-count per health state.
    pub final_counts: [u32; 9],
}

/// One seed's full output: the census series plus its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub census: Vec<DailyCensus>,
    pub summary: SeedSummary,
    pub breakdown: [[u32; 9]; 12],
}

/// Cross-seed statistics of the headline metrics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub peak_infected: Stats,
    pub peak_day: Stats,
    pub attack_rate: Stats,
    pub total_dead: Stats,
    /// Aggregated over the seeds where an estimate exists.
    pub estimated_r: Option<Stats>,
}

/// Mean final head-count per health state for one social type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakdownRow {
    pub social_type: &'static str,
    pub counts: [f64; 9],
}

/// The aggregated result of a scenario batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryReport {
    pub scenario: String,
    pub mode: Mode,
    pub population: usize,
    pub days: u32,
    pub population_seed: u64,
    pub seeds: Vec<SeedSummary>,
    pub stats: SummaryStats,
    pub social_breakdown: Vec<BreakdownRow>,
}

/// The agents a run starts from: the whole synthetic population in Closed
/// mode, just the future seeds in Open mode (everyone else is met later).
pub fn initial_agents(config: &ScenarioConfig) -> Result<Vec<Agent>, Error> {
    let n = match config.mode {
        Mode::Closed => config.population,
        Mode::Open => config.initial_infected,
    };
    synthesize_population(n, config.landscape_side, config.population_seed)
}

fn run_one_seed(config: &ScenarioConfig, agents: Vec<Agent>, seed: u64) -> Result<SeedRun, Error> {
    let settings = WorldSettings {
        landscape_side: config.landscape_side,
        mode: config.mode,
        population_cap: config.population,
        max_step: 20.0,
        p_network: 0.6,
    };
    let mut world = World::new(agents, config.disease, config.strategies.clone(), settings, seed)?;
    world.seed_infections(config.initial_infected)?;
    let census = world.run(config.days);

    let mut peak_infected = 0u32;
    let mut peak_day = 0u32;
    for row in &census {
        let infected = row.infected_aggregate();
        if infected > peak_infected {
            peak_infected = infected;
            peak_day = row.day;
        }
    }
    let last = census.last().expect("days >= 1 guarantees a census row");
    let summary = SeedSummary {
        seed,
        peak_infected,
        peak_day,
        attack_rate: f64::from(last.cumulative_infected) / f64::from(last.total()),
        cumulative_infected: last.cumulative_infected,
        total_dead: last.count(HealthState::Dead),
        estimated_r: world.estimate_r(),
        final_counts: last.counts,
    };
    let breakdown = social_breakdown(&world.agents);
    Ok(SeedRun { seed, census, summary, breakdown })
}

/// Runs every seed of the scenario in parallel and aggregates, without
/// touching the filesystem.
pub fn simulate_scenario(config: &ScenarioConfig) -> Result<(SummaryReport, Vec<SeedRun>), Error> {
    let base_agents = initial_agents(config)?;
    let runs: Vec<SeedRun> = config
        .run_seeds
        .par_iter()
        .map(|&seed| run_one_seed(config, base_agents.clone(), seed))
        .collect::<Result<_, _>>()?;

    let metric = |f: &dyn Fn(&SeedSummary) -> f64| -> Vec<f64> {
        runs.iter().map(|r| f(&r.summary)).collect()
    };
    let r_values: Vec<f64> = runs.iter().filter_map(|r| r.summary.estimated_r).collect();
    let stats = SummaryStats {
        peak_infected: summarize(&metric(&|s| f64::from(s.peak_infected))),
        peak_day: summarize(&metric(&|s| f64::from(s.peak_day))),
        attack_rate: summarize(&metric(&|s| s.attack_rate)),
        total_dead: summarize(&metric(&|s| f64::from(s.total_dead))),
        estimated_r: if r_values.is_empty() { None } else { Some(summarize(&r_values)) },
    };
    let breakdown_tables: Vec<[[u32; 9]; 12]> = runs.iter().map(|r| r.breakdown).collect();
    let breakdown = mean_breakdown(&breakdown_tables);
    let social_breakdown = SocialType::ALL
        .iter()
        .zip(breakdown)
        .map(|(t, counts)| BreakdownRow { social_type: t.label(), counts })
        .collect();

    let report = SummaryReport {
        scenario: config.name.clone(),
        mode: config.mode,
        population: config.population,
        days: config.days,
        population_seed: config.population_seed,
        seeds: runs.iter().map(|r| r.summary.clone()).collect(),
        stats,
        social_breakdown,
    };
    Ok((report, runs))
}

/// Runs the scenario and writes its artifact files: one census CSV per
/// seed, aggregate curves, the social-type breakdown and a JSON summary.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SummaryReport, Error> {
    let (report, runs) = simulate_scenario(config)?;
    std::fs::create_dir_all(&config.output_dir)?;
    for run in &runs {
        let path = config.output_dir.join(format!("census_seed{}.csv", run.seed));
        let mut out = BufWriter::new(File::create(path)?);
        write_census_csv(&run.census, &mut out)?;
        out.flush()?;
    }
    let all_census: Vec<Vec<DailyCensus>> = runs.iter().map(|r| r.census.clone()).collect();
    let mut out = BufWriter::new(File::create(config.output_dir.join("aggregate.csv"))?);
    write_aggregate_csv(&all_census, &mut out)?;
    out.flush()?;
    let tables: Vec<[[u32; 9]; 12]> = runs.iter().map(|r| r.breakdown).collect();
    let mut out = BufWriter::new(File::create(config.output_dir.join("breakdown.csv"))?);
    write_breakdown_csv(&mean_breakdown(&tables), &mut out)?;
    out.flush()?;
    write_json(&config.output_dir.join("summary.json"), &report)?;
    Ok(report)
}

/// Paired-seed deltas (variant minus baseline) for one metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricComparison {
    pub metric: &'static str,
    pub mean_delta: f64,
    pub median_delta: f64,
    /// Sign counts over the pairs: (variant lower, tied, variant higher).
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Seed-paired comparison of two scenario batches.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub baseline: String,
    pub variant: String,
    pub pairs: usize,
    pub metrics: Vec<MetricComparison>,
}

/// Pairs the two reports seed by seed and summarizes the outcome deltas.
/// Both batches must cover the same population, days and seed set.
pub fn compare_scenarios(
    baseline: &SummaryReport,
    variant: &SummaryReport,
) -> Result<Comparison, Error> {
    if baseline.population != variant.population {
        return Err(Error::SeedMismatch(format!(
            "populations differ: {} vs {}",
            baseline.population, variant.population
        )));
    }
    if baseline.days != variant.days {
        return Err(Error::SeedMismatch(format!(
            "day counts differ: {} vs {}",
            baseline.days, variant.days
        )));
    }
    let base_seeds: Vec<u64> = baseline.seeds.iter().map(|s| s.seed).collect();
    let var_seeds: Vec<u64> = variant.seeds.iter().map(|s| s.seed).collect();
    if base_seeds != var_seeds {
        return Err(Error::SeedMismatch(format!(
            "seed sets differ: {base_seeds:?} vs {var_seeds:?}"
        )));
    }

    let deltas = |f: &dyn Fn(&SeedSummary) -> f64| -> Vec<f64> {
        baseline
            .seeds
            .iter()
            .zip(&variant.seeds)
            .map(|(b, v)| f(v) - f(b))
            .collect()
    };
    let comparison = |name: &'static str, ds: Vec<f64>| MetricComparison {
        metric: name,
        mean_delta: mean(&ds),
        median_delta: crate::output::median(&ds),
        negative: ds.iter().filter(|&&d| d < 0.0).count(),
        zero: ds.iter().filter(|&&d| d == 0.0).count(),
        positive: ds.iter().filter(|&&d| d > 0.0).count(),
    };
    Ok(Comparison {
        baseline: baseline.scenario.clone(),
        variant: variant.scenario.clone(),
        pairs: baseline.seeds.len(),
        metrics: vec![
            comparison("peak_infected", deltas(&|s| f64::from(s.peak_infected))),
            comparison("peak_day", deltas(&|s| f64::from(s.peak_day))),
            comparison("attack_rate", deltas(&|s| s.attack_rate)),
            comparison("total_dead", deltas(&|s| f64::from(s.total_dead))),
            comparison("cumulative_infected", deltas(&|s| f64::from(s.cumulative_infected))),
        ],
    })
}

/// Renders a comparison as an aligned text table.
pub fn render_table(comparison: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} vs {} over {} paired seeds (delta = variant - baseline)",
        comparison.variant, comparison.baseline, comparison.pairs
    );
    let _ = writeln!(
        out,
        "{:<22} {:>12} {:>12} {:>6} {:>6} {:>6}",
        "metric", "mean", "median", "lower", "tied", "higher"
    );
    for m in &comparison.metrics {
        let _ = writeln!(
            out,
            "{:<22} {:>12.4} {:>12.4} {:>6} {:>6} {:>6}",
            m.metric, m.mean_delta, m.median_delta, m.negative, m.zero, m.positive
        );
    }
    out
}

/// One seed's alignment against the compartment model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedAlignment {
    pub seed: u64,
    pub report: AlignmentReport,
}

/// Batch alignment of the agent model against the SIR reference curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentOutcome {
    pub scenario: String,
    pub ode_peak_day: u32,
    pub ode_peak_height: f64,
    pub seeds: Vec<SeedAlignment>,
    /// Fraction of seeds whose infected curve is unimodal.
    pub unimodal_fraction: f64,
    /// Fraction of seeds whose peak lands within ±5 days of the ODE peak.
    pub within_5_days_fraction: f64,
    pub mean_rmse: f64,
}

/// Reproduction number and infectious duration fixed for the reference
/// compartment model the agent runs are compared against.
pub const ALIGNMENT_R0: f64 = 3.0;
pub const ALIGNMENT_INFECTIOUS_DAYS: f64 = 9.5;

/// Runs a control-free scenario and aligns every seed against the
/// matching SIR trajectory (same initial infected fraction), writing the
/// reference curve, each seed's normalized curves and a JSON report.
pub fn validate_alignment(config: &ScenarioConfig) -> Result<AlignmentOutcome, Error> {
    if !config.strategies.is_empty() {
        return Err(Error::config(
            "strategies",
            "alignment runs must not enable control strategies",
        ));
    }
    let i0 = config.initial_infected as f64 / config.population as f64;
    let params = SirParams::from_r0(ALIGNMENT_R0, ALIGNMENT_INFECTIOUS_DAYS, i0, 0.0);
    let traj = integrate(&params, f64::from(config.days), 0.01)?;
    let (_, runs) = simulate_scenario(config)?;

    let seeds: Vec<SeedAlignment> = runs
        .iter()
        .map(|run| SeedAlignment { seed: run.seed, report: align_abm(&run.census, &traj) })
        .collect();
    let n = seeds.len() as f64;
    let unimodal_fraction = seeds.iter().filter(|s| s.report.unimodal).count() as f64 / n;
    let within_5_days_fraction =
        seeds.iter().filter(|s| s.report.peak_day_diff.abs() <= 5).count() as f64 / n;
    let mean_rmse = mean(&seeds.iter().map(|s| s.report.rmse).collect::<Vec<_>>());
    let outcome = AlignmentOutcome {
        scenario: config.name.clone(),
        ode_peak_day: seeds.first().map(|s| s.report.ode_peak_day).unwrap_or(0),
        ode_peak_height: seeds.first().map(|s| s.report.ode_peak_height).unwrap_or(0.0),
        seeds,
        unimodal_fraction,
        within_5_days_fraction,
        mean_rmse,
    };

    std::fs::create_dir_all(&config.output_dir)?;
    let mut out = BufWriter::new(File::create(config.output_dir.join("sir_curve.csv"))?);
    traj.write_csv(&mut out)?;
    out.flush()?;
    for run in &runs {
        let path = config.output_dir.join(format!("abm_curves_seed{}.csv", run.seed));
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "day,s,i,r")?;
        for (day, (s, i, r)) in crate::sir::census_fractions(&run.census).iter().enumerate() {
            writeln!(out, "{day},{s},{i},{r}")?;
        }
        out.flush()?;
    }
    write_json(&config.output_dir.join("alignment.json"), &outcome)?;
    Ok(outcome)
}
