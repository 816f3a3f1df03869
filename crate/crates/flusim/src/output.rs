//! Artifact writers: per-run census CSVs, cross-seed aggregate curves,
//! social-type breakdown tables, and JSON summaries.

use crate::disease::HealthState;
use crate::engine::DailyCensus;
use crate::population::{Agent, SocialType};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Mean and order statistics of one metric across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Median with the midpoint convention for even-length input.
pub fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2],
        n => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
    }
}

/// Nearest-rank quantile: the smallest element with at least `q` of the
/// mass at or below it.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn summarize(xs: &[f64]) -> Stats {
    Stats { mean: mean(xs), median: median(xs), q10: quantile(xs, 0.1), q90: quantile(xs, 0.9) }
}

/// Writes one run's census series, one row per day.
pub fn write_census_csv<W: Write>(census: &[DailyCensus], out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "day,S,C,E,I,Q,NQ,D,R,M,new_infections,cumulative_infected"
    )?;
    for row in census {
        write!(out, "{}", row.day)?;
        for state in HealthState::ALL {
            write!(out, ",{}", row.count(state))?;
        }
        writeln!(out, ",{},{}", row.new_infections, row.cumulative_infected)?;
    }
    Ok(())
}

const AGGREGATE_METRICS: [&str; 5] =
    ["susceptible", "infected", "removed", "new_infections", "cumulative_infected"];

fn census_metric(census: &DailyCensus, metric: &str) -> f64 {
    f64::from(match metric {
        "susceptible" => census.count(HealthState::Susceptible),
        "infected" => census.infected_aggregate(),
        "removed" => census.removed_aggregate(),
        "new_infections" => census.new_infections,
        "cumulative_infected" => census.cumulative_infected,
        other => unreachable!("unknown metric {other}"),
    })
}

/// Writes cross-seed mean/median/decile curves, one row per day. All runs
/// must cover the same day range.
pub fn write_aggregate_csv<W: Write>(
    runs: &[Vec<DailyCensus>],
    out: &mut W,
) -> std::io::Result<()> {
    write!(out, "day")?;
    for metric in AGGREGATE_METRICS {
        for stat in ["mean", "median", "q10", "q90"] {
            write!(out, ",{metric}_{stat}")?;
        }
    }
    writeln!(out)?;
    let days = runs.iter().map(|r| r.len()).min().unwrap_or(0);
    let mut values = Vec::with_capacity(runs.len());
    for day in 0..days {
        write!(out, "{day}")?;
        for metric in AGGREGATE_METRICS {
            values.clear();
            values.extend(runs.iter().map(|run| census_metric(&run[day], metric)));
            let stats = summarize(&values);
            write!(
                out,
                ",{},{},{},{}",
                stats.mean, stats.median, stats.q10, stats.q90
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Final head-count of each health state within each social type.
pub fn social_breakdown(agents: &[Agent]) -> [[u32; 9]; 12] {
    let mut table = [[0u32; 9]; 12];
    for agent in agents {
        table[agent.social_type.index()][agent.state.index()] += 1;
    }
    table
}

/// Element-wise mean of per-seed breakdown tables.
pub fn mean_breakdown(tables: &[[[u32; 9]; 12]]) -> [[f64; 9]; 12] {
    let mut result = [[0.0f64; 9]; 12];
    if tables.is_empty() {
        return result;
    }
    for table in tables {
        for (row_out, row_in) in result.iter_mut().zip(table) {
            for (cell_out, cell_in) in row_out.iter_mut().zip(row_in) {
                *cell_out += f64::from(*cell_in);
            }
        }
    }
    for row in &mut result {
        for cell in row.iter_mut() {
            *cell /= tables.len() as f64;
        }
    }
    result
}

/// Writes the 12-social-type × 9-state table of mean final counts.
pub fn write_breakdown_csv<W: Write>(
    breakdown: &[[f64; 9]; 12],
    out: &mut W,
) -> std::io::Result<()> {
    write!(out, "social_type")?;
    for state in HealthState::ALL {
        write!(out, ",{}", state.code())?;
    }
    writeln!(out)?;
    for (social_type, row) in SocialType::ALL.iter().zip(breakdown) {
        write!(out, "{}", social_type.label())?;
        for cell in row {
            write!(out, ",{cell}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Serializes any report as pretty JSON at `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), crate::error::Error> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::Numeric(format!("serialization failed: {e}")))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}
