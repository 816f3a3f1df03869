//! Injectable outbreak control strategies.
//!
//! Four interventions can be scheduled over day windows: awareness
//! campaigns (raise the self-quarantine probability), vaccination
//! (immunize part of the susceptible pool over the window), social
//! distancing (shrink daily contact lists), and active quarantining
//! (move circulating infectious agents into isolation).

use crate::disease::{DiseaseParams, HealthState};
use crate::error::Error;
use crate::population::Agent;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// The four supported intervention families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlKind {
    /// Public messaging that raises the probability an infectious agent
    /// self-quarantines instead of circulating.
    Awareness,
    /// Immunizes susceptible and in-contact agents, spreading the covered
    /// fraction evenly across the active window.
    Vaccination,
    /// Cuts every agent's daily contact budget by the coverage fraction.
    SocialDistancing,
    /// Detects circulating infectious agents and isolates them.
    Quarantining,
}

impl ControlKind {
    pub const ALL: [ControlKind; 4] = [
        ControlKind::Awareness,
        ControlKind::Vaccination,
        ControlKind::SocialDistancing,
        ControlKind::Quarantining,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ControlKind::Awareness => "awareness",
            ControlKind::Vaccination => "vaccination",
            ControlKind::SocialDistancing => "social_distancing",
            ControlKind::Quarantining => "quarantining",
        }
    }
}

/// One scheduled intervention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlStrategy {
    pub kind: ControlKind,
    /// Fraction of the target affected, in [0, 1].
    pub coverage: f64,
    /// First active day (inclusive).
    pub start_day: u32,
    /// Last active day (inclusive).
    pub end_day: u32,
}

impl ControlStrategy {
    pub fn new(kind: ControlKind, coverage: f64, start_day: u32, end_day: u32) -> ControlStrategy {
        ControlStrategy { kind, coverage, start_day, end_day }
    }

    /// True when `day` falls inside the scheduled window.
    pub fn active_on(&self, day: u32) -> bool {
        (self.start_day..=self.end_day).contains(&day)
    }

    /// Number of days in the window.
    pub fn window_days(&self) -> u32 {
        self.end_day - self.start_day + 1
    }

    /// Field-level checks; the caller supplies the config path context.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if !(0.0..=1.0).contains(&self.coverage) || !self.coverage.is_finite() {
            return Err((
                "coverage",
                format!("coverage must lie in [0, 1], got {}", self.coverage),
            ));
        }
        if self.end_day < self.start_day {
            return Err((
                "end_day",
                format!("end_day {} precedes start_day {}", self.end_day, self.start_day),
            ));
        }
        Ok(())
    }
}

/// Validates every strategy and rejects overlapping windows of the same
/// kind, which would double-apply an intervention.
pub fn validate_strategies(strategies: &[ControlStrategy]) -> Result<(), Error> {
    for (i, s) in strategies.iter().enumerate() {
        s.validate()
            .map_err(|(field, message)| Error::config(format!("strategies[{i}].{field}"), message))?;
    }
    for (i, a) in strategies.iter().enumerate() {
        for (j, b) in strategies.iter().enumerate().skip(i + 1) {
            if a.kind == b.kind && a.start_day <= b.end_day && b.start_day <= a.end_day {
                return Err(Error::config(
                    format!("strategies[{j}]"),
                    format!(
                        "{} windows [{}, {}] and [{}, {}] overlap",
                        a.kind.label(),
                        a.start_day,
                        a.end_day,
                        b.start_day,
                        b.end_day
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Per-day modifiers produced by the active strategies: the (possibly
/// adjusted) disease parameters and a multiplier on contact-list length.
#[derive(Debug, Clone, PartialEq)]
pub struct DayEffects {
    pub params: DiseaseParams,
    pub contact_scale: f64,
}

impl DayEffects {
    pub fn baseline(params: &DiseaseParams) -> DayEffects {
        DayEffects { params: *params, contact_scale: 1.0 }
    }
}

/// Applies every strategy active on `day`, in a fixed kind order so runs
/// are reproducible. Agent-touching strategies draw once per eligible
/// agent; strategies with zero coverage draw nothing.
pub fn apply_controls<R: Rng>(
    strategies: &[ControlStrategy],
    day: u32,
    base_params: &DiseaseParams,
    agents: &mut [Agent],
    rng: &mut R,
) -> DayEffects {
    let mut effects = DayEffects::baseline(base_params);
    for kind in ControlKind::ALL {
        for strategy in strategies.iter().filter(|s| s.kind == kind) {
            if !strategy.active_on(day) || strategy.coverage <= 0.0 {
                continue;
            }
            match kind {
                ControlKind::Awareness => {
                    // Awareness lifts self-quarantine uptake toward one.
                    let p = effects.params.p_quarantine;
                    effects.params.p_quarantine = p + strategy.coverage * (1.0 - p);
                }
                ControlKind::Vaccination => {
                    // Spread the covered fraction evenly over the window so
                    // the whole window immunizes ~coverage of the pool.
                    let daily = strategy.coverage / f64::from(strategy.window_days());
                    for agent in agents.iter_mut() {
                        if matches!(agent.state, HealthState::Susceptible | HealthState::InContact)
                            && rng.gen_bool(daily.min(1.0))
                        {
                            agent.state = HealthState::Immunized;
                            agent.clock.days_in_state = 0;
                        }
                    }
                }
                ControlKind::SocialDistancing => {
                    effects.contact_scale *= 1.0 - strategy.coverage;
                }
                ControlKind::Quarantining => {
                    for agent in agents.iter_mut() {
                        if matches!(agent.state, HealthState::Infectious | HealthState::NotQuarantined)
                            && rng.gen_bool(strategy.coverage)
                        {
                            // The clock keeps running: isolation does not
                            // restart the disease course.
                            agent.state = HealthState::Quarantined;
                        }
                    }
                }
            }
        }
    }
    effects
}
