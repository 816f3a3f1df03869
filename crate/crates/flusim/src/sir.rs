//! Classical SIR compartment model.
//!
//! The normalized system s' = −βsi, i' = βsi − γi, r' = γi is integrated
//! with a fixed-step fourth-order Runge–Kutta scheme. Two closed-form
//! oracles — the epidemic peak `i_max = 1 − (1 + ln R₀)/R₀` and the final
//! size root of `r = 1 − exp(−R₀ r)` — validate the integrator, and
//! [`align_abm`] compares agent-based output against the compartment
//! curves.

use crate::engine::DailyCensus;
use crate::error::Error;
use serde::Serialize;
use std::io::Write;

/// Rates and initial conditions for the normalized SIR system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirParams {
    /// Transmission rate per day.
    pub beta: f64,
    /// Recovery rate per day.
    pub gamma: f64,
    /// Basic reproduction number; always beta / gamma.
    pub r0: f64,
    /// Initially infected fraction.
    pub i0: f64,
    /// Initially immunized fraction.
    pub m0: f64,
}

impl SirParams {
    pub fn from_rates(beta: f64, gamma: f64, i0: f64, m0: f64) -> SirParams {
        SirParams { beta, gamma, r0: beta / gamma, i0, m0 }
    }

    /// Builds parameters from an R₀ and a mean infectious duration in days.
    pub fn from_r0(r0: f64, infectious_days: f64, i0: f64, m0: f64) -> SirParams {
        let gamma = 1.0 / infectious_days;
        SirParams { beta: r0 * gamma, gamma, r0, i0, m0 }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |message: String| Err(Error::config("sir", message));
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.i0) {
            return bad(format!("i0 must lie in [0, 1], got {}", self.i0));
        }
        if !(0.0..1.0).contains(&self.m0) {
            return bad(format!("m0 must lie in [0, 1), got {}", self.m0));
        }
        if self.i0 + self.m0 > 1.0 {
            return bad(format!("i0 + m0 must not exceed 1, got {}", self.i0 + self.m0));
        }
        let implied = self.beta / self.gamma;
        if (self.r0 - implied).abs() > 1e-12 * implied.max(1.0) {
            return bad(format!("r0 {} does not equal beta/gamma {implied}", self.r0));
        }
        Ok(())
    }
}

/// One integration sample of the normalized compartments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SirSample {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

/// Fixed-step solution of the SIR system.
#[derive(Debug, Clone, PartialEq)]
pub struct SirTrajectory {
    pub dt: f64,
    pub samples: Vec<SirSample>,
}

impl SirTrajectory {
    /// The sample with maximal infected fraction; the earliest one wins
    /// ties, so a monotone-decreasing epidemic peaks at t = 0.
    pub fn peak_infected(&self) -> (f64, f64) {
        let mut best = (0.0, f64::NEG_INFINITY);
        for sample in &self.samples {
            if sample.i > best.1 {
                best = (sample.t, sample.i);
            }
        }
        if best.1.is_finite() {
            best
        } else {
            (0.0, 0.0)
        }
    }

    /// The sample closest to day `day`.
    pub fn at_day(&self, day: u32) -> SirSample {
        let idx = (f64::from(day) / self.dt).round() as usize;
        self.samples[idx.min(self.samples.len() - 1)]
    }

    /// Exports the trajectory as `t,s,i,r` rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "t,s,i,r")?;
        for sample in &self.samples {
            writeln!(out, "{},{},{},{}", sample.t, sample.s, sample.i, sample.r)?;
        }
        Ok(())
    }
}

fn derivatives(beta: f64, gamma: f64, y: [f64; 3]) -> [f64; 3] {
    let [s, i, _] = y;
    let flow = beta * s * i;
    [-flow, flow - gamma * i, gamma * i]
}

/// Integrates the system from (1 − i0 − m0, i0, m0) to `t_end` with the
/// classic fourth-order Runge–Kutta scheme.
pub fn integrate(params: &SirParams, t_end: f64, dt: f64) -> Result<SirTrajectory, Error> {
    params.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::config("sir.dt", format!("dt must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= dt) {
        return Err(Error::config(
            "sir.t_end",
            format!("t_end must be at least dt ({dt}), got {t_end}"),
        ));
    }
    let steps = (t_end / dt).round().max(1.0) as usize;
    let mut y = [1.0 - params.i0 - params.m0, params.i0, params.m0];
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(SirSample { t: 0.0, s: y[0], i: y[1], r: y[2] });
    for step in 1..=steps {
        let k1 = derivatives(params.beta, params.gamma, y);
        let k2 = derivatives(params.beta, params.gamma, advance(y, k1, dt / 2.0));
        let k3 = derivatives(params.beta, params.gamma, advance(y, k2, dt / 2.0));
        let k4 = derivatives(params.beta, params.gamma, advance(y, k3, dt));
        for c in 0..3 {
            y[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "integration diverged at t = {} (dt {dt} too large for these rates)",
                step as f64 * dt
            )));
        }
        samples.push(SirSample { t: step as f64 * dt, s: y[0], i: y[1], r: y[2] });
    }
    Ok(SirTrajectory { dt, samples })
}

fn advance(y: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]]
}

/// Asymptotic recovered fraction: the nonzero root of r = 1 − exp(−r0·r)
/// for r0 > 1 (zero otherwise), found by damped fixed-point iteration.
pub fn final_size(r0: f64) -> f64 {
    if r0 <= 1.0 {
        return 0.0;
    }
    let mut x = 1.0 - 1.0 / r0; // crude but positive starting guess
    for _ in 0..10_000 {
        let next = 1.0 - (-r0 * x).exp();
        let step = 0.5 * (next - x);
        x += step;
        if step.abs() < 1e-10 {
            break;
        }
    }
    x
}

/// How an agent-based run lines up against the compartment model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    /// Days actually compared (shorter of the two series).
    pub days_compared: usize,
    /// Root-mean-square difference between the normalized infected curves.
    pub rmse: f64,
    pub abm_peak_day: u32,
    pub ode_peak_day: u32,
    /// Agent-model peak day minus compartment peak day.
    pub peak_day_diff: i64,
    pub abm_peak_height: f64,
    pub ode_peak_height: f64,
    /// Agent-model peak height minus compartment peak height.
    pub peak_height_diff: f64,
    /// Whether the agent infected curve rises and falls exactly once.
    pub unimodal: bool,
}

/// Normalized per-day (s, i, r) fractions from census rows, mapping the
/// nine agent states onto the three compartments: infected collects every
/// stage of infection, removed collects the dead, recovered and immunized.
pub fn census_fractions(census: &[DailyCensus]) -> Vec<(f64, f64, f64)> {
    census
        .iter()
        .map(|c| {
            let n = f64::from(c.total()).max(1.0);
            (
                f64::from(c.count(crate::disease::HealthState::Susceptible)) / n,
                f64::from(c.infected_aggregate()) / n,
                f64::from(c.removed_aggregate()) / n,
            )
        })
        .collect()
}

/// Compares an agent-based census series against a compartment trajectory
/// day by day. Series of different lengths are truncated to the shorter.
pub fn align_abm(census: &[DailyCensus], traj: &SirTrajectory) -> AlignmentReport {
    let abm = census_fractions(census);
    let abm_infected: Vec<f64> = abm.iter().map(|&(_, i, _)| i).collect();
    let ode_days = traj.samples.last().map(|s| s.t.floor() as usize + 1).unwrap_or(0);
    let days = abm_infected.len().min(ode_days);
    let ode_infected: Vec<f64> = (0..days).map(|d| traj.at_day(d as u32).i).collect();

    let mut sq_sum = 0.0;
    for d in 0..days {
        let diff = abm_infected[d] - ode_infected[d];
        sq_sum += diff * diff;
    }
    let rmse = if days > 0 { (sq_sum / days as f64).sqrt() } else { 0.0 };

    let argmax = |xs: &[f64]| -> (u32, f64) {
        let mut best = (0u32, f64::NEG_INFINITY);
        for (d, &x) in xs.iter().enumerate() {
            if x > best.1 {
                best = (d as u32, x);
            }
        }
        if best.1.is_finite() {
            best
        } else {
            (0, 0.0)
        }
    };
    let (abm_peak_day, abm_peak_height) = argmax(&abm_infected[..days]);
    let (ode_peak_day, ode_peak_height) = argmax(&ode_infected);

    AlignmentReport {
        days_compared: days,
        rmse,
        abm_peak_day,
        ode_peak_day,
        peak_day_diff: i64::from(abm_peak_day) - i64::from(ode_peak_day),
        abm_peak_height,
        ode_peak_height,
        peak_height_diff: abm_peak_height - ode_peak_height,
        unimodal: is_unimodal(&abm_infected[..days]),
    }
}

/// A curve counts as unimodal when, after light smoothing, the days at or
/// above half its maximum form one contiguous block — a single main wave,
/// tolerant of small stochastic wiggles.
pub fn is_unimodal(curve: &[f64]) -> bool {
    if curve.len() < 3 {
        return true;
    }
    let smoothed = smooth3(curve);
    let max = smoothed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return true; // flat or empty epidemic: one (degenerate) wave
    }
    let half = max / 2.0;
    let mut seen_block = false;
    let mut in_block = false;
    for &v in &smoothed {
        if v >= half {
            if seen_block && !in_block {
                return false; // a second excursion above half-max
            }
            seen_block = true;
            in_block = true;
        } else {
            in_block = false;
        }
    }
    true
}

/// Three-point moving average with clipped edges.
fn smooth3(curve: &[f64]) -> Vec<f64> {
    (0..curve.len())
        .map(|idx| {
            let lo = idx.saturating_sub(1);
            let hi = (idx + 1).min(curve.len() - 1);
            curve[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect()
}
