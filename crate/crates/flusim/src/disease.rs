//! Nine-state disease progression model.
//!
//! The classic susceptible/infectious/removed split is refined into nine
//! classes so that contact exposure, incubation, care-seeking and immunity
//! are explicit:
//!
//! ```text
//! S ──k>0──▶ C ──1-(1-p)^k──▶ E ──latent──▶ I ──p_q──▶ Q ──course──▶ R ──p_imm──▶ M
//!            │ k=0                          └──────▶ NQ ─▶ Q | D     └────▶ S
//!            ▼                                       (daily hazard)
//!            S                                                        D, M absorbing
//! ```
//!
//! All transitions are evaluated once per simulated day by [`step_state`],
//! a pure function of the current state, its clock, the day's infectious
//! contact count and the disease parameters.

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Health state of a single agent. `Dead` and `Immunized` are absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HealthState {
    /// Never infected (or infection cleared without immunity).
    Susceptible,
    /// Met at least one contagious agent today; infection not yet decided.
    InContact,
    /// Infected, incubating, not yet contagious.
    Exposed,
    /// Contagious, symptoms starting; will seek care or ignore them.
    Infectious,
    /// Under medical care, isolated: neither moves nor transmits.
    Quarantined,
    /// Contagious and untreated, mixing freely with the population.
    NotQuarantined,
    /// Died of the disease. Absorbing.
    Dead,
    /// Cleared the disease course; immunity not yet decided.
    Recovered,
    /// Permanently immune (naturally or by vaccination). Absorbing.
    Immunized,
}

impl HealthState {
    /// All states in census/report order.
    pub const ALL: [HealthState; 9] = [
        HealthState::Susceptible,
        HealthState::InContact,
        HealthState::Exposed,
        HealthState::Infectious,
        HealthState::Quarantined,
        HealthState::NotQuarantined,
        HealthState::Dead,
        HealthState::Recovered,
        HealthState::Immunized,
    ];

    /// Short column code used in census files: S, C, E, I, Q, NQ, D, R, M.
    pub fn code(self) -> &'static str {
        match self {
            HealthState::Susceptible => "S",
            HealthState::InContact => "C",
            HealthState::Exposed => "E",
            HealthState::Infectious => "I",
            HealthState::Quarantined => "Q",
            HealthState::NotQuarantined => "NQ",
            HealthState::Dead => "D",
            HealthState::Recovered => "R",
            HealthState::Immunized => "M",
        }
    }

    /// Position in [`HealthState::ALL`], usable as an array index.
    pub fn index(self) -> usize {
        HealthState::ALL.iter().position(|s| *s == self).unwrap()
    }

    /// States that can never be left.
    pub fn is_absorbing(self) -> bool {
        matches!(self, HealthState::Dead | HealthState::Immunized)
    }

    /// States that expose others. Quarantined agents are isolated and the
    /// exposed are not yet contagious, so only I and NQ transmit.
    pub fn transmits(self) -> bool {
        matches!(self, HealthState::Infectious | HealthState::NotQuarantined)
    }

    /// True for the states an infection can still land on.
    pub fn can_be_exposed(self) -> bool {
        matches!(self, HealthState::Susceptible | HealthState::InContact)
    }
}

/// The complete edge set of the state machine: every state reachable from
/// `from` in one daily step (staying put is always allowed and not listed).
pub fn allowed_transitions(from: HealthState) -> &'static [HealthState] {
    use HealthState::*;
    match from {
        Susceptible => &[InContact],
        InContact => &[Exposed, Susceptible],
        Exposed => &[Infectious],
        Infectious => &[Quarantined, NotQuarantined],
        Quarantined => &[Recovered, Dead],
        NotQuarantined => &[Quarantined, Dead],
        Recovered => &[Immunized, Susceptible],
        Dead => &[],
        Immunized => &[],
    }
}

/// Disease parameters shared by every agent in a run.
///
/// Defaults are the WHO-style pandemic influenza values used throughout:
/// two incubation days, 95% immunization after recovery, 90% recovery under
/// care, 14% case fatality without care, a 5-14 day disease course and a
/// 10% daily chance that an untreated case seeks care.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiseaseParams {
    /// Days spent in `Exposed` before becoming contagious.
    pub latent_days: u32,
    /// Per-contagious-contact, per-day transmission probability.
    pub p_transmit: f64,
    /// Daily probability that an infectious agent seeks care (I -> Q, NQ -> Q).
    pub p_quarantine: f64,
    /// Probability of surviving the course under care (Q -> R at course end).
    pub p_recover: f64,
    /// Case-fatality proportion without care, spread over the mean course
    /// length as a daily hazard; see [`DiseaseParams::untreated_daily_death_hazard`].
    pub p_dead: f64,
    /// Probability that a recovered agent ends up permanently immune.
    pub p_immunize: f64,
    /// Shortest possible disease course, in days.
    pub t_recover_min: u32,
    /// Longest possible disease course, in days.
    pub t_recover_max: u32,
}

impl Default for DiseaseParams {
    fn default() -> Self {
        DiseaseParams {
            latent_days: 2,
            // Calibrated against the bundled no-control scenario so that the
            // epidemic neither saturates the whole population in a few days
            // nor stalls; see the strategy-effect integration tests.
            p_transmit: 0.104,
            p_quarantine: 0.1,
            p_recover: 0.9,
            p_dead: 0.14,
            p_immunize: 0.95,
            t_recover_min: 5,
            t_recover_max: 14,
        }
    }
}

impl DiseaseParams {
    /// Checks every field range. On failure returns the offending field name
    /// and a human-readable message, for config errors with full key paths.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let probs = [
            ("p_transmit", self.p_transmit),
            ("p_quarantine", self.p_quarantine),
            ("p_recover", self.p_recover),
            ("p_dead", self.p_dead),
            ("p_immunize", self.p_immunize),
        ];
        for (name, p) in probs {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err((name, format!("must be a probability in [0, 1], got {p}")));
            }
        }
        if self.t_recover_min == 0 {
            return Err(("t_recover_min", "course length must be at least one day".into()));
        }
        if self.t_recover_min > self.t_recover_max {
            return Err((
                "t_recover_max",
                format!(
                    "course range is empty: min {} > max {}",
                    self.t_recover_min, self.t_recover_max
                ),
            ));
        }
        Ok(())
    }

    /// Probability that an in-contact agent acquires the infection on a day
    /// with `k` contagious contacts: 1 - (1 - p_transmit)^k. Each contact is
    /// an independent transmission opportunity.
    pub fn infection_probability(&self, k: usize) -> f64 {
        1.0 - (1.0 - self.p_transmit).powi(k as i32)
    }

    /// Mean disease course length (uniform over the integer range).
    pub fn mean_course_days(&self) -> f64 {
        (self.t_recover_min + self.t_recover_max) as f64 / 2.0
    }

    /// Daily death hazard for an untreated (not-quarantined) case, chosen so
    /// that the cumulative death probability over a mean-length course equals
    /// `p_dead`: h = 1 - (1 - p_dead)^(1/T) with T the mean course length.
    pub fn untreated_daily_death_hazard(&self) -> f64 {
        1.0 - (1.0 - self.p_dead).powf(1.0 / self.mean_course_days())
    }
}

/// Per-agent disease timing: how long the agent has been in its current
/// phase and, once infectious, how long its whole course will run.
///
/// `days_in_state` resets on every transition except within the infectious
/// course (I -> Q, I -> NQ, NQ -> Q), where it keeps counting days since the
/// agent became infectious so that the course end is well-defined no matter
/// which of Q/NQ the agent passes through.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseClock {
    pub days_in_state: u32,
    /// Total course length in days, drawn uniformly from
    /// [t_recover_min, t_recover_max] when the agent enters `Infectious`.
    pub course_length: Option<u32>,
}

/// Draws a full course length for an agent entering the infectious phase.
pub fn draw_course_length<R: Rng>(params: &DiseaseParams, rng: &mut R) -> u32 {
    rng.gen_range(params.t_recover_min..=params.t_recover_max)
}

/// Advances one agent by one day.
///
/// `infectious_contacts` is the number of distinct contagious agents met
/// today (contact lists plus shared network members); it only matters for
/// `Susceptible` and `InContact`. Absorbing states ignore everything.
///
/// Returns the next state and the updated clock. Every state change is a
/// member of [`allowed_transitions`] of the input state.
pub fn step_state<R: Rng>(
    state: HealthState,
    clock: DiseaseClock,
    infectious_contacts: usize,
    params: &DiseaseParams,
    rng: &mut R,
) -> (HealthState, DiseaseClock) {
    use HealthState::*;
    let mut clock = clock;
    clock.days_in_state += 1;

    match state {
        Dead | Immunized => (state, clock),

        Susceptible => {
            if infectious_contacts > 0 {
                (InContact, DiseaseClock::default())
            } else {
                (Susceptible, clock)
            }
        }

        InContact => {
            if infectious_contacts == 0 {
                // Exposure ended without infection; back to the pool.
                (Susceptible, DiseaseClock::default())
            } else if rng.gen_bool(params.infection_probability(infectious_contacts)) {
                (Exposed, DiseaseClock::default())
            } else {
                (InContact, clock)
            }
        }

        Exposed => {
            if clock.days_in_state >= params.latent_days {
                let course = draw_course_length(params, rng);
                (
                    Infectious,
                    DiseaseClock {
                        days_in_state: 0,
                        course_length: Some(course),
                    },
                )
            } else {
                (Exposed, clock)
            }
        }

        Infectious => {
            // Symptomatic day one: seek care or ignore the symptoms.
            // The course clock keeps running across this split.
            if rng.gen_bool(params.p_quarantine) {
                (Quarantined, clock)
            } else {
                (NotQuarantined, clock)
            }
        }

        Quarantined => {
            let course = ensure_course(&mut clock, params, rng);
            if clock.days_in_state >= course {
                if rng.gen_bool(params.p_recover) {
                    (Recovered, DiseaseClock::default())
                } else {
                    (Dead, DiseaseClock::default())
                }
            } else {
                (Quarantined, clock)
            }
        }

        NotQuarantined => {
            let course = ensure_course(&mut clock, params, rng);
            if clock.days_in_state >= course {
                // Course ran out untreated: lands in care for the final
                // recovery-or-death resolution.
                (Quarantined, clock)
            } else if rng.gen_bool(params.p_quarantine) {
                (Quarantined, clock)
            } else if rng.gen_bool(params.untreated_daily_death_hazard()) {
                (Dead, DiseaseClock::default())
            } else {
                (NotQuarantined, clock)
            }
        }

        Recovered => {
            if rng.gen_bool(params.p_immunize) {
                (Immunized, DiseaseClock::default())
            } else {
                (Susceptible, DiseaseClock::default())
            }
        }
    }
}

/// Course length for agents already in the infectious phase. Normally set
/// on entering `Infectious`; drawn lazily for agents constructed directly
/// into Q/NQ (tests, seeding edge cases).
fn ensure_course<R: Rng>(clock: &mut DiseaseClock, params: &DiseaseParams, rng: &mut R) -> u32 {
    match clock.course_length {
        Some(c) => c,
        None => {
            let c = draw_course_length(params, rng);
            clock.course_length = Some(c);
            c
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use HealthState::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn edge_set_matches_flow_chart() {
        assert_eq!(allowed_transitions(Susceptible), &[InContact]);
        assert_eq!(allowed_transitions(InContact), &[Exposed, Susceptible]);
        assert_eq!(allowed_transitions(Exposed), &[Infectious]);
        assert_eq!(allowed_transitions(Infectious), &[Quarantined, NotQuarantined]);
        assert_eq!(allowed_transitions(Quarantined), &[Recovered, Dead]);
        assert_eq!(allowed_transitions(NotQuarantined), &[Quarantined, Dead]);
        assert_eq!(allowed_transitions(Recovered), &[Immunized, Susceptible]);
        assert!(allowed_transitions(Dead).is_empty());
        assert!(allowed_transitions(Immunized).is_empty());
    }

    #[test]
    fn absorbing_states_never_leave() {
        let params = DiseaseParams::default();
        let mut r = rng(1);
        for state in [Dead, Immunized] {
            let mut clock = DiseaseClock::default();
            for _ in 0..10_000 {
                let k = r.gen_range(0..10);
                let (next, c) = step_state(state, clock, k, &params, &mut r);
                assert_eq!(next, state);
                clock = c;
            }
        }
    }

    #[test]
    fn susceptible_with_contacts_moves_in_contact() {
        let params = DiseaseParams::default();
        let mut r = rng(2);
        let (next, clock) = step_state(Susceptible, DiseaseClock::default(), 3, &params, &mut r);
        assert_eq!(next, InContact);
        assert_eq!(clock.days_in_state, 0);
        let (stay, _) = step_state(Susceptible, DiseaseClock::default(), 0, &params, &mut r);
        assert_eq!(stay, Susceptible);
    }

    /// Brute-force enumeration of three independent transmission chances:
    /// the per-day infection probability with k contagious contacts must be
    /// exactly 1 - (1 - p)^k.
    #[test]
    fn infection_probability_matches_enumeration() {
        let p: f64 = 0.35;
        // Sum the probability of every outcome combination of three
        // independent Bernoulli(p) trials that contains at least one hit.
        let mut p_any = 0.0;
        for mask in 1u32..8 {
            let hits = mask.count_ones() as i32;
            p_any += p.powi(hits) * (1.0 - p).powi(3 - hits);
        }
        assert!((p_any - 0.725375).abs() < 1e-12, "enumeration gave {p_any}");

        let params = DiseaseParams {
            p_transmit: p,
            ..DiseaseParams::default()
        };
        assert!((params.infection_probability(3) - p_any).abs() < 1e-12);
        assert_eq!(params.infection_probability(0), 0.0);
    }

    /// Monte Carlo of the two-hop path S -> C -> E: once an agent sits in
    /// contact with three contagious agents, it must convert at the
    /// enumerated rate 0.725375.
    #[test]
    fn in_contact_conversion_rate_with_three_contacts() {
        let params = DiseaseParams {
            p_transmit: 0.35,
            ..DiseaseParams::default()
        };
        let mut r = rng(3);
        let trials = 100_000u32;
        let mut exposed = 0u32;
        for _ in 0..trials {
            // Day one: exposure begins.
            let (s1, c1) = step_state(Susceptible, DiseaseClock::default(), 3, &params, &mut r);
            assert_eq!(s1, InContact);
            // Day two: the infection trial with the same three contacts.
            let (s2, _) = step_state(s1, c1, 3, &params, &mut r);
            assert!(matches!(s2, Exposed | InContact));
            if s2 == Exposed {
                exposed += 1;
            }
        }
        let rate = f64::from(exposed) / f64::from(trials);
        assert!(
            (rate - 0.725375).abs() < 0.005,
            "conversion rate {rate} too far from 0.725375"
        );
    }

    #[test]
    fn in_contact_reverts_when_exposure_ends() {
        let params = DiseaseParams::default();
        let mut r = rng(4);
        let (next, clock) = step_state(InContact, DiseaseClock::default(), 0, &params, &mut r);
        assert_eq!(next, Susceptible);
        assert_eq!(clock.days_in_state, 0);
    }

    #[test]
    fn exposed_turns_infectious_after_exactly_latent_days() {
        let params = DiseaseParams::default(); // latent 2
        let mut r = rng(5);
        for _ in 0..1_000 {
            let mut state = Exposed;
            let mut clock = DiseaseClock::default(); // just entered E
            let mut days = 0;
            while state == Exposed {
                let (next, c) = step_state(state, clock, 0, &params, &mut r);
                state = next;
                clock = c;
                days += 1;
                assert!(days <= 2, "stayed exposed beyond latent_days");
            }
            assert_eq!(state, Infectious);
            assert_eq!(days, 2, "left exposed early");
            assert!(clock.course_length.is_some(), "course drawn on entering I");
        }
    }

    #[test]
    fn course_lengths_are_uniform_over_range() {
        let params = DiseaseParams::default(); // 5..=14
        let mut r = rng(6);
        let n = 100_000;
        let mut counts = [0u32; 15];
        let mut sum = 0u64;
        for _ in 0..n {
            let c = draw_course_length(&params, &mut r);
            assert!((5..=14).contains(&c));
            counts[c as usize] += 1;
            sum += u64::from(c);
        }
        let mean = sum as f64 / f64::from(n);
        assert!((mean - 9.5).abs() < 0.05, "mean course {mean}");
        for (c, &count) in counts.iter().enumerate().take(15).skip(5) {
            let freq = f64::from(count) / f64::from(n);
            assert!((freq - 0.1).abs() < 0.005, "course {c} frequency {freq}");
        }
        // Degenerate range collapses to a constant.
        let tight = DiseaseParams {
            t_recover_min: 7,
            t_recover_max: 7,
            ..DiseaseParams::default()
        };
        for _ in 0..100 {
            assert_eq!(draw_course_length(&tight, &mut r), 7);
        }
    }

    #[test]
    fn untreated_hazard_compounds_to_case_fatality() {
        let params = DiseaseParams::default();
        let h = params.untreated_daily_death_hazard();
        let survive = (1.0 - h).powf(params.mean_course_days());
        assert!((survive - (1.0 - params.p_dead)).abs() < 1e-12);

        let harmless = DiseaseParams {
            p_dead: 0.0,
            ..DiseaseParams::default()
        };
        assert_eq!(harmless.untreated_daily_death_hazard(), 0.0);
    }

    #[test]
    fn not_quarantined_at_course_end_is_handed_to_care() {
        let params = DiseaseParams::default();
        let mut r = rng(7);
        let clock = DiseaseClock {
            days_in_state: 14,
            course_length: Some(14),
        };
        for _ in 0..100 {
            let (next, c) = step_state(NotQuarantined, clock, 0, &params, &mut r);
            assert_eq!(next, Quarantined);
            // Clock carries on so the Q completion fires next day.
            assert_eq!(c.days_in_state, 15);
            assert_eq!(c.course_length, Some(14));
        }
    }

    #[test]
    fn quarantined_resolves_only_at_course_end() {
        let params = DiseaseParams::default();
        let mut r = rng(8);
        let early = DiseaseClock {
            days_in_state: 3,
            course_length: Some(10),
        };
        for _ in 0..100 {
            let (next, _) = step_state(Quarantined, early, 0, &params, &mut r);
            assert_eq!(next, Quarantined);
        }
        let done = DiseaseClock {
            days_in_state: 10,
            course_length: Some(10),
        };
        let mut outcomes = [0u32; 2];
        for _ in 0..10_000 {
            let (next, _) = step_state(Quarantined, done, 0, &params, &mut r);
            match next {
                Recovered => outcomes[0] += 1,
                Dead => outcomes[1] += 1,
                other => panic!("unexpected completion state {other:?}"),
            }
        }
        let recover_rate = f64::from(outcomes[0]) / 10_000.0;
        assert!((recover_rate - 0.9).abs() < 0.02, "recover rate {recover_rate}");
    }

    #[test]
    fn degenerate_transmission_extremes() {
        let mut r = rng(9);
        let never = DiseaseParams {
            p_transmit: 0.0,
            ..DiseaseParams::default()
        };
        for _ in 0..10_000 {
            let k = r.gen_range(0..8);
            let (from_s, _) = step_state(Susceptible, DiseaseClock::default(), k, &never, &mut r);
            assert!(matches!(from_s, Susceptible | InContact));
            let (from_c, _) = step_state(InContact, DiseaseClock::default(), k, &never, &mut r);
            assert!(matches!(from_c, InContact | Susceptible));
        }
        let always = DiseaseParams {
            p_transmit: 1.0,
            ..DiseaseParams::default()
        };
        for k in 1..8 {
            let (next, _) = step_state(InContact, DiseaseClock::default(), k, &always, &mut r);
            assert_eq!(next, Exposed);
        }
    }

    #[test]
    fn recovery_splits_between_immunity_and_susceptibility() {
        let params = DiseaseParams::default();
        let mut r = rng(10);
        let mut immune = 0u32;
        for _ in 0..10_000 {
            let (next, _) = step_state(Recovered, DiseaseClock::default(), 0, &params, &mut r);
            match next {
                Immunized => immune += 1,
                Susceptible => {}
                other => panic!("unexpected post-recovery state {other:?}"),
            }
        }
        let rate = f64::from(immune) / 10_000.0;
        assert!((rate - 0.95).abs() < 0.01, "immunization rate {rate}");
    }

    #[test]
    fn validate_rejects_bad_ranges() {
        let p = DiseaseParams { p_transmit: 1.5, ..DiseaseParams::default() };
        assert_eq!(p.validate().unwrap_err().0, "p_transmit");
        let q = DiseaseParams { t_recover_min: 10, t_recover_max: 5, ..DiseaseParams::default() };
        assert_eq!(q.validate().unwrap_err().0, "t_recover_max");
        assert!(DiseaseParams::default().validate().is_ok());
    }

    proptest! {
        /// Any emitted state change is an edge of the declared machine.
        #[test]
        fn transitions_stay_within_edge_set(
            state_idx in 0usize..9,
            days in 0u32..30,
            course in proptest::option::of(1u32..20),
            k in 0usize..12,
            p_transmit in 0.0f64..=1.0,
            seed in 0u64..u64::MAX,
        ) {
            let state = HealthState::ALL[state_idx];
            let params = DiseaseParams { p_transmit, ..DiseaseParams::default() };
            let clock = DiseaseClock { days_in_state: days, course_length: course };
            let mut r = rng(seed);
            let (next, new_clock) = step_state(state, clock, k, &params, &mut r);
            if next != state {
                prop_assert!(
                    allowed_transitions(state).contains(&next),
                    "illegal transition {:?} -> {:?}", state, next
                );
            }
            prop_assert!(new_clock.days_in_state <= days + 1);
        }

        /// More contagious contacts never lower the infection probability.
        #[test]
        fn infection_probability_monotone_in_contacts(
            p in 0.0f64..=1.0,
            k1 in 0usize..20,
            extra in 0usize..20,
        ) {
            let params = DiseaseParams { p_transmit: p, ..DiseaseParams::default() };
            let a = params.infection_probability(k1);
            let b = params.infection_probability(k1 + extra);
            prop_assert!(b >= a - 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
