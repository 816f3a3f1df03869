//! Daily simulation loop.
//!
//! Each simulated day runs a fixed pipeline: control strategies are
//! applied, agents move, every living agent draws its daily contacts
//! (network members with probability `p_network`, otherwise someone
//! nearby), exposure counts are tallied for susceptible and in-contact
//! agents, every agent's disease state advances one day, and a census row
//! is recorded. All randomness flows through per-phase streams so paired
//! runs stay comparable draw-for-draw.

use crate::control::{apply_controls, ControlStrategy, DayEffects};
use crate::disease::{step_state, DiseaseParams, HealthState};
use crate::error::Error;
use crate::population::{
    sample_age_band, sample_social_type, Agent, AgentId, PopulationSettings,
};
use crate::rng::DrawStreams;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Whether the population is fixed for the whole run or may grow by
/// meeting newly created agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Constant population; public contacts are nearby existing agents.
    Closed,
    /// Public contacts create new susceptible agents at runtime, up to
    /// `population_cap`.
    Open,
}

/// World-level knobs that are not disease parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldSettings {
    /// Side length of the square landscape.
    pub landscape_side: f64,
    pub mode: Mode,
    /// Upper bound on agent count in Open mode.
    pub population_cap: usize,
    /// Maximum daily displacement for a Moderate-activity agent.
    pub max_step: f64,
    /// Probability a contact slot is filled from the agent's own networks.
    pub p_network: f64,
}

impl WorldSettings {
    pub fn closed(landscape_side: f64) -> WorldSettings {
        WorldSettings {
            landscape_side,
            mode: Mode::Closed,
            population_cap: usize::MAX,
            max_step: 20.0,
            p_network: 0.6,
        }
    }
}

/// One recorded transmission event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InfectionEdge {
    pub infector: AgentId,
    pub infectee: AgentId,
    pub day: u32,
}

/// End-of-day population counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DailyCensus {
    pub day: u32,
    /// Counts per health state, indexed by [`HealthState::index`].
    pub counts: [u32; 9],
    /// Agents who acquired their first infection today.
    pub new_infections: u32,
    /// Distinct agents ever infected, seeds included.
    pub cumulative_infected: u32,
}

impl DailyCensus {
    pub fn count(&self, state: HealthState) -> u32 {
        self.counts[state.index()]
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// Everyone currently carrying the infection in any stage.
    pub fn infected_aggregate(&self) -> u32 {
        self.count(HealthState::InContact)
            + self.count(HealthState::Exposed)
            + self.count(HealthState::Infectious)
            + self.count(HealthState::Quarantined)
            + self.count(HealthState::NotQuarantined)
    }

    /// Everyone permanently out of the transmission chain.
    pub fn removed_aggregate(&self) -> u32 {
        self.count(HealthState::Dead)
            + self.count(HealthState::Recovered)
            + self.count(HealthState::Immunized)
    }
}

/// Uniform bucketing of the landscape for nearby-agent lookup.
struct Grid {
    cell: f64,
    per_axis: usize,
    cells: Vec<Vec<AgentId>>,
}

impl Grid {
    fn new(side: f64, max_step: f64) -> Grid {
        // Cells roughly two max-steps wide keep "nearby" meaningful while
        // bounding the bucket count.
        let cell = if max_step > 0.0 { 2.0 * max_step } else { side };
        let per_axis = ((side / cell).ceil() as usize).clamp(1, 128);
        Grid {
            cell: side / per_axis as f64,
            per_axis,
            cells: vec![Vec::new(); per_axis * per_axis],
        }
    }

    fn cell_index(&self, coord: f64) -> usize {
        ((coord / self.cell) as usize).min(self.per_axis - 1)
    }

    /// Re-bins every agent that may appear in a contact list (the dead
    /// never do).
    fn rebuild(&mut self, agents: &[Agent]) {
        for cell in &mut self.cells {
            cell.clear();
        }
        for agent in agents {
            if agent.state != HealthState::Dead {
                self.insert(agent);
            }
        }
    }

    fn insert(&mut self, agent: &Agent) {
        let cx = self.cell_index(agent.x);
        let cy = self.cell_index(agent.y);
        self.cells[cy * self.per_axis + cx].push(agent.id);
    }

    /// Collects ids in the 3×3 block of cells around a position.
    fn neighborhood_into(&self, x: f64, y: f64, out: &mut Vec<AgentId>) {
        out.clear();
        let cx = self.cell_index(x) as isize;
        let cy = self.cell_index(y) as isize;
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let nx = cx + dx;
                let ny = cy + dy;
                if (0..self.per_axis as isize).contains(&nx)
                    && (0..self.per_axis as isize).contains(&ny)
                {
                    out.extend(&self.cells[ny as usize * self.per_axis + nx as usize]);
                }
            }
        }
    }
}

/// The full simulation state for one run.
pub struct World {
    pub day: u32,
    pub agents: Vec<Agent>,
    pub params: DiseaseParams,
    pub strategies: Vec<ControlStrategy>,
    pub settings: WorldSettings,
    pub infection_edges: Vec<InfectionEdge>,
    /// Agents whose infectious course has fully resolved.
    pub completed: HashSet<AgentId>,
    pub cumulative_infected: u32,
    streams: DrawStreams,
    /// Sorted union of each agent's home/work/school members.
    network_cache: Vec<Vec<AgentId>>,
    /// Today's contact list per agent.
    contacts: Vec<Vec<AgentId>>,
    /// Today's distinct infectious contributors per agent.
    contributors: Vec<Vec<AgentId>>,
    grid: Grid,
    scratch: Vec<AgentId>,
}

impl World {
    pub fn new(
        agents: Vec<Agent>,
        params: DiseaseParams,
        strategies: Vec<ControlStrategy>,
        settings: WorldSettings,
        run_seed: u64,
    ) -> Result<World, Error> {
        params
            .validate()
            .map_err(|(path, message)| Error::config(format!("disease.{path}"), message))?;
        crate::control::validate_strategies(&strategies)?;
        if agents.is_empty() {
            return Err(Error::config("population", "world needs at least one agent"));
        }
        let network_cache = agents.iter().map(combined_network).collect();
        let n = agents.len();
        let grid = Grid::new(settings.landscape_side, settings.max_step);
        Ok(World {
            day: 0,
            agents,
            params,
            strategies,
            settings,
            infection_edges: Vec::new(),
            completed: HashSet::new(),
            cumulative_infected: 0,
            streams: DrawStreams::new(run_seed),
            network_cache,
            contacts: vec![Vec::new(); n],
            contributors: vec![Vec::new(); n],
            grid,
            scratch: Vec::new(),
        })
    }

    /// Turns `count` distinct agents infectious to start the outbreak.
    pub fn seed_infections(&mut self, count: usize) -> Result<(), Error> {
        if count == 0 || count > self.agents.len() {
            return Err(Error::config(
                "initial_infected",
                format!(
                    "initial infections must lie in [1, {}], got {count}",
                    self.agents.len()
                ),
            ));
        }
        let picks = sample_indices(&mut self.streams.init, self.agents.len(), count);
        for idx in picks.iter() {
            let agent = &mut self.agents[idx];
            agent.state = HealthState::Infectious;
            agent.clock.days_in_state = 0;
            agent.clock.course_length =
                Some(crate::disease::draw_course_length(&self.params, &mut self.streams.init));
            agent.infection_time = Some(0);
        }
        self.cumulative_infected = count as u32;
        Ok(())
    }

    /// Advances the world one day and reports the end-of-day census.
    pub fn step_day(&mut self) -> DailyCensus {
        let effects = apply_controls(
            &self.strategies,
            self.day,
            &self.params,
            &mut self.agents,
            &mut self.streams.control,
        );
        move_agents(&mut self.agents, &self.settings, &mut self.streams.movement);
        self.grid.rebuild(&self.agents);
        self.select_contacts(&effects);
        self.propagate_infection();
        let new_infections = self.step_states(&effects);
        let census = self.take_census(new_infections);
        self.day += 1;
        census
    }

    /// Runs `days` consecutive steps, returning one census per day.
    pub fn run(&mut self, days: u32) -> Vec<DailyCensus> {
        (0..days).map(|_| self.step_day()).collect()
    }

    /// Mean secondary infections per agent whose course has resolved, or
    /// `None` while no course has resolved yet.
    pub fn estimate_r(&self) -> Option<f64> {
        mean_out_degree(&self.infection_edges, &self.completed)
    }

    /// Today's contact list for one agent.
    pub fn contact_list(&self, id: AgentId) -> &[AgentId] {
        &self.contacts[id as usize]
    }

    /// Fills every living agent's daily contact list. Each slot picks from
    /// the agent's own networks with probability `p_network`, otherwise
    /// from the public: someone nearby in Closed mode, a newly created
    /// susceptible in Open mode (until the population cap).
    fn select_contacts(&mut self, effects: &DayEffects) {
        let n_choosers = self.agents.len();
        for list in &mut self.contacts {
            list.clear();
        }
        for i in 0..n_choosers {
            if self.agents[i].state == HealthState::Dead {
                continue;
            }
            let budget = self.agents[i].activity.contacts_per_day() as f64;
            let slots = (budget * effects.contact_scale).floor() as usize;
            let mut chosen = std::mem::take(&mut self.contacts[i]);
            for _ in 0..slots {
                let pick = if self.streams.contact.gen_bool(self.settings.p_network) {
                    self.pick_network_contact(i, &chosen)
                        .or_else(|| self.pick_public_contact(i, &chosen))
                } else {
                    self.pick_public_contact(i, &chosen)
                };
                match pick {
                    Some(id) => chosen.push(id),
                    None => break, // population exhausted
                }
            }
            self.contacts[i] = chosen;
        }
        // Agents created today participate from tomorrow; give them slots.
        while self.contacts.len() < self.agents.len() {
            self.contacts.push(Vec::new());
            self.contributors.push(Vec::new());
            self.network_cache.push(Vec::new());
        }
    }

    fn pick_network_contact(&mut self, i: usize, chosen: &[AgentId]) -> Option<AgentId> {
        self.scratch.clear();
        for &id in &self.network_cache[i] {
            if self.agents[id as usize].state != HealthState::Dead && !chosen.contains(&id) {
                self.scratch.push(id);
            }
        }
        if self.scratch.is_empty() {
            return None;
        }
        Some(self.scratch[self.streams.contact.gen_range(0..self.scratch.len())])
    }

    fn pick_public_contact(&mut self, i: usize, chosen: &[AgentId]) -> Option<AgentId> {
        if self.settings.mode == Mode::Open && self.agents.len() < self.settings.population_cap {
            let id = self.spawn_agent();
            return Some(id);
        }
        let me = self.agents[i].id;
        let (x, y) = (self.agents[i].x, self.agents[i].y);
        let mut pool = std::mem::take(&mut self.scratch);
        self.grid.neighborhood_into(x, y, &mut pool);
        pool.retain(|&id| id != me && !chosen.contains(&id));
        let pick = if pool.is_empty() {
            // Sparse neighborhood: fall back to anyone alive in the world.
            pool.extend(
                self.agents
                    .iter()
                    .filter(|a| a.id != me && a.state != HealthState::Dead && !chosen.contains(&a.id))
                    .map(|a| a.id),
            );
            if pool.is_empty() {
                None
            } else {
                Some(pool[self.streams.contact.gen_range(0..pool.len())])
            }
        } else {
            Some(pool[self.streams.contact.gen_range(0..pool.len())])
        };
        self.scratch = pool;
        pick
    }

    /// Creates a fresh susceptible agent (Open mode) and registers it in
    /// the spatial grid so it can be met again today.
    fn spawn_agent(&mut self) -> AgentId {
        let rng = &mut self.streams.contact;
        let band = sample_age_band(rng);
        let social_type = sample_social_type(band, rng);
        let settings = PopulationSettings::default();
        let weights = settings.activity_weights;
        let total: f64 = weights.iter().sum();
        let draw: f64 = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut activity = crate::population::ActivityLevel::High;
        for (level, w) in crate::population::ActivityLevel::ALL.iter().zip(weights) {
            acc += w;
            if draw < acc {
                activity = *level;
                break;
            }
        }
        let side = self.settings.landscape_side;
        let x = rng.gen_range(0.0..side);
        let y = rng.gen_range(0.0..side);
        let id = self.agents.len() as AgentId;
        let agent = Agent {
            id,
            state: HealthState::Susceptible,
            clock: Default::default(),
            age_band: band,
            social_type,
            activity,
            x,
            y,
            home: Vec::new(),
            work: Vec::new(),
            school: Vec::new(),
            home_group: None,
            work_group: None,
            school_group: None,
            infection_time: None,
            infector: None,
        };
        self.grid.insert(&agent);
        self.agents.push(agent);
        id
    }

    /// Tallies, for every susceptible or in-contact agent, the distinct
    /// infectious agents (Infectious or NotQuarantined; the Quarantined
    /// are isolated) reachable through today's contact lists — in either
    /// direction — or through shared group membership.
    fn propagate_infection(&mut self) {
        for list in &mut self.contributors {
            list.clear();
        }
        let agents = &self.agents;
        let transmits = |id: AgentId| agents[id as usize].state.transmits();
        // Contact lists, both directions.
        for (i, list) in self.contacts.iter().enumerate() {
            let me = i as AgentId;
            let i_exposable = agents[i].state.can_be_exposed();
            let i_transmits = transmits(me);
            for &other in list {
                if i_exposable && transmits(other) {
                    self.contributors[i].push(other);
                }
                if i_transmits && agents[other as usize].state.can_be_exposed() {
                    self.contributors[other as usize].push(me);
                }
            }
        }
        // Standing group membership exposes members to infectious peers.
        for (i, agent) in agents.iter().enumerate() {
            if !agent.state.can_be_exposed() {
                continue;
            }
            for &peer in &self.network_cache[i] {
                if transmits(peer) {
                    self.contributors[i].push(peer);
                }
            }
        }
        for list in &mut self.contributors {
            list.sort_unstable();
            list.dedup();
        }
    }

    /// Advances every agent's health state one day; returns the number of
    /// infections acquired today.
    fn step_states(&mut self, effects: &DayEffects) -> u32 {
        let mut new_infections = 0;
        for i in 0..self.agents.len() {
            let agent = &mut self.agents[i];
            let before = agent.state;
            let k = self.contributors[i].len();
            let (after, clock) =
                step_state(agent.state, agent.clock, k, &effects.params, &mut self.streams.state);
            agent.state = after;
            agent.clock = clock;
            match (before, after) {
                (HealthState::InContact, HealthState::Exposed) => {
                    let pool = &self.contributors[i];
                    let infector = pool[self.streams.infection.gen_range(0..pool.len())];
                    self.infection_edges.push(InfectionEdge {
                        infector,
                        infectee: agent.id,
                        day: self.day,
                    });
                    // Reinfections (recovered agents who lost immunity)
                    // count as edges but not as newly infected people, so
                    // the attack rate stays a fraction of the population.
                    if agent.infection_time.is_none() {
                        agent.infection_time = Some(self.day);
                        agent.infector = Some(infector);
                        self.cumulative_infected += 1;
                        new_infections += 1;
                    }
                }
                (HealthState::Quarantined, HealthState::Recovered)
                | (HealthState::Quarantined, HealthState::Dead)
                | (HealthState::NotQuarantined, HealthState::Dead) => {
                    self.completed.insert(agent.id);
                }
                _ => {}
            }
        }
        new_infections
    }

    fn take_census(&self, new_infections: u32) -> DailyCensus {
        let mut counts = [0u32; 9];
        for agent in &self.agents {
            counts[agent.state.index()] += 1;
        }
        DailyCensus {
            day: self.day,
            counts,
            new_infections,
            cumulative_infected: self.cumulative_infected,
        }
    }
}

fn combined_network(agent: &Agent) -> Vec<AgentId> {
    let mut ids: Vec<AgentId> = agent
        .home
        .iter()
        .chain(&agent.work)
        .chain(&agent.school)
        .copied()
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Displaces every living, non-quarantined agent by a random step whose
/// length scales with activity, reflecting off the landscape edges.
fn move_agents(agents: &mut [Agent], settings: &WorldSettings, rng: &mut ChaCha8Rng) {
    let side = settings.landscape_side;
    for agent in agents {
        if matches!(agent.state, HealthState::Dead | HealthState::Quarantined) {
            continue;
        }
        let max_len = settings.max_step * agent.activity.step_multiplier();
        if max_len <= 0.0 {
            continue;
        }
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let len = rng.gen_range(0.0..max_len);
        agent.x = reflect(agent.x + len * angle.cos(), side);
        agent.y = reflect(agent.y + len * angle.sin(), side);
    }
}

/// Folds a coordinate back into [0, side] as if bouncing off the walls.
fn reflect(p: f64, side: f64) -> f64 {
    let period = 2.0 * side;
    let q = p.rem_euclid(period);
    if q > side {
        period - q
    } else {
        q
    }
}

/// Mean out-degree in the infection-edge graph over resolved agents;
/// `None` when nothing has resolved.
pub fn mean_out_degree(edges: &[InfectionEdge], completed: &HashSet<AgentId>) -> Option<f64> {
    if completed.is_empty() {
        return None;
    }
    let mut degree: std::collections::HashMap<AgentId, u32> = std::collections::HashMap::new();
    for edge in edges {
        *degree.entry(edge.infector).or_insert(0) += 1;
    }
    let total: u32 = completed.iter().map(|id| degree.get(id).copied().unwrap_or(0)).sum();
    Some(f64::from(total) / completed.len() as f64)
}
