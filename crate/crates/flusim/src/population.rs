//! Synthetic population generation.
//!
//! Agents carry demographic attributes sampled from the 2006 Egypt census:
//! an age band, a social type permitted for that band, and a daily activity
//! level. They are placed uniformly on a square landscape and wired into
//! three kinds of fully connected social groups — households covering
//! everyone, work groups for the working-age bands, and school groups for
//! school-age children plus older students.

use crate::disease::{DiseaseClock, HealthState};
use crate::error::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

pub type AgentId = u32;

/// Relationship role an agent most identifies with, from the census
/// household-relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SocialType {
    Spouse,
    Parent,
    Sibling,
    Child,
    OtherFamily,
    Coworker,
    GroupMember,
    Neighbor,
    Friend,
    Advisor,
    Schoolmate,
    Other,
}

impl SocialType {
    pub const ALL: [SocialType; 12] = [
        SocialType::Spouse,
        SocialType::Parent,
        SocialType::Sibling,
        SocialType::Child,
        SocialType::OtherFamily,
        SocialType::Coworker,
        SocialType::GroupMember,
        SocialType::Neighbor,
        SocialType::Friend,
        SocialType::Advisor,
        SocialType::Schoolmate,
        SocialType::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SocialType::Spouse => "SPOUSE",
            SocialType::Parent => "PARENT",
            SocialType::Sibling => "SIBLING",
            SocialType::Child => "CHILD",
            SocialType::OtherFamily => "OTHERFAMILY",
            SocialType::Coworker => "COWORKER",
            SocialType::GroupMember => "GROUPMEMBER",
            SocialType::Neighbor => "NEIGHBOR",
            SocialType::Friend => "FRIEND",
            SocialType::Advisor => "ADVISOR",
            SocialType::Schoolmate => "SCHOOLMATE",
            SocialType::Other => "OTHER",
        }
    }

    pub fn from_label(label: &str) -> Option<SocialType> {
        SocialType::ALL.iter().copied().find(|t| t.label() == label)
    }

    pub fn index(self) -> usize {
        SocialType::ALL.iter().position(|t| *t == self).unwrap()
    }
}

/// Census age bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    Under4,
    Age5To14,
    Age15To44,
    Age45To59,
    Over59,
}

impl AgeBand {
    pub const ALL: [AgeBand; 5] = [
        AgeBand::Under4,
        AgeBand::Age5To14,
        AgeBand::Age15To44,
        AgeBand::Age45To59,
        AgeBand::Over59,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AgeBand::Under4 => "<4",
            AgeBand::Age5To14 => "5-14",
            AgeBand::Age15To44 => "15-44",
            AgeBand::Age45To59 => "45-59",
            AgeBand::Over59 => ">59",
        }
    }

    pub fn from_label(label: &str) -> Option<AgeBand> {
        AgeBand::ALL.iter().copied().find(|b| b.label() == label)
    }

    pub fn index(self) -> usize {
        AgeBand::ALL.iter().position(|b| *b == self).unwrap()
    }
}

/// Published census shares per age band, in [`AgeBand::ALL`] order. They sum
/// to 0.9999 due to rounding in the source table; sampling renormalizes.
const RAW_BAND_SHARES: [f64; 5] = [0.1060, 0.2110, 0.4985, 0.1236, 0.0608];

const RAW_SHARE_SUM: f64 =
    RAW_BAND_SHARES[0] + RAW_BAND_SHARES[1] + RAW_BAND_SHARES[2] + RAW_BAND_SHARES[3] + RAW_BAND_SHARES[4];

/// Age-band population shares renormalized to sum to one.
pub fn band_shares() -> [f64; 5] {
    let mut shares = RAW_BAND_SHARES;
    for s in &mut shares {
        *s /= RAW_SHARE_SUM;
    }
    shares
}

/// Social types the census permits for each age band. Toddlers have no
/// working or schooling roles; the elderly band drops child, coworker,
/// advisor and schoolmate roles.
pub fn permitted_types(band: AgeBand) -> &'static [SocialType] {
    use SocialType::*;
    match band {
        AgeBand::Under4 => &[Sibling, Child, Other],
        AgeBand::Age5To14 => &[
            Sibling, Child, OtherFamily, Coworker, GroupMember, Neighbor, Friend, Schoolmate,
            Other,
        ],
        AgeBand::Age15To44 => &[
            Spouse, Parent, Sibling, OtherFamily, Coworker, GroupMember, Neighbor, Friend,
            Advisor, Schoolmate, Other,
        ],
        AgeBand::Age45To59 => &[
            Spouse, Parent, Sibling, OtherFamily, Coworker, GroupMember, Neighbor, Friend,
            Advisor, Other,
        ],
        AgeBand::Over59 => &[
            Spouse, Parent, Sibling, OtherFamily, GroupMember, Neighbor, Friend, Other,
        ],
    }
}

/// Samples an age band according to the renormalized census shares.
pub fn sample_age_band<R: Rng>(rng: &mut R) -> AgeBand {
    let shares = band_shares();
    let draw: f64 = rng.gen();
    let mut acc = 0.0;
    for (band, share) in AgeBand::ALL.iter().zip(shares) {
        acc += share;
        if draw < acc {
            return *band;
        }
    }
    AgeBand::Over59 // floating-point tail
}

/// Samples a social type uniformly from the band's permitted set.
pub fn sample_social_type<R: Rng>(band: AgeBand, rng: &mut R) -> SocialType {
    let types = permitted_types(band);
    types[rng.gen_range(0..types.len())]
}

/// Daily mobility and sociability class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActivityLevel {
    Low,
    Moderate,
    High,
}

impl ActivityLevel {
    pub const ALL: [ActivityLevel; 3] =
        [ActivityLevel::Low, ActivityLevel::Moderate, ActivityLevel::High];

    /// Contact-list length per day.
    pub fn contacts_per_day(self) -> usize {
        match self {
            ActivityLevel::Low => 2,
            ActivityLevel::Moderate => 3,
            ActivityLevel::High => 4,
        }
    }

    /// Scales the maximum daily movement step.
    pub fn step_multiplier(self) -> f64 {
        match self {
            ActivityLevel::Low => 0.5,
            ActivityLevel::Moderate => 1.0,
            ActivityLevel::High => 1.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ActivityLevel::Low => "low",
            ActivityLevel::Moderate => "moderate",
            ActivityLevel::High => "high",
        }
    }

    pub fn from_label(label: &str) -> Option<ActivityLevel> {
        ActivityLevel::ALL.iter().copied().find(|a| a.label() == label)
    }
}

/// Knobs for population synthesis that the census table does not pin down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationSettings {
    /// Probabilities of Low/Moderate/High activity.
    pub activity_weights: [f64; 3],
    /// Inclusive household size range; households partition everyone.
    pub home_group_size: (usize, usize),
    /// Inclusive work group size range.
    pub work_group_size: (usize, usize),
    /// Inclusive school group size range.
    pub school_group_size: (usize, usize),
}

impl Default for PopulationSettings {
    fn default() -> Self {
        PopulationSettings {
            activity_weights: [0.3, 0.5, 0.2],
            home_group_size: (2, 6),
            work_group_size: (3, 8),
            school_group_size: (4, 10),
        }
    }
}

/// One simulated person.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub id: AgentId,
    pub state: HealthState,
    pub clock: DiseaseClock,
    pub age_band: AgeBand,
    pub social_type: SocialType,
    pub activity: ActivityLevel,
    pub x: f64,
    pub y: f64,
    /// Fellow members of this agent's household (self excluded).
    pub home: Vec<AgentId>,
    /// Fellow members of this agent's work group (self excluded).
    pub work: Vec<AgentId>,
    /// Fellow members of this agent's school group (self excluded).
    pub school: Vec<AgentId>,
    pub home_group: Option<u32>,
    pub work_group: Option<u32>,
    pub school_group: Option<u32>,
    /// Day the agent acquired its (first) infection, if any.
    pub infection_time: Option<u32>,
    /// Agent that transmitted the (first) infection, if attributable.
    pub infector: Option<AgentId>,
}

impl Agent {
    fn new(id: AgentId, band: AgeBand, social_type: SocialType, activity: ActivityLevel, x: f64, y: f64) -> Agent {
        Agent {
            id,
            state: HealthState::Susceptible,
            clock: DiseaseClock::default(),
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
        }
    }
}

fn sample_activity<R: Rng>(weights: &[f64; 3], rng: &mut R) -> ActivityLevel {
    let total: f64 = weights.iter().sum();
    let draw: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (level, w) in ActivityLevel::ALL.iter().zip(weights) {
        acc += w;
        if draw < acc {
            return *level;
        }
    }
    ActivityLevel::High
}

/// Builds a synthetic population with default settings. Identical inputs
/// produce identical populations.
pub fn synthesize_population(n: usize, landscape_side: f64, seed: u64) -> Result<Vec<Agent>, Error> {
    synthesize_population_with(n, landscape_side, seed, &PopulationSettings::default())
}

/// Builds a synthetic population: census-sampled attributes, uniform
/// placement, then home/work/school group wiring.
pub fn synthesize_population_with(
    n: usize,
    landscape_side: f64,
    seed: u64,
    settings: &PopulationSettings,
) -> Result<Vec<Agent>, Error> {
    if n == 0 {
        return Err(Error::config("population", "population must be at least 1"));
    }
    if !(landscape_side.is_finite() && landscape_side > 0.0) {
        return Err(Error::config(
            "landscape_side",
            format!("landscape side must be positive, got {landscape_side}"),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agents = Vec::with_capacity(n);
    for id in 0..n {
        let band = sample_age_band(&mut rng);
        let social_type = sample_social_type(band, &mut rng);
        let activity = sample_activity(&settings.activity_weights, &mut rng);
        let x = rng.gen_range(0.0..landscape_side);
        let y = rng.gen_range(0.0..landscape_side);
        agents.push(Agent::new(id as AgentId, band, social_type, activity, x, y));
    }
    build_networks(&mut agents, settings, &mut rng);
    Ok(agents)
}

/// Which of the three group networks is being wired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NetworkKind {
    Home,
    Work,
    School,
}

/// Assigns every agent to a household and eligible agents to work or school
/// groups. Group membership is symmetric by construction and an agent is
/// never a member of its own contact list.
pub fn build_networks<R: Rng>(agents: &mut [Agent], settings: &PopulationSettings, rng: &mut R) {
    // Households partition the whole population.
    let everyone: Vec<AgentId> = (0..agents.len() as AgentId).collect();
    wire_groups(agents, everyone, settings.home_group_size, NetworkKind::Home, rng);

    // School groups take all school-age children plus older students.
    let students: Vec<AgentId> = agents
        .iter()
        .filter(|a| {
            a.age_band == AgeBand::Age5To14
                || (a.age_band == AgeBand::Age15To44 && a.social_type == SocialType::Schoolmate)
        })
        .map(|a| a.id)
        .collect();
    wire_groups(agents, students, settings.school_group_size, NetworkKind::School, rng);

    // Work groups take the working-age bands, minus the older students.
    let workers: Vec<AgentId> = agents
        .iter()
        .filter(|a| {
            matches!(a.age_band, AgeBand::Age15To44 | AgeBand::Age45To59)
                && a.school_group.is_none()
        })
        .map(|a| a.id)
        .collect();
    wire_groups(agents, workers, settings.work_group_size, NetworkKind::Work, rng);
}

fn wire_groups<R: Rng>(
    agents: &mut [Agent],
    mut members: Vec<AgentId>,
    (min, max): (usize, usize),
    kind: NetworkKind,
    rng: &mut R,
) {
    if members.is_empty() {
        return;
    }
    members.shuffle(rng);
    let groups = partition_into_groups(&members, min, max, rng);
    for (group_id, group) in groups.iter().enumerate() {
        let mut sorted = group.clone();
        sorted.sort_unstable();
        for &member in &sorted {
            let peers: Vec<AgentId> = sorted.iter().copied().filter(|&m| m != member).collect();
            let agent = &mut agents[member as usize];
            match kind {
                NetworkKind::Home => {
                    agent.home = peers;
                    agent.home_group = Some(group_id as u32);
                }
                NetworkKind::Work => {
                    agent.work = peers;
                    agent.work_group = Some(group_id as u32);
                }
                NetworkKind::School => {
                    agent.school = peers;
                    agent.school_group = Some(group_id as u32);
                }
            }
        }
    }
}

/// Splits `ids` into consecutive chunks with sizes drawn uniformly from
/// [min, max]. Sizes never leave a sub-`min` tail, so every group lands in
/// the requested range whenever `ids.len() >= min` (a single undersized
/// group is produced otherwise). Requires `max >= 2 * min - 1` so the tail
/// adjustment stays within range.
fn partition_into_groups<R: Rng>(
    ids: &[AgentId],
    min: usize,
    max: usize,
    rng: &mut R,
) -> Vec<Vec<AgentId>> {
    debug_assert!(min >= 1 && max >= min && max >= 2 * min - 1);
    let mut groups = Vec::new();
    let mut i = 0;
    while i < ids.len() {
        let remaining = ids.len() - i;
        let size = if remaining <= max {
            remaining
        } else {
            let mut s = rng.gen_range(min..=max);
            if remaining - s < min {
                // Shrinking the tail below `min` would strand it; grow this
                // group so the tail keeps at least `min` members.
                s = remaining - min;
            }
            s
        };
        groups.push(ids[i..i + size].to_vec());
        i += size;
    }
    groups
}

/// Writes the population structure as CSV. Disease state is deliberately
/// not persisted; a dump captures who exists and how they are connected.
pub fn dump_population_csv<W: Write>(agents: &[Agent], out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "id,age_band,social_type,activity,x,y,home_group,work_group,school_group"
    )?;
    for a in agents {
        let fmt_group = |g: Option<u32>| g.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            a.id,
            a.age_band.label(),
            a.social_type.label(),
            a.activity.label(),
            a.x,
            a.y,
            fmt_group(a.home_group),
            fmt_group(a.work_group),
            fmt_group(a.school_group),
        )?;
    }
    Ok(())
}

/// Reads a population dump back, rebuilding the symmetric group networks
/// from the group columns. All agents load as susceptible.
pub fn load_population_csv<R: BufRead>(reader: R) -> Result<Vec<Agent>, Error> {
    let mut agents: Vec<Agent> = Vec::new();
    let mut lines = reader.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header)))
            if header.trim()
                == "id,age_band,social_type,activity,x,y,home_group,work_group,school_group" => {}
        _ => {
            return Err(Error::config(
                "population_csv",
                "missing or malformed header row",
            ))
        }
    }
    for (line_no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::config(
                "population_csv",
                format!("line {}: expected 9 fields, got {}", line_no + 1, fields.len()),
            ));
        }
        let bad = |what: &str| {
            Error::config(
                "population_csv",
                format!("line {}: invalid {what}", line_no + 1),
            )
        };
        let id: AgentId = fields[0].parse().map_err(|_| bad("id"))?;
        let band = AgeBand::from_label(fields[1]).ok_or_else(|| bad("age_band"))?;
        let social_type = SocialType::from_label(fields[2]).ok_or_else(|| bad("social_type"))?;
        let activity = ActivityLevel::from_label(fields[3]).ok_or_else(|| bad("activity"))?;
        let x: f64 = fields[4].parse().map_err(|_| bad("x"))?;
        let y: f64 = fields[5].parse().map_err(|_| bad("y"))?;
        let parse_group = |field: &str, what: &str| -> Result<Option<u32>, Error> {
            if field.is_empty() {
                Ok(None)
            } else {
                field.parse().map(Some).map_err(|_| bad(what))
            }
        };
        let mut agent = Agent::new(id, band, social_type, activity, x, y);
        agent.home_group = parse_group(fields[6], "home_group")?;
        agent.work_group = parse_group(fields[7], "work_group")?;
        agent.school_group = parse_group(fields[8], "school_group")?;
        agents.push(agent);
    }
    if agents.iter().enumerate().any(|(i, a)| a.id != i as AgentId) {
        return Err(Error::config(
            "population_csv",
            "agent ids must be dense and ordered from 0",
        ));
    }
    rebuild_member_lists(&mut agents);
    Ok(agents)
}

fn rebuild_member_lists(agents: &mut [Agent]) {
    use std::collections::HashMap;
    let mut homes: HashMap<u32, Vec<AgentId>> = HashMap::new();
    let mut works: HashMap<u32, Vec<AgentId>> = HashMap::new();
    let mut schools: HashMap<u32, Vec<AgentId>> = HashMap::new();
    for a in agents.iter() {
        if let Some(g) = a.home_group {
            homes.entry(g).or_default().push(a.id);
        }
        if let Some(g) = a.work_group {
            works.entry(g).or_default().push(a.id);
        }
        if let Some(g) = a.school_group {
            schools.entry(g).or_default().push(a.id);
        }
    }
    for a in agents.iter_mut() {
        let peers = |map: &HashMap<u32, Vec<AgentId>>, g: Option<u32>| -> Vec<AgentId> {
            g.map(|g| {
                map[&g]
                    .iter()
                    .copied()
                    .filter(|&m| m != a.id)
                    .collect()
            })
            .unwrap_or_default()
        };
        a.home = peers(&homes, a.home_group);
        a.work = peers(&works, a.work_group);
        a.school = peers(&schools, a.school_group);
        a.home.sort_unstable();
        a.work.sort_unstable();
        a.school.sort_unstable();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn band_shares_renormalize_to_one() {
        let sum: f64 = band_shares().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12, "shares sum to {sum}");
        // Renormalization lifts each share slightly above its raw value.
        for (raw, adjusted) in RAW_BAND_SHARES.iter().zip(band_shares()) {
            assert!(adjusted > *raw);
            assert!((adjusted - raw / 0.9999).abs() < 1e-15);
        }
    }

    #[test]
    fn permitted_type_tables_match_census_rows() {
        use SocialType::*;
        assert_eq!(permitted_types(AgeBand::Under4), &[Sibling, Child, Other]);
        assert_eq!(permitted_types(AgeBand::Under4).len(), 3);
        assert_eq!(permitted_types(AgeBand::Age5To14).len(), 9);
        assert_eq!(permitted_types(AgeBand::Age15To44).len(), 11);
        assert_eq!(permitted_types(AgeBand::Age45To59).len(), 10);
        assert_eq!(permitted_types(AgeBand::Over59).len(), 8);
        // The elderly band has no child, working or schooling roles.
        for t in [Child, Coworker, Advisor, Schoolmate] {
            assert!(!permitted_types(AgeBand::Over59).contains(&t));
        }
        // Only the two middle bands may be schoolmates.
        assert!(permitted_types(AgeBand::Age5To14).contains(&Schoolmate));
        assert!(permitted_types(AgeBand::Age15To44).contains(&Schoolmate));
        assert!(!permitted_types(AgeBand::Age45To59).contains(&Schoolmate));
    }

    #[test]
    fn age_band_sampling_tracks_census_shares() {
        let mut r = rng(11);
        let n = 100_000u32;
        let mut counts = [0u32; 5];
        for _ in 0..n {
            counts[sample_age_band(&mut r).index()] += 1;
        }
        for (band, expected) in AgeBand::ALL.iter().zip(band_shares()) {
            let freq = f64::from(counts[band.index()]) / f64::from(n);
            assert!(
                (freq - expected).abs() < 0.006,
                "band {} frequency {freq} vs share {expected}",
                band.label()
            );
        }
    }

    #[test]
    fn toddler_social_types_are_uniform_over_three_roles() {
        let mut r = rng(12);
        let n = 100_000u32;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            let t = sample_social_type(AgeBand::Under4, &mut r);
            assert!(permitted_types(AgeBand::Under4).contains(&t));
            *counts.entry(t).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 3);
        for (&t, &c) in &counts {
            let freq = f64::from(c) / f64::from(n);
            assert!(
                (freq - 1.0 / 3.0).abs() < 0.01,
                "type {:?} frequency {freq}",
                t
            );
        }
    }

    #[test]
    fn synthesis_is_deterministic_and_all_susceptible() {
        let a = synthesize_population(500, 800.0, 99).unwrap();
        let b = synthesize_population(500, 800.0, 99).unwrap();
        assert_eq!(a, b);
        let c = synthesize_population(500, 800.0, 100).unwrap();
        assert_ne!(a, c);
        assert!(a.iter().all(|agent| agent.state == HealthState::Susceptible));
        assert!(a
            .iter()
            .all(|agent| (0.0..800.0).contains(&agent.x) && (0.0..800.0).contains(&agent.y)));
    }

    #[test]
    fn empty_population_is_rejected() {
        assert!(synthesize_population(0, 100.0, 1).is_err());
        assert!(synthesize_population(10, 0.0, 1).is_err());
    }

    #[test]
    fn households_partition_everyone_within_size_bounds() {
        let agents = synthesize_population(997, 1000.0, 5).unwrap();
        let mut seen = vec![false; agents.len()];
        let mut group_sizes = std::collections::HashMap::new();
        for a in &agents {
            let g = a.home_group.expect("every agent belongs to a household");
            *group_sizes.entry(g).or_insert(0usize) += 1;
            assert!(!seen[a.id as usize]);
            seen[a.id as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
        let total: usize = group_sizes.values().sum();
        assert_eq!(total, agents.len());
        for (&g, &size) in &group_sizes {
            assert!((2..=6).contains(&size), "household {g} has size {size}");
        }
    }

    #[test]
    fn networks_are_symmetric_and_self_free() {
        let agents = synthesize_population(600, 1000.0, 7).unwrap();
        for a in &agents {
            for (mine, field) in [(&a.home, "home"), (&a.work, "work"), (&a.school, "school")] {
                assert!(!mine.contains(&a.id), "agent {} lists itself in {field}", a.id);
                for &peer in mine {
                    let theirs = match field {
                        "home" => &agents[peer as usize].home,
                        "work" => &agents[peer as usize].work,
                        _ => &agents[peer as usize].school,
                    };
                    assert!(
                        theirs.contains(&a.id),
                        "{field} membership not symmetric between {} and {peer}",
                        a.id
                    );
                }
            }
        }
    }

    #[test]
    fn group_eligibility_follows_age_bands() {
        let agents = synthesize_population(2_000, 1000.0, 13).unwrap();
        for a in &agents {
            match a.age_band {
                AgeBand::Under4 | AgeBand::Over59 => {
                    assert!(a.work.is_empty(), "band {} in work group", a.age_band.label());
                    assert!(a.school.is_empty());
                }
                AgeBand::Age5To14 => {
                    assert!(a.work.is_empty());
                    assert!(a.school_group.is_some(), "child without a school group");
                }
                AgeBand::Age15To44 => {
                    if a.social_type == SocialType::Schoolmate {
                        assert!(a.school_group.is_some());
                        assert!(a.work_group.is_none());
                    } else {
                        assert!(a.school.is_empty());
                        assert!(a.work_group.is_some(), "working-age adult without work group");
                    }
                }
                AgeBand::Age45To59 => {
                    assert!(a.school.is_empty());
                    assert!(a.work_group.is_some());
                }
            }
        }
    }

    #[test]
    fn csv_round_trip_preserves_structure() {
        let agents = synthesize_population(150, 400.0, 21).unwrap();
        let mut buf = Vec::new();
        dump_population_csv(&agents, &mut buf).unwrap();
        let loaded = load_population_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(agents.len(), loaded.len());
        for (a, b) in agents.iter().zip(&loaded) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.age_band, b.age_band);
            assert_eq!(a.social_type, b.social_type);
            assert_eq!(a.activity, b.activity);
            assert_eq!(a.x, b.x);
            assert_eq!(a.y, b.y);
            assert_eq!(a.home_group, b.home_group);
            let mut home = a.home.clone();
            home.sort_unstable();
            assert_eq!(home, b.home);
        }
    }

    #[test]
    fn csv_rejects_garbage() {
        let bad_header = "id,age\n0,<4";
        assert!(load_population_csv(std::io::Cursor::new(bad_header)).is_err());
        let bad_band = "id,age_band,social_type,activity,x,y,home_group,work_group,school_group\n0,<99,OTHER,low,1,1,0,,";
        assert!(load_population_csv(std::io::Cursor::new(bad_band)).is_err());
    }

    proptest! {
        /// Every sampled social type is permitted for its band.
        #[test]
        fn sampled_types_always_permitted(seed in 0u64..u64::MAX) {
            let mut r = rng(seed);
            let band = sample_age_band(&mut r);
            let t = sample_social_type(band, &mut r);
            prop_assert!(permitted_types(band).contains(&t));
        }

        /// Partitioning covers all ids exactly once with in-range sizes.
        #[test]
        fn partition_is_exact_cover(n in 2usize..400, seed in 0u64..u64::MAX) {
            let ids: Vec<AgentId> = (0..n as AgentId).collect();
            let mut r = rng(seed);
            let groups = partition_into_groups(&ids, 2, 6, &mut r);
            let mut seen: Vec<AgentId> = groups.iter().flatten().copied().collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, ids);
            for g in &groups {
                prop_assert!((2..=6).contains(&g.len()));
            }
        }
    }
}
