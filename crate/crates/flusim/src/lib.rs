//! Stochastic agent-based influenza simulator.
//!
//! The crate models an outbreak as individual agents on a square landscape
//! who move daily, meet network and public contacts, and progress through
//! a nine-state disease machine (susceptible, in-contact, exposed,
//! infectious, quarantined, not-quarantined, dead, recovered, immunized).
//! Agents carry census-sampled demographics and belong to household, work
//! and school groups that channel transmission.
//!
//! Around the core engine sit four injectable control strategies
//! (awareness, vaccination, social distancing, quarantining), a classical
//! SIR ODE reference model with analytic oracles, and a batch scenario
//! runner that executes seeded Monte Carlo ensembles and writes CSV/JSON
//! artifacts. Everything is deterministic given its seeds.

pub mod control;
pub mod disease;
pub mod engine;
pub mod error;
pub mod output;
pub mod population;
pub mod rng;
pub mod scenario;
pub mod sir;

pub use error::Error;
