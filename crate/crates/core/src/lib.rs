//! Simulation laboratory for undecided-state plurality consensus:
//! configuration metrics and exact expectation/drift calculators, fast
//! samplers for the complete-graph gossip process, an exact
//! small-instance oracle, the token-walk variant for d-regular graphs
//! with congestion accounting, and trajectory analysis.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod expander;
pub mod oracle;
pub mod sampling;
pub mod trace;

pub use config::{
    generate_initial, AgentStates, ColorConfiguration, ExpectedStep, InitSpec, PluralityDrift,
    UNDECIDED,
};
pub use error::{Error, Result};
pub use trace::{Outcome, RunSummary, RunTrace, TraceRow};
