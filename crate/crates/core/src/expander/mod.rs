//! The token-based variant of the dynamics for d-regular graphs: graph
//! generation, lazy-walk mixing times, and the forward/backward token
//! phase with FIFO queues and congestion accounting.

mod graph;
mod mixing;
mod phase;
mod protocol;

pub use graph::RegularGraph;
pub use mixing::{mixing_time, required_hops, tv_profile_until, MixingTime, BASE_EPS, EXACT_N_CAP};
pub use phase::{run_phase, PhaseParams, PhaseStats, Token, WalkStep};
pub use protocol::{congestion_bound, run_expander, ExpanderRunParams};
