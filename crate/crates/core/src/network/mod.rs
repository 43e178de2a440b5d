//! WKB ϑ-trajectories, spectral networks and finite webs.

mod export;
mod grow;
mod infinity;
mod trace;
mod webs;

pub use export::{network_polylines, web_polylines};
pub use grow::{grow_generations, grow_network, Junction, JunctionKind, SpectralNetwork};
pub use infinity::{asymptotic_directions, classify_infinity, final_arcs, FinalArc, MarkedPoint};
pub use trace::{seed_critical, trace, NetworkConfig, Origin, Status, Trajectory, TrajectorySeed};
pub use webs::{detect_bps, identify_charge, FiniteWeb, ScanConfig, WebTopology};
