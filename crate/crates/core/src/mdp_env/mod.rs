//! Monthly treatment MDP driven by the fitted regressions.

mod actions;
mod env;
mod log;
mod state;

pub use actions::{is_legal, legal_actions, ActionSet};
pub use env::{
    Dynamics, Environment, Episode, PinnedDynamics, Policy, RandomPolicy, Transition,
    TransitionProbabilities, DEFAULT_HORIZON_CAP,
};
pub use log::{read_trajectories, write_trajectory, TrajectoryRecord};
pub use state::{HealthState, PatientState};
