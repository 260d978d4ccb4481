//! Steady states, linear probe response and port transmissions of a
//! two-port optomechanical cavity with three optical and two mechanical
//! modes.
//!
//! The usual pipeline is [`steady_state::steady_state`] →
//! [`response::solve_fluctuation_system`] (or the closed form) →
//! [`response::transmission_point`]. [`sweep`] repeats it over parameter
//! grids and [`time_domain`] checks it against direct integration.

pub mod dynamics;
pub mod model;
pub mod presets;
pub mod response;
pub mod steady_state;
pub mod sweep;
pub mod time_domain;

pub use model::{AngularRate, Convention, SystemParams};
pub use num_complex::Complex64;
pub use response::TransmissionPoint;
pub use steady_state::{BranchPolicy, SteadyStateSolution};
