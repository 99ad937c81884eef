//! Mobility and radio channel: urban-grid platoon placement, path loss,
//! correlated log-normal shadowing, Rayleigh fast fading, composed link
//! gains, co-channel interference and SINR.

mod config;
mod interference;
mod model;
mod propagation;
mod topology;

pub use config::ScenarioConfig;
pub use interference::{compute_interference, compute_sinr, ReceiverKind, Transmission};
pub use model::{ChannelModel, ChannelRealization};
pub use propagation::{
    compose_gain, db_to_linear, dbm_to_watts, linear_to_db, pathloss_db, sample_fast_fading,
    update_shadowing, LinkKind, LinkState, ShadowingParams,
};
pub use topology::{advance_mobility, build_topology, Axis, Lane, TopologyState};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("link distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("scenario.platoon_gap_m: intra-platoon gap {0} m outside [5, 35] m")]
    GapOutOfRange(f64),
    #[error("{platoons} platoons of {size} vehicles exceed lane capacity ({capacity} platoons)")]
    LaneCapacity {
        platoons: usize,
        size: usize,
        capacity: usize,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}
