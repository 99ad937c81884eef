//! Platooning C-V2X simulator with a semantic-communication layer and
//! multi-agent actor-critic resource allocation.

pub mod channel;
pub mod env;
pub mod harness;
pub mod marl;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod semantics;

pub use scalar::{Precision, Real};

pub type Mlp64 = marl::Mlp<f64>;
pub type Mlp32 = marl::Mlp<f32>;
pub type Samramarl64 = marl::Samramarl<f64>;
pub type Samramarl32 = marl::Samramarl<f32>;
pub type Centralized64 = marl::Centralized<f64>;
pub type Centralized32 = marl::Centralized<f32>;
