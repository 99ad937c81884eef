//! Structured-text (JSON) checkpoints.
//!
//! Every network is stored with its layer sizes, activations and a flat list
//! of parameter values widened to `f64` (exact for both precisions); decimal
//! text keeps the file independent of platform endianness.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Adam, AdamParams, AlgorithmId, Dims, MarlError, Mlp};
use super::mlp::Activation;
use crate::rng::{RngState, SimRng};
use crate::scalar::{Precision, Real};

pub const CHECKPOINT_FORMAT: &str = "platoon-sim-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRecord {
    pub name: String,
    pub sizes: Vec<usize>,
    pub hidden: Activation,
    pub output: Activation,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerRecord {
    pub name: String,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub algorithm: AlgorithmId,
    pub precision: Precision,
    pub dims: Dims,
    pub updates: u64,
    pub env_steps: u64,
    pub networks: Vec<NetworkRecord>,
    pub optimizers: Vec<OptimizerRecord>,
    pub rngs: Vec<(String, RngState)>,
    /// Hash of the run configuration that produced the checkpoint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl Checkpoint {
    pub fn new(algorithm: AlgorithmId, precision: Precision, dims: Dims) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            algorithm,
            precision,
            dims,
            updates: 0,
            env_steps: 0,
            networks: Vec::new(),
            optimizers: Vec::new(),
            rngs: Vec::new(),
            config_hash: None,
        }
    }

    pub fn push_net<T: Real>(&mut self, name: &str, net: &Mlp<T>) {
        let (hidden, output) = net.activations();
        self.networks.push(NetworkRecord {
            name: name.into(),
            sizes: net.sizes().to_vec(),
            hidden,
            output,
            values: net.params().iter().map(|p| p.widen()).collect(),
        });
    }

    pub fn push_opt<T: Real>(&mut self, name: &str, opt: &Adam<T>) {
        self.optimizers.push(OptimizerRecord {
            name: name.into(),
            t: opt.t,
            m: opt.m.iter().map(|p| p.widen()).collect(),
            v: opt.v.iter().map(|p| p.widen()).collect(),
        });
    }

    pub fn push_rng(&mut self, name: &str, rng: &SimRng) {
        self.rngs.push((name.into(), RngState::capture(rng)));
    }

    /// Checks the header against what the caller expects.
    pub fn check(&self, algorithm: AlgorithmId, precision: Precision, dims: Dims) -> Result<(), MarlError> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(MarlError::Checkpoint(format!("unsupported format {} v{}", self.format, self.version)));
        }
        if self.algorithm != algorithm || self.precision != precision || self.dims != dims {
            return Err(MarlError::Checkpoint(format!(
                "checkpoint is for {} {:?} {:?}, expected {} {:?} {:?}",
                self.algorithm, self.precision, self.dims, algorithm, precision, dims
            )));
        }
        Ok(())
    }

    pub fn net<T: Real>(&self, name: &str, like: &Mlp<T>) -> Result<Mlp<T>, MarlError> {
        let rec = self
            .networks
            .iter()
            .find(|n| n.name == name)
            .ok_or_else(|| MarlError::Checkpoint(format!("missing network {name}")))?;
        if rec.sizes != like.sizes() || (rec.hidden, rec.output) != like.activations() {
            return Err(MarlError::Checkpoint(format!("network {name} has layers {:?}, expected {:?}", rec.sizes, like.sizes())));
        }
        let values = rec.values.iter().map(|&v| T::of(v)).collect();
        Mlp::from_params(&rec.sizes, rec.hidden, rec.output, values)
    }

    pub fn opt<T: Real>(&self, name: &str, n: usize, hp: AdamParams) -> Result<Adam<T>, MarlError> {
        let rec = self
            .optimizers
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| MarlError::Checkpoint(format!("missing optimizer {name}")))?;
        if rec.m.len() != n || rec.v.len() != n {
            return Err(MarlError::Checkpoint(format!("optimizer {name} has wrong length")));
        }
        Ok(Adam {
            m: rec.m.iter().map(|&v| T::of(v)).collect(),
            v: rec.v.iter().map(|&v| T::of(v)).collect(),
            t: rec.t,
            hp,
        })
    }

    pub fn rng(&self, name: &str) -> Result<SimRng, MarlError> {
        self.rngs
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| MarlError::Checkpoint(format!("missing rng {name}")))?
            .1
            .restore()
            .map_err(MarlError::Checkpoint)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MarlError> {
        let text = serde_json::to_string_pretty(self).map_err(|e| MarlError::Checkpoint(e.to_string()))?;
        std::fs::write(path.as_ref(), text).map_err(|e| MarlError::Io(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MarlError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| MarlError::Io(format!("{}: {e}", path.as_ref().display())))?;
        serde_json::from_str(&text).map_err(|e| MarlError::Checkpoint(e.to_string()))
    }
}
