//! Concrete Feynman-Kac models.

mod diffusion;
mod lin_gauss;
mod rare_event;
mod stoch_vol;

use serde::{Deserialize, Serialize};

pub use diffusion::{
    diffusion_log_g, euler_propagate, recover_increments, DiffusionParams, DiffusionSvModel,
};
pub use lin_gauss::LinGaussModel;
pub use rare_event::RareEventModel;
pub use stoch_vol::StochVolModel;

/// Which Feynman-Kac representation of a state-space model to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    /// Proposal equals the state transition; the potential is the
    /// observation density.
    Bootstrap,
    /// Data-informed proposal with potential `p f / m`.
    Guided,
}

impl Formalism {
    pub fn as_str(&self) -> &'static str {
        match self {
            Formalism::Bootstrap => "bootstrap",
            Formalism::Guided => "guided",
        }
    }
}

/// A simulated dataset: observations `y_0..=y_T` and the latent states that
/// generated them, one row per time index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub observations: Vec<Vec<f64>>,
    pub latent: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn horizon(&self) -> usize {
        self.observations.len().saturating_sub(1)
    }
}
