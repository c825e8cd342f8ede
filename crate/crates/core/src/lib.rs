//! Output-field noise spectra and frequency-resolved multicolor entanglement
//! for a multimode optomechanical cavity driven by a frequency comb.
//!
//! Frequencies are in the config's own units (dimensionless or angular from
//! Hz). The crate offers three evaluation routes for the correlations:
//! the full closed form ([`spectra`]), the identical-mode simplified closed
//! form, and a dense linear solve of the Langevin equations ([`oracle`]).

pub mod disorder;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod presets;
pub mod response;
pub mod spectra;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use model::{
    parse_config, FrequencyUnit, MechanicalParams, ModeParams, Route, SpectrumResult,
    SystemConfig,
};
pub use spectra::{PairCorrelation, Quadrature};
