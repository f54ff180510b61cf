//! Analytical core for a dual-band reconfigurable intelligent surface.
//!
//! The crate models the surface as multiport Thévenin networks: a
//! synthetic electromagnetics oracle supplies coupling impedances and
//! embedded element patterns, the scattering engine turns load states
//! into far-field patterns, and the higher-level modules search those
//! states — beam-steering codebooks for the high band, a phase-entropy
//! genetic optimizer over element interconnection topologies for the low
//! band — plus an equivalent-circuit model of the spiral-inductor chokes
//! and measurement post-processing utilities.

pub mod codebook;
pub mod engine;
pub mod entropy;
pub mod error;
pub mod field;
pub mod linalg;
pub mod measurement;
pub mod oracle;
pub mod psi;
pub mod reference;
pub mod topology;

pub use error::{Result, RisError};
