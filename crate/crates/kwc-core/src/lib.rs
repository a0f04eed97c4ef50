//! Kobayashi-Warren-Carter energies at phase-field and limit level, the
//! single-well Modica-Mortola core, set-valued limits with sliced-graph
//! metrics, recovery-profile construction, and denoising solvers.

pub mod energy;
pub mod error;
pub mod field;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod setvalued;
pub mod solver;

pub use error::{Error, Result};
pub use field::{GridField, Rect};
