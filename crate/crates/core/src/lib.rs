//! Singular solutions of the binormal flow generated by polygonal lines.
//!
//! The pipeline runs from corner strengths ([`alpha`]) through the gauged
//! coefficient dynamics ([`coefficients`]) and the field they define
//! ([`field`]) to parallel frames ([`frame`]), reconstructed filaments
//! ([`curve`]) and high-frequency spectral energies ([`spectral`]).
//! [`talbot`] covers regular polygons at rational times, [`pipeline`] strings
//! the stages together and [`io`] holds the JSON snapshot and CSV formats.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod alpha;
pub mod coefficients;
pub mod curve;
pub mod error;
pub mod field;
pub mod frame;
pub mod io;
pub mod pipeline;
pub mod spectral;
pub mod talbot;

pub use alpha::{AlphaSequence, CornerSpec};
pub use coefficients::{CoefficientState, EvolutionConfig, Propagator};
pub use curve::Curve;
pub use error::{Error, Result};
pub use field::Modes;
pub use frame::{AsymptoticLimits, CVec3, Frame, FrameField, Grid};
pub use spectral::{SpectralWindow, TaperConfig};
pub use talbot::{RationalTime, TalbotResult};
