//! Extension of 1-jets to `C^{1,ω}` functions through paraconvex envelopes.

pub mod envelope;
pub mod error;
pub mod format;
pub mod grid;
pub mod jet;
pub mod modulus;
pub mod optimize;
pub mod report;
mod vecops;
pub mod verify;

pub use envelope::{extend, ExtendConfig, ExtensionResult, Variant};
pub use error::{Error, Result};
pub use grid::{DirectionSet, GridFunction, GridSpec, NormMode};
pub use jet::{Jet, SearchBox};
pub use modulus::{Modulus, ModulusSpec, Profile};
pub use report::{CheckReport, Condition};
