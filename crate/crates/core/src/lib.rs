//! Free-space QKD link modelling: diffraction through soft and hard pupils,
//! spatial-mode and beam-array multiplexing, decoy-state BB84 rates, and
//! parameter optimization over range.

pub mod error;
pub mod mathkern;
pub mod modes;
pub mod ogba;
pub mod optimize;
pub mod qkd;
pub mod report;

pub use error::{Error, Result};
pub use mathkern::{QuadratureSpec, Rect};
pub use modes::{Aperture, ApertureShape, BeamParams, ModeIndex, OpticalGeometry};
pub use ogba::{PixelConfig, PixelGrid};
pub use optimize::{LinkSetup, RangeOutcome, SeedProfile, SweepResult, SystemKind};
pub use qkd::{CrosstalkMatrix, DetectorModel, Separator, SystemRate};
