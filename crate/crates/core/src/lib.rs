//! Volumes and shape factors of reachability and controllability zonotopes
//! of single-input linear discrete-time systems.
//!
//! The closed-form volumes in [`volume`] are cross-checked against the
//! subset-determinant sum in [`zonotope::oracle_volume`].

pub mod error;
pub mod factors;
pub mod matrix;
pub mod spectral;
pub mod volume;
pub mod zonotope;

pub use error::{Error, ErrorClass, Result};
pub use factors::{Decomposition, FactorCase, ShapeFactors};
pub use matrix::{DenseMatrix, LdtSystem};
pub use spectral::{JordanBlock, JordanStructure, SpectrumReal};
pub use volume::{VolumeCase, VolumeReport};
pub use zonotope::{Convention, Polygon2D, RegionKind, Zonotope};
