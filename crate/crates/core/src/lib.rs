//! Appearance-based estimation of 3D gaze direction from face and eye
//! image patches, with a synthetic looker generator and an evaluation
//! harness for target-grid experiments.

pub mod datasets;
pub mod descriptor;
pub mod error;
pub mod evalkit;
pub mod geometry;
pub mod models;
pub mod orientation;
pub mod synthlab;

pub use error::{Error, Result};
