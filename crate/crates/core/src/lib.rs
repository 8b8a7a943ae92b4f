//! Section pursuit: search the space of 2-D projection planes of
//! `p`-dimensional data for slices whose interior distribution differs most
//! from the exterior, exposing holes (low density) or grains (high density)
//! hidden in ordinary projections.

pub mod binning;
pub mod datagen;
pub mod error;
pub mod geometry;
pub mod index;
pub mod pursuit;
pub mod seed;
pub mod slicing;
pub mod topotrace;

pub use error::{Error, Result};
pub use geometry::{principal_angles, step_from, GeodesicPath, ProjectionFrame};
