//! Desk-scale 3D scene reconstruction from posed 2D images.
//!
//! Two reconstruction methods share one geometry core: a neural radiance
//! field trained by differentiable volume rendering, and 3D Gaussian
//! splatting trained through a tile-based differentiable rasterizer. A
//! Laplacian-variance blur filter cleans datasets before training, and an
//! analytic synthetic-scene renderer provides ground truth for testing and
//! for head-to-head comparisons of the two methods.

pub mod ckpt;
pub mod compare;
pub mod error;
pub mod filter;
pub mod geometry;
pub mod img;
pub mod metrics;
pub mod nerf;
pub mod splat;
pub mod synth;

pub use error::{CoreError, Result};
