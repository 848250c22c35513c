//! Splatting.
