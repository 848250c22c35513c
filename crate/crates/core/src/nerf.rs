//! NeRF.
