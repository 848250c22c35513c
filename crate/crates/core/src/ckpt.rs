//! Checkpoint container.
