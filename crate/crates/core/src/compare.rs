//! Method comparison.
