//! Obstruction-entropy machinery for one-sided symbolic systems: β-shifts and
//! their follower automata, orbit-segment decompositions with specification
//! checks, measures of maximal entropy, and sliding-block-code factors.

pub mod beta;
pub mod decomposition;
pub mod error;
pub mod factors;
pub mod formats;
pub mod linalg;
pub mod mme;
pub mod presentation;
pub mod qfield;
pub mod symbolic;
pub mod word;

pub use error::{Error, Result};
pub use word::{Symbol, Word};
