//! Stiffness models of manipulators by matrix structural analysis.
//!
//! Links, joints, supports and loads each contribute their own block of
//! linear equations over per-node wrenches and deflections; the blocks are
//! stacked (never merged) into one sparse system, and the end-effector
//! stiffness follows from a Schur complement of that system.

pub mod assembly;
pub mod basis;
pub mod boundary;
pub mod elements;
pub mod equations;
pub mod error;
pub mod io;
pub mod joints;
pub mod model;
pub mod reference;
pub mod screw;

pub use error::{MsaError, Result};
