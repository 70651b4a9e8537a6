//! Reference models and independent oracles.

pub mod navaro;
pub mod oracles;

pub use navaro::{build_navaro, build_navaro_leg, navaro_document, navaro_leg_document, NavaroParams};
pub use oracles::{oracle_merged_msa, oracle_serial_vjm};
