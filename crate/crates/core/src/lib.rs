//! Laboratory for pseudo-minimal dynamics on tori.

pub mod affine;
pub mod cli;
pub mod config;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod flow;
pub mod orbit;
pub mod report;
pub mod sets;
pub mod systems;
pub mod torus;

pub use error::{Error, Result};
