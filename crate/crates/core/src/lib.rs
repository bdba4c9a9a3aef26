//! Classical affine spaces over small finite fields, the association scheme of
//! maximal totally isotropic flats, and Cameron-Liebler sets.

pub mod cl;
pub mod cli;
pub mod error;
pub mod exact;
pub mod field;
pub mod flats;
pub mod geometry;
pub mod scheme;
pub mod spreads;

pub use error::{Error, Result};
