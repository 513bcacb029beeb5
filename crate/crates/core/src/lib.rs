//! Numerical constructions around geometric Lorenz Poincaré maps.
//!
//! * [`maps`]: the odd square-root Lorenz family and its constants.
//! * [`cones`]: the zero-area Cantor-cone sectional attractor of `F_k`.
//! * [`cantor`]: the fat Cantor set `K` and its word-indexed interval tree.
//! * [`bowen`]: surgery turning `f²` into a fat-horseshoe base map.
//! * [`horseshoe`]: the Poincaré map, the fat horseshoe `K × K` and its measure.
//! * [`experiment`], [`figures`], [`svg`]: the experiment runner behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bowen;
pub mod cantor;
pub mod cones;
pub mod error;
pub mod experiment;
pub mod figures;
pub mod horseshoe;
pub mod maps;
pub mod numeric;
pub mod rng;
pub mod svg;

pub use error::{Error, Result};
