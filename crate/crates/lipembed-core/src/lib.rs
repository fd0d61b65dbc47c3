//! Multi-scale block construction for Lipschitz embeddings of i.i.d. Bernoulli(1/2)
//! fields on `Z^2`, with an exact brute-force embedding oracle and a parameter auditor.
//!
//! Everything here is `no_std` + `alloc`: pure functions of their inputs, integer-exact
//! wherever the objects are discrete. File formats, the CLI and parallel drivers live in
//! the `lipembed` crate.
#![no_std]

extern crate alloc;

pub mod embed;
pub mod fields;
pub mod hierarchy;
pub mod lattice;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod stats;

pub use fields::{BitField, Family, Y0Class};
pub use lattice::{LatticeAnimal, Point, Rect, Shape};
pub use params::ParameterSet;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
