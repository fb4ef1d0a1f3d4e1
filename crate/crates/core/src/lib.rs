//! Deciding when a cyclic splitting of a free group, or a virtually cyclic
//! splitting of a virtually free group, is (virtually) free.
//!
//! The crate is organized bottom-up: [`words`] and [`whitehead`] provide
//! free group word algebra and Whitehead's algorithm, [`splice`] builds
//! Whitehead graphs over finite subtrees of the Cayley tree, [`bassserre`]
//! builds finite pieces of Bass-Serre complexes and detour certificates,
//! [`decider`] implements the torsion-free decision procedure and
//! [`vflift`] lifts the virtually free case to a free kernel.

pub mod bassserre;
pub mod decider;
pub mod error;
pub mod graph;
pub mod splice;
pub mod vflift;
pub mod whitehead;
pub mod words;

pub use error::{Error, Result};
