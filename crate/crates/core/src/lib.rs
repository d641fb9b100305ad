//! Convolutional layers on arbitrary graphs by kernel translation.
//!
//! A kernel is seeded on the most central vertex, moved to every other vertex
//! through approximate graph translations that deform it as little as
//! possible, and the resulting placements define a weight-sharing scheme for
//! a convolutional layer. On a 4-connected grid the scheme is exactly the
//! classical 3x3 "plus" convolution.
//!
//! Pipeline: [`graph`] → [`translations`] / [`propagation`] → [`layer`] → [`net`].

pub mod cli;
pub mod error;
pub mod graph;
pub mod layer;
pub mod net;
pub mod par;
pub mod propagation;
pub mod translations;

pub use error::{Error, Result};
pub use graph::{CoordinateSet, Graph};
