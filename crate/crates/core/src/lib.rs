//! Zero-shot recognition via graph-diffusion anchor embeddings.
//!
//! The pipeline has two trained stages plus evaluation:
//!
//! 1. **Anchor generation** ([`anchors`]): a diffusion graph-convolutional
//!    auto-encoder over the class-attribute bipartite graph produces one
//!    low-dimensional anchor per class and per attribute.
//! 2. **Distribution alignment** ([`align`]): a regularized linear
//!    auto-encoder projects visual features into the anchor space, with an
//!    optional relation term tying projected samples to attribute anchors.
//! 3. **Evaluation** ([`eval`]): mean class accuracy under the conventional
//!    protocol (search unseen classes only) and the generalized protocol
//!    (search all classes, reported with the harmonic mean).
//!
//! [`numerics`] supplies the dense matrix type, deterministic RNG, Adam, and
//! a finite-difference gradient checker; [`graph`] the bipartite graph and
//! diffusion operators; [`io`] the on-disk formats plus a synthetic dataset
//! generator. Everything is deterministic for a fixed seed.

#![allow(clippy::needless_range_loop)]

pub mod align;
pub mod anchors;
pub mod error;
pub mod eval;
pub mod graph;
pub mod io;
pub mod numerics;

pub use error::{Error, Result};
