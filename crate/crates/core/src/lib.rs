//! Upper bounds on Nielsen complexity for spin-chain time evolution.
//!
//! The bound replaces the geodesic length under a penalty metric by a closest
//! vector problem on the lattice (2πZ)^D with Gram matrix I + (μ-1)Q, where Q is
//! built from the energy eigenbasis and the split of generators into easy and hard.

pub mod error;
pub mod export;
pub mod fingerprint;
pub mod lattice;
pub mod linalg;
pub mod models;
pub mod operators;
pub mod pipeline;
pub mod qmatrix;
pub mod rmt;
pub mod scalar;
pub mod spectral;

pub use error::{Error, ErrorClass, Result};
pub use linalg::{CMatrix, RMatrix, RVector};
pub use scalar::Real;

pub type Lattice = lattice::LatticeContext<f64>;
pub type Lattice32 = lattice::LatticeContext<f32>;
pub type Solution = lattice::CvpSolution<f64>;
