//! Numerical toolkit for Hardy-space analysis adapted to Schrödinger
//! operators L = -Δ + V on a box.
//!
//! The crate discretizes the constructive objects of that theory on
//! uniform grids: the critical radius map of a nonnegative potential, its
//! dyadic layers, coverings and partitions of unity, the heat semigroup
//! and its maximal functions, Orlicz/Luxemburg norms, atomic
//! decompositions, and the splitting of a product f·g into an integrable
//! part and a rough part with a log-Orlicz bound.
//!
//! Start from the runnable programs in `examples/`; the `shlab` binary
//! drives batch experiments and writes CSV reports.

pub mod atoms;
pub mod bumps;
pub mod commands;
pub mod config;
pub mod conv;
pub mod cover;
pub mod error;
pub mod family;
pub mod field;
pub mod grid;
pub mod maximal;
pub mod norms;
pub mod orlicz;
pub mod potential;
pub mod product;
pub mod rho;
pub mod semigroup;

pub use error::{Error, Result};
pub use field::{Field, Patch};
pub use grid::{Ball, Grid, Point};
