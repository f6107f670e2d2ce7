//! Integral point sets over the residue rings `Z_n^m`.
//!
//! Two points of `Z_n^m` are at integral distance when `sum (u_i - v_i)^2`
//! is a square in `Z_n`. The crate computes the maximum size of such sets,
//! with and without position constraints, and carries the distance-geometry
//! toolkit (Cayley-Menger determinants, characteristics) over `Z_p`.
//!
//! Module map:
//! - [`modring`]: residues, squares, factorization, `omega`/`alpha`.
//! - [`geometry`]: points, Lee-reduced difference vectors, position predicates.
//! - [`bitset`] and [`cliquegraph`]: distance graphs and the exact clique solver.
//! - [`reductions`]: closed forms, constructions, bounds, the conjecture harness.
//! - [`orderly`]: isomorph-free generation of plane point sets.
//! - [`charfield`]: characteristic theory over `Z_p` and determinant identities.

pub mod bitset;
pub mod charfield;
pub mod cliquegraph;
pub mod error;
pub mod geometry;
pub mod modring;
pub mod orderly;
pub mod reductions;

pub use error::{Error, Result};
