//! Immersed thin-fiber model for fiber-reinforced linear elasticity.
//!
//! The elastic matrix is discretized on a uniform hexahedral mesh of the unit
//! cube. Fibers are one-dimensional curves with their own linear finite
//! element meshes, carrying the excess stiffness `C_f − C_Ω` scaled by the
//! cross-section area. A distributed Lagrange multiplier ties the fiber
//! displacement to the restriction of the background field; eliminating the
//! fiber unknowns leaves the SPD system `(A + Bᵀ L⁻¹ K L⁻¹ B) u = g`, solved
//! matrix-free by conjugate gradients.

pub mod error;
pub mod fem;
pub mod fibergen;
pub mod geometry;
pub mod harness;
pub mod homogenize;
pub mod mesh;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
