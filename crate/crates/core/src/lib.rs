//! Anisotropic Kelvin transform for Finsler norms.
//!
//! For a norm `H` the map `T_H(ξ) = ∇H(ξ)/H(ξ)` inverts `ℝᴺ∖{0}` with
//! inverse `T_{H°}`. When `H(ξ) = √⟨Mξ,ξ⟩` the weighted pullback
//! `û = H^{2−N}·(u∘T_H)` carries solutions of `−Δ^H u = f` to solutions of
//! `−Δ^{H°} û = (f∘T_H)/H^{N+2}`, and `u* = u∘T_H` carries the Finsler
//! N-Laplace equation `−Δ^H_N u = g` to `−Δ^{H°}_N u* = (g∘T_H)/H^{2N}`.
//!
//! The crate evaluates these objects pointwise and checks the identities
//! behind them by residuals on manufactured solutions ([`verify`]).

pub mod error;
pub mod field;
pub mod jet;
pub mod kelvin;
pub mod linalg;
pub mod norm;
pub mod operators;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use field::{FieldRef, ScalarField};
pub use jet::Jet2;
pub use kelvin::KelvinContext;
pub use norm::{NormKind, NormSpec, SpdMatrix};
pub use verify::{ResidualReport, SamplePlan};

pub use nalgebra::{DMatrix, DVector};
