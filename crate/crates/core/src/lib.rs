//! Quadratic optimal transport between finite ensembles of coherent states.
//!
//! Two costs are compared on the same data:
//!
//! - the classical cost `W₂²` between discrete measures `Σ mᵢ δ_{xᵢ}` and
//!   `Σ nⱼ δ_{yⱼ}` on phase space, solved exactly as a transportation LP;
//! - the quantum cost `MK₂²` between the density matrices
//!   `R = Σ mᵢ |xᵢ⟩⟨xᵢ|` and `S = Σ nⱼ |yⱼ⟩⟨yⱼ|`, obtained by minimizing
//!   `trace(C Q)` over couplings `Q` of `R` and `S`, where
//!   `C = (p̂⊗I − I⊗p̂)² + (q̂⊗I − I⊗q̂)² − 2ℏ`.
//!
//! Coupling operators of `R` and `S` live on `range(R) ⊗ range(S)`, so the
//! quantum problem reduces exactly to a small Hermitian SDP on the span of
//! the coherent states. The SDP is solved by ADMM and certified through its
//! dual; explicit couplings and dual witnesses for the two-point cases are
//! built in [`quantum`].
//!
//! Configuration space is one-dimensional throughout.

#![forbid(unsafe_code)]

pub mod cost;
pub mod error;
pub mod gaussian;
pub mod io;
pub mod linalg;
pub mod quantum;
pub mod sdp;
pub mod semiclassical;
pub mod transport;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense real matrix.
pub type RMatrix = nalgebra::DMatrix<f64>;
