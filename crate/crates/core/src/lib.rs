//! Linear algebra of complex primitive middle-degree forms on a symplectic
//! vector space that vanish on no Lagrangian subspace.
//!
//! The crate is organised bottom-up:
//!
//! * [`exterior`]: exterior algebra of `R^{2n}`, Lefschetz operators and
//!   primitive decomposition.
//! * [`symplectic`]: pullbacks, polar decomposition, compatible complex
//!   structures, type decomposition and Siegel space.
//! * [`lgr`]: Lagrangian frames, the phase loop and its winding, and the
//!   minimum of `|Ω|` over the Lagrangian Grassmannian.
//! * [`uspace`]: membership, low-dimensional invariants, norm minimisation,
//!   normal forms, reduction and products.
//! * [`torus`]: lattice Lagrangian classes, central charges and systoles of
//!   linear tori.
//! * [`flow`]: the `GL⁺(2,R)` action, unit-volume normalisation and the
//!   `f`-invariant.

pub mod error;
pub mod exterior;
pub mod flow;
pub mod lgr;
pub mod linalg;
pub mod symplectic;
pub mod table;
pub mod torus;
pub mod uspace;

pub use error::{Error, Result};
pub use exterior::{Blade, ExteriorForm, Multivector, C64};
