//! Quasilocal energy of spacelike 2-surfaces in asymptotically flat initial data.
//!
//! The crate is organised bottom-up:
//!
//! * [`sphere`]: spectral grid, fields, intrinsic operators and embedded
//!   surface geometry;
//! * [`embedding`]: isometric embedding of positive-curvature metrics into ℝ³;
//! * [`spacetime`]: analytic asymptotically flat initial data, coordinate
//!   sphere extraction and ADM integrals;
//! * [`energy`]: the quasilocal energy, its `(ρ, ω)` reformulation, the
//!   four-vector `𝒲` and the two-sided estimates;
//! * [`optimizer`]: infimum over observers and large-sphere sweeps.

// `!(x > 0.0)` deliberately rejects NaN; tensor code indexes by component.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod embedding;
pub mod energy;
pub mod error;
pub mod io;
pub mod optimizer;
pub mod spacetime;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
