//! Pseudospectral representation of fields on topological spheres.
//!
//! Every quantity lives on a [`SphereGrid`]: `L + 1` Gauss-Legendre
//! colatitudes by `2L + 2` longitudes. Derivatives are taken through real
//! spherical harmonics up to degree `L`, and intrinsic operators are
//! assembled pointwise from an [`InducedMetric`].

mod field;
mod grid;
mod metric;
mod surface;

pub use field::{ScalarField, TangentField};
pub use grid::{coeff_count, coeff_index, SphereGrid, DEFAULT_BAND_LIMIT, MIN_BAND_LIMIT};
pub use metric::{gradient, integrate, laplacian, InducedMetric, Sym2};
pub use surface::{surface_geometry, EmbeddedSurface};

pub(crate) use metric::integrate_values;

use std::sync::Arc;

use crate::error::Result;

/// Shared grid for band limit `band_limit` (>= 4).
pub fn make_grid(band_limit: usize) -> Result<Arc<SphereGrid>> {
    SphereGrid::new(band_limit).map(Arc::new)
}
