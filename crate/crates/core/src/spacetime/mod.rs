//! Analytic initial data on an asymptotically flat end, surface data of
//! 2-spheres placed in it, and the ADM flux integrals.
//!
//! Conventions: `k > 0` on large coordinate spheres (outward normal), `p` is
//! the second fundamental form of the slice, and traces of `p` on a surface
//! use the induced metric.

mod adm;
mod data;
mod surface_data;

pub use adm::{adm_energy, adm_momentum};
pub use data::{bowen_york_p, schwarzschild_data, BowenYork, DecaySample, Family, InitialData};
pub use surface_data::{connection_one_form, coordinate_sphere, SurfaceData, SurfacePlacement};
