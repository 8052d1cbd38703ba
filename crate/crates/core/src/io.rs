//! JSON schemas for surfaces, metrics and initial data.
//!
//! Harmonic coefficient lists use the real basis ordered by degree `l`
//! ascending and, within a degree, order `m` from `−l` to `l`; the entry for
//! `(l, m)` sits at index `l² + l + m`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::embedding::WeylSolution;
use crate::error::{Error, Result};
use crate::spacetime::{Family, InitialData};
use crate::sphere::{make_grid, EmbeddedSurface, InducedMetric, SphereGrid};

const OP: &str = "io::parse";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceKind {
    Round {
        radius: f64,
    },
    Ellipsoid {
        axes: [f64; 3],
    },
    /// `R (1 + s) n` with `s` given by harmonic coefficients.
    HarmonicPerturbation {
        radius: f64,
        coefficients: Vec<f64>,
    },
    /// Harmonic coefficients of the three coordinate functions.
    Coefficients {
        x: Vec<f64>,
        y: Vec<f64>,
        z: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub band_limit: usize,
    #[serde(rename = "X")]
    pub x: SurfaceKind,
}

fn pad(grid: &SphereGrid, c: &[f64], what: &str) -> Result<Vec<f64>> {
    if c.len() > grid.coeff_count() {
        return Err(Error::invalid(
            OP,
            format!(
                "{what}: {} coefficients exceed band limit {} ({} allowed)",
                c.len(),
                grid.band_limit(),
                grid.coeff_count()
            ),
        ));
    }
    let mut out = vec![0.0; grid.coeff_count()];
    out[..c.len()].copy_from_slice(c);
    Ok(out)
}

impl SurfaceKind {
    pub fn build(&self, grid: &Arc<SphereGrid>) -> Result<EmbeddedSurface> {
        match self {
            SurfaceKind::Round { radius } => {
                positive(*radius, "radius")?;
                EmbeddedSurface::round(grid.clone(), *radius)
            }
            SurfaceKind::Ellipsoid { axes } => {
                for a in axes {
                    positive(*a, "ellipsoid axis")?;
                }
                EmbeddedSurface::ellipsoid(grid.clone(), *axes)
            }
            SurfaceKind::HarmonicPerturbation { radius, coefficients } => {
                positive(*radius, "radius")?;
                EmbeddedSurface::radial_perturbation(grid.clone(), *radius, coefficients)
            }
            SurfaceKind::Coefficients { x, y, z } => EmbeddedSurface::from_coefficients(
                grid.clone(),
                [pad(grid, x, "x")?, pad(grid, y, "y")?, pad(grid, z, "z")?],
            ),
        }
    }
}

fn positive(v: f64, what: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(OP, format!("{what} must be positive, got {v}")))
    }
}

impl SurfaceFile {
    pub fn build(&self) -> Result<EmbeddedSurface> {
        self.x.build(&make_grid(self.band_limit)?)
    }

    pub fn from_surface(surface: &EmbeddedSurface) -> Self {
        let [x, y, z] = surface.coefficients().clone();
        SurfaceFile {
            band_limit: surface.grid().band_limit(),
            x: SurfaceKind::Coefficients { x, y, z },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricKind {
    Round {
        radius: f64,
    },
    /// `e^{2u} R² dΩ²` with `u` given by harmonic coefficients.
    Conformal {
        radius: f64,
        coefficients: Vec<f64>,
    },
    /// `G(∂n, ∂n)` for a smooth symmetric ambient tensor `G`, given by the
    /// harmonic coefficients of its components `xx, xy, xz, yy, yz, zz`.
    Ambient {
        components: [Vec<f64>; 6],
    },
    /// Metric induced by an immersion.
    Pullback {
        #[serde(rename = "X")]
        x: SurfaceKind,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub band_limit: usize,
    pub h: MetricKind,
}

impl MetricFile {
    pub fn build(&self) -> Result<InducedMetric> {
        let grid = make_grid(self.band_limit)?;
        match &self.h {
            MetricKind::Round { radius } => {
                positive(*radius, "radius")?;
                InducedMetric::round(grid, *radius)
            }
            MetricKind::Conformal { radius, coefficients } => {
                positive(*radius, "radius")?;
                let u = pad(&grid, coefficients, "conformal factor")?;
                InducedMetric::conformal_round(grid, *radius, &u)
            }
            MetricKind::Ambient { components } => {
                let samples: Vec<Vec<f64>> = components
                    .iter()
                    .map(|c| pad(&grid, c, "ambient component").map(|p| grid.synthesize(&p, 0, 0)))
                    .collect::<Result<_>>()?;
                let amb: Vec<[f64; 6]> = (0..grid.len())
                    .map(|i| std::array::from_fn(|k| samples[k][i]))
                    .collect();
                InducedMetric::from_ambient(grid, &amb)
            }
            MetricKind::Pullback { x } => Ok(x.build(&grid)?.metric().clone()),
        }
    }
}

/// Flat initial-data block `{"family", "mass", "momentum"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub family: String,
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub momentum: Option<[f64; 3]>,
}

impl DataConfig {
    pub fn build(&self) -> Result<InitialData> {
        let family = match self.family.as_str() {
            "flat" => {
                if self.mass.is_some_and(|m| m != 0.0) || self.momentum.is_some_and(|p| p != [0.0; 3]) {
                    return Err(Error::invalid(OP, "flat data takes no mass or momentum"));
                }
                Family::Flat
            }
            "schwarzschild" => {
                if self.momentum.is_some_and(|p| p != [0.0; 3]) {
                    return Err(Error::invalid(OP, "schwarzschild data is time-symmetric; use the composite family"));
                }
                Family::Schwarzschild {
                    mass: self.mass.ok_or_else(|| Error::invalid(OP, "schwarzschild data needs a mass"))?,
                }
            }
            "composite" => Family::Composite {
                mass: self.mass.ok_or_else(|| Error::invalid(OP, "composite data needs a mass"))?,
                momentum: self.momentum.unwrap_or([0.0; 3]),
            },
            other => {
                return Err(Error::invalid(
                    OP,
                    format!("unknown family '{other}' (expected flat, schwarzschild or composite)"),
                ))
            }
        };
        InitialData::new(family)
    }
}

/// Serialised [`WeylSolution`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    #[serde(flatten)]
    pub surface: SurfaceFile,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub area: f64,
}

impl From<&WeylSolution> for WeylReport {
    fn from(s: &WeylSolution) -> Self {
        WeylReport {
            surface: SurfaceFile::from_surface(&s.surface),
            residual: s.residual,
            iterations: s.iterations,
            converged: s.converged,
            area: s.surface.area(),
        }
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(OP, format!("{what}: {e}")))
}
