use std::sync::Arc;

use nalgebra::Vector3;

use super::grid::SphereGrid;
use crate::error::{Error, Result};

/// Real samples of a function on the sphere, one per grid node.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "sphere::ScalarField",
                format!("expected {} samples, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "sphere::ScalarField",
                format!("non-finite sample at node {i}"),
            ));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        ScalarField { grid, values }
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(|(t, p)| f(t, p)).collect();
        Self::new(grid, values)
    }

    /// Samples the band-limited function with the given harmonic coefficients.
    pub fn from_coefficients(grid: Arc<SphereGrid>, coeffs: &[f64]) -> Result<Self> {
        let values = grid.synthesize(coeffs, 0, 0);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.grid.analyze(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn ensure_same_grid(&self, grid: &SphereGrid, op: &'static str) -> Result<()> {
        same_grid(&self.grid, grid, op)
    }
}

pub(crate) fn same_grid(a: &SphereGrid, b: &SphereGrid, op: &'static str) -> Result<()> {
    if a.band_limit() != b.band_limit() {
        return Err(Error::GridMismatch {
            op,
            left: a.band_limit(),
            right: b.band_limit(),
        });
    }
    Ok(())
}

/// Tangent vector field given by its contravariant components in the
/// coordinate basis `(∂_θ, ∂_φ)` at every node.
#[derive(Debug, Clone)]
pub struct TangentField {
    grid: Arc<SphereGrid>,
    components: Vec<[f64; 2]>,
}

impl TangentField {
    pub fn new(grid: Arc<SphereGrid>, components: Vec<[f64; 2]>) -> Result<Self> {
        if components.len() != grid.len() {
            return Err(Error::invalid(
                "sphere::TangentField",
                format!("expected {} vectors, got {}", grid.len(), components.len()),
            ));
        }
        Ok(TangentField { grid, components })
    }

    pub fn zero(grid: Arc<SphereGrid>) -> Self {
        let components = vec![[0.0; 2]; grid.len()];
        TangentField { grid, components }
    }

    /// Tangential part of an ambient vector field, expressed in the
    /// coordinate basis `(t_θ, t_φ)` of an immersed surface.
    pub fn from_ambient(
        grid: Arc<SphereGrid>,
        ambient: &[Vector3<f64>],
        tangents: &[[Vector3<f64>; 2]],
    ) -> Result<Self> {
        let components = ambient
            .iter()
            .zip(tangents)
            .map(|(v, t)| {
                let g = [t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[1])];
                let rhs = [v.dot(&t[0]), v.dot(&t[1])];
                let det = g[0] * g[2] - g[1] * g[1];
                [
                    (g[2] * rhs[0] - g[1] * rhs[1]) / det,
                    (g[0] * rhs[1] - g[1] * rhs[0]) / det,
                ]
            })
            .collect();
        Self::new(grid, components)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.components
    }

    /// Push-forward `V^a t_a` through the tangent map of an immersion.
    pub fn push_forward(&self, tangents: &[[Vector3<f64>; 2]]) -> Vec<Vector3<f64>> {
        self.components
            .iter()
            .zip(tangents)
            .map(|(c, t)| t[0] * c[0] + t[1] * c[1])
            .collect()
    }
}
