#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::Vector3;
use qlelab::energy::BoostVector;
use qlelab::spacetime::SurfaceData;
use qlelab::sphere::{coeff_count, EmbeddedSurface, ScalarField, SphereGrid, TangentField};
use rand::rngs::StdRng;
use rand::RngExt;

/// Convex star-shaped surface of radius about `radius` with random low-degree
/// wobbles.
pub fn random_convex_surface(rng: &mut StdRng, grid: &Arc<SphereGrid>, radius: f64, amplitude: f64) -> EmbeddedSurface {
    loop {
        let mut s = vec![0.0; coeff_count(4)];
        for c in s.iter_mut().skip(4) {
            *c = rng.random_range(-amplitude..amplitude);
        }
        let x = EmbeddedSurface::radial_perturbation(grid.clone(), radius, &s).expect("valid perturbation");
        if x.min_gauss_curvature().0 > 0.0 {
            return x;
        }
    }
}

/// `|H| = 2^{sin(⟨b, n⟩ + c)} k₀`, so that `1/2 ≤ |H|/k₀ ≤ 2`.
pub fn random_hnorm(rng: &mut StdRng, x: &EmbeddedSurface) -> ScalarField {
    let b = random_vector(rng, 2.0);
    let c = rng.random_range(0.0..std::f64::consts::TAU);
    let g = x.grid();
    let vals = (0..g.len())
        .map(|i| {
            let n = Vector3::from(g.unit_normal(i));
            2f64.powf((b.dot(&n) + c).sin()) * x.mean_curvature().values()[i]
        })
        .collect();
    ScalarField::new(g.clone(), vals).unwrap()
}

/// Tangential part of the ambient field `u + M n`.
pub fn random_alpha(rng: &mut StdRng, x: &EmbeddedSurface, scale: f64) -> TangentField {
    let u = random_vector(rng, scale);
    let m = nalgebra::Matrix3::from_fn(|_, _| rng.random_range(-scale..scale));
    let g = x.grid();
    let amb: Vec<Vector3<f64>> = (0..g.len()).map(|i| u + m * Vector3::from(g.unit_normal(i))).collect();
    TangentField::from_ambient(g.clone(), &amb, x.tangents()).unwrap()
}

pub fn random_vector(rng: &mut StdRng, max_norm: f64) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n * rng.random_range(0.0..max_norm);
        }
    }
}

pub fn random_boost(rng: &mut StdRng, max_norm: f64) -> BoostVector {
    BoostVector::from_vector(&random_vector(rng, max_norm)).unwrap()
}

/// Synthetic surface data with random `|H|` and `α` on a random convex surface.
pub fn random_configuration(rng: &mut StdRng, grid: &Arc<SphereGrid>) -> (EmbeddedSurface, SurfaceData) {
    let x = random_convex_surface(rng, grid, 1.0, 0.03);
    let h = random_hnorm(rng, &x);
    let alpha = random_alpha(rng, &x, 0.5);
    let data = SurfaceData::synthetic(x.metric().clone(), h, alpha).unwrap();
    (x, data)
}
