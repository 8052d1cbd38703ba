//! Randomised invariant suite behind the `verify` subcommand.

use std::sync::Arc;

use nalgebra::{Rotation3, Vector3};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;

use crate::embedding::{solve_weyl, WeylOptions};
use crate::energy::{
    dphi_dt, e_tilde_rho_omega, phi, wang_yau_energy, BoostVector, CausalType, EnergyFunctional, PhiInput,
};
use crate::error::Result;
use crate::optimizer::{minimize_functional, MinimizerOptions};
use crate::spacetime::{adm_momentum, coordinate_sphere, Family, InitialData, SurfaceData};
use crate::sphere::{
    coeff_count, gradient, integrate, laplacian, make_grid, EmbeddedSurface, ScalarField, SphereGrid, TangentField,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed violation measure.
    pub worst: f64,
    pub tolerance: f64,
}

fn outcome(name: &'static str, worst: f64, tolerance: f64) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tolerance,
        worst,
        tolerance,
    }
}

fn random_vector(rng: &mut StdRng, max_norm: f64) -> Vector3<f64> {
    let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    v.normalize() * rng.random_range(0.0..max_norm)
}

fn random_surface(rng: &mut StdRng, grid: &Arc<SphereGrid>) -> Result<EmbeddedSurface> {
    loop {
        let mut s = vec![0.0; coeff_count(3)];
        for c in s.iter_mut().skip(4) {
            *c = rng.random_range(-0.03..0.03);
        }
        let x = EmbeddedSurface::radial_perturbation(grid.clone(), 1.0, &s)?;
        if x.min_gauss_curvature().0 > 0.0 {
            return Ok(x);
        }
    }
}

fn random_data(rng: &mut StdRng, x: &EmbeddedSurface, equal: bool) -> Result<SurfaceData> {
    let g = x.grid();
    let b = random_vector(rng, 2.0);
    let c = rng.random_range(0.0..std::f64::consts::TAU);
    let u = random_vector(rng, 0.5);
    let m = nalgebra::Matrix3::from_fn(|_, _| rng.random_range(-0.5..0.5));
    let mut h = Vec::with_capacity(g.len());
    let mut amb = Vec::with_capacity(g.len());
    for i in 0..g.len() {
        let n = Vector3::from(g.unit_normal(i));
        let ratio = if equal { 1.0 } else { 2f64.powf((b.dot(&n) + c).sin()) };
        h.push(ratio * x.mean_curvature().values()[i]);
        amb.push(u + m * n);
    }
    let alpha = TangentField::from_ambient(g.clone(), &amb, x.tangents())?;
    SurfaceData::synthetic(x.metric().clone(), ScalarField::new(g.clone(), h)?, alpha)
}

fn random_field(rng: &mut StdRng, grid: &Arc<SphereGrid>, degree: usize) -> Result<ScalarField> {
    let c: Vec<f64> = (0..coeff_count(degree)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut full = vec![0.0; grid.coeff_count()];
    full[..c.len()].copy_from_slice(&c);
    ScalarField::from_coefficients(grid.clone(), &full)
}

/// Runs every check with the given seed at band limit `band_limit`.
pub fn run_suite(seed: u64, band_limit: usize) -> Result<Vec<CheckOutcome>> {
    let grid = make_grid(band_limit)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();

    // quadrature exactness on the round sphere
    let worst = (0..band_limit.min(8))
        .map(|l| {
            let mut c = vec![0.0; grid.coeff_count()];
            c[l * l + l] = 1.0;
            let f = grid.synthesize(&c, 0, 0);
            let sq: Vec<f64> = f.iter().map(|v| v * v).collect();
            (grid.quadrature(&sq) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    out.push(outcome("quadrature-orthonormality", worst, 1e-12));

    // operator compatibility and the Laplacian of the position
    let mut compat: f64 = 0.0;
    let mut lap_x: f64 = 0.0;
    for _ in 0..3 {
        let x = random_surface(&mut rng, &grid)?;
        let h = x.metric();
        let f = random_field(&mut rng, &grid, band_limit / 3)?;
        let g = random_field(&mut rng, &grid, band_limit / 3)?;
        let lhs_vals: Vec<f64> = f.values().iter().zip(laplacian(&g, h)?.values()).map(|(a, b)| a * b).collect();
        let lhs = integrate(&ScalarField::new(grid.clone(), lhs_vals)?, h)?;
        let rhs = integrate(&ScalarField::new(grid.clone(), h.inner(&gradient(&f, h)?, &gradient(&g, h)?))?, h)?;
        compat = compat.max((lhs + rhs).abs() / rhs.abs().max(1.0));
        for k in 0..3 {
            let l = laplacian(&x.coordinate(k), h)?;
            for i in 0..grid.len() {
                let exact = -x.mean_curvature().values()[i] * x.normals()[i][k];
                lap_x = lap_x.max((l.values()[i] - exact).abs());
            }
        }
    }
    out.push(outcome("integration-by-parts", compat, 1e-8));
    out.push(outcome("laplacian-of-position", lap_x, 1e-6));

    // energy identities on random synthetic data
    let mut split: f64 = 0.0;
    let mut sandwich: f64 = 0.0;
    let mut two_paths: f64 = 0.0;
    let mut rho_mono: f64 = 0.0;
    let mut equality: f64 = 0.0;
    let mut grad_err: f64 = 0.0;
    for _ in 0..10 {
        let x = random_surface(&mut rng, &grid)?;
        let data = random_data(&mut rng, &x, false)?;
        let f = EnergyFunctional::new(&x, &data)?;
        let t0 = BoostVector::from_vector(&random_vector(&mut rng, 3.0))?;
        let rep = wang_yau_energy(&x, &data, &t0)?;
        split = split.max((rep.energy - rep.e_tilde - rep.boost_term).abs());
        let scale = rep.energy.abs().max(1.0);
        sandwich = sandwich.max((rep.lower - rep.energy) / scale).max((rep.energy - rep.upper) / scale);
        if let Some(w) = t0.omega() {
            let alt = e_tilde_rho_omega(&x, &data, t0.rho(), &w)?;
            two_paths = two_paths.max((alt - rep.e_tilde).abs());
        }
        let m = rep.m_ly;
        if m >= 0.0 {
            let w = random_vector(&mut rng, 1.0).normalize();
            for rho in [0.25, 0.5, 1.0, 2.0, 4.0] {
                let e = e_tilde_rho_omega(&x, &data, rho, &w)?;
                rho_mono = rho_mono.max((1.0 + rho * rho).sqrt() * m - e);
            }
        }
        let h = 1e-4;
        let mut grad = Vector3::zeros();
        for k in 0..3 {
            let mut e = Vector3::zeros();
            e[k] = h;
            grad[k] = (f.energy(&e)? - f.energy(&-e)?) / (2.0 * h);
        }
        let v = f.four_vector().v();
        grad_err = grad_err.max((grad + v).norm() / v.norm().max(1e-12));

        let eq = random_data(&mut rng, &x, true)?;
        let fe = EnergyFunctional::new(&x, &eq)?;
        let a = random_vector(&mut rng, 3.0);
        equality = equality.max((fe.energy(&a)? + a.dot(&fe.four_vector().v())).abs());
    }
    out.push(outcome("energy-split", split, 1e-10));
    out.push(outcome("two-sided-estimate", sandwich, 1e-9));
    out.push(outcome("rho-omega-path", two_paths, 1e-8));
    out.push(outcome("rho-monotonicity", rho_mono, 1e-10));
    out.push(outcome("gradient-at-rest", grad_err, 1e-4));
    out.push(outcome("equality-case", equality, 1e-9));

    // maximum of Φ at t = 1
    let mut phi_excess: f64 = 0.0;
    for _ in 0..2000 {
        let rho: f64 = rng.random_range(1e-3..5.0);
        let f = rho * rng.random_range(-1.0..1.0);
        let t: f64 = rng.random_range(1e-3..10.0);
        let top = phi(&PhiInput { t: 1.0, f, rho })?;
        let inp = PhiInput { t, f, rho };
        phi_excess = phi_excess.max(phi(&inp)? - top);
        let d = dphi_dt(&inp)?;
        if t < 1.0 {
            phi_excess = phi_excess.max(-d);
        } else if t > 1.0 {
            phi_excess = phi_excess.max(d);
        }
    }
    out.push(outcome("phi-maximum", phi_excess, 1e-12));

    // slice data: pointwise identity, radial normal and charges
    let composite = InitialData::new(Family::Composite {
        mass: 1.0,
        momentum: [0.3, -0.1, 0.2],
    })?;
    let sd = coordinate_sphere(&composite, 60.0, &grid)?;
    let ident = (0..grid.len())
        .map(|i| {
            let (k, t, h) = (sd.k().values()[i], sd.trace_p().values()[i], sd.hnorm().values()[i]);
            (h * h + t * t - k * k).abs()
        })
        .fold(0.0, f64::max);
    out.push(outcome("hnorm-identity", ident, 1e-10));
    let radial = (0..grid.len())
        .map(|i| (sd.normals()[i] - Vector3::from(grid.unit_normal(i))).norm() * 60.0)
        .fold(0.0, f64::max);
    out.push(outcome("asymptotically-radial-normal", radial, 4.0));
    let p1 = adm_momentum(&composite, 50.0)?;
    let p2 = adm_momentum(&composite, 500.0)?;
    out.push(outcome("momentum-radius-independence", (p1 - p2).norm(), 1e-10));

    // rigid motions: 𝒱 rotates, energy with co-rotated observer and infimum are invariant
    let x = random_surface(&mut rng, &grid)?;
    let data = loop {
        let d = random_data(&mut rng, &x, false)?;
        if EnergyFunctional::new(&x, &d)?.four_vector().causal_type == CausalType::TimelikeFuture {
            break d;
        }
    };
    let axis = random_vector(&mut rng, 1.0).normalize();
    let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), rng.random_range(0.1..3.0));
    let moved = x.rigid_motion(rot.matrix(), &random_vector(&mut rng, 2.0))?;
    let moved_data = SurfaceData::synthetic(
        moved.metric().clone(),
        data.hnorm().clone(),
        data.alpha().clone(),
    )?;
    let f0 = EnergyFunctional::new(&x, &data)?;
    let f1 = EnergyFunctional::new(&moved, &moved_data)?;
    let dv = (rot * f0.four_vector().v() - f1.four_vector().v()).norm();
    out.push(outcome("momentum-rotates", dv, 1e-10));
    let a = random_vector(&mut rng, 2.0);
    let de = (f0.energy(&a)? - f1.energy(&(rot * a))?).abs();
    out.push(outcome("energy-rigid-invariance", de, 1e-9));
    let opts = MinimizerOptions { seed, ..Default::default() };
    let i0 = minimize_functional(&f0, &Vector3::zeros(), &opts)?;
    let i1 = minimize_functional(&f1, &Vector3::zeros(), &opts)?;
    out.push(outcome("infimum-rigid-invariance", (i0.value - i1.value).abs(), 1e-7));
    if i0.converged && i1.converged {
        let da = (rot * Vector3::from(i0.a_star) - Vector3::from(i1.a_star)).norm();
        out.push(outcome("optimizer-rotation-equivariance", da, 1e-3));
    }

    // Weyl round trip
    let target = random_surface(&mut rng, &grid)?;
    let sol = solve_weyl(target.metric(), None, &WeylOptions::default())?;
    let dk = (integrate(sol.surface.mean_curvature(), sol.surface.metric())?
        - integrate(target.mean_curvature(), target.metric())?)
    .abs();
    out.push(outcome("weyl-round-trip", sol.residual.max(dk), 1e-7));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_at_l16() {
        let results = run_suite(7, 16).unwrap();
        for r in &results {
            assert!(r.passed, "{r:?}");
        }
        assert!(results.len() >= 18);
    }
}
