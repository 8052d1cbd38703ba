use std::sync::{Arc, OnceLock};

use nalgebra::Vector3;

use super::data::InitialData;
use crate::error::Result;
use crate::sphere::SphereGrid;

/// Band limit of the quadrature used for the flux integrals. The integrands
/// on coordinate spheres are low-degree polynomials in `n` for every family.
const ADM_BAND_LIMIT: usize = 16;

fn quadrature_grid() -> &'static Arc<SphereGrid> {
    static GRID: OnceLock<Arc<SphereGrid>> = OnceLock::new();
    GRID.get_or_init(|| Arc::new(SphereGrid::new(ADM_BAND_LIMIT).expect("valid band limit")))
}

/// Flux integral over `{|y| = r}` with the flat normal `n` and the flat area
/// element `r² dΩ`.
fn flux<T>(r: f64, mut integrand: impl FnMut(&Vector3<f64>, &Vector3<f64>) -> Result<T>) -> Result<T>
where
    T: std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    let grid = quadrature_grid();
    let mut acc = T::default();
    for i in 0..grid.len() {
        let n = Vector3::from(grid.unit_normal(i));
        acc = acc + integrand(&(n * r), &n)? * (grid.weights()[i] * r * r);
    }
    Ok(acc)
}

/// `(1/16π) ∫_{S_r} (∂_j g_ij − ∂_i g_jj) n^i`.
pub fn adm_energy(data: &InitialData, r: f64) -> Result<f64> {
    let total = flux(r, |y, n| {
        let dg = data.metric_derivative(y)?;
        let mut s = 0.0;
        for i in 0..3 {
            let mut v = 0.0;
            for j in 0..3 {
                v += dg[j][(i, j)] - dg[i][(j, j)];
            }
            s += v * n[i];
        }
        Ok(s)
    })?;
    Ok(total / (16.0 * std::f64::consts::PI))
}

/// `P_k = (1/16π) ∫_{S_r} 2 (p_ik − δ_ik p_jj) n^i`.
pub fn adm_momentum(data: &InitialData, r: f64) -> Result<Vector3<f64>> {
    let total = flux(r, |y, n| {
        let p = data.extrinsic_curvature(y)?;
        let tr = p.trace();
        Ok((p.transpose() * n - n * tr) * 2.0)
    })?;
    Ok(total / (16.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::data::{schwarzschild_data, Family};

    #[test]
    fn schwarzschild_energy_matches_finite_radius_closed_form() {
        let d = schwarzschild_data(1.0).unwrap();
        for r in [250.0, 500.0, 1000.0] {
            let e = adm_energy(&d, r).unwrap();
            assert!((e - (1.0 + 0.5 / r).powi(3)).abs() < 1e-12);
        }
        assert!((adm_energy(&d, 1000.0).unwrap() - 1.0).abs() < 2e-3);
    }

    #[test]
    fn flat_data_has_no_charges() {
        let d = InitialData::flat();
        assert!(adm_energy(&d, 10.0).unwrap().abs() < 1e-12);
        assert!(adm_momentum(&d, 10.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn bowen_york_momentum_is_exact_at_any_radius() {
        for p in [[0.3, 0.0, 0.0], [0.1, 0.2, -0.2]] {
            let d = InitialData::new(Family::Composite { mass: 1.0, momentum: p }).unwrap();
            for r in [50.0, 137.0] {
                let got = adm_momentum(&d, r).unwrap();
                assert!((got - Vector3::from(p)).norm() < 1e-10, "{got:?}");
            }
            let s = schwarzschild_data(1.0).unwrap();
            assert_eq!(adm_energy(&d, 80.0).unwrap(), adm_energy(&s, 80.0).unwrap());
        }
    }
}
