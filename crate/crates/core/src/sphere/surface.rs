use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};

use super::field::{same_grid, ScalarField};
use super::grid::{coeff_count, coeff_index, SphereGrid};
use super::metric::{InducedMetric, Sym2};
use crate::error::{Error, Result};

/// Immersion `X: S² → ℝ³` with its extrinsic geometry sampled at the nodes.
///
/// `X` is held as harmonic coefficients of its three coordinate functions;
/// all derivatives are exact derivatives of that band-limited
/// representation. Mean curvature `k₀` is taken with respect to the outward
/// normal `e^{H₀} = ∂_θX × ∂_φX / |·|`, so that round spheres have `k₀ > 0`.
#[derive(Debug, Clone)]
pub struct EmbeddedSurface {
    grid: Arc<SphereGrid>,
    coeffs: [Vec<f64>; 3],
    position: Vec<Vector3<f64>>,
    tangents: Vec<[Vector3<f64>; 2]>,
    /// `[∂_θθX, ∂_θφX, ∂_φφX]`
    second: Vec<[Vector3<f64>; 3]>,
    metric: InducedMetric,
    normal: Vec<Vector3<f64>>,
    mean_curvature: ScalarField,
    gauss_curvature: ScalarField,
}

fn vec_field(grid: &SphereGrid, coeffs: &[Vec<f64>; 3], dt: usize, dp: usize) -> Vec<Vector3<f64>> {
    let comps: Vec<Vec<f64>> = coeffs.iter().map(|c| grid.synthesize(c, dt, dp)).collect();
    (0..grid.len())
        .map(|i| Vector3::new(comps[0][i], comps[1][i], comps[2][i]))
        .collect()
}

impl EmbeddedSurface {
    /// Builds the surface from harmonic coefficients of `(x, y, z)`.
    pub fn from_coefficients(grid: Arc<SphereGrid>, coeffs: [Vec<f64>; 3]) -> Result<Self> {
        const OP: &str = "sphere::surface_geometry";
        if coeffs.iter().any(|c| c.len() != grid.coeff_count()) {
            return Err(Error::invalid(OP, "coefficient vectors must match the grid band limit"));
        }
        let position = vec_field(&grid, &coeffs, 0, 0);
        let xt = vec_field(&grid, &coeffs, 1, 0);
        let xp = vec_field(&grid, &coeffs, 0, 1);
        let xtt = vec_field(&grid, &coeffs, 2, 0);
        let xtp = vec_field(&grid, &coeffs, 1, 1);
        let xpp = vec_field(&grid, &coeffs, 0, 2);
        let xttt = vec_field(&grid, &coeffs, 3, 0);
        let xttp = vec_field(&grid, &coeffs, 2, 1);
        let xtpp = vec_field(&grid, &coeffs, 1, 2);
        let xppp = vec_field(&grid, &coeffs, 0, 3);

        let n = grid.len();
        let mut h: Vec<Sym2> = Vec::with_capacity(n);
        let mut dh = Vec::with_capacity(n);
        let mut ddh = Vec::with_capacity(n);
        let mut normal = Vec::with_capacity(n);
        let mut k0 = Vec::with_capacity(n);
        let mut kg = Vec::with_capacity(n);
        for i in 0..n {
            let t = [xt[i], xp[i]];
            // second derivatives indexed by unordered pair
            let s2 = |a: usize, b: usize| match a + b {
                0 => xtt[i],
                1 => xtp[i],
                _ => xpp[i],
            };
            let s3 = |a: usize, b: usize, c: usize| match a + b + c {
                0 => xttt[i],
                1 => xttp[i],
                2 => xtpp[i],
                _ => xppp[i],
            };
            let pairs = [(0usize, 0usize), (0, 1), (1, 1)];
            let mut hi = [0.0; 3];
            let mut dhi = [[0.0; 3]; 2];
            let mut ddhi = [[0.0; 3]; 3];
            for (k, &(a, b)) in pairs.iter().enumerate() {
                hi[k] = t[a].dot(&t[b]);
                for c in 0..2 {
                    dhi[c][k] = s2(c, a).dot(&t[b]) + t[a].dot(&s2(c, b));
                }
                for (m, &(c, d)) in pairs.iter().enumerate() {
                    ddhi[m][k] = s3(c, d, a).dot(&t[b])
                        + s2(c, a).dot(&s2(d, b))
                        + s2(d, a).dot(&s2(c, b))
                        + t[a].dot(&s3(c, d, b));
                }
            }
            let cross = t[0].cross(&t[1]);
            let norm = cross.norm();
            if !(norm > 0.0) {
                return Err(Error::SingularMetric { op: OP, node: i, det: norm * norm });
            }
            let nu = cross / norm;
            // second fundamental form w.r.t. the outward normal, sign chosen so
            // that round spheres are positive
            let b = [-xtt[i].dot(&nu), -xtp[i].dot(&nu), -xpp[i].dot(&nu)];
            let det_h = hi[0] * hi[2] - hi[1] * hi[1];
            k0.push((hi[2] * b[0] - 2.0 * hi[1] * b[1] + hi[0] * b[2]) / det_h);
            kg.push((b[0] * b[2] - b[1] * b[1]) / det_h);
            h.push(hi);
            dh.push(dhi);
            ddh.push(ddhi);
            normal.push(nu);
        }
        let metric = InducedMetric::from_components(grid.clone(), h, dh, Some(ddh))
            .map_err(|e| match e {
                Error::SingularMetric { node, det, .. } => Error::SingularMetric { op: OP, node, det },
                other => other,
            })?;
        let tangents = xt.into_iter().zip(xp).map(|(a, b)| [a, b]).collect();
        let second = (0..n).map(|i| [xtt[i], xtp[i], xpp[i]]).collect();
        Ok(EmbeddedSurface {
            mean_curvature: ScalarField::new(grid.clone(), k0)?,
            gauss_curvature: ScalarField::new(grid.clone(), kg)?,
            grid,
            coeffs,
            position,
            tangents,
            second,
            metric,
            normal,
        })
    }

    /// Round sphere of radius `radius` centred at the origin.
    pub fn round(grid: Arc<SphereGrid>, radius: f64) -> Result<Self> {
        Self::ellipsoid(grid, [radius; 3])
    }

    /// Ellipsoid `(a sinθ cosφ, b sinθ sinφ, c cosθ)`.
    pub fn ellipsoid(grid: Arc<SphereGrid>, axes: [f64; 3]) -> Result<Self> {
        let mut coeffs: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; grid.coeff_count()]);
        // n = sqrt(4π/3) (Y_11, Y_1-1, Y_10)
        let s = (4.0 * std::f64::consts::PI / 3.0).sqrt();
        coeffs[0][coeff_index(1, 1)] = axes[0] * s;
        coeffs[1][coeff_index(1, -1)] = axes[1] * s;
        coeffs[2][coeff_index(1, 0)] = axes[2] * s;
        Self::from_coefficients(grid, coeffs)
    }

    /// Star-shaped surface `R (1 + s(θ, φ)) n` with `s` given by harmonic
    /// coefficients of degree below the band limit.
    pub fn radial_perturbation(grid: Arc<SphereGrid>, radius: f64, s_coeffs: &[f64]) -> Result<Self> {
        let l = grid.band_limit();
        if s_coeffs.len() > coeff_count(l - 1) {
            return Err(Error::invalid(
                "sphere::radial_perturbation",
                format!("perturbation degree must be below the band limit {l}"),
            ));
        }
        let mut padded = vec![0.0; grid.coeff_count()];
        padded[..s_coeffs.len()].copy_from_slice(s_coeffs);
        let s = grid.synthesize(&padded, 0, 0);
        let xs: [ScalarField; 3] = std::array::from_fn(|k| {
            let vals = (0..grid.len())
                .map(|i| radius * (1.0 + s[i]) * grid.unit_normal(i)[k])
                .collect();
            ScalarField::new(grid.clone(), vals).expect("finite samples")
        });
        surface_geometry(&xs)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Vec<f64>; 3] {
        &self.coeffs
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.position
    }

    /// `[∂_θX, ∂_φX]` at each node.
    pub fn tangents(&self) -> &[[Vector3<f64>; 2]] {
        &self.tangents
    }

    /// `[∂_θθX, ∂_θφX, ∂_φφX]` at each node.
    pub fn second_derivatives(&self) -> &[[Vector3<f64>; 3]] {
        &self.second
    }

    pub fn metric(&self) -> &InducedMetric {
        &self.metric
    }

    /// Outward unit normal `e^{H₀}`.
    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normal
    }

    /// Mean curvature `k₀ = |H₀|`.
    pub fn mean_curvature(&self) -> &ScalarField {
        &self.mean_curvature
    }

    pub fn gauss_curvature(&self) -> &ScalarField {
        &self.gauss_curvature
    }

    pub fn area(&self) -> f64 {
        self.metric.area()
    }

    /// Coordinate function `X^k` as a scalar field.
    pub fn coordinate(&self, k: usize) -> ScalarField {
        let vals = self.position.iter().map(|p| p[k]).collect();
        ScalarField::new(self.grid.clone(), vals).expect("finite positions")
    }

    /// `(min K, node)`; the convexity-dependent results require this to be positive.
    pub fn min_gauss_curvature(&self) -> (f64, usize) {
        self.gauss_curvature
            .values()
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |acc, (i, &k)| if k < acc.0 { (k, i) } else { acc })
    }

    pub fn ensure_convex(&self, op: &'static str) -> Result<()> {
        let (k, node) = self.min_gauss_curvature();
        if k > 0.0 {
            Ok(())
        } else {
            Err(Error::NotConvex { op, node, min_curvature: k })
        }
    }

    /// Image under `x ↦ R x + b`.
    pub fn rigid_motion(&self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        for j in 0..self.grid.coeff_count() {
            let v = Vector3::new(self.coeffs[0][j], self.coeffs[1][j], self.coeffs[2][j]);
            let w = rotation * v;
            for k in 0..3 {
                coeffs[k][j] = w[k];
            }
        }
        // a constant shift lives in the l = 0 coefficient
        let y00 = (4.0 * std::f64::consts::PI).sqrt();
        for k in 0..3 {
            coeffs[k][0] += translation[k] * y00;
        }
        Self::from_coefficients(self.grid.clone(), coeffs)
    }

    /// `∫ X dv / ∫ dv`.
    pub fn centroid(&self) -> Vector3<f64> {
        let w = self.metric.volume_weights();
        let area: f64 = w.iter().sum();
        self.position.iter().zip(&w).map(|(p, w)| p * *w).sum::<Vector3<f64>>() / area
    }
}

/// Builds an [`EmbeddedSurface`] from sampled coordinate functions.
///
/// The samples are projected onto harmonics of degree `<= L`; for
/// band-limited input this is exact.
pub fn surface_geometry(x: &[ScalarField; 3]) -> Result<EmbeddedSurface> {
    let grid = x[0].grid().clone();
    for f in &x[1..] {
        same_grid(&grid, f.grid(), "sphere::surface_geometry")?;
    }
    let coeffs = std::array::from_fn(|k| x[k].coefficients());
    EmbeddedSurface::from_coefficients(grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{integrate, laplacian};
    use std::f64::consts::PI;

    fn grid(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(l).unwrap())
    }

    #[test]
    fn round_sphere_curvatures() {
        let r = 2.5;
        let s = EmbeddedSurface::round(grid(16), r).unwrap();
        for i in 0..s.grid().len() {
            assert!((s.mean_curvature().values()[i] - 2.0 / r).abs() < 1e-12);
            assert!((s.gauss_curvature().values()[i] - 1.0 / (r * r)).abs() < 1e-12);
            let radial = s.positions()[i].normalize();
            assert!((s.normals()[i].dot(&radial) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn k0_integral_on_radius_two() {
        let s = EmbeddedSurface::round(grid(16), 2.0).unwrap();
        let v = integrate(s.mean_curvature(), s.metric()).unwrap();
        assert!((v - 16.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn normal_is_orthogonal_to_tangents() {
        let s = EmbeddedSurface::radial_perturbation(grid(12), 1.0, &[0.0, 0.02, -0.03, 0.01, 0.02, 0.0, -0.01, 0.015, 0.0])
            .unwrap();
        for (n, t) in s.normals().iter().zip(s.tangents()) {
            assert!(n.dot(&t[0]).abs() < 1e-10 && n.dot(&t[1]).abs() < 1e-10);
        }
    }

    #[test]
    fn laplacian_of_position_is_mean_curvature_vector() {
        let s = EmbeddedSurface::radial_perturbation(grid(16), 1.3, &[0.0, 0.0, 0.05, 0.0, 0.03, 0.0, -0.02, 0.01, 0.04])
            .unwrap();
        for k in 0..3 {
            let lap = laplacian(&s.coordinate(k), s.metric()).unwrap();
            for i in 0..s.grid().len() {
                let expect = -s.mean_curvature().values()[i] * s.normals()[i][k];
                assert!((lap.values()[i] - expect).abs() < 1e-8, "k={k} i={i}");
            }
        }
    }

    #[test]
    fn extrinsic_and_intrinsic_gauss_curvature_agree() {
        let s = EmbeddedSurface::ellipsoid(grid(16), [1.0, 1.2, 0.9]).unwrap();
        let kb = s.metric().gaussian_curvature().unwrap();
        for (a, b) in kb.values().iter().zip(s.gauss_curvature().values()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
