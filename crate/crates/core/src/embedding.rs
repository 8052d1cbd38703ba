//! Isometric embedding of positive-curvature metrics on S² into ℝ³.
//!
//! The unknowns are the harmonic coefficients (degree `1..=L`) of the three
//! coordinate functions. A damped Gauss-Newton iteration drives the
//! quadrature-weighted mismatch between the induced metric of `X` and the
//! target metric to zero, with a backtracking line search on the residual.
//! Translations are removed by freezing the `l = 0` coefficients and
//! infinitesimal rotations by a penalty on the rotational modes.
//!
//! The returned surface is put in a fixed gauge: centred (`∫ X dv = 0`) and
//! rotated so that it is closest, in the `dv`-weighted least-squares sense,
//! to the identity parametrisation `X ∝ n(θ, φ)`.

use std::sync::Arc;

use log::debug;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::sphere::{EmbeddedSurface, InducedMetric, SphereGrid, Sym2};

const OP: &str = "embedding::solve_weyl";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylOptions {
    /// Sup-norm tolerance on the coordinate components of the metric mismatch.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for WeylOptions {
    fn default() -> Self {
        WeylOptions {
            tol: 1e-9,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WeylSolution {
    pub surface: EmbeddedSurface,
    /// Sup-norm metric mismatch after gauge fixing.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sup-norm over nodes of `|h_X − h|` in `(θ, φ)` coordinate components.
pub fn embedding_residual(x: &EmbeddedSurface, h: &InducedMetric) -> Result<f64> {
    if x.grid().band_limit() != h.grid().band_limit() {
        return Err(Error::GridMismatch {
            op: "embedding::embedding_residual",
            left: x.grid().band_limit(),
            right: h.grid().band_limit(),
        });
    }
    Ok(sup_mismatch(x.metric().components(), h.components()))
}

fn sup_mismatch(a: &[Sym2], b: &[Sym2]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..3).map(move |k| (x[k] - y[k]).abs()))
        .fold(0.0, f64::max)
}

/// First-derivative data of `X` needed by the Newton step.
struct Tangents {
    xt: Vec<Vector3<f64>>,
    xp: Vec<Vector3<f64>>,
}

impl Tangents {
    fn new(grid: &SphereGrid, coeffs: &[Vec<f64>; 3]) -> Self {
        let mut xt = vec![Vector3::zeros(); grid.len()];
        let mut xp = vec![Vector3::zeros(); grid.len()];
        for k in 0..3 {
            let dt = grid.synthesize(&coeffs[k], 1, 0);
            let dp = grid.synthesize(&coeffs[k], 0, 1);
            for i in 0..grid.len() {
                xt[i][k] = dt[i];
                xp[i][k] = dp[i];
            }
        }
        Tangents { xt, xp }
    }

    fn metric(&self, i: usize) -> Sym2 {
        [
            self.xt[i].dot(&self.xt[i]),
            self.xt[i].dot(&self.xp[i]),
            self.xp[i].dot(&self.xp[i]),
        ]
    }
}

/// Weighted residual in the round orthonormal frame, plus the sup-norm of
/// coordinate components.
fn residual(grid: &SphereGrid, tan: &Tangents, target: &[Sym2], row_scale: &[[f64; 3]]) -> (DVector<f64>, f64) {
    let n = grid.len();
    let mut r = DVector::zeros(3 * n);
    let mut sup: f64 = 0.0;
    for i in 0..n {
        let hx = tan.metric(i);
        for k in 0..3 {
            let d = hx[k] - target[i][k];
            sup = sup.max(d.abs());
            r[3 * i + k] = d * row_scale[i][k];
        }
    }
    (r, sup)
}

/// Solves `X* δ = h` for `X`, starting from `initial_guess` or from the round
/// sphere of equal area.
pub fn solve_weyl(
    h: &InducedMetric,
    initial_guess: Option<&EmbeddedSurface>,
    options: &WeylOptions,
) -> Result<WeylSolution> {
    let grid = h.grid().clone();
    let kh = h.gaussian_curvature()?;
    if let Some((node, &k)) = kh
        .values()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if !(k > 0.0) {
            return Err(Error::NotConvex {
                op: OP,
                node,
                min_curvature: k,
            });
        }
    }

    let ncoef = grid.coeff_count();
    let mut coeffs: [Vec<f64>; 3] = match initial_guess {
        Some(s) => {
            if s.grid().band_limit() != grid.band_limit() {
                return Err(Error::GridMismatch {
                    op: OP,
                    left: s.grid().band_limit(),
                    right: grid.band_limit(),
                });
            }
            s.coefficients().clone()
        }
        None => {
            let radius = (h.area() / (4.0 * std::f64::consts::PI)).sqrt();
            EmbeddedSurface::round(grid.clone(), radius)?.coefficients().clone()
        }
    };
    // translations are not unknowns
    for c in coeffs.iter_mut() {
        c[0] = 0.0;
    }

    let n = grid.len();
    let target = h.components();
    let row_scale: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let w = grid.weights()[i].sqrt();
            let s = grid.sin_theta(i);
            [w, w / s, w / (s * s)]
        })
        .collect();

    // unit-coefficient derivative tables, columns l >= 1
    let nu = ncoef - 1;
    let mut dy_t = DMatrix::<f64>::zeros(n, nu);
    let mut dy_p = DMatrix::<f64>::zeros(n, nu);
    let mut y = DMatrix::<f64>::zeros(n, nu);
    {
        let mut unit = vec![0.0; ncoef];
        for j in 1..ncoef {
            unit[j] = 1.0;
            let t = grid.synthesize(&unit, 1, 0);
            let p = grid.synthesize(&unit, 0, 1);
            let v = grid.synthesize(&unit, 0, 0);
            unit[j] = 0.0;
            dy_t.set_column(j - 1, &DVector::from_vec(t));
            dy_p.set_column(j - 1, &DVector::from_vec(p));
            y.set_column(j - 1, &DVector::from_vec(v));
        }
    }

    let mut tan = Tangents::new(&grid, &coeffs);
    let (mut r, mut sup) = residual(&grid, &tan, target, &row_scale);
    let mut iterations = 0;
    debug!("{OP}: start residual {sup:e}");

    while sup > options.tol && iterations < options.max_iterations {
        iterations += 1;
        let mut jac = DMatrix::<f64>::zeros(3 * n, 3 * nu);
        for k in 0..3 {
            for col in 0..nu {
                let c = k * nu + col;
                for i in 0..n {
                    let (xt, xp) = (tan.xt[i][k], tan.xp[i][k]);
                    let (yt, yp) = (dy_t[(i, col)], dy_p[(i, col)]);
                    jac[(3 * i, c)] = 2.0 * xt * yt * row_scale[i][0];
                    jac[(3 * i + 1, c)] = (xt * yp + xp * yt) * row_scale[i][1];
                    jac[(3 * i + 2, c)] = 2.0 * xp * yp * row_scale[i][2];
                }
            }
        }
        // an explicit transpose sends the product through the blocked gemm kernel
        let jac_t = jac.transpose();
        drop(jac);
        let mut normal = &jac_t * jac_t.transpose();
        let grad = &jac_t * &r;
        drop(jac_t);

        let max_diag = normal.diagonal().max();
        // penalise infinitesimal rotations ω × X
        let positions: Vec<Vector3<f64>> = {
            let vals: Vec<Vec<f64>> = coeffs.iter().map(|c| grid.synthesize(c, 0, 0)).collect();
            (0..n).map(|i| Vector3::new(vals[0][i], vals[1][i], vals[2][i])).collect()
        };
        for axis in 0..3 {
            let mut e = Vector3::zeros();
            e[axis] = 1.0;
            let mut c = DVector::<f64>::zeros(3 * nu);
            for i in 0..n {
                let mode = e.cross(&positions[i]) * grid.weights()[i];
                for k in 0..3 {
                    if mode[k] != 0.0 {
                        for col in 0..nu {
                            c[k * nu + col] += mode[k] * y[(i, col)];
                        }
                    }
                }
            }
            let cn = c.norm_squared();
            if cn > 0.0 {
                normal.ger(max_diag / cn, &c, &c, 1.0);
            }
        }
        for d in 0..3 * nu {
            normal[(d, d)] += 1e-12 * max_diag;
        }
        let chol = normal.cholesky().ok_or(Error::NoConvergence {
            op: OP,
            iterations,
            best_residual: sup,
        })?;
        let step = chol.solve(&(-grad));

        let r_norm = r.norm_squared();
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = coeffs.clone();
            for k in 0..3 {
                for col in 0..nu {
                    trial[k][col + 1] += lambda * step[k * nu + col];
                }
            }
            let ttan = Tangents::new(&grid, &trial);
            let (tr, tsup) = residual(&grid, &ttan, target, &row_scale);
            if tr.norm_squared() < r_norm {
                coeffs = trial;
                tan = ttan;
                r = tr;
                sup = tsup;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        debug!("{OP}: iteration {iterations}, step {lambda}, residual {sup:e}");
        if !accepted {
            break;
        }
    }

    if !(sup <= options.tol) {
        return Err(Error::NoConvergence {
            op: OP,
            iterations,
            best_residual: sup,
        });
    }

    let surface = fix_gauge(EmbeddedSurface::from_coefficients(grid, coeffs)?)?;
    let residual = embedding_residual(&surface, h)?;
    Ok(WeylSolution {
        surface,
        residual,
        iterations,
        converged: residual <= options.tol,
    })
}

/// Centres the surface and rotates it onto the identity parametrisation.
pub fn fix_gauge(surface: EmbeddedSurface) -> Result<EmbeddedSurface> {
    let grid: Arc<SphereGrid> = surface.grid().clone();
    let centroid = surface.centroid();
    let w = surface.metric().volume_weights();
    let mut cross = Matrix3::<f64>::zeros();
    for i in 0..grid.len() {
        let n = Vector3::from(grid.unit_normal(i));
        cross += (surface.positions()[i] - centroid) * n.transpose() * w[i];
    }
    // maximise tr(R · cross)
    let svd = cross.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let v = vt.transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    let rot = v * d * u.transpose();
    surface.rigid_motion(&rot, &(-(rot * centroid)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{coeff_index, integrate, make_grid};

    #[test]
    fn round_metric_is_solved_without_iterating() {
        let g = make_grid(12).unwrap();
        let h = InducedMetric::round(g.clone(), 1.7).unwrap();
        let sol = solve_weyl(&h, None, &WeylOptions::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 0);
        assert!(sol.residual <= 1e-12);
        let k0 = sol.surface.mean_curvature();
        assert!(k0.values().iter().all(|k| (k - 2.0 / 1.7).abs() < 1e-12));
    }

    #[test]
    fn residual_of_mismatched_radii() {
        let g = make_grid(12).unwrap();
        let x = EmbeddedSurface::round(g.clone(), 1.0).unwrap();
        let h = InducedMetric::round(g.clone(), 1.0).unwrap();
        assert!(embedding_residual(&x, &h).unwrap() < 1e-14);
        let h11 = InducedMetric::round(g, 1.1).unwrap();
        assert!((embedding_residual(&x, &h11).unwrap() - 0.21).abs() < 1e-12);
    }

    #[test]
    fn conformal_perturbation_converges() {
        let g = make_grid(12).unwrap();
        let mut u = vec![0.0; g.coeff_count()];
        u[coeff_index(2, 0)] = 0.01;
        let h = InducedMetric::conformal_round(g.clone(), 1.0, &u).unwrap();
        let sol = solve_weyl(&h, None, &WeylOptions::default()).unwrap();
        assert!(sol.residual <= 1e-8, "residual {}", sol.residual);
        assert!(sol.surface.min_gauss_curvature().0 > 0.0);
    }

    #[test]
    fn ellipsoid_round_trip_and_gauge_determinism() {
        let g = make_grid(12).unwrap();
        let ell = EmbeddedSurface::ellipsoid(g.clone(), [1.0, 1.0, 1.1]).unwrap();
        let sol = solve_weyl(ell.metric(), None, &WeylOptions::default()).unwrap();
        assert!(sol.residual <= 1e-9);
        let area = |s: &EmbeddedSurface| s.area();
        let total_k = |s: &EmbeddedSurface| integrate(s.mean_curvature(), s.metric()).unwrap();
        assert!((area(&sol.surface) - area(&ell)).abs() < 1e-7);
        assert!((total_k(&sol.surface) - total_k(&ell)).abs() < 1e-7);

        // another start: a rotated, shifted, slightly wrong ellipsoid
        let rot = nalgebra::Rotation3::from_euler_angles(0.05, -0.03, 0.02).into_inner();
        let start = EmbeddedSurface::ellipsoid(g.clone(), [1.02, 0.97, 1.05])
            .unwrap()
            .rigid_motion(&rot, &Vector3::new(0.1, 0.0, -0.2))
            .unwrap();
        let sol2 = solve_weyl(ell.metric(), Some(&start), &WeylOptions::default()).unwrap();
        for (a, b) in sol.surface.positions().iter().zip(sol2.surface.positions()) {
            assert!((a - b).norm() < 1e-7);
        }
        // the gauge-fixed ellipsoid is the ellipsoid itself
        for (a, b) in sol.surface.positions().iter().zip(ell.positions()) {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn nonconvex_metric_is_rejected() {
        let g = make_grid(12).unwrap();
        let mut s = vec![0.0; crate::sphere::coeff_count(4)];
        s[coeff_index(4, 0)] = 0.35;
        let peanut = EmbeddedSurface::radial_perturbation(g.clone(), 1.0, &s).unwrap();
        assert!(peanut.min_gauss_curvature().0 < 0.0);
        let err = solve_weyl(peanut.metric(), None, &WeylOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotConvex { .. }));
    }

    #[test]
    fn iteration_budget_exhaustion_reports_best_residual() {
        let g = make_grid(8).unwrap();
        let ell = EmbeddedSurface::ellipsoid(g, [1.0, 1.0, 1.2]).unwrap();
        let opts = WeylOptions {
            tol: 1e-9,
            max_iterations: 0,
        };
        match solve_weyl(ell.metric(), None, &opts) {
            Err(Error::NoConvergence { best_residual, .. }) => assert!(best_residual > 1e-3),
            other => panic!("expected no-convergence, got {other:?}"),
        }
    }
}
