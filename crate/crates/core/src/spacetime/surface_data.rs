use std::sync::Arc;

use nalgebra::Vector3;

use super::data::InitialData;
use crate::error::{Error, Result};
use crate::sphere::{EmbeddedSurface, InducedMetric, ScalarField, SphereGrid, TangentField};

/// Position of a 2-sphere inside the asymptotic end, `Y: S² → ℝ³`, with its
/// first and second coordinate derivatives at the nodes.
#[derive(Debug, Clone)]
pub struct SurfacePlacement {
    grid: Arc<SphereGrid>,
    radius: Option<f64>,
    position: Vec<Vector3<f64>>,
    tangents: Vec<[Vector3<f64>; 2]>,
    second: Vec<[Vector3<f64>; 3]>,
}

impl SurfacePlacement {
    /// The coordinate sphere `{|y| = r}`.
    pub fn coordinate_sphere(grid: Arc<SphereGrid>, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::invalid(
                "spacetime::coordinate_sphere",
                format!("radius must be positive, got {r}"),
            ));
        }
        let v = |i: usize, dt: usize, dp: usize| Vector3::from(grid.frame_derivative(i, dt, dp)) * r;
        let n = grid.len();
        Ok(SurfacePlacement {
            radius: Some(r),
            position: (0..n).map(|i| v(i, 0, 0)).collect(),
            tangents: (0..n).map(|i| [v(i, 1, 0), v(i, 0, 1)]).collect(),
            second: (0..n).map(|i| [v(i, 2, 0), v(i, 1, 1), v(i, 0, 2)]).collect(),
            grid,
        })
    }

    /// A general star-shaped placement given as an embedded surface in the
    /// coordinate chart.
    pub fn from_surface(surface: &EmbeddedSurface) -> Self {
        SurfacePlacement {
            grid: surface.grid().clone(),
            radius: None,
            position: surface.positions().to_vec(),
            tangents: surface.tangents().to_vec(),
            second: surface.second_derivatives().to_vec(),
        }
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.position
    }
}

/// Physical data on a 2-surface of an initial-data set.
///
/// `alpha` holds the vector field `V^a = h^{ab} α_b` dual to the connection
/// one-form of the canonical normal frame. Surfaces built with
/// [`SurfaceData::synthetic`] carry no slice data: `k = |H|`, `tr p = 0` and
/// an empty normal list.
#[derive(Debug, Clone)]
pub struct SurfaceData {
    radius: Option<f64>,
    metric: InducedMetric,
    k: ScalarField,
    trp: ScalarField,
    hnorm: ScalarField,
    alpha: TangentField,
    normal: Vec<Vector3<f64>>,
}

/// Pointwise slice geometry of a placement, before the boost angle is
/// differentiated.
struct PointData {
    h: [f64; 3],
    k: f64,
    trp: f64,
    /// `p(∂_a Y, ν)`
    p_nu: [f64; 2],
    nu: Vector3<f64>,
}

fn point_data(data: &InitialData, pl: &SurfacePlacement, i: usize) -> Result<PointData> {
    const OP: &str = "spacetime::coordinate_sphere";
    let y = pl.position[i];
    let [et, ep] = pl.tangents[i];
    let g = data.metric(&y)?;
    let dg = data.metric_derivative(&y)?;
    let p = data.extrinsic_curvature(&y)?;
    let ginv = g
        .try_inverse()
        .ok_or(Error::SingularMetric { op: OP, node: i, det: g.determinant() })?;

    // conormal annihilates both tangents
    let conormal = et.cross(&ep);
    let norm2 = conormal.dot(&(ginv * conormal));
    if !(norm2 > 0.0) {
        return Err(Error::SingularMetric { op: OP, node: i, det: norm2 });
    }
    let nu_lower = conormal / norm2.sqrt();
    let nu = ginv * nu_lower;

    let e = [et, ep];
    let h = [et.dot(&(g * et)), et.dot(&(g * ep)), ep.dot(&(g * ep))];
    let det = h[0] * h[2] - h[1] * h[1];
    if !(det > 0.0) {
        return Err(Error::SingularMetric { op: OP, node: i, det });
    }
    let hinv = [h[2] / det, -h[1] / det, h[0] / det];

    // Γ_{l jk} e_a^j e_b^k, lowered index
    let gamma_lower = |u: &Vector3<f64>, v: &Vector3<f64>| -> Vector3<f64> {
        let mut out = Vector3::zeros();
        for l in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    s += dg[j][(l, k)] * u[j] * v[k] + dg[k][(l, j)] * u[j] * v[k] - dg[l][(j, k)] * u[j] * v[k];
                }
            }
            out[l] = 0.5 * s;
        }
        out
    };
    let pairs = [(0, 0), (0, 1), (1, 1)];
    let mut kab = [0.0; 3];
    let mut pab = [0.0; 3];
    for (s, &(a, b)) in pairs.iter().enumerate() {
        let acc = pl.second[i][a + b];
        kab[s] = -(nu_lower.dot(&acc) + nu_lower.dot(&(ginv * gamma_lower(&e[a], &e[b]))));
        pab[s] = e[a].dot(&(p * e[b]));
    }
    let contract = |t: &[f64; 3]| hinv[0] * t[0] + 2.0 * hinv[1] * t[1] + hinv[2] * t[2];
    Ok(PointData {
        h,
        k: contract(&kab),
        trp: contract(&pab),
        p_nu: [et.dot(&(p * nu)), ep.dot(&(p * nu))],
        nu,
    })
}

fn field(grid: &Arc<SphereGrid>, v: Vec<f64>) -> Result<ScalarField> {
    ScalarField::new(grid.clone(), v)
}

impl SurfaceData {
    /// Extracts `h`, `k`, `tr p`, `|H|`, `ν` and the connection one-form on a
    /// placement.
    pub fn extract(data: &InitialData, placement: &SurfacePlacement) -> Result<Self> {
        Self::extract_with_offset(data, placement, 0.0)
    }

    fn extract_with_offset(data: &InitialData, pl: &SurfacePlacement, theta_offset: f64) -> Result<Self> {
        const OP: &str = "spacetime::SurfaceData::extract";
        let grid = pl.grid.clone();
        let pts: Vec<PointData> = (0..grid.len()).map(|i| point_data(data, pl, i)).collect::<Result<_>>()?;

        let mut theta = Vec::with_capacity(pts.len());
        let mut hnorm = Vec::with_capacity(pts.len());
        for (i, p) in pts.iter().enumerate() {
            if !(p.k > p.trp.abs()) {
                return Err(Error::NotSpacelike {
                    op: OP,
                    node: i,
                    value: p.k - p.trp.abs(),
                });
            }
            hnorm.push(((p.k - p.trp) * (p.k + p.trp)).sqrt());
            theta.push((p.trp / p.k).atanh() + theta_offset);
        }
        let metric = ambient_metric(data, pl)?;

        let c = grid.analyze(&theta);
        let dtheta = [grid.synthesize(&c, 1, 0), grid.synthesize(&c, 0, 1)];
        let alpha = pts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let a = [-p.p_nu[0] + dtheta[0][i], -p.p_nu[1] + dtheta[1][i]];
                let h = p.h;
                let det = h[0] * h[2] - h[1] * h[1];
                [
                    (h[2] * a[0] - h[1] * a[1]) / det,
                    (h[0] * a[1] - h[1] * a[0]) / det,
                ]
            })
            .collect();

        Ok(SurfaceData {
            radius: pl.radius,
            metric,
            k: field(&grid, pts.iter().map(|p| p.k).collect())?,
            trp: field(&grid, pts.iter().map(|p| p.trp).collect())?,
            hnorm: field(&grid, hnorm)?,
            alpha: TangentField::new(grid.clone(), alpha)?,
            normal: pts.iter().map(|p| p.nu).collect(),
        })
    }

    /// Data prescribed directly on an abstract sphere: `|H|` and the dual
    /// vector of `α` with respect to `metric`.
    pub fn synthetic(metric: InducedMetric, hnorm: ScalarField, alpha: TangentField) -> Result<Self> {
        const OP: &str = "spacetime::SurfaceData::synthetic";
        hnorm.ensure_same_grid(metric.grid(), OP)?;
        if alpha.grid().band_limit() != metric.grid().band_limit() {
            return Err(Error::GridMismatch {
                op: OP,
                left: alpha.grid().band_limit(),
                right: metric.grid().band_limit(),
            });
        }
        if let Some((node, &v)) = hnorm.values().iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NotSpacelike { op: OP, node, value: v });
        }
        let zero = ScalarField::constant(metric.grid().clone(), 0.0);
        Ok(SurfaceData {
            radius: None,
            metric,
            k: hnorm.clone(),
            trp: zero,
            hnorm,
            alpha,
            normal: Vec::new(),
        })
    }

    /// Coordinate radius, when the surface is a coordinate sphere.
    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.metric.grid()
    }

    pub fn metric(&self) -> &InducedMetric {
        &self.metric
    }

    /// Mean curvature `k` of the surface in the slice, outward.
    pub fn k(&self) -> &ScalarField {
        &self.k
    }

    pub fn trace_p(&self) -> &ScalarField {
        &self.trp
    }

    /// `|H| = √(k² − (tr p)²)`.
    pub fn hnorm(&self) -> &ScalarField {
        &self.hnorm
    }

    /// Dual vector `V` of the connection one-form.
    pub fn alpha(&self) -> &TangentField {
        &self.alpha
    }

    /// Outward unit normal `ν^i` in the slice (empty for synthetic data).
    pub fn normals(&self) -> &[Vector3<f64>] {
        &self.normal
    }
}

/// `G = Aᵀ g A` with `A` the surface gradient of `Y`, so that
/// `G(∂_a n, ∂_b n) = g(∂_a Y, ∂_b Y)`.
fn ambient_metric(data: &InitialData, pl: &SurfacePlacement) -> Result<InducedMetric> {
    let grid = &pl.grid;
    let mut amb = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let g = data.metric(&pl.position[i])?;
        let big = match pl.radius {
            Some(r) => g * (r * r),
            None => {
                let et = Vector3::from(grid.frame_derivative(i, 1, 0));
                let ep = Vector3::from(grid.frame_derivative(i, 0, 1));
                let s2 = grid.sin_theta(i).powi(2);
                let a = pl.tangents[i][0] * et.transpose() + pl.tangents[i][1] * ep.transpose() / s2;
                a.transpose() * g * a
            }
        };
        amb.push([
            big[(0, 0)],
            big[(0, 1)],
            big[(0, 2)],
            big[(1, 1)],
            big[(1, 2)],
            big[(2, 2)],
        ]);
    }
    InducedMetric::from_ambient(grid.clone(), &amb)
}

/// Surface data of the coordinate sphere `{|y| = r}`.
pub fn coordinate_sphere(data: &InitialData, r: f64, grid: &Arc<SphereGrid>) -> Result<SurfaceData> {
    SurfaceData::extract(data, &SurfacePlacement::coordinate_sphere(grid.clone(), r)?)
}

/// Dual vector of the connection one-form `α = −p(·, ν) + dθ` with boost
/// angle `θ = artanh(tr p / k)`.
pub fn connection_one_form(data: &InitialData, placement: &SurfacePlacement) -> Result<TangentField> {
    SurfaceData::extract(data, placement).map(|s| s.alpha)
}
