//! Riemannian metrics on the parameter sphere and the intrinsic operators
//! built from them.
//!
//! Components are stored in the `(θ, φ)` coordinate basis as
//! `[h_θθ, h_θφ, h_φφ]`, together with their first (and, when available,
//! second) coordinate derivatives at each node. Derivatives are always
//! produced from a smooth representation (harmonic coefficients of
//! ℝ³-valued or scalar quantities), never by differentiating the raw
//! coordinate components.

use std::sync::Arc;

use super::field::{same_grid, ScalarField, TangentField};
use super::grid::SphereGrid;
use crate::error::{Error, Result};

/// Symmetric 2-tensor components `[θθ, θφ, φφ]`.
pub type Sym2 = [f64; 3];

#[inline]
pub(crate) fn sym_get(s: &Sym2, a: usize, b: usize) -> f64 {
    match (a, b) {
        (0, 0) => s[0],
        (1, 1) => s[2],
        _ => s[1],
    }
}

#[inline]
pub(crate) fn sym_inverse(s: &Sym2) -> (Sym2, f64) {
    let det = s[0] * s[2] - s[1] * s[1];
    ([s[2] / det, -s[1] / det, s[0] / det], det)
}

/// Induced metric on the parameter sphere.
#[derive(Debug, Clone)]
pub struct InducedMetric {
    grid: Arc<SphereGrid>,
    h: Vec<Sym2>,
    /// `[∂_θ h, ∂_φ h]` per node
    dh: Vec<[Sym2; 2]>,
    /// `[∂_θθ h, ∂_θφ h, ∂_φφ h]` per node
    ddh: Option<Vec<[Sym2; 3]>>,
    sqrt_det: Vec<f64>,
}

impl InducedMetric {
    /// Assembles a metric from nodal components and derivatives, checking
    /// positive definiteness at every node.
    pub fn from_components(
        grid: Arc<SphereGrid>,
        h: Vec<Sym2>,
        dh: Vec<[Sym2; 2]>,
        ddh: Option<Vec<[Sym2; 3]>>,
    ) -> Result<Self> {
        const OP: &str = "sphere::InducedMetric";
        if h.len() != grid.len() || dh.len() != grid.len() {
            return Err(Error::invalid(OP, "component arrays do not match the grid"));
        }
        if let Some(d) = &ddh {
            if d.len() != grid.len() {
                return Err(Error::invalid(OP, "second-derivative array does not match the grid"));
            }
        }
        let mut sqrt_det = Vec::with_capacity(h.len());
        for (i, s) in h.iter().enumerate() {
            let det = s[0] * s[2] - s[1] * s[1];
            if !(s[0] > 0.0 && det > 0.0) || !det.is_finite() {
                return Err(Error::SingularMetric { op: OP, node: i, det });
            }
            sqrt_det.push(det.sqrt());
        }
        Ok(InducedMetric {
            grid,
            h,
            dh,
            ddh,
            sqrt_det,
        })
    }

    /// Round metric of radius `radius`.
    pub fn round(grid: Arc<SphereGrid>, radius: f64) -> Result<Self> {
        let r2 = radius * radius;
        let n = grid.len();
        let mut h = Vec::with_capacity(n);
        let mut dh = Vec::with_capacity(n);
        let mut ddh = Vec::with_capacity(n);
        for i in 0..n {
            let (s, c) = (grid.sin_theta(i), grid.cos_theta(i));
            h.push([r2, 0.0, r2 * s * s]);
            dh.push([[0.0, 0.0, 2.0 * r2 * s * c], [0.0; 3]]);
            ddh.push([[0.0, 0.0, 2.0 * r2 * (c * c - s * s)], [0.0; 3], [0.0; 3]]);
        }
        Self::from_components(grid, h, dh, Some(ddh))
    }

    /// Conformally round metric `e^{2u} R² (dθ² + sin²θ dφ²)` for a
    /// band-limited `u` given by harmonic coefficients.
    pub fn conformal_round(grid: Arc<SphereGrid>, radius: f64, u_coeffs: &[f64]) -> Result<Self> {
        let u = grid.synthesize(u_coeffs, 0, 0);
        let ut = grid.synthesize(u_coeffs, 1, 0);
        let up = grid.synthesize(u_coeffs, 0, 1);
        let utt = grid.synthesize(u_coeffs, 2, 0);
        let utp = grid.synthesize(u_coeffs, 1, 1);
        let upp = grid.synthesize(u_coeffs, 0, 2);
        let r2 = radius * radius;
        let n = grid.len();
        let (mut h, mut dh, mut ddh) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let (s, c) = (grid.sin_theta(i), grid.cos_theta(i));
            let e = r2 * (2.0 * u[i]).exp();
            // h = e * (1, 0, s²)
            let base = [1.0, 0.0, s * s];
            let dbase_t = [0.0, 0.0, 2.0 * s * c];
            let ddbase_tt = [0.0, 0.0, 2.0 * (c * c - s * s)];
            let et = 2.0 * ut[i] * e;
            let ep = 2.0 * up[i] * e;
            let ett = (2.0 * utt[i] + 4.0 * ut[i] * ut[i]) * e;
            let etp = (2.0 * utp[i] + 4.0 * ut[i] * up[i]) * e;
            let epp = (2.0 * upp[i] + 4.0 * up[i] * up[i]) * e;
            let mut hi = [0.0; 3];
            let mut dhi = [[0.0; 3]; 2];
            let mut ddhi = [[0.0; 3]; 3];
            for k in 0..3 {
                hi[k] = e * base[k];
                dhi[0][k] = et * base[k] + e * dbase_t[k];
                dhi[1][k] = ep * base[k];
                ddhi[0][k] = ett * base[k] + 2.0 * et * dbase_t[k] + e * ddbase_tt[k];
                ddhi[1][k] = etp * base[k] + ep * dbase_t[k];
                ddhi[2][k] = epp * base[k];
            }
            h.push(hi);
            dh.push(dhi);
            ddh.push(ddhi);
        }
        Self::from_components(grid, h, dh, Some(ddh))
    }

    /// Metric `h_ab = G_ij ∂_a n^i ∂_b n^j` induced by a smooth symmetric
    /// ambient tensor `G = [xx, xy, xz, yy, yz, zz]` sampled at the nodes.
    ///
    /// Derivatives come from the harmonic expansion of the six components
    /// combined with the analytic derivatives of the unit-sphere frame.
    pub fn from_ambient(grid: Arc<SphereGrid>, ambient: &[[f64; 6]]) -> Result<Self> {
        if ambient.len() != grid.len() {
            return Err(Error::invalid(
                "sphere::InducedMetric::from_ambient",
                "ambient tensor does not match the grid",
            ));
        }
        // derivatives of each component, orders (0,0),(1,0),(0,1),(2,0),(1,1),(0,2)
        const ORDERS: [(usize, usize); 6] = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
        let mut comp_derivs: Vec<[Vec<f64>; 6]> = Vec::with_capacity(6);
        for c in 0..6 {
            let vals: Vec<f64> = ambient.iter().map(|g| g[c]).collect();
            let coeffs = grid.analyze(&vals);
            let mut d: [Vec<f64>; 6] = Default::default();
            for (k, &(dt, dp)) in ORDERS.iter().enumerate() {
                d[k] = if k == 0 { vals.clone() } else { grid.synthesize(&coeffs, dt, dp) };
            }
            comp_derivs.push(d);
        }
        let n = grid.len();
        let (mut h, mut dh, mut ddh) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let tensor = |k: usize| -> [[f64; 3]; 3] {
                let g = |c: usize| comp_derivs[c][k][i];
                [
                    [g(0), g(1), g(2)],
                    [g(1), g(3), g(4)],
                    [g(2), g(4), g(5)],
                ]
            };
            let gs: Vec<[[f64; 3]; 3]> = (0..6).map(tensor).collect();
            // frame derivatives e[a][(dt,dp)] with a the tangent direction
            let fd = |dt: usize, dp: usize| grid.frame_derivative(i, dt, dp);
            let quad = |g: &[[f64; 3]; 3], u: [f64; 3], v: [f64; 3]| -> f64 {
                let mut s = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        s += g[p][q] * u[p] * v[q];
                    }
                }
                s
            };
            // tangent basis e_a = ∂_a n, with derivative ∂_c e_a = ∂_c ∂_a n
            let shift = |a: usize, dt: usize, dp: usize| if a == 0 { fd(dt + 1, dp) } else { fd(dt, dp + 1) };
            let pairs = [(0usize, 0usize), (0, 1), (1, 1)];
            let mut hi = [0.0; 3];
            let mut dhi = [[0.0; 3]; 2];
            let mut ddhi = [[0.0; 3]; 3];
            // order index of G derivative for (dt,dp)
            let gidx = |dt: usize, dp: usize| match (dt, dp) {
                (0, 0) => 0,
                (1, 0) => 1,
                (0, 1) => 2,
                (2, 0) => 3,
                (1, 1) => 4,
                _ => 5,
            };
            for (k, &(a, b)) in pairs.iter().enumerate() {
                hi[k] = quad(&gs[0], shift(a, 0, 0), shift(b, 0, 0));
                for c in 0..2 {
                    let (ct, cp) = if c == 0 { (1, 0) } else { (0, 1) };
                    dhi[c][k] = quad(&gs[gidx(ct, cp)], shift(a, 0, 0), shift(b, 0, 0))
                        + quad(&gs[0], shift(a, ct, cp), shift(b, 0, 0))
                        + quad(&gs[0], shift(a, 0, 0), shift(b, ct, cp));
                }
                for (s2, &(c, d)) in [(0usize, 0usize), (0, 1), (1, 1)].iter().enumerate() {
                    let o = |x: usize| if x == 0 { (1usize, 0usize) } else { (0, 1) };
                    let (ct, cp) = o(c);
                    let (dt_, dp_) = o(d);
                    let (cdt, cdp) = (ct + dt_, cp + dp_);
                    // Leibniz over the three factors G, e_a, e_b
                    let mut acc = quad(&gs[gidx(cdt, cdp)], shift(a, 0, 0), shift(b, 0, 0));
                    acc += quad(&gs[0], shift(a, cdt, cdp), shift(b, 0, 0));
                    acc += quad(&gs[0], shift(a, 0, 0), shift(b, cdt, cdp));
                    acc += quad(&gs[gidx(ct, cp)], shift(a, dt_, dp_), shift(b, 0, 0));
                    acc += quad(&gs[gidx(dt_, dp_)], shift(a, ct, cp), shift(b, 0, 0));
                    acc += quad(&gs[gidx(ct, cp)], shift(a, 0, 0), shift(b, dt_, dp_));
                    acc += quad(&gs[gidx(dt_, dp_)], shift(a, 0, 0), shift(b, ct, cp));
                    acc += quad(&gs[0], shift(a, ct, cp), shift(b, dt_, dp_));
                    acc += quad(&gs[0], shift(a, dt_, dp_), shift(b, ct, cp));
                    ddhi[s2][k] = acc;
                }
            }
            h.push(hi);
            dh.push(dhi);
            ddh.push(ddhi);
        }
        Self::from_components(grid, h, dh, Some(ddh))
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn components(&self) -> &[Sym2] {
        &self.h
    }

    pub fn first_derivatives(&self) -> &[[Sym2; 2]] {
        &self.dh
    }

    pub fn second_derivatives(&self) -> Option<&[[Sym2; 3]]> {
        self.ddh.as_deref()
    }

    /// Area element `√det h` relative to `dθ dφ`.
    pub fn sqrt_det(&self) -> &[f64] {
        &self.sqrt_det
    }

    /// Quadrature weights of `dv_h` at the nodes.
    pub fn volume_weights(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|i| self.grid.weights()[i] * self.sqrt_det[i] / self.grid.sin_theta(i))
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.volume_weights().iter().sum()
    }

    /// `h(U, V)` at every node.
    pub fn inner(&self, u: &TangentField, v: &TangentField) -> Vec<f64> {
        self.h
            .iter()
            .zip(u.components().iter().zip(v.components()))
            .map(|(h, (a, b))| h[0] * a[0] * b[0] + h[1] * (a[0] * b[1] + a[1] * b[0]) + h[2] * a[1] * b[1])
            .collect()
    }

    pub fn norm_squared(&self, v: &TangentField) -> Vec<f64> {
        self.inner(v, v)
    }

    /// Christoffel symbols `Γ^c_ab` at node `i`, indexed `[c][a][b]`.
    pub(crate) fn christoffel(&self, i: usize) -> [[[f64; 2]; 2]; 2] {
        let (hinv, _) = sym_inverse(&self.h[i]);
        let dh = &self.dh[i];
        let d = |c: usize, a: usize, b: usize| sym_get(&dh[c], a, b);
        let mut out = [[[0.0; 2]; 2]; 2];
        for c in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    let mut s = 0.0;
                    for e in 0..2 {
                        s += sym_get(&hinv, c, e) * (d(a, b, e) + d(b, a, e) - d(e, a, b));
                    }
                    out[c][a][b] = 0.5 * s;
                }
            }
        }
        out
    }

    /// Gauss curvature from the metric alone (Brioschi formula).
    pub fn gaussian_curvature(&self) -> Result<ScalarField> {
        let ddh = self.ddh.as_ref().ok_or_else(|| {
            Error::invalid(
                "sphere::gaussian_curvature",
                "metric carries no second derivatives",
            )
        })?;
        let values = (0..self.grid.len())
            .map(|i| {
                let [e, f, g] = self.h[i];
                let [du, dv] = self.dh[i];
                let (eu, fu, gu) = (du[0], du[1], du[2]);
                let (ev, fv, gv) = (dv[0], dv[1], dv[2]);
                let evv = ddh[i][2][0];
                let fuv = ddh[i][1][1];
                let guu = ddh[i][0][2];
                let det3 = |m: [[f64; 3]; 3]| {
                    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
                };
                let a = det3([
                    [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
                    [fv - 0.5 * gu, e, f],
                    [0.5 * gv, f, g],
                ]);
                let b = det3([[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]]);
                let w = e * g - f * f;
                (a - b) / (w * w)
            })
            .collect();
        ScalarField::new(self.grid.clone(), values)
    }
}

/// `∫ f dv_h` by quadrature.
pub fn integrate(f: &ScalarField, h: &InducedMetric) -> Result<f64> {
    same_grid(f.grid(), h.grid(), "sphere::integrate")?;
    Ok(integrate_values(f.values(), h))
}

pub(crate) fn integrate_values(values: &[f64], h: &InducedMetric) -> f64 {
    let g = h.grid();
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * g.weights()[i] * h.sqrt_det[i] / g.sin_theta(i))
        .sum()
}

/// Coordinate derivatives `(∂_θ f, ∂_φ f, ∂_θθ f, ∂_θφ f, ∂_φφ f)` of the
/// band-limited interpolant of `f`.
pub(crate) struct Derivatives {
    pub d: [Vec<f64>; 2],
    pub dd: [Vec<f64>; 3],
}

pub(crate) fn derivatives(grid: &SphereGrid, values: &[f64], second: bool) -> Derivatives {
    let c = grid.analyze(values);
    let d = [grid.synthesize(&c, 1, 0), grid.synthesize(&c, 0, 1)];
    let dd = if second {
        [grid.synthesize(&c, 2, 0), grid.synthesize(&c, 1, 1), grid.synthesize(&c, 0, 2)]
    } else {
        Default::default()
    };
    Derivatives { d, dd }
}

/// Intrinsic gradient `∇f = h^{ab} ∂_b f ∂_a`.
pub fn gradient(f: &ScalarField, h: &InducedMetric) -> Result<TangentField> {
    same_grid(f.grid(), h.grid(), "sphere::gradient")?;
    let der = derivatives(h.grid(), f.values(), false);
    let comps = h
        .h
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (hinv, _) = sym_inverse(s);
            let (ft, fp) = (der.d[0][i], der.d[1][i]);
            [hinv[0] * ft + hinv[1] * fp, hinv[1] * ft + hinv[2] * fp]
        })
        .collect();
    TangentField::new(h.grid().clone(), comps)
}

/// Laplace-Beltrami operator `Δf = h^{ab}(∂_a∂_b f − Γ^c_ab ∂_c f)`.
pub fn laplacian(f: &ScalarField, h: &InducedMetric) -> Result<ScalarField> {
    same_grid(f.grid(), h.grid(), "sphere::laplacian")?;
    let der = derivatives(h.grid(), f.values(), true);
    let values = (0..h.grid().len())
        .map(|i| {
            let (hinv, _) = sym_inverse(&h.h[i]);
            let gamma = h.christoffel(i);
            let df = [der.d[0][i], der.d[1][i]];
            let ddf = [der.dd[0][i], der.dd[1][i], der.dd[2][i]];
            let mut s = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let mut hess = sym_get(&ddf, a, b);
                    for c in 0..2 {
                        hess -= gamma[c][a][b] * df[c];
                    }
                    s += sym_get(&hinv, a, b) * hess;
                }
            }
            s
        })
        .collect();
    ScalarField::new(h.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(l).unwrap())
    }

    #[test]
    fn round_area() {
        let g = grid(16);
        let h = InducedMetric::round(g.clone(), 1.7).unwrap();
        let one = ScalarField::constant(g, 1.0);
        let area = integrate(&one, &h).unwrap();
        assert!((area - 4.0 * PI * 1.7 * 1.7).abs() < 1e-10);
    }

    #[test]
    fn y10_is_an_eigenfunction() {
        let g = grid(16);
        let h = InducedMetric::round(g.clone(), 1.0).unwrap();
        let y10 = ScalarField::from_fn(g.clone(), |t, _| (3.0 / (4.0 * PI)).sqrt() * t.cos()).unwrap();
        let lap = laplacian(&y10, &h).unwrap();
        for (a, b) in lap.values().iter().zip(y10.values()) {
            assert!((a + 2.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = grid(12);
        let h = InducedMetric::round(g.clone(), 2.0).unwrap();
        let f = ScalarField::constant(g, 3.5);
        let grad = gradient(&f, &h).unwrap();
        assert!(grad.components().iter().all(|c| c[0].abs() < 1e-12 && c[1].abs() < 1e-12));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let h = InducedMetric::round(grid(8), 1.0).unwrap();
        let f = ScalarField::constant(grid(10), 1.0);
        assert!(matches!(integrate(&f, &h), Err(Error::GridMismatch { .. })));
        assert!(matches!(laplacian(&f, &h), Err(Error::GridMismatch { .. })));
        assert!(matches!(gradient(&f, &h), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let g = grid(6);
        let n = g.len();
        let mut h = vec![[1.0, 0.0, 1.0]; n];
        h[5] = [1.0, 1.0, 1.0];
        let err = InducedMetric::from_components(g, h, vec![[[0.0; 3]; 2]; n], None).unwrap_err();
        assert!(matches!(err, Error::SingularMetric { node: 5, .. }));
    }

    #[test]
    fn brioschi_on_round_and_conformal_metrics() {
        let g = grid(16);
        let k = InducedMetric::round(g.clone(), 2.0).unwrap().gaussian_curvature().unwrap();
        assert!(k.values().iter().all(|v| (v - 0.25).abs() < 1e-12));

        // K = e^{-2u}(1 − Δ_round u) for h = e^{2u} round
        let mut u = vec![0.0; g.coeff_count()];
        u[crate::sphere::coeff_index(2, 0)] = 0.05;
        u[crate::sphere::coeff_index(3, -2)] = 0.02;
        let hc = InducedMetric::conformal_round(g.clone(), 1.0, &u).unwrap();
        let kc = hc.gaussian_curvature().unwrap();
        let round = InducedMetric::round(g.clone(), 1.0).unwrap();
        let uf = ScalarField::from_coefficients(g.clone(), &u).unwrap();
        let lap_u = laplacian(&uf, &round).unwrap();
        for i in 0..g.len() {
            let exact = (-2.0 * uf.values()[i]).exp() * (1.0 - lap_u.values()[i]);
            assert!((kc.values()[i] - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn ambient_route_reproduces_conformal_metric() {
        let g = grid(20);
        let mut u = vec![0.0; g.coeff_count()];
        u[crate::sphere::coeff_index(2, 0)] = 0.01;
        let exact = InducedMetric::conformal_round(g.clone(), 1.3, &u).unwrap();
        let uv = g.synthesize(&u, 0, 0);
        let amb: Vec<[f64; 6]> = uv
            .iter()
            .map(|u| {
                let e = 1.69 * (2.0 * u).exp();
                [e, 0.0, 0.0, e, 0.0, e]
            })
            .collect();
        let via = InducedMetric::from_ambient(g.clone(), &amb).unwrap();
        for i in 0..g.len() {
            for k in 0..3 {
                assert!((exact.components()[i][k] - via.components()[i][k]).abs() < 1e-12);
                for c in 0..2 {
                    assert!((exact.first_derivatives()[i][c][k] - via.first_derivatives()[i][c][k]).abs() < 1e-10);
                }
                for c in 0..3 {
                    assert!(
                        (exact.second_derivatives().unwrap()[i][c][k] - via.second_derivatives().unwrap()[i][c][k]).abs()
                            < 1e-9
                    );
                }
            }
        }
    }
}
