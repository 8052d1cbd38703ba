//! Gauss-Legendre x uniform-longitude grid on the unit sphere together with
//! real spherical-harmonic analysis and synthesis.
//!
//! Coefficients are stored for degrees `0..=L` in the order `l` ascending and,
//! within a degree, `m` from `-l` to `l` (see [`coeff_index`]). The real
//! harmonics are orthonormal on the round unit sphere:
//!
//! * `Y_l0 = P_l^0(cos θ)`
//! * `Y_lm = √2 P_l^m(cos θ) cos(mφ)` for `m > 0`
//! * `Y_l,-m = √2 P_l^m(cos θ) sin(mφ)` for `m > 0`
//!
//! where `P_l^m` are the 4π-normalised associated Legendre functions without
//! the Condon-Shortley phase.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// Smallest band limit accepted by [`SphereGrid::new`].
pub const MIN_BAND_LIMIT: usize = 4;

/// Default band limit used by the command line and the high-level pipeline.
pub const DEFAULT_BAND_LIMIT: usize = 24;

/// Position of the real harmonic `(l, m)` in a coefficient vector.
#[inline]
pub fn coeff_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Number of coefficients for band limit `l_max`.
#[inline]
pub fn coeff_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

#[inline]
fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Associated Legendre values and their first three θ-derivatives on one
/// latitude ring, indexed by `tri(l, m)` with `m >= 0`.
#[derive(Debug, Clone)]
struct LegendreRing {
    p: [Vec<f64>; 4],
}

impl LegendreRing {
    fn new(l_max: usize, cos_t: f64, sin_t: f64) -> Self {
        let n = tri(l_max, l_max) + 1;
        let mut p0 = vec![0.0; n];
        // sectoral seeds
        let mut pmm = (0.25 / PI).sqrt();
        for m in 0..=l_max {
            if m > 0 {
                let mf = m as f64;
                pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_t;
            }
            p0[tri(m, m)] = pmm;
            if m < l_max {
                p0[tri(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * cos_t * pmm;
            }
            for l in (m + 2)..=l_max {
                let (lf, mf) = (l as f64, m as f64);
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                p0[tri(l, m)] = a * (cos_t * p0[tri(l - 1, m)] - b * p0[tri(l - 2, m)]);
            }
        }

        let cot = cos_t / sin_t;
        let csc2 = 1.0 / (sin_t * sin_t);
        let mut p1 = vec![0.0; n];
        let mut p2 = vec![0.0; n];
        let mut p3 = vec![0.0; n];
        for l in 0..=l_max {
            let lf = l as f64;
            let lambda = lf * (lf + 1.0);
            for m in 0..=l {
                let mf = m as f64;
                let i = tri(l, m);
                let lower = if l > m {
                    ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt()
                        * p0[tri(l - 1, m)]
                } else {
                    0.0
                };
                p1[i] = (lf * cos_t * p0[i] - lower) / sin_t;
                // Legendre equation in θ and its derivative
                let q = mf * mf * csc2 - lambda;
                p2[i] = -cot * p1[i] + q * p0[i];
                p3[i] = csc2 * p1[i] - cot * p2[i] - 2.0 * mf * mf * cot * csc2 * p0[i]
                    + q * p1[i];
            }
        }
        LegendreRing {
            p: [p0, p1, p2, p3],
        }
    }
}

/// Quadrature grid and spectral transform tables for band limit `L`.
///
/// `L + 1` Gauss-Legendre latitudes in `cos θ` and `2L + 2` equally spaced
/// longitudes; products of two degree-`L` harmonics integrate exactly.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    band_limit: usize,
    nlat: usize,
    nlon: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    phi: Vec<f64>,
    lat_weights: Vec<f64>,
    weights: Vec<f64>,
    rings: Vec<LegendreRing>,
    // cos(mφ_q), sin(mφ_q) indexed [q * (L + 1) + m]
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
}

impl SphereGrid {
    /// Builds the grid for `band_limit >= 4`.
    pub fn new(band_limit: usize) -> Result<Self> {
        if band_limit < MIN_BAND_LIMIT {
            return Err(Error::invalid(
                "sphere::make_grid",
                format!("band_limit must be >= {MIN_BAND_LIMIT}, got {band_limit}"),
            ));
        }
        let nlat = band_limit + 1;
        let nlon = 2 * band_limit + 2;
        let rule = GaussLegendre::new(NonZeroUsize::new(nlat).expect("nlat > 0"));
        // north to south: cos θ descending
        let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

        let cos_theta: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let lat_weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let theta: Vec<f64> = cos_theta.iter().map(|c| c.acos()).collect();
        let sin_theta: Vec<f64> = cos_theta.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let phi: Vec<f64> = (0..nlon)
            .map(|q| 2.0 * PI * q as f64 / nlon as f64)
            .collect();

        let dphi = 2.0 * PI / nlon as f64;
        let mut weights = Vec::with_capacity(nlat * nlon);
        for w in &lat_weights {
            weights.extend(std::iter::repeat_n(w * dphi, nlon));
        }

        let rings = cos_theta
            .iter()
            .zip(&sin_theta)
            .map(|(&c, &s)| LegendreRing::new(band_limit, c, s))
            .collect();

        let stride = band_limit + 1;
        let mut cos_m = vec![0.0; nlon * stride];
        let mut sin_m = vec![0.0; nlon * stride];
        for (q, &ph) in phi.iter().enumerate() {
            for m in 0..stride {
                let (s, c) = (m as f64 * ph).sin_cos();
                cos_m[q * stride + m] = c;
                sin_m[q * stride + m] = s;
            }
        }

        Ok(SphereGrid {
            band_limit,
            nlat,
            nlon,
            theta,
            cos_theta,
            sin_theta,
            phi,
            lat_weights,
            weights,
            rings,
            cos_m,
            sin_m,
        })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coeff_count(&self) -> usize {
        coeff_count(self.band_limit)
    }

    /// `(θ, φ)` of node `i`.
    pub fn node(&self, i: usize) -> (f64, f64) {
        (self.theta[i / self.nlon], self.phi[i % self.nlon])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn sin_theta(&self, i: usize) -> f64 {
        self.sin_theta[i / self.nlon]
    }

    pub fn cos_theta(&self, i: usize) -> f64 {
        self.cos_theta[i / self.nlon]
    }

    /// Gauss-Legendre weights in `cos θ`, one per latitude ring.
    pub fn latitude_weights(&self) -> &[f64] {
        &self.lat_weights
    }

    /// Quadrature weights of the round measure `sin θ dθ dφ`, one per node.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Unit position vector of node `i` on the round sphere.
    pub fn unit_normal(&self, i: usize) -> [f64; 3] {
        self.frame_derivative(i, 0, 0)
    }

    /// `∂_θ^dt ∂_φ^dp` of the unit position vector at node `i`.
    pub fn frame_derivative(&self, i: usize, dt: usize, dp: usize) -> [f64; 3] {
        let j = i / self.nlon;
        let (s, c) = (self.sin_theta[j], self.cos_theta[j]);
        let (sp, cp) = self.phi[i % self.nlon].sin_cos();
        // d^k/dx^k of (sin x, cos x)
        let dsin = |k: usize, s: f64, c: f64| match k % 4 {
            0 => s,
            1 => c,
            2 => -s,
            _ => -c,
        };
        let dcos = |k: usize, s: f64, c: f64| match k % 4 {
            0 => c,
            1 => -s,
            2 => -c,
            _ => s,
        };
        let st = dsin(dt, s, c);
        [
            st * dcos(dp, sp, cp),
            st * dsin(dp, sp, cp),
            if dp == 0 { dcos(dt, s, c) } else { 0.0 },
        ]
    }

    /// Quadrature coefficients of `values` (projection onto `Y_lm`, `l <= L`).
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.len(), "analyze: wrong sample count");
        let lmax = self.band_limit;
        let stride = lmax + 1;
        let dphi = 2.0 * PI / self.nlon as f64;
        let mut out = vec![0.0; coeff_count(lmax)];
        let mut fc = vec![0.0; stride];
        let mut fs = vec![0.0; stride];
        for j in 0..self.nlat {
            fc.iter_mut().for_each(|v| *v = 0.0);
            fs.iter_mut().for_each(|v| *v = 0.0);
            let row = &values[j * self.nlon..(j + 1) * self.nlon];
            for (q, &f) in row.iter().enumerate() {
                let base = q * stride;
                for m in 0..stride {
                    fc[m] += f * self.cos_m[base + m];
                    fs[m] += f * self.sin_m[base + m];
                }
            }
            let w = self.lat_weights[j] * dphi;
            let p = &self.rings[j].p[0];
            for m in 0..=lmax {
                let scale = if m == 0 { w } else { w * std::f64::consts::SQRT_2 };
                for l in m..=lmax {
                    let pv = p[tri(l, m)] * scale;
                    out[coeff_index(l, m as i64)] += pv * fc[m];
                    if m > 0 {
                        out[coeff_index(l, -(m as i64))] += pv * fs[m];
                    }
                }
            }
        }
        out
    }

    /// Samples `∂_θ^dt ∂_φ^dp` of the band-limited function with coefficients
    /// `coeffs` at every node. Derivative orders up to 3 in θ are supported.
    pub fn synthesize(&self, coeffs: &[f64], dt: usize, dp: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.synthesize_into(coeffs, dt, dp, &mut out);
        out
    }

    pub fn synthesize_into(&self, coeffs: &[f64], dt: usize, dp: usize, out: &mut [f64]) {
        assert!(dt <= 3, "synthesize: θ-derivative order above 3");
        assert_eq!(out.len(), self.len());
        let lmax = self.band_limit;
        let lc = coeffs.len().isqrt().saturating_sub(1);
        assert!(
            coeff_count(lc) == coeffs.len() && lc <= lmax,
            "synthesize: coefficient vector of length {} does not match a band limit <= {lmax}",
            coeffs.len()
        );
        let stride = lmax + 1;
        let mut a = vec![0.0; stride];
        let mut b = vec![0.0; stride];
        for j in 0..self.nlat {
            let p = &self.rings[j].p[dt];
            for m in 0..=lc {
                let mut sa = 0.0;
                let mut sb = 0.0;
                for l in m..=lc {
                    let pv = p[tri(l, m)];
                    sa += coeffs[coeff_index(l, m as i64)] * pv;
                    if m > 0 {
                        sb += coeffs[coeff_index(l, -(m as i64))] * pv;
                    }
                }
                let scale = if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
                let mp = (m as f64).powi(dp as i32) * scale;
                // d^dp/dφ^dp applied to (cos mφ, sin mφ)
                match dp % 4 {
                    0 => {
                        a[m] = sa * mp;
                        b[m] = sb * mp;
                    }
                    1 => {
                        a[m] = sb * mp;
                        b[m] = -sa * mp;
                    }
                    2 => {
                        a[m] = -sa * mp;
                        b[m] = -sb * mp;
                    }
                    _ => {
                        a[m] = -sb * mp;
                        b[m] = sa * mp;
                    }
                }
            }
            let row = &mut out[j * self.nlon..(j + 1) * self.nlon];
            for (q, v) in row.iter_mut().enumerate() {
                let base = q * stride;
                let mut acc = 0.0;
                for m in 0..=lc {
                    acc += a[m] * self.cos_m[base + m] + b[m] * self.sin_m[base + m];
                }
                *v = acc;
            }
        }
    }

    /// Value of `∂_θ^dt ∂_φ^dp Y_lm` at node `i`.
    pub fn harmonic(&self, l: usize, m: i64, i: usize, dt: usize, dp: usize) -> f64 {
        let j = i / self.nlon;
        let q = i % self.nlon;
        let am = m.unsigned_abs() as usize;
        let pv = self.rings[j].p[dt][tri(l, am)];
        if am == 0 {
            return if dp == 0 { pv } else { 0.0 };
        }
        let ph = am as f64 * self.phi[q];
        let shift = dp as f64 * std::f64::consts::FRAC_PI_2;
        let trig = if m > 0 { (ph + shift).cos() } else { (ph + shift).sin() };
        std::f64::consts::SQRT_2 * pv * (am as f64).powi(dp as i32) * trig
    }

    /// Round-measure integral of nodal values.
    pub fn quadrature(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_band_limit() {
        assert!(matches!(
            SphereGrid::new(3),
            Err(Error::InvalidArgument { .. })
        ));
        assert!(SphereGrid::new(4).is_ok());
    }

    #[test]
    fn weights_sum_to_sphere_area() {
        for l in [4, 16, 24] {
            let g = SphereGrid::new(l).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - 4.0 * PI).abs() <= 1e-12 * 4.0 * PI);
            assert!(g.len() >= (l + 1) * (2 * l + 1));
        }
    }

    #[test]
    fn analysis_inverts_synthesis() {
        let g = SphereGrid::new(10).unwrap();
        let coeffs: Vec<f64> = (0..g.coeff_count())
            .map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0)
            .collect();
        let values = g.synthesize(&coeffs, 0, 0);
        let back = g.analyze(&values);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn orthonormality_of_y20() {
        let g = SphereGrid::new(16).unwrap();
        let y20: Vec<f64> = (0..g.len()).map(|i| g.harmonic(2, 0, i, 0, 0)).collect();
        let norm = g.quadrature(&y20.iter().map(|v| v * v).collect::<Vec<_>>());
        assert!((norm - 1.0).abs() < 1e-12);
        // closed form sqrt(5/16π)(3cos²θ − 1)
        for i in 0..g.len() {
            let c = g.cos_theta(i);
            let exact = (5.0 / (16.0 * PI)).sqrt() * (3.0 * c * c - 1.0);
            assert!((y20[i] - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn synthesized_derivatives_match_harmonic_table() {
        let g = SphereGrid::new(8).unwrap();
        for (l, m) in [(3usize, 2i64), (5, -3), (4, 0), (8, 8), (7, -1)] {
            let mut c = vec![0.0; g.coeff_count()];
            c[coeff_index(l, m)] = 1.0;
            for (dt, dp) in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)] {
                let s = g.synthesize(&c, dt, dp);
                for i in (0..g.len()).step_by(7) {
                    let h = g.harmonic(l, m, i, dt, dp);
                    assert!((s[i] - h).abs() < 1e-11 * (1.0 + h.abs()), "l={l} m={m} dt={dt} dp={dp}");
                }
            }
        }
    }

    #[test]
    fn theta_derivatives_agree_with_finite_differences() {
        // Legendre-table derivatives versus central differences of a freshly
        // built ring at shifted colatitude.
        let (l_max, theta) = (9usize, 0.83f64);
        let h = 1e-4;
        let ring = |t: f64| LegendreRing::new(l_max, t.cos(), t.sin());
        let (r0, rp, rm) = (ring(theta), ring(theta + h), ring(theta - h));
        for k in 0..=2 {
            for idx in 0..r0.p[0].len() {
                let fd = (rp.p[k][idx] - rm.p[k][idx]) / (2.0 * h);
                let an = r0.p[k + 1][idx];
                assert!((fd - an).abs() < 1e-5 * (1.0 + an.abs()), "order {k} idx {idx}: {fd} vs {an}");
            }
        }
    }
}
