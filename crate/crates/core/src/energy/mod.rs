//! Quasilocal energy of a surface isometrically embedded in the flat slice
//! `ℝ³ ⊂ ℝ^{3,1}`, together with the four-vector `𝒲`, the Liu-Yau and
//! Brown-York masses and the two-sided estimate in terms of `𝒲` and `C`.

mod rho_omega;
mod types;

pub use rho_omega::{dphi_dt, e_tilde_rho_omega, phi, PhiInput};
pub use types::{BoostVector, CausalType, EnergyReport, FourVector, FourVectorW, NULL_TOLERANCE};

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::spacetime::SurfaceData;
use crate::sphere::{gradient, integrate_values, laplacian, EmbeddedSurface, ScalarField};

fn check_inputs(surface: &EmbeddedSurface, data: &SurfaceData, op: &'static str) -> Result<()> {
    let (l, r) = (surface.grid().band_limit(), data.grid().band_limit());
    if l != r {
        return Err(Error::GridMismatch { op, left: l, right: r });
    }
    positive(surface.mean_curvature(), op, "reference mean curvature k0")?;
    positive(data.hnorm(), op, "|H|")
}

fn positive(f: &ScalarField, op: &'static str, what: &'static str) -> Result<()> {
    match f.values().iter().find(|v| !(**v > 0.0)) {
        Some(&value) => Err(Error::NumericalDomain { op, what, value }),
        None => Ok(()),
    }
}

/// `τ = −⟨a, X⟩`, the time function of the embedding seen by `T₀`.
pub fn tau(surface: &EmbeddedSurface, t0: &BoostVector) -> ScalarField {
    let a = t0.a();
    let vals = surface.positions().iter().map(|x| -a.dot(x)).collect();
    ScalarField::new(surface.grid().clone(), vals).expect("finite positions")
}

/// `m_LY = (1/8π) ∫ (k₀ − |H|)`.
pub fn liu_yau_mass(surface: &EmbeddedSurface, data: &SurfaceData) -> Result<f64> {
    check_inputs(surface, data, "energy::liu_yau_mass")?;
    Ok(mean_difference(surface, data.hnorm()))
}

/// `m_BY = (1/8π) ∫ (k₀ − k)`.
pub fn brown_york_mass(surface: &EmbeddedSurface, data: &SurfaceData) -> Result<f64> {
    check_inputs(surface, data, "energy::brown_york_mass")?;
    Ok(mean_difference(surface, data.k()))
}

fn mean_difference(surface: &EmbeddedSurface, k: &ScalarField) -> f64 {
    let d: Vec<f64> = surface
        .mean_curvature()
        .values()
        .iter()
        .zip(k.values())
        .map(|(k0, k)| k0 - k)
        .collect();
    integrate_values(&d, surface.metric()) / (8.0 * PI)
}

/// `𝒱 = (1/8π) ∫ dX(V) dv` and `𝒲 = (m_LY, 𝒱)`.
pub fn momentum_four_vector(surface: &EmbeddedSurface, data: &SurfaceData) -> Result<FourVectorW> {
    let m = liu_yau_mass(surface, data)?;
    let pushed = data.alpha().push_forward(surface.tangents());
    let mut v = Vector3::zeros();
    for k in 0..3 {
        let comp: Vec<f64> = pushed.iter().map(|x| x[k]).collect();
        v[k] = integrate_values(&comp, surface.metric()) / (8.0 * PI);
    }
    Ok(FourVectorW::new(m, v))
}

/// `C = sup |k₀²/|H|² + k₀/|H| − 2| · (1/8π) ∫ |k₀ − |H||`.
pub fn bound_constant_c(surface: &EmbeddedSurface, data: &SurfaceData) -> Result<f64> {
    check_inputs(surface, data, "energy::bound_constant_C")?;
    let k0 = surface.mean_curvature().values();
    let h = data.hnorm().values();
    let sup = k0
        .iter()
        .zip(h)
        .map(|(k0, h)| {
            let s = k0 / h;
            (s * s + s - 2.0).abs()
        })
        .fold(0.0, f64::max);
    let gap: Vec<f64> = k0.iter().zip(h).map(|(k0, h)| (k0 - h).abs()).collect();
    Ok(sup * integrate_values(&gap, surface.metric()) / (8.0 * PI))
}

/// `(−⟨T₀, 𝒲⟩, −⟨T₀, 𝒲⟩ + C√(1+|a|²))`.
pub fn energy_bounds(w: &FourVectorW, c: f64, t0: &BoostVector) -> (f64, f64) {
    let gamma = t0.time_component();
    let lower = gamma * w.m_ly - t0.a().dot(&w.v());
    (lower, lower + c * gamma)
}

/// Integrand of `Ẽ` at one node.
pub(crate) fn e_tilde_density(k0: f64, h: f64, grad2: f64, lap: f64) -> f64 {
    let g2 = 1.0 + grad2;
    let sg = g2.sqrt();
    let s0 = (k0 * k0 * g2 + lap * lap).sqrt();
    let s1 = (h * h * g2 + lap * lap).sqrt();
    s0 - s1 - lap * ((lap / (sg * k0)).asinh() - (lap / (sg * h)).asinh())
}

/// `a ↦ E(Σ, X, T₀(a))` for a fixed surface and its data.
///
/// `τ = −⟨a, X⟩` is linear in `a`, so `∇τ` and `Δτ` are assembled from the
/// gradients and Laplacians of the three coordinate functions, computed once.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    k0: Vec<f64>,
    hnorm: Vec<f64>,
    /// quadrature weight times area element
    weights: Vec<f64>,
    /// `h(∇X^j, ∇X^k)` as `[xx, xy, xz, yy, yz, zz]`
    gram: Vec<[f64; 6]>,
    lap_x: Vec<Vector3<f64>>,
    w: FourVectorW,
    c: f64,
    /// `(1/8π) ∫ (k₀ + |H|) + |𝒱|`
    scale: f64,
}

impl EnergyFunctional {
    pub fn new(surface: &EmbeddedSurface, data: &SurfaceData) -> Result<Self> {
        const OP: &str = "energy::wang_yau_energy";
        check_inputs(surface, data, OP)?;
        let h = surface.metric();
        let mut grads = Vec::with_capacity(3);
        let mut laps = Vec::with_capacity(3);
        for k in 0..3 {
            let xk = surface.coordinate(k);
            grads.push(gradient(&xk, h)?);
            laps.push(laplacian(&xk, h)?);
        }
        const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
        let products: Vec<Vec<f64>> = PAIRS.iter().map(|&(j, k)| h.inner(&grads[j], &grads[k])).collect();
        let n = surface.grid().len();
        let weights = h.volume_weights();
        let w = momentum_four_vector(surface, data)?;
        let total: f64 = (0..n)
            .map(|i| (surface.mean_curvature().values()[i] + data.hnorm().values()[i]) * weights[i])
            .sum();
        Ok(EnergyFunctional {
            k0: surface.mean_curvature().values().to_vec(),
            hnorm: data.hnorm().values().to_vec(),
            weights,
            gram: (0..n).map(|i| std::array::from_fn(|s| products[s][i])).collect(),
            lap_x: (0..n)
                .map(|i| Vector3::new(laps[0].values()[i], laps[1].values()[i], laps[2].values()[i]))
                .collect(),
            scale: total / (8.0 * PI) + w.v().norm(),
            w,
            c: bound_constant_c(surface, data)?,
        })
    }

    /// Bound on the rounding error of [`Self::energy`] at `a`.
    pub fn rounding_floor(&self, a: &Vector3<f64>) -> f64 {
        let gamma = (1.0 + a.norm_squared()).sqrt();
        1e3 * f64::EPSILON * gamma * (1.0 + gamma.ln()) * self.scale
    }

    pub fn four_vector(&self) -> &FourVectorW {
        &self.w
    }

    pub fn bound_constant(&self) -> f64 {
        self.c
    }

    pub fn e_tilde(&self, a: &Vector3<f64>) -> Result<f64> {
        let mut sum = 0.0;
        for i in 0..self.k0.len() {
            let g = &self.gram[i];
            let grad2 = a[0] * a[0] * g[0]
                + a[1] * a[1] * g[3]
                + a[2] * a[2] * g[5]
                + 2.0 * (a[0] * a[1] * g[1] + a[0] * a[2] * g[2] + a[1] * a[2] * g[4]);
            let lap = -a.dot(&self.lap_x[i]);
            let d = e_tilde_density(self.k0[i], self.hnorm[i], grad2.max(0.0), lap);
            if !d.is_finite() {
                return Err(Error::NumericalDomain {
                    op: "energy::wang_yau_energy",
                    what: "energy density",
                    value: d,
                });
            }
            sum += d * self.weights[i];
        }
        Ok(sum / (8.0 * PI))
    }

    pub fn energy(&self, a: &Vector3<f64>) -> Result<f64> {
        Ok(self.e_tilde(a)? - a.dot(&self.w.v()))
    }

    pub fn report(&self, t0: &BoostVector) -> Result<EnergyReport> {
        let a = t0.a();
        let e_tilde = self.e_tilde(&a)?;
        let boost_term = -a.dot(&self.w.v());
        let (lower, upper) = energy_bounds(&self.w, self.c, t0);
        Ok(EnergyReport {
            energy: e_tilde + boost_term,
            e_tilde,
            boost_term,
            m_ly: self.w.m_ly,
            c: self.c,
            lower,
            upper,
            v: self.w.v,
            a: [a[0], a[1], a[2]],
        })
    }
}

/// `E(Σ, X, T₀) = Ẽ − ⟨a, 𝒱⟩` with `τ`, `∇τ`, `Δτ` taken from the spectral
/// operators of the embedded surface.
pub fn wang_yau_energy(surface: &EmbeddedSurface, data: &SurfaceData, t0: &BoostVector) -> Result<EnergyReport> {
    EnergyFunctional::new(surface, data)?.report(t0)
}
