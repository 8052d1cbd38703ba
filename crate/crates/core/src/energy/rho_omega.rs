use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::check_inputs;
use crate::error::{guarded_sqrt, Error, Result};
use crate::spacetime::SurfaceData;
use crate::sphere::{integrate_values, EmbeddedSurface};

/// `Ẽ` written in polar coordinates `a = ρω` of the boost:
/// `(1/8π) ∫ k₀ (B + F)` with `p = ⟨ω, e^{H₀}⟩`, `f = ρp/√(1+ρ²q²)`,
/// `t = |H|/k₀`.
pub fn e_tilde_rho_omega(surface: &EmbeddedSurface, data: &SurfaceData, rho: f64, omega: &Vector3<f64>) -> Result<f64> {
    const OP: &str = "energy::e_tilde_rho_omega";
    check_inputs(surface, data, OP)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::invalid(OP, format!("rho must be a nonnegative number, got {rho}")));
    }
    let len = omega.norm();
    if !((len - 1.0).abs() < 1e-10) {
        return Err(Error::invalid(OP, format!("omega must be a unit vector, |omega| = {len}")));
    }
    let k0 = surface.mean_curvature().values();
    let hn = data.hnorm().values();
    let gamma = (1.0 + rho * rho).sqrt();
    let mut density = Vec::with_capacity(k0.len());
    for (i, n) in surface.normals().iter().enumerate() {
        let p = omega.dot(n);
        let q = guarded_sqrt(1.0 - p * p, OP, "1 - p^2")?;
        let f = rho * p / (1.0 + rho * rho * q * q).sqrt();
        let t = hn[i] / k0[i];
        let b = gamma * (1.0 - (t * t + f * f).sqrt() / (1.0 + f * f).sqrt());
        let ff = rho * p * ((f / t).asinh() - f.asinh());
        density.push(k0[i] * (b + ff));
    }
    Ok(integrate_values(&density, surface.metric()) / (8.0 * PI))
}

/// Pointwise arguments of `Φ`: `t = |H|/k₀ > 0`, `f² ≤ ρ²`, `ρ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhiInput {
    pub t: f64,
    pub f: f64,
    pub rho: f64,
}

impl PhiInput {
    fn check(&self, op: &'static str) -> Result<()> {
        let PhiInput { t, f, rho } = *self;
        if !(rho > 0.0) {
            return Err(Error::invalid(op, format!("rho must be positive, got {rho}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::invalid(op, format!("t must be positive, got {t}")));
        }
        if !(f * f <= rho * rho * (1.0 + 1e-12)) {
            return Err(Error::invalid(op, format!("need f^2 <= rho^2, got f = {f}, rho = {rho}")));
        }
        Ok(())
    }
}

/// `Φ(t) = [−f(1+ρ²) sinh⁻¹(f/t) + (ρ²−f²)√(t²+f²)] / (ρ√(1+f²)√(1+ρ²)) − ρt/√(1+ρ²)`.
pub fn phi(input: &PhiInput) -> Result<f64> {
    input.check("energy::phi")?;
    let PhiInput { t, f, rho } = *input;
    let r2 = 1.0 + rho * rho;
    let num = -f * r2 * (f / t).asinh() + (rho * rho - f * f) * (t * t + f * f).sqrt();
    Ok(num / (rho * (1.0 + f * f).sqrt() * r2.sqrt()) - rho * t / r2.sqrt())
}

/// `∂Φ/∂t`.
pub fn dphi_dt(input: &PhiInput) -> Result<f64> {
    input.check("energy::dphi_dt")?;
    let PhiInput { t, f, rho } = *input;
    let r2 = 1.0 + rho * rho;
    let num = f * f * r2 + (rho * rho - f * f) * t * t;
    let den = t * rho * (1.0 + f * f).sqrt() * r2.sqrt() * (t * t + f * f).sqrt();
    Ok(num / den - rho / r2.sqrt())
}
