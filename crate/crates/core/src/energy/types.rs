use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observer `T₀ = (√(1+|a|²), a)` in the flat slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostVector {
    a: [f64; 3],
}

impl BoostVector {
    pub fn new(a: [f64; 3]) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("energy::BoostVector", format!("non-finite boost {a:?}")));
        }
        Ok(BoostVector { a })
    }

    pub fn rest() -> Self {
        BoostVector { a: [0.0; 3] }
    }

    pub fn from_vector(a: &Vector3<f64>) -> Result<Self> {
        Self::new([a[0], a[1], a[2]])
    }

    pub fn a(&self) -> Vector3<f64> {
        Vector3::from(self.a)
    }

    pub fn rho(&self) -> f64 {
        self.a().norm()
    }

    /// `a / |a|`, undefined at rest.
    pub fn omega(&self) -> Option<Vector3<f64>> {
        let r = self.rho();
        (r > 0.0).then(|| self.a() / r)
    }

    pub fn time_component(&self) -> f64 {
        (1.0 + self.a().norm_squared()).sqrt()
    }

    pub fn four_vector(&self) -> FourVector {
        FourVector::new(self.time_component(), self.a())
    }
}

/// Vector of ℝ^{3,1} with signature `(−, +, +, +)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourVector {
    pub t: f64,
    pub x: [f64; 3],
}

impl FourVector {
    pub fn new(t: f64, x: Vector3<f64>) -> Self {
        FourVector { t, x: [x[0], x[1], x[2]] }
    }

    pub fn spatial(&self) -> Vector3<f64> {
        Vector3::from(self.x)
    }

    pub fn minkowski(&self, other: &FourVector) -> f64 {
        -self.t * other.t + self.spatial().dot(&other.spatial())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CausalType {
    TimelikeFuture,
    Null,
    Spacelike,
    TimelikePast,
}

impl CausalType {
    pub fn as_str(&self) -> &'static str {
        match self {
            CausalType::TimelikeFuture => "timelike-future",
            CausalType::Null => "null",
            CausalType::Spacelike => "spacelike",
            CausalType::TimelikePast => "timelike-past",
        }
    }
}

/// Width of the band around the light cone classified as null.
pub const NULL_TOLERANCE: f64 = 1e-12;

/// `𝒲 = (m_LY, 𝒱)` with its causal character.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourVectorW {
    pub m_ly: f64,
    pub v: [f64; 3],
    pub causal_type: CausalType,
}

impl FourVectorW {
    pub fn new(m_ly: f64, v: Vector3<f64>) -> Self {
        let q = -m_ly * m_ly + v.norm_squared();
        let causal_type = if q.abs() <= NULL_TOLERANCE {
            CausalType::Null
        } else if q > 0.0 {
            CausalType::Spacelike
        } else if m_ly > 0.0 {
            CausalType::TimelikeFuture
        } else {
            CausalType::TimelikePast
        };
        FourVectorW {
            m_ly,
            v: [v[0], v[1], v[2]],
            causal_type,
        }
    }

    pub fn v(&self) -> Vector3<f64> {
        Vector3::from(self.v)
    }

    pub fn four_vector(&self) -> FourVector {
        FourVector::new(self.m_ly, self.v())
    }

    /// `⟨𝒲, 𝒲⟩`.
    pub fn norm_squared(&self) -> f64 {
        let w = self.four_vector();
        w.minkowski(&w)
    }
}

/// Quasilocal energy at one observer with the two-sided estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "E_tilde")]
    pub e_tilde: f64,
    /// `−⟨a, 𝒱⟩`
    pub boost_term: f64,
    #[serde(rename = "m_LY")]
    pub m_ly: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub lower: f64,
    pub upper: f64,
    #[serde(rename = "V")]
    pub v: [f64; 3],
    pub a: [f64; 3],
}

impl EnergyReport {
    /// `lower ≤ E ≤ upper` up to a relative slack.
    pub fn within_bounds(&self, rel_slack: f64) -> bool {
        let scale = self.energy.abs().max(self.lower.abs()).max(self.upper.abs()).max(1.0);
        self.energy >= self.lower - rel_slack * scale && self.energy <= self.upper + rel_slack * scale
    }
}
