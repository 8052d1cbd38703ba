use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analytic family of asymptotically flat initial data on an ℝ³ end.
///
/// All families share the isotropic Schwarzschild metric
/// `g_ij = (1 + m/2r)^4 δ_ij`; `Composite` adds a Bowen-York extrinsic
/// curvature with prescribed linear momentum.
///
/// The composite family is not a solution of the momentum constraint (the
/// Bowen-York field is divergence-free only with respect to the flat
/// metric). It is used purely as data with exactly known ADM charges and
/// the standard fall-off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum Family {
    Flat,
    Schwarzschild { mass: f64 },
    Composite { mass: f64, momentum: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    family: Family,
    conformal_mass: f64,
    momentum: Option<BowenYork>,
}

/// Bowen-York extrinsic curvature
/// `p_ij = 3/(2r²) [P_i n_j + P_j n_i − (δ_ij − n_i n_j) ⟨P, n⟩]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BowenYork {
    momentum: Vector3<f64>,
}

fn unit_and_radius(y: &Vector3<f64>, op: &'static str) -> Result<(Vector3<f64>, f64)> {
    let r = y.norm();
    if !(r > 0.0) {
        return Err(Error::SingularPoint { op });
    }
    Ok((y / r, r))
}

impl BowenYork {
    pub fn momentum(&self) -> Vector3<f64> {
        self.momentum
    }

    pub fn eval(&self, y: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let (n, r) = unit_and_radius(y, "spacetime::bowen_york_p")?;
        Ok(self.shape(&n) * (1.5 / (r * r)))
    }

    fn shape(&self, n: &Vector3<f64>) -> Matrix3<f64> {
        let p = self.momentum;
        let pn = p.dot(n);
        p * n.transpose() + n * p.transpose() - (Matrix3::identity() - n * n.transpose()) * pn
    }

    /// `[∂_1 p, ∂_2 p, ∂_3 p]`.
    pub fn derivative(&self, y: &Vector3<f64>) -> Result<[Matrix3<f64>; 3]> {
        let (n, r) = unit_and_radius(y, "spacetime::bowen_york_p")?;
        let p = self.momentum;
        let pn = p.dot(&n);
        let q = self.shape(&n);
        Ok(std::array::from_fn(|k| {
            let mut e = Vector3::zeros();
            e[k] = 1.0;
            let dn = (e - n * n[k]) / r;
            let dpn = (p[k] - n[k] * pn) / r;
            let dq = p * dn.transpose()
                + dn * p.transpose()
                + (dn * n.transpose() + n * dn.transpose()) * pn
                - (Matrix3::identity() - n * n.transpose()) * dpn;
            (dq / (r * r) - q * (2.0 * n[k] / (r * r * r))) * 1.5
        }))
    }
}

/// Extrinsic-curvature evaluator for a Bowen-York field of momentum `P`.
pub fn bowen_york_p(momentum: [f64; 3]) -> BowenYork {
    BowenYork {
        momentum: Vector3::from(momentum),
    }
}

/// Time-symmetric isotropic Schwarzschild data of mass `m > 0`.
pub fn schwarzschild_data(mass: f64) -> Result<InitialData> {
    InitialData::new(Family::Schwarzschild { mass })
}

/// Largest decay ratios seen at one sampling radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub radius: f64,
    /// `max r|a_ij| + r²|∂a_ij| + r³|∂∂a_ij|` over directions and components.
    pub metric: f64,
    /// `max r²|p_ij| + r³|∂p_ij|`.
    pub curvature: f64,
}

impl InitialData {
    pub fn new(family: Family) -> Result<Self> {
        const OP: &str = "spacetime::InitialData";
        let finite = |x: f64| x.is_finite();
        match family {
            Family::Flat => Ok(InitialData {
                family,
                conformal_mass: 0.0,
                momentum: None,
            }),
            Family::Schwarzschild { mass } => {
                if !(mass > 0.0) || !finite(mass) {
                    return Err(Error::invalid(
                        "spacetime::schwarzschild_data",
                        format!("mass must be positive, got {mass}"),
                    ));
                }
                Ok(InitialData {
                    family,
                    conformal_mass: mass,
                    momentum: None,
                })
            }
            Family::Composite { mass, momentum } => {
                if !(mass >= 0.0) || !finite(mass) || !momentum.iter().all(|p| finite(*p)) {
                    return Err(Error::invalid(
                        OP,
                        format!("composite data needs mass >= 0 and finite momentum, got {mass}, {momentum:?}"),
                    ));
                }
                Ok(InitialData {
                    family,
                    conformal_mass: mass,
                    momentum: Some(bowen_york_p(momentum)),
                })
            }
        }
    }

    pub fn flat() -> Self {
        InitialData::new(Family::Flat).expect("flat data is valid")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mass(&self) -> f64 {
        self.conformal_mass
    }

    pub fn momentum(&self) -> Vector3<f64> {
        self.momentum.map(|b| b.momentum).unwrap_or_else(Vector3::zeros)
    }

    pub fn is_time_symmetric(&self) -> bool {
        self.momentum.is_none_or(|b| b.momentum == Vector3::zeros())
    }

    fn psi(&self, r: f64) -> f64 {
        1.0 + self.conformal_mass / (2.0 * r)
    }

    /// Coordinate radius of the sphere with areal radius `areal` in the
    /// isotropic chart.
    pub fn isotropic_radius(&self, areal: f64) -> Result<f64> {
        let m = self.conformal_mass;
        if !(areal > 2.0 * m) {
            return Err(Error::invalid(
                "spacetime::isotropic_radius",
                format!("areal radius {areal} lies inside the horizon 2m = {}", 2.0 * m),
            ));
        }
        Ok(0.5 * (areal - m + (areal * areal - 2.0 * m * areal).sqrt()))
    }

    /// Areal radius `r (1 + m/2r)²` of the coordinate sphere of radius `r`.
    pub fn areal_radius(&self, r: f64) -> f64 {
        r * self.psi(r).powi(2)
    }

    pub fn metric(&self, y: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let (_, r) = unit_and_radius(y, "spacetime::metric")?;
        Ok(Matrix3::identity() * self.psi(r).powi(4))
    }

    /// `[∂_1 g, ∂_2 g, ∂_3 g]`.
    pub fn metric_derivative(&self, y: &Vector3<f64>) -> Result<[Matrix3<f64>; 3]> {
        let (n, r) = unit_and_radius(y, "spacetime::metric")?;
        let psi = self.psi(r);
        let dpsi = -self.conformal_mass / (2.0 * r * r);
        Ok(std::array::from_fn(|k| Matrix3::identity() * (4.0 * psi.powi(3) * dpsi * n[k])))
    }

    /// `∂_l ∂_k g`, indexed `[l][k]`.
    pub fn metric_second_derivative(&self, y: &Vector3<f64>) -> Result<[[Matrix3<f64>; 3]; 3]> {
        let (n, r) = unit_and_radius(y, "spacetime::metric")?;
        let m = self.conformal_mass;
        let psi = self.psi(r);
        let d1 = |k: usize| -m * n[k] / (2.0 * r * r);
        let d2 = |l: usize, k: usize| {
            let delta = if l == k { 1.0 } else { 0.0 };
            -0.5 * m * (delta - 3.0 * n[l] * n[k]) / r.powi(3)
        };
        Ok(std::array::from_fn(|l| {
            std::array::from_fn(|k| {
                Matrix3::identity() * (12.0 * psi * psi * d1(l) * d1(k) + 4.0 * psi.powi(3) * d2(l, k))
            })
        }))
    }

    pub fn extrinsic_curvature(&self, y: &Vector3<f64>) -> Result<Matrix3<f64>> {
        match &self.momentum {
            Some(b) => b.eval(y),
            None => unit_and_radius(y, "spacetime::extrinsic_curvature").map(|_| Matrix3::zeros()),
        }
    }

    pub fn extrinsic_curvature_derivative(&self, y: &Vector3<f64>) -> Result<[Matrix3<f64>; 3]> {
        match &self.momentum {
            Some(b) => b.derivative(y),
            None => unit_and_radius(y, "spacetime::extrinsic_curvature").map(|_| [Matrix3::zeros(); 3]),
        }
    }

    /// Samples the fall-off quantities of the asymptotic-flatness conditions
    /// at each radius over a fixed set of directions.
    pub fn decay_samples(&self, radii: &[f64]) -> Result<Vec<DecaySample>> {
        let dirs: Vec<Vector3<f64>> = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [-1.0, 2.0, 0.5],
            [0.3, -0.7, -1.1],
        ]
        .iter()
        .map(|d| Vector3::from(*d).normalize())
        .collect();
        let maxabs = |m: &Matrix3<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        radii
            .iter()
            .map(|&r| {
                let mut metric: f64 = 0.0;
                let mut curvature: f64 = 0.0;
                for d in &dirs {
                    let y = d * r;
                    let a = self.metric(&y)? - Matrix3::identity();
                    let da = self.metric_derivative(&y)?;
                    let dda = self.metric_second_derivative(&y)?;
                    let m1 = da.iter().map(maxabs).fold(0.0, f64::max);
                    let m2 = dda.iter().flatten().map(maxabs).fold(0.0, f64::max);
                    metric = metric.max(r * maxabs(&a) + r * r * m1 + r.powi(3) * m2);
                    let p = self.extrinsic_curvature(&y)?;
                    let dp = self.extrinsic_curvature_derivative(&y)?;
                    let p1 = dp.iter().map(maxabs).fold(0.0, f64::max);
                    curvature = curvature.max(r * r * maxabs(&p) + r.powi(3) * p1);
                }
                Ok(DecaySample {
                    radius: r,
                    metric,
                    curvature,
                })
            })
            .collect()
    }
}
