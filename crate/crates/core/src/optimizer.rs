//! Infimum of the energy over observers and the large-sphere sweep.

use std::sync::Arc;

use log::{debug, warn};
use nalgebra::Vector3;
use rand::{RngExt, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::embedding::{solve_weyl, WeylOptions};
use crate::energy::{BoostVector, CausalType, EnergyFunctional, FourVectorW};
use crate::error::Result;
use crate::spacetime::{coordinate_sphere, InitialData, SurfaceData};
use crate::sphere::{EmbeddedSurface, SphereGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InfimumStatus {
    ClosedForm,
    NumericOnly,
    UnboundedBelowSuspected,
}

impl InfimumStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            InfimumStatus::ClosedForm => "closed-form",
            InfimumStatus::NumericOnly => "numeric-only",
            InfimumStatus::UnboundedBelowSuspected => "unbounded-below-suspected",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfimumResult {
    pub status: InfimumStatus,
    pub a_star: [f64; 3],
    pub value: f64,
    pub closed_form_value: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Observer `T₀* = 𝒲/√(−⟨𝒲,𝒲⟩)` and the lower bound `√(−⟨𝒲,𝒲⟩)`.
///
/// Without a future timelike `𝒲` there is no closed form; the result then
/// reports the rest observer with `value = m_LY`.
pub fn closed_form_infimum(w: &FourVectorW, _c: f64) -> InfimumResult {
    let status = match w.causal_type {
        CausalType::TimelikeFuture => InfimumStatus::ClosedForm,
        CausalType::Null => InfimumStatus::NumericOnly,
        CausalType::Spacelike | CausalType::TimelikePast => InfimumStatus::UnboundedBelowSuspected,
    };
    if status != InfimumStatus::ClosedForm {
        return InfimumResult {
            status,
            a_star: [0.0; 3],
            value: w.m_ly,
            closed_form_value: None,
            iterations: 0,
            converged: false,
        };
    }
    let mu = (-w.norm_squared()).sqrt();
    let a = w.v() / mu;
    InfimumResult {
        status,
        a_star: [a[0], a[1], a[2]],
        value: mu,
        closed_form_value: Some(mu),
        iterations: 0,
        converged: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerOptions {
    /// Absolute spread of simplex values at convergence.
    pub value_tol: f64,
    /// Simplex diameter at convergence.
    pub a_tol: f64,
    pub max_iterations: usize,
    /// Iteration cap when `𝒲` is not future timelike.
    pub diagnostic_iterations: usize,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        MinimizerOptions {
            value_tol: 1e-8,
            a_tol: 1e-5,
            max_iterations: 2000,
            diagnostic_iterations: 100,
            initial_step: 0.25,
            seed: 0,
        }
    }
}

struct SimplexRun {
    best: Vector3<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Nelder-Mead on ℝ³ with the standard coefficients. A trial point counts
/// as better only when it wins by more than the rounding floor, so that the
/// simplex does not chase noise on flat stretches.
fn nelder_mead<F, N>(
    f: &F,
    floor: &N,
    start: Vector3<f64>,
    step: f64,
    opts: &MinimizerOptions,
    cap: usize,
) -> Result<SimplexRun>
where
    F: Fn(&Vector3<f64>) -> Result<f64>,
    N: Fn(&Vector3<f64>) -> f64,
{
    let better = |p: &(Vector3<f64>, f64), q: &(Vector3<f64>, f64)| p.1 < q.1 - floor(&p.0).max(floor(&q.0));
    let mut pts: Vec<(Vector3<f64>, f64)> = Vec::with_capacity(4);
    pts.push((start, f(&start)?));
    for k in 0..3 {
        let mut p = start;
        p[k] += step;
        pts.push((p, f(&p)?));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cap {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = pts[3].1 - pts[0].1;
        let diameter = pts[1..].iter().map(|p| (p.0 - pts[0].0).norm()).fold(0.0, f64::max);
        if spread <= opts.value_tol && diameter <= opts.a_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid = (pts[0].0 + pts[1].0 + pts[2].0) / 3.0;
        let worst = pts[3];
        let reflect = centroid + (centroid - worst.0);
        let r = (reflect, f(&reflect)?);
        if better(&r, &pts[0]) {
            let expand = centroid + (centroid - worst.0) * 2.0;
            let e = (expand, f(&expand)?);
            pts[3] = if better(&e, &r) { e } else { r };
            continue;
        }
        if better(&r, &pts[2]) {
            pts[3] = r;
            continue;
        }
        let c = if better(&r, &worst) {
            centroid + (reflect - centroid) * 0.5
        } else {
            centroid + (worst.0 - centroid) * 0.5
        };
        let c = (c, f(&c)?);
        if better(&c, &worst) && better(&c, &r) {
            pts[3] = c;
            continue;
        }
        let best = pts[0].0;
        for p in pts.iter_mut().skip(1) {
            p.0 = best + (p.0 - best) * 0.5;
            p.1 = f(&p.0)?;
        }
    }
    pts.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(SimplexRun {
        best: pts[0].0,
        value: pts[0].1,
        iterations,
        converged,
    })
}

/// Local minimisation of `a ↦ E(a)` from `a0`, the closed-form observer (or
/// the `𝒱` direction) and a seeded random point, followed by a polishing run
/// from the best of the three.
pub fn numeric_infimum(
    surface: &EmbeddedSurface,
    data: &SurfaceData,
    a0: &Vector3<f64>,
    opts: &MinimizerOptions,
) -> Result<InfimumResult> {
    let functional = EnergyFunctional::new(surface, data)?;
    minimize_functional(&functional, a0, opts)
}

pub fn minimize_functional(
    functional: &EnergyFunctional,
    a0: &Vector3<f64>,
    opts: &MinimizerOptions,
) -> Result<InfimumResult> {
    let w = *functional.four_vector();
    let closed = closed_form_infimum(&w, functional.bound_constant());
    let timelike = closed.status == InfimumStatus::ClosedForm;
    let cap = if timelike { opts.max_iterations } else { opts.diagnostic_iterations };
    let f = |a: &Vector3<f64>| functional.energy(a);
    let floor = |a: &Vector3<f64>| functional.rounding_floor(a);

    let directed = if timelike {
        Vector3::from(closed.a_star)
    } else if w.v().norm() > 0.0 {
        w.v().normalize()
    } else {
        Vector3::zeros()
    };
    let mut rng = rand::rngs::StdRng::seed_from_u64(opts.seed);
    let random = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));

    let mut iterations = 0;
    let mut best: Option<SimplexRun> = None;
    for start in [*a0, directed, random] {
        let run = nelder_mead(&f, &floor, start, opts.initial_step, opts, cap)?;
        iterations += run.iterations;
        debug!("simplex from {start:?}: value {} after {} iterations", run.value, run.iterations);
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let seed_point = best.as_ref().expect("three runs").best;
    let polish = nelder_mead(&f, &floor, seed_point, opts.initial_step * 0.1, opts, cap)?;
    iterations += polish.iterations;
    let best = match best {
        Some(b) if b.value < polish.value => SimplexRun {
            converged: b.converged && polish.converged,
            ..b
        },
        _ => polish,
    };

    let status = match closed.status {
        InfimumStatus::UnboundedBelowSuspected => InfimumStatus::UnboundedBelowSuspected,
        _ if !best.converged => InfimumStatus::NumericOnly,
        s => s,
    };
    if !best.converged {
        warn!("optimizer::numeric_infimum: tolerance not reached after {iterations} iterations");
    }
    Ok(InfimumResult {
        status,
        a_star: [best.best[0], best.best[1], best.best[2]],
        value: best.value,
        closed_form_value: closed.closed_form_value,
        iterations,
        converged: best.converged,
    })
}

/// Default observers probing the uniformity of the estimate gap.
pub fn default_a_samples() -> Vec<Vector3<f64>> {
    vec![
        Vector3::zeros(),
        Vector3::new(0.5, 0.0, 0.0),
        Vector3::new(1.0, 1.0, 0.0),
        Vector3::new(0.0, 0.0, 2.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: f64,
    pub m_ly: f64,
    pub v: [f64; 3],
    pub causal: Option<CausalType>,
    pub c: f64,
    pub inf_numeric: f64,
    pub inf_closed: Option<f64>,
    /// `max_a |E(a) + ⟨T₀(a), 𝒲⟩| / √(1+|a|²)` over the sampled observers.
    pub eps_max: f64,
    pub status: Option<InfimumStatus>,
    pub a_star: [f64; 3],
    pub weyl_iterations: usize,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(r: f64, message: String) -> Self {
        SweepRow {
            r,
            m_ly: f64::NAN,
            v: [f64::NAN; 3],
            causal: None,
            c: f64::NAN,
            inf_numeric: f64::NAN,
            inf_closed: None,
            eps_max: f64::NAN,
            status: None,
            a_star: [f64::NAN; 3],
            weyl_iterations: 0,
            error: Some(message),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepOptions {
    pub weyl: WeylOptions,
    pub minimizer: MinimizerOptions,
}

fn sweep_row(
    data: &InitialData,
    r: f64,
    grid: &Arc<SphereGrid>,
    a_samples: &[Vector3<f64>],
    opts: &SweepOptions,
) -> Result<SweepRow> {
    let sd = coordinate_sphere(data, r, grid)?;
    let weyl = solve_weyl(sd.metric(), None, &opts.weyl)?;
    let functional = EnergyFunctional::new(&weyl.surface, &sd)?;
    let w = *functional.four_vector();
    let closed = closed_form_infimum(&w, functional.bound_constant());
    let start = Vector3::from(if closed.status == InfimumStatus::ClosedForm {
        closed.a_star
    } else {
        [0.0; 3]
    });
    let numeric = minimize_functional(&functional, &start, &opts.minimizer)?;
    let mut eps_max: f64 = 0.0;
    for a in a_samples {
        let t0 = BoostVector::from_vector(a)?;
        let rep = functional.report(&t0)?;
        eps_max = eps_max.max((rep.energy - rep.lower).abs() / t0.time_component());
    }
    Ok(SweepRow {
        r,
        m_ly: w.m_ly,
        v: w.v,
        causal: Some(w.causal_type),
        c: functional.bound_constant(),
        inf_numeric: numeric.value,
        inf_closed: closed.closed_form_value,
        eps_max,
        status: Some(numeric.status),
        a_star: numeric.a_star,
        weyl_iterations: weyl.iterations,
        error: None,
    })
}

/// One row per radius (in the given order); failures are recorded in the
/// row and do not stop the sweep.
pub fn large_sphere_sweep(
    data: &InitialData,
    radii: &[f64],
    grid: &Arc<SphereGrid>,
    a_samples: &[Vector3<f64>],
    opts: &SweepOptions,
) -> Vec<SweepRow> {
    radii
        .par_iter()
        .map(|&r| {
            sweep_row(data, r, grid, a_samples, opts).unwrap_or_else(|e| {
                warn!("optimizer::large_sphere_sweep: r = {r}: {e}");
                SweepRow::failed(r, e.to_string())
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{schwarzschild_data, Family};
    use crate::sphere::{make_grid, TangentField};

    #[test]
    fn closed_form_cases() {
        let rest = closed_form_infimum(&FourVectorW::new(1.0, Vector3::zeros()), 0.0);
        assert_eq!(rest.status, InfimumStatus::ClosedForm);
        assert_eq!(rest.a_star, [0.0; 3]);
        assert_eq!(rest.value, 1.0);

        let moving = closed_form_infimum(&FourVectorW::new(1.0, Vector3::new(-0.3, 0.0, 0.0)), 0.0);
        assert!((moving.value - 0.91f64.sqrt()).abs() < 1e-15);
        assert!((moving.closed_form_value.unwrap() - 0.953_939_2).abs() < 1e-7);
        // time component of T₀* equals m_LY / μ
        let a = Vector3::from(moving.a_star);
        assert!(((1.0 + a.norm_squared()).sqrt() - 1.0 / moving.value).abs() < 1e-14);

        let space = closed_form_infimum(&FourVectorW::new(0.0, Vector3::new(0.3, 0.0, 0.0)), 0.0);
        assert_eq!(space.status, InfimumStatus::UnboundedBelowSuspected);
        assert!(space.closed_form_value.is_none());
    }

    #[test]
    fn schwarzschild_minimum_is_at_rest() {
        let g = make_grid(10).unwrap();
        let d = schwarzschild_data(1.0).unwrap();
        let sd = coordinate_sphere(&d, d.isotropic_radius(4.0).unwrap(), &g).unwrap();
        let x = solve_weyl(sd.metric(), None, &WeylOptions::default()).unwrap().surface;
        let res = numeric_infimum(&x, &sd, &Vector3::new(0.3, -0.2, 0.1), &MinimizerOptions::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.status, InfimumStatus::ClosedForm);
        assert!(Vector3::from(res.a_star).norm() < 1e-3);
        assert!((res.value - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn flat_surface_minimum_is_zero() {
        let g = make_grid(8).unwrap();
        let x = EmbeddedSurface::ellipsoid(g.clone(), [1.0, 1.1, 0.9]).unwrap();
        let sd = SurfaceData::synthetic(x.metric().clone(), x.mean_curvature().clone(), TangentField::zero(g)).unwrap();
        let res = numeric_infimum(&x, &sd, &Vector3::zeros(), &MinimizerOptions::default()).unwrap();
        assert!(res.value.abs() < 1e-9);
        assert_eq!(res.status, InfimumStatus::NumericOnly);
        // rounding noise must not drive the simplex off to infinity
        assert!(Vector3::from(res.a_star).norm() < 10.0, "{res:?}");
        assert!(res.converged);
    }

    #[test]
    fn sweep_keeps_order_and_records_failures() {
        let g = make_grid(8).unwrap();
        let d = InitialData::new(Family::Composite {
            mass: 1.0,
            momentum: [0.3, 0.0, 0.0],
        })
        .unwrap();
        let rows = large_sphere_sweep(&d, &[40.0, -1.0, 20.0], &g, &default_a_samples(), &SweepOptions::default());
        assert_eq!(rows.iter().map(|r| r.r).collect::<Vec<_>>(), vec![40.0, -1.0, 20.0]);
        assert!(rows[1].error.is_some());
        assert!(rows[0].error.is_none() && rows[2].error.is_none());
        assert!(rows[0].eps_max <= rows[2].eps_max * 1.2);
    }
}
