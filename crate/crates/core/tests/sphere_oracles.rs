mod common;

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, Vector3};
use qlelab::sphere::{coeff_count, gradient, integrate, laplacian, make_grid, EmbeddedSurface, ScalarField};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// Adaptive Simpson on [a, b].
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
}

/// Area element `|X_θ × X_φ|` of the ellipsoid parametrisation.
fn ellipsoid_area_element(ax: [f64; 3], t: f64, p: f64) -> f64 {
    let xt = Vector3::new(ax[0] * t.cos() * p.cos(), ax[1] * t.cos() * p.sin(), -ax[2] * t.sin());
    let xp = Vector3::new(-ax[0] * t.sin() * p.sin(), ax[1] * t.sin() * p.cos(), 0.0);
    xt.cross(&xp).norm()
}

fn adaptive_area(ax: [f64; 3]) -> f64 {
    let inner = |t: f64| simpson(&|p| ellipsoid_area_element(ax, t, p), 0.0, 2.0 * PI, 1e-13);
    simpson(&inner, 0.0, PI, 1e-12)
}

#[test]
fn spheroid_area_matches_closed_form_and_adaptive_oracle() {
    let g = make_grid(24).unwrap();
    let (a, c) = (1.0f64, 1.1f64);
    let x = EmbeddedSurface::ellipsoid(g, [a, a, c]).unwrap();
    let e = (1.0 - a * a / (c * c)).sqrt();
    let closed = 2.0 * PI * a * a * (1.0 + c / (a * e) * e.asin());
    assert!((x.area() - closed).abs() < 1e-8, "{} vs {closed}", x.area());
    assert!((x.area() - adaptive_area([a, a, c])).abs() < 1e-8);
}

#[test]
fn triaxial_area_matches_adaptive_oracle() {
    let g = make_grid(32).unwrap();
    let ax = [1.0, 1.2, 0.9];
    let x = EmbeddedSurface::ellipsoid(g, ax).unwrap();
    assert!((x.area() - adaptive_area(ax)).abs() < 1e-8);
}

#[test]
fn ellipsoid_curvatures_match_closed_forms() {
    let g = make_grid(24).unwrap();
    for ax in [[1.0, 1.0, 1.1], [1.0, 1.3, 0.8]] {
        let x = EmbeddedSurface::ellipsoid(g.clone(), ax).unwrap();
        for (i, pos) in x.positions().iter().enumerate() {
            let p = Vector3::new(pos[0] / (ax[0] * ax[0]), pos[1] / (ax[1] * ax[1]), pos[2] / (ax[2] * ax[2]));
            let q = p.norm();
            let s: f64 = ax.iter().map(|a| 1.0 / (a * a)).sum();
            let w: f64 = (0..3).map(|k| pos[k] * pos[k] / ax[k].powi(6)).sum();
            let k0 = (q * q * s - w) / q.powi(3);
            let gauss = 1.0 / ((ax[0] * ax[1] * ax[2]).powi(2) * q.powi(4));
            assert!((x.mean_curvature().values()[i] - k0).abs() < 1e-8);
            assert!((x.gauss_curvature().values()[i] - gauss).abs() < 1e-8);
            // outward normal is p / |p|
            assert!((x.normals()[i] - p / q).norm() < 1e-10);
        }
    }
}

#[test]
fn gradient_of_height_on_unit_sphere() {
    let g = make_grid(16).unwrap();
    let x = EmbeddedSurface::round(g.clone(), 1.0).unwrap();
    let z = x.coordinate(2);
    let grad = gradient(&z, x.metric()).unwrap();
    let n2 = x.metric().norm_squared(&grad);
    for (i, v) in n2.iter().enumerate() {
        let c = g.cos_theta(i);
        assert!((v - (1.0 - c * c)).abs() < 1e-12);
    }
}

fn random_band_limited(rng: &mut StdRng, g: &std::sync::Arc<qlelab::sphere::SphereGrid>, degree: usize) -> ScalarField {
    let mut c = vec![0.0; g.coeff_count()];
    for v in c.iter_mut().take(coeff_count(degree)) {
        *v = rng.random_range(-1.0..1.0);
    }
    // unit L² norm on the round sphere
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= norm);
    ScalarField::from_coefficients(g.clone(), &c).unwrap()
}

#[test]
fn operator_identities_on_random_surfaces() {
    let g = make_grid(24).unwrap();
    let mut rng = StdRng::seed_from_u64(101);
    for _ in 0..5 {
        let x = common::random_convex_surface(&mut rng, &g, 1.0, 0.04);
        let h = x.metric();
        let f = random_band_limited(&mut rng, &g, 6);
        let u = random_band_limited(&mut rng, &g, 6);

        let lap_f = laplacian(&f, h).unwrap();
        assert!(integrate(&lap_f, h).unwrap().abs() < 1e-10);

        let prod: Vec<f64> = u.values().iter().zip(laplacian(&f, h).unwrap().values()).map(|(a, b)| a * b).collect();
        let lhs = integrate(&ScalarField::new(g.clone(), prod).unwrap(), h).unwrap();
        let dots = h.inner(&gradient(&u, h).unwrap(), &gradient(&f, h).unwrap());
        let rhs = integrate(&ScalarField::new(g.clone(), dots).unwrap(), h).unwrap();
        assert!((lhs + rhs).abs() <= 1e-8 * rhs.abs(), "{lhs} {rhs}");

        for k in 0..3 {
            let l = laplacian(&x.coordinate(k), h).unwrap();
            for i in 0..g.len() {
                let expected = -x.mean_curvature().values()[i] * x.normals()[i][k];
                assert!((l.values()[i] - expected).abs() < 1e-8);
            }
        }
        for (n, t) in x.normals().iter().zip(x.tangents()) {
            assert!(n.dot(&t[0]).abs() < 1e-10 && n.dot(&t[1]).abs() < 1e-10);
        }
    }
}

#[test]
fn rigid_motions_rotate_normals_and_preserve_invariants() {
    let g = make_grid(20).unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    let x = common::random_convex_surface(&mut rng, &g, 1.5, 0.04);
    let axis = Unit::new_normalize(common::random_vector(&mut rng, 1.0));
    let rot = Rotation3::from_axis_angle(&axis, 1.234);
    let shift = Vector3::new(0.3, -2.0, 1.0);
    let y = x.rigid_motion(rot.matrix(), &shift).unwrap();
    for i in 0..g.len() {
        assert!((rot * x.normals()[i] - y.normals()[i]).norm() < 1e-10);
        assert!((x.mean_curvature().values()[i] - y.mean_curvature().values()[i]).abs() < 1e-10);
        assert!((x.gauss_curvature().values()[i] - y.gauss_curvature().values()[i]).abs() < 1e-10);
        assert!((x.metric().sqrt_det()[i] - y.metric().sqrt_det()[i]).abs() < 1e-10);
    }
    assert!((y.centroid() - rot * x.centroid() - shift).norm() < 1e-10);
}

#[test]
fn spectral_convergence_of_area() {
    // error on a fixed non-polynomial surface decays with the band limit
    let s = {
        let mut c = vec![0.0; coeff_count(3)];
        c[6] = 0.05;
        c[12] = -0.03;
        c
    };
    let area = |l: usize| EmbeddedSurface::radial_perturbation(make_grid(l).unwrap(), 1.0, &s).unwrap().area();
    let reference = area(48);
    let errs: Vec<f64> = [8, 12, 16].iter().map(|&l| (area(l) - reference).abs()).collect();
    assert!(errs[2] < 1e-9);
    assert!(errs[1] < errs[0] || errs[0] < 1e-12);
}

/// Γ at positive half-integers and integers.
fn gamma_half(x: f64) -> f64 {
    if (x - 0.5).abs() < 1e-12 {
        PI.sqrt()
    } else if (x - 1.0).abs() < 1e-12 {
        1.0
    } else {
        (x - 1.0) * gamma_half(x - 1.0)
    }
}

/// `∫ xᵃ yᵇ zᶜ dΩ` over the unit sphere.
fn monomial_integral(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let h = |n: u32| (n as f64 + 1.0) / 2.0;
    2.0 * gamma_half(h(a)) * gamma_half(h(b)) * gamma_half(h(c)) / gamma_half(h(a) + h(b) + h(c))
}

#[test]
fn quadrature_is_exact_for_low_degree_polynomials() {
    let integrate_at = |l: usize, a: u32, b: u32, c: u32| {
        let g = make_grid(l).unwrap();
        let vals: Vec<f64> = (0..g.len())
            .map(|i| {
                let n = g.unit_normal(i);
                n[0].powi(a as i32) * n[1].powi(b as i32) * n[2].powi(c as i32)
            })
            .collect();
        vals.iter().zip(g.weights()).map(|(v, w)| v * w).sum::<f64>()
    };
    for a in 0..=8u32 {
        for b in 0..=(8 - a) {
            for c in 0..=(8 - a - b) {
                let exact = monomial_integral(a, b, c);
                let (lo, hi) = (integrate_at(8, a, b, c), integrate_at(16, a, b, c));
                assert!((lo - hi).abs() < 1e-12, "x^{a} y^{b} z^{c}");
                assert!((lo - exact).abs() < 1e-12, "x^{a} y^{b} z^{c}: {lo} vs {exact}");
            }
        }
    }
}
