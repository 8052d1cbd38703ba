mod common;

use std::sync::{Arc, OnceLock};

use nalgebra::Vector3;
use proptest::prelude::*;
use qlelab::energy::{
    e_tilde_rho_omega, phi, tau, BoostVector, CausalType, EnergyFunctional, FourVectorW, PhiInput, NULL_TOLERANCE,
};
use qlelab::spacetime::SurfaceData;
use qlelab::sphere::{gradient, make_grid, EmbeddedSurface, SphereGrid, TangentField};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn grid() -> &'static Arc<SphereGrid> {
    static G: OnceLock<Arc<SphereGrid>> = OnceLock::new();
    G.get_or_init(|| make_grid(10).unwrap())
}

fn configuration(seed: u64) -> (EmbeddedSurface, SurfaceData) {
    common::random_configuration(&mut StdRng::seed_from_u64(seed), grid())
}

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    prop::array::uniform3(-3.0..3.0f64).prop_map(Vector3::from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gradient_of_tau_is_bounded_by_a(seed in any::<u64>(), a in vec3()) {
        let (x, _) = configuration(seed);
        let t0 = BoostVector::from_vector(&a).unwrap();
        let grad = gradient(&tau(&x, &t0), x.metric()).unwrap();
        let sup = x.metric().norm_squared(&grad).into_iter().fold(0.0, f64::max);
        prop_assert!(sup <= a.norm_squared() + 1e-10);
    }

    #[test]
    fn energy_splits_and_obeys_the_estimates(seed in any::<u64>(), a in vec3()) {
        let (x, sd) = configuration(seed);
        let f = EnergyFunctional::new(&x, &sd).unwrap();
        let rep = f.report(&BoostVector::from_vector(&a).unwrap()).unwrap();
        prop_assert!((rep.energy - rep.e_tilde - rep.boost_term).abs() <= 1e-10);
        prop_assert!(rep.within_bounds(1e-9), "{:?}", rep);
        // lower estimate on the boost-free part
        let gamma = (1.0 + a.norm_squared()).sqrt();
        prop_assert!(rep.e_tilde >= gamma * rep.m_ly - 1e-9 * gamma.max(rep.e_tilde.abs()));
    }

    #[test]
    fn both_energy_paths_agree(seed in any::<u64>(), a in vec3()) {
        prop_assume!(a.norm() > 1e-6);
        let (x, sd) = configuration(seed);
        let f = EnergyFunctional::new(&x, &sd).unwrap();
        let direct = f.e_tilde(&a).unwrap();
        let alt = e_tilde_rho_omega(&x, &sd, a.norm(), &a.normalize()).unwrap();
        prop_assert!((direct - alt).abs() <= 1e-8 * direct.abs().max(1.0));
    }

    #[test]
    fn equal_mean_curvatures_make_the_boost_free_part_vanish(seed in any::<u64>(), a in vec3()) {
        let (x, _) = configuration(seed);
        let sd = SurfaceData::synthetic(
            x.metric().clone(),
            x.mean_curvature().clone(),
            common::random_alpha(&mut StdRng::seed_from_u64(seed ^ 1), &x, 0.5),
        ).unwrap();
        let f = EnergyFunctional::new(&x, &sd).unwrap();
        prop_assert!(f.e_tilde(&a).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn phi_is_maximal_at_one(rho in 1e-3..10.0f64, s in -1.0..1.0f64, t in 1e-3..20.0f64) {
        let f = s * rho;
        let top = phi(&PhiInput { t: 1.0, f, rho }).unwrap();
        let value = phi(&PhiInput { t, f, rho }).unwrap();
        prop_assert!(value <= top + 1e-12 * top.abs().max(1.0));
    }

    #[test]
    fn causal_type_follows_the_minkowski_norm(m in -2.0..2.0f64, v in vec3()) {
        let w = FourVectorW::new(m, v);
        let q = -m * m + v.norm_squared();
        let expected = if q.abs() <= NULL_TOLERANCE {
            CausalType::Null
        } else if q > 0.0 {
            CausalType::Spacelike
        } else if m > 0.0 {
            CausalType::TimelikeFuture
        } else {
            CausalType::TimelikePast
        };
        prop_assert_eq!(w.causal_type, expected);
        prop_assert!((w.norm_squared() - q).abs() <= 1e-12 * q.abs().max(1.0));
    }

    #[test]
    fn zero_connection_gives_zero_momentum(seed in any::<u64>()) {
        let (x, sd) = configuration(seed);
        let quiet = SurfaceData::synthetic(x.metric().clone(), sd.hnorm().clone(), TangentField::zero(grid().clone())).unwrap();
        let f = EnergyFunctional::new(&x, &quiet).unwrap();
        prop_assert_eq!(f.four_vector().v(), Vector3::zeros());
    }
}
