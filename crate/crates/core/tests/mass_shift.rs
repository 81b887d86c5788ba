//! The mass-shift identity det_ζ(Δ+m₀²+m₁²) = det_ζ(Δ+m₀²)·det₂(1+m₁²C)·e^{m₁²I}
//! across surfaces and masses, each factor from its own pipeline.

use proptest::prelude::*;
use regdet::anomaly::verify_thm2;
use regdet::green::det2_auto;
use regdet::heat::heat_integral;
use regdet::zeta::zeta_det;
use regdet::Surface;

fn surfaces() -> Vec<Surface> {
    vec![
        Surface::sphere(1.0).unwrap(),
        Surface::torus(1.0, 1.0).unwrap(),
        Surface::torus(1.0, 2.0).unwrap(),
    ]
}

#[test]
fn identity_holds_across_grid() {
    for model in surfaces() {
        for m0_sq in [0.5, 1.0, 4.0] {
            for m1_sq in [0.0, 1.0, 2.0] {
                let r = verify_thm2(&model, m0_sq, m1_sq, 1e-6).unwrap();
                assert!(r.pass, "{model} m0^2={m0_sq} m1^2={m1_sq}: {r:?}");
                assert!(r.rel_residual < 1e-6);
                assert!(r.error_budget < 1e-6);
            }
        }
    }
}

#[test]
fn factors_assemble_by_hand() {
    let model = Surface::torus(1.0, 2.0).unwrap();
    let (m0_sq, m1_sq) = (0.8, 1.7);
    let lhs = zeta_det(&model, m0_sq + m1_sq, false, 1e-9).unwrap().log_det;
    let base = zeta_det(&model, m0_sq, false, 1e-9).unwrap().log_det;
    let d2 = det2_auto(&model, m0_sq, m1_sq, 1e-8).unwrap().log_value;
    let i = heat_integral(&model, m0_sq, 1e-9).unwrap().value;
    assert!((lhs - (base + d2 + m1_sq * i)).abs() < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identity_on_random_tori(l1 in 0.6f64..1.6, l2 in 0.6f64..1.6, m0_sq in 0.3f64..3.0, m1_sq in 0.0f64..3.0) {
        let model = Surface::torus(l1, l2).unwrap();
        let r = verify_thm2(&model, m0_sq, m1_sq, 1e-6).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn identity_on_random_spheres(radius in 0.5f64..2.0, m0_sq in 0.3f64..3.0, m1_sq in 0.0f64..3.0) {
        let model = Surface::sphere(radius).unwrap();
        let r = verify_thm2(&model, m0_sq, m1_sq, 1e-6).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}
