//! Dilation covariance. Scaling lengths by c scales every eigenvalue by c⁻²,
//! which fixes how each regularized quantity must transform.

use proptest::prelude::*;
use regdet::heat::heat_integral;
use regdet::zeta::zeta_det;
use regdet::Surface;

fn scaled(model: &Surface, c: f64) -> Surface {
    match model.geometry() {
        regdet::Geometry::Sphere { radius } => Surface::sphere(c * radius).unwrap(),
        regdet::Geometry::RectTorus { l1, l2 } => Surface::torus(c * l1, c * l2).unwrap(),
    }
}

fn model(kind: usize) -> Surface {
    match kind {
        0 => Surface::sphere(1.0).unwrap(),
        _ => Surface::torus(1.0, 1.5).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    // ζ_c(s) = c^{2s} ζ(s) ⇒ ln det_c = ln det − 2 ln c · ζ(0)
    #[test]
    fn log_det_shifts_by_zeta_zero(kind in 0usize..2, c in 0.5f64..2.0, m_sq in 0.2f64..3.0) {
        let base = model(kind);
        let z = zeta_det(&base, m_sq, false, 1e-8).unwrap();
        let zc = zeta_det(&scaled(&base, c), m_sq / (c * c), false, 1e-8).unwrap();
        prop_assert!((zc.zeta0 - z.zeta0).abs() < 1e-8);
        let want = z.log_det - 2.0 * c.ln() * z.zeta0;
        prop_assert!((zc.log_det - want).abs() < 1e-7, "{} vs {}", zc.log_det, want);
    }

    // tr C_c^{1+s} = c^{2+2s} tr C^{1+s} ⇒ I_c = c²(I + 2 ln c · A/4π)
    #[test]
    fn heat_integral_picks_up_log_of_scale(kind in 0usize..2, c in 0.5f64..2.0, m_sq in 0.2f64..3.0) {
        let base = model(kind);
        let i = heat_integral(&base, m_sq, 1e-9).unwrap().value;
        let ic = heat_integral(&scaled(&base, c), m_sq / (c * c), 1e-9).unwrap().value;
        let want = c * c * (i + 2.0 * c.ln() * base.weyl_density());
        prop_assert!((ic - want).abs() < 1e-7 * c * c, "{} vs {}", ic, want);
    }
}
