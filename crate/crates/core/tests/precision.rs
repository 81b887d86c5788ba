//! The engine is generic over the scalar; single precision tracks double
//! precision to roughly its own epsilon.

use regdet::green::det2;
use regdet::heat::heat_trace;
use regdet::spectra::{spectrum, SurfaceModel};

#[test]
fn heat_trace_in_f32() {
    let s32 = SurfaceModel::<f32>::sphere(1.0).unwrap();
    let s64 = SurfaceModel::<f64>::sphere(1.0).unwrap();
    for t in [0.05, 0.5, 2.0] {
        let a = heat_trace(&s32, 1.0f32, t as f32, 1e-3).unwrap().value as f64;
        let b = heat_trace(&s64, 1.0, t, 1e-10).unwrap().value;
        assert!((a / b - 1.0).abs() < 1e-5, "t={t}: {a} vs {b}");
    }
}

#[test]
fn truncated_det2_in_f32() {
    let t32 = SurfaceModel::<f32>::torus(1.0, 1.0).unwrap();
    let t64 = SurfaceModel::<f64>::torus(1.0, 1.0).unwrap();
    assert_eq!(spectrum(&t32, 500.0).unwrap().len(), spectrum(&t64, 500.0).unwrap().len());
    let a = det2(&t32, 1.0f32, 2.0, 500.0).unwrap().truncated_log as f64;
    let b = det2(&t64, 1.0, 2.0, 500.0).unwrap().truncated_log;
    assert!((a - b).abs() < 1e-5 * b.abs(), "{a} vs {b}");
}
