//! Model surfaces and their exact Laplace spectra.
//!
//! Two homogeneous closed surfaces are supported: the round sphere of radius
//! R (λ = k(k+1)/R², multiplicity 2k+1) and the flat rectangular torus
//! ℝ²/(L1ℤ × L2ℤ) (λ = 4π²(p²/L1² + q²/L2²) over lattice points).

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SurfaceKind {
    Sphere,
    RectTorus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Geometry<T> {
    Sphere { radius: T },
    RectTorus { l1: T, l2: T },
}

/// A closed model surface with its derived area and Euler characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceModel<T> {
    geometry: Geometry<T>,
    area: T,
    euler_char: i32,
}

impl<T: Scalar> SurfaceModel<T> {
    pub fn sphere(radius: T) -> Result<Self> {
        require_positive("radius R", radius)?;
        Ok(Self {
            geometry: Geometry::Sphere { radius },
            area: T::lit(4.0) * T::PI() * radius * radius,
            euler_char: 2,
        })
    }

    pub fn torus(l1: T, l2: T) -> Result<Self> {
        require_positive("side length L1", l1)?;
        require_positive("side length L2", l2)?;
        Ok(Self {
            geometry: Geometry::RectTorus { l1, l2 },
            area: l1 * l2,
            euler_char: 0,
        })
    }

    pub fn new(geometry: Geometry<T>) -> Result<Self> {
        match geometry {
            Geometry::Sphere { radius } => Self::sphere(radius),
            Geometry::RectTorus { l1, l2 } => Self::torus(l1, l2),
        }
    }

    pub fn kind(&self) -> SurfaceKind {
        match self.geometry {
            Geometry::Sphere { .. } => SurfaceKind::Sphere,
            Geometry::RectTorus { .. } => SurfaceKind::RectTorus,
        }
    }

    pub fn geometry(&self) -> Geometry<T> {
        self.geometry
    }

    pub fn area(&self) -> T {
        self.area
    }

    pub fn euler_char(&self) -> i32 {
        self.euler_char
    }

    /// Weyl density A/4π: leading heat coefficient and spectral residue.
    pub fn weyl_density(&self) -> T {
        self.area / (T::lit(4.0) * T::PI())
    }

    /// Smallest nonzero eigenvalue of Δ.
    pub fn spectral_gap(&self) -> T {
        match self.geometry {
            Geometry::Sphere { radius } => T::lit(2.0) / (radius * radius),
            Geometry::RectTorus { l1, l2 } => {
                let l = l1.max(l2);
                T::lit(4.0) * T::PI() * T::PI() / (l * l)
            }
        }
    }

    /// Envelope e(λ) ≥ |N(λ') − (A/4π)λ'| for all λ' ≥ λ up to growth in √λ,
    /// returned as (α, β) with e(λ) = α√λ + β.
    ///
    /// Sphere: between levels k(k+1) ≤ λR² < (k+1)(k+2) the error lies in
    /// (−(k+1), k+1], and k + 1 ≤ R√λ + 1. Torus: lattice points of an
    /// ellipse with semi-axes a_i = L_i√λ/2π; the error is at most the number
    /// of unit cells meeting the boundary, ≤ 4(P + 2) with perimeter
    /// P ≤ 4(a₁ + a₂).
    pub(crate) fn weyl_error_envelope(&self) -> (T, T) {
        match self.geometry {
            Geometry::Sphere { radius } => (radius, T::lit(1.0)),
            Geometry::RectTorus { l1, l2 } => (T::lit(8.0) * (l1 + l2) / T::PI(), T::lit(8.0)),
        }
    }
}

/// Build a surface from a kind and its geometric parameters
/// (`[R]` for the sphere, `[L1, L2]` for the torus).
pub fn make_surface<T: Scalar>(kind: SurfaceKind, params: &[T]) -> Result<SurfaceModel<T>> {
    match (kind, params) {
        (SurfaceKind::Sphere, [r]) => SurfaceModel::sphere(*r),
        (SurfaceKind::RectTorus, [l1, l2]) => SurfaceModel::torus(*l1, *l2),
        _ => Err(Error::InvalidParameter {
            name: "parameter count",
            requirement: "1 for a sphere, 2 for a torus",
            value: params.len() as f64,
        }),
    }
}

impl<T: Scalar> fmt::Display for SurfaceModel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.geometry {
            Geometry::Sphere { radius } => write!(f, "sphere:R={radius}"),
            Geometry::RectTorus { l1, l2 } => write!(f, "torus:L1={l1},L2={l2}"),
        }
    }
}

/// Parses `sphere:R=<float>` and `torus:L1=<float>,L2=<float>`.
impl<T: Scalar> FromStr for SurfaceModel<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::SurfaceSpec(s.to_string());
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let mut fields = Vec::new();
        for part in rest.split(',') {
            let (key, val) = part.split_once('=').ok_or_else(bad)?;
            let val: f64 = val.trim().parse().map_err(|_| bad())?;
            fields.push((key.trim(), T::lit(val)));
        }
        match (kind.trim(), fields.as_slice()) {
            ("sphere", [("R", r)]) => Self::sphere(*r),
            ("torus", [("L1", l1), ("L2", l2)]) => Self::torus(*l1, *l2),
            _ => Err(bad()),
        }
    }
}

/// One eigenvalue of Δ with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralLine<T> {
    pub eigenvalue: T,
    pub multiplicity: u64,
}

/// All spectral lines with λ ≤ `lambda_max`, strictly increasing.
pub fn spectrum<T: Scalar>(model: &SurfaceModel<T>, lambda_max: T) -> Result<Vec<SpectralLine<T>>> {
    require_nonnegative("lambda_max", lambda_max)?;
    Ok(match model.geometry {
        Geometry::Sphere { radius } => sphere_lines(radius, lambda_max),
        Geometry::RectTorus { l1, l2 } => torus_lines(l1, l2, lambda_max),
    })
}

fn sphere_lines<T: Scalar>(radius: T, lambda_max: T) -> Vec<SpectralLine<T>> {
    let r2 = radius * radius;
    (0u64..)
        .map(|k| SpectralLine {
            eigenvalue: T::from_u64(k * (k + 1)).unwrap() / r2,
            multiplicity: 2 * k + 1,
        })
        .take_while(|line| line.eigenvalue <= lambda_max)
        .collect()
}

struct LatticeClass<T> {
    p: u64,
    q: u64,
    eigenvalue: T,
    weight: u64,
}

fn torus_lines<T: Scalar>(l1: T, l2: T, lambda_max: T) -> Vec<SpectralLine<T>> {
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let (a, b) = (four_pi2 / (l1 * l1), four_pi2 / (l2 * l2));
    let mut classes = Vec::new();
    let mut p = 0u64;
    loop {
        let pf = T::from_u64(p).unwrap();
        if a * pf * pf > lambda_max {
            break;
        }
        let mut q = 0u64;
        loop {
            let qf = T::from_u64(q).unwrap();
            let eigenvalue = a * pf * pf + b * qf * qf;
            if eigenvalue > lambda_max {
                break;
            }
            let weight = if p > 0 { 2 } else { 1 } * if q > 0 { 2 } else { 1 };
            classes.push(LatticeClass { p, q, eigenvalue, weight });
            q += 1;
        }
        p += 1;
    }
    classes.sort_by(|x, y| x.eigenvalue.partial_cmp(&y.eigenvalue).unwrap().then(x.p.cmp(&y.p)));

    // Classes whose floating values nearly coincide are grouped by exact
    // comparison of p²L2² + q²L1², computed from the binary representation
    // of the side lengths.
    let key = ExactKey::new(l1, l2);
    let mut lines = Vec::new();
    let mut start = 0;
    while start < classes.len() {
        let base = classes[start].eigenvalue;
        let window = base.abs() * T::lit(1e-10);
        let mut end = start + 1;
        while end < classes.len() && classes[end].eigenvalue - base <= window {
            end += 1;
        }
        if end - start == 1 {
            let c = &classes[start];
            lines.push(SpectralLine {
                eigenvalue: c.eigenvalue,
                multiplicity: c.weight,
            });
        } else {
            let mut cluster: Vec<(BigUint, &LatticeClass<T>)> =
                classes[start..end].iter().map(|c| (key.of(c.p, c.q), c)).collect();
            cluster.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.p.cmp(&y.1.p)));
            let mut i = 0;
            while i < cluster.len() {
                let mut j = i + 1;
                let mut mult = cluster[i].1.weight;
                while j < cluster.len() && cluster[j].0 == cluster[i].0 {
                    mult += cluster[j].1.weight;
                    j += 1;
                }
                lines.push(SpectralLine {
                    eigenvalue: cluster[i].1.eigenvalue,
                    multiplicity: mult,
                });
                i = j;
            }
        }
        start = end;
    }
    lines
}

/// Exact integer key proportional to λ(p, q) = 4π²(p²/L1² + q²/L2²).
struct ExactKey {
    /// L1² and L2², rescaled by a common power of two to integers.
    l1_sq: BigUint,
    l2_sq: BigUint,
}

impl ExactKey {
    fn new<T: Scalar>(l1: T, l2: T) -> Self {
        let (m1, e1, _) = l1.integer_decode();
        let (m2, e2, _) = l2.integer_decode();
        let emin = e1.min(e2);
        let shift = |m: u64, e: i16| BigUint::from(m) << (e - emin) as usize;
        let s1 = shift(m1, e1);
        let s2 = shift(m2, e2);
        Self {
            l1_sq: &s1 * &s1,
            l2_sq: &s2 * &s2,
        }
    }

    fn of(&self, p: u64, q: u64) -> BigUint {
        let p2 = BigUint::from(p) * p;
        let q2 = BigUint::from(q) * q;
        p2 * &self.l2_sq + q2 * &self.l1_sq
    }
}

/// Total number of eigenfunctions represented by `lines`.
pub fn counting_function<T>(lines: &[SpectralLine<T>]) -> u64 {
    lines.iter().map(|l| l.multiplicity).sum()
}

/// Geodesic distance between two points.
///
/// Sphere points are ambient vectors of norm R; torus points are pairs in
/// the fundamental domain [0, L1] × [0, L2].
pub fn geodesic_distance<T: Scalar>(model: &SurfaceModel<T>, x: &[T], y: &[T]) -> Result<T> {
    match model.geometry {
        Geometry::Sphere { radius } => {
            let (x, y) = (sphere_point(radius, x)?, sphere_point(radius, y)?);
            let dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
            let cross = [
                x[1] * y[2] - x[2] * y[1],
                x[2] * y[0] - x[0] * y[2],
                x[0] * y[1] - x[1] * y[0],
            ];
            let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            Ok(radius * cross_norm.atan2(dot))
        }
        Geometry::RectTorus { l1, l2 } => {
            let (x, y) = (torus_point(l1, l2, x)?, torus_point(l1, l2, y)?);
            let mut best = T::infinity();
            for i in -1i32..=1 {
                for j in -1i32..=1 {
                    let dx = x[0] - y[0] + T::from_i32(i).unwrap() * l1;
                    let dy = x[1] - y[1] + T::from_i32(j).unwrap() * l2;
                    best = best.min(dx.hypot(dy));
                }
            }
            Ok(best)
        }
    }
}

fn sphere_point<T: Scalar>(radius: T, x: &[T]) -> Result<[T; 3]> {
    let [a, b, c] = x else {
        return Err(Error::InvalidCoordinates(format!("sphere point needs 3 components, got {}", x.len())));
    };
    let norm = (*a * *a + *b * *b + *c * *c).sqrt();
    if !norm.is_finite() || (norm - radius).abs() > radius * T::lit(1e-6) {
        return Err(Error::InvalidCoordinates(format!(
            "sphere point has norm {norm}, expected radius {radius}"
        )));
    }
    Ok([*a, *b, *c])
}

fn torus_point<T: Scalar>(l1: T, l2: T, x: &[T]) -> Result<[T; 2]> {
    let [a, b] = x else {
        return Err(Error::InvalidCoordinates(format!("torus point needs 2 components, got {}", x.len())));
    };
    let inside = |v: T, l: T| v >= T::zero() && v <= l;
    if !(inside(*a, l1) && inside(*b, l2)) {
        return Err(Error::InvalidCoordinates(format!(
            "torus point ({a}, {b}) outside fundamental domain [0,{l1}]x[0,{l2}]"
        )));
    }
    Ok([*a, *b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn derived_fields() {
        let s = SurfaceModel::sphere(2.0).unwrap();
        assert!((s.area() - 16.0 * PI).abs() < 1e-12);
        assert_eq!(s.euler_char(), 2);
        let t = SurfaceModel::<f64>::torus(1.0, 2.0).unwrap();
        assert_eq!(t.area(), 2.0);
        assert_eq!(t.euler_char(), 0);
        assert_eq!(make_surface(SurfaceKind::RectTorus, &[1.0, 2.0]).unwrap(), t);
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let err = SurfaceModel::sphere(0.0f64).unwrap_err();
        assert!(err.to_string().contains("radius R must be positive"), "{err}");
        assert!(SurfaceModel::torus(1.0, -2.0f64).unwrap_err().to_string().contains("L2"));
        assert!(SurfaceModel::sphere(f64::NAN).is_err());
    }

    #[test]
    fn parses_surface_specs() {
        let s: SurfaceModel<f64> = "sphere:R=1".parse().unwrap();
        assert_eq!(s, SurfaceModel::sphere(1.0).unwrap());
        let t: SurfaceModel<f64> = "torus:L1=1,L2=2.5".parse().unwrap();
        assert_eq!(t, SurfaceModel::torus(1.0, 2.5).unwrap());
        assert_eq!(t.to_string(), "torus:L1=1,L2=2.5");
        assert!("sphere:R=0".parse::<SurfaceModel<f64>>().unwrap_err().to_string().contains("R"));
        assert!(matches!("cube:R=1".parse::<SurfaceModel<f64>>(), Err(Error::SurfaceSpec(_))));
        assert!(matches!("torus:L1=1".parse::<SurfaceModel<f64>>(), Err(Error::SurfaceSpec(_))));
    }

    #[test]
    fn sphere_low_lines() {
        let s = SurfaceModel::sphere(1.0).unwrap();
        let lines = spectrum(&s, 6.0).unwrap();
        let got: Vec<(f64, u64)> = lines.iter().map(|l| (l.eigenvalue, l.multiplicity)).collect();
        assert_eq!(got, vec![(0.0, 1), (2.0, 3), (6.0, 5)]);
    }

    #[test]
    fn torus_low_lines() {
        let t = SurfaceModel::torus(1.0, 1.0).unwrap();
        let lines = spectrum(&t, 4.0 * PI * PI).unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!((lines[0].eigenvalue, lines[0].multiplicity), (0.0, 1));
        assert!((lines[1].eigenvalue - 4.0 * PI * PI).abs() < 1e-12);
        assert_eq!(lines[1].multiplicity, 4);
    }

    #[test]
    fn torus_accidental_degeneracy_is_exact() {
        // 5² = 3² + 4²: (5,0),(3,4),(4,3) and sign variants → 4 + 8 + 8 = 12
        let t = SurfaceModel::torus(1.0, 1.0).unwrap();
        let lines = spectrum(&t, 4.0 * PI * PI * 25.0 * (1.0 + 1e-12)).unwrap();
        let last = lines.last().unwrap();
        assert_eq!(last.multiplicity, 12);
        assert_eq!(counting_function(&lines), (-5i64..=5).flat_map(|p| (-5i64..=5).map(move |q| p * p + q * q)).filter(|&n| n <= 25).count() as u64);
        // 1×2 torus: λ ∝ p² + q²/4, so (1,0) and (0,2) coincide
        let t = SurfaceModel::<f64>::torus(1.0, 2.0).unwrap();
        let lines = spectrum(&t, 4.0 * PI * PI * 1.0001).unwrap();
        let top = lines.last().unwrap();
        assert_eq!(top.multiplicity, 4, "{lines:?}");
    }

    #[test]
    fn spectrum_monotone_with_zero_mode() {
        for model in [SurfaceModel::sphere(1.3).unwrap(), SurfaceModel::torus(1.0, 1.7).unwrap()] {
            let lines = spectrum(&model, 2000.0).unwrap();
            assert_eq!((lines[0].eigenvalue, lines[0].multiplicity), (0.0, 1));
            assert!(lines.windows(2).all(|w| w[0].eigenvalue < w[1].eigenvalue));
            assert!(lines.iter().all(|l| l.multiplicity >= 1));
        }
    }

    #[test]
    fn weyl_law_sphere() {
        let s = SurfaceModel::sphere(1.0).unwrap();
        let lambda_max = 1.0e4;
        let n = counting_function(&spectrum(&s, lambda_max).unwrap()) as f64;
        assert!(n >= 1.0e4);
        let weyl = s.weyl_density() * lambda_max;
        assert!((n / weyl - 1.0).abs() < 0.05, "N = {n}, Weyl = {weyl}");
    }

    #[test]
    fn weyl_law_torus() {
        let t = SurfaceModel::<f64>::torus(1.0, 2.0).unwrap();
        let lambda_max = 1.0e5;
        let n = counting_function(&spectrum(&t, lambda_max).unwrap()) as f64;
        assert!(n >= 1.0e4);
        assert!((n / (t.weyl_density() * lambda_max) - 1.0).abs() < 0.05);
    }

    #[test]
    fn sphere_scaling_covariance() {
        let a = spectrum(&SurfaceModel::sphere(1.0).unwrap(), 2500.0).unwrap();
        let b = spectrum(&SurfaceModel::sphere(2.0).unwrap(), 2500.0 / 4.0).unwrap();
        assert!(a.len() >= 50);
        for (x, y) in a.iter().zip(&b).take(50) {
            assert_eq!(x.eigenvalue / 4.0, y.eigenvalue);
            assert_eq!(x.multiplicity, y.multiplicity);
        }
    }

    #[test]
    fn works_in_single_precision() {
        let s = SurfaceModel::sphere(1.0f32).unwrap();
        assert_eq!(spectrum(&s, 6.0f32).unwrap().len(), 3);
        let t: SurfaceModel<f32> = "torus:L1=1,L2=1".parse().unwrap();
        assert_eq!(spectrum(&t, 40.0f32).unwrap()[1].multiplicity, 4);
    }

    #[test]
    fn distances() {
        let s = SurfaceModel::sphere(1.0).unwrap();
        let d = geodesic_distance(&s, &[0.0, 0.0, 1.0], &[0.0, 0.0, -1.0]).unwrap();
        assert!((d - PI).abs() < 1e-15);
        let s3 = SurfaceModel::sphere(3.0).unwrap();
        assert_eq!(geodesic_distance(&s3, &[3.0, 0.0, 0.0], &[3.0, 0.0, 0.0]).unwrap(), 0.0);
        let t = SurfaceModel::<f64>::torus(1.0, 1.0).unwrap();
        let d = geodesic_distance(&t, &[0.0, 0.0], &[0.6, 0.0]).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
        assert!(geodesic_distance(&t, &[0.0, 0.0], &[1.5, 0.0]).is_err());
        assert!(geodesic_distance(&s, &[0.0, 0.0, 2.0], &[0.0, 0.0, 1.0]).is_err());
        assert!(geodesic_distance(&s, &[0.0, 1.0], &[0.0, 0.0, 1.0]).is_err());
    }

    fn sphere_pt(theta: f64, phi: f64, r: f64) -> Vec<f64> {
        vec![r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos()]
    }

    proptest! {
        #[test]
        fn sphere_metric_axioms(a in (0.0..PI, 0.0..2.0*PI), b in (0.0..PI, 0.0..2.0*PI), c in (0.0..PI, 0.0..2.0*PI)) {
            let s = SurfaceModel::sphere(1.5).unwrap();
            let (x, y, z) = (sphere_pt(a.0, a.1, 1.5), sphere_pt(b.0, b.1, 1.5), sphere_pt(c.0, c.1, 1.5));
            let dxy = geodesic_distance(&s, &x, &y).unwrap();
            let dyx = geodesic_distance(&s, &y, &x).unwrap();
            prop_assert!((dxy - dyx).abs() < 1e-12);
            let dxz = geodesic_distance(&s, &x, &z).unwrap();
            let dzy = geodesic_distance(&s, &z, &y).unwrap();
            prop_assert!(dxy <= dxz + dzy + 1e-12);
            prop_assert!(dxy <= 1.5 * PI + 1e-12);
        }

        #[test]
        fn torus_metric_axioms(x in (0.0..1.0, 0.0..2.0), y in (0.0..1.0, 0.0..2.0), z in (0.0..1.0, 0.0..2.0)) {
            let t = SurfaceModel::<f64>::torus(1.0, 2.0).unwrap();
            let (x, y, z) = ([x.0, x.1], [y.0, y.1], [z.0, z.1]);
            let dxy = geodesic_distance(&t, &x, &y).unwrap();
            prop_assert!((dxy - geodesic_distance(&t, &y, &x).unwrap()).abs() < 1e-15);
            prop_assert!(dxy <= geodesic_distance(&t, &x, &z).unwrap() + geodesic_distance(&t, &z, &y).unwrap() + 1e-12);
            prop_assert!(dxy <= 0.5 * (1.0f64 + 4.0).sqrt() + 1e-12);
        }
    }
}
