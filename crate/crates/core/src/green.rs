//! Covariance-side quantities for C = (Δ + m₀²)⁻¹: the constant γ₀, the
//! Hilbert–Schmidt determinant det₂(1 + m₁²C), the mean diagonal finite part
//! C̄_f and independent Green's-function oracles.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::heat::heat_integral;
use crate::special::{bessel_k0, LegendreIter};
use crate::spectra::{geodesic_distance, spectrum, Geometry, SurfaceModel};
use crate::sum::NeumaierSum;
use crate::Scalar;

/// γ₀(m₀) = (ln(m₀/4) + γ)/2π; vanishes at m₀ = 4e^{−γ}.
pub fn gamma0<T: Scalar>(m0: T) -> Result<T> {
    require_positive("m0", m0)?;
    Ok(((m0 / T::lit(4.0)).ln() + T::euler_gamma()) / (T::lit(2.0) * T::PI()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Det2Result<T> {
    /// ln det₂ including the tail correction.
    pub log_value: T,
    /// Eigenvalue cutoff Λ.
    pub truncation: T,
    /// Σ_{λ≤Λ} mult·[ln(1+x) − x], the exact truncated log.
    pub truncated_log: T,
    pub tail_correction: T,
    /// Certified bound on |true tail − tail_correction|.
    pub tail_bound: T,
}

impl<T: Scalar> Det2Result<T> {
    pub fn value(&self) -> T {
        self.log_value.exp()
    }
}

/// ln(1+x) − x, accurate for small x.
pub(crate) fn log1p_minus<T: Scalar>(x: T) -> T {
    if x.abs() < T::lit(0.3) {
        // −x²/2 + x³/3 − …
        let mut acc = T::zero();
        let mut pow = x * x;
        let mut n = 2usize;
        loop {
            let term = pow / T::from_usize_lossy(n);
            acc = if n.is_multiple_of(2) { acc - term } else { acc + term };
            if term.abs() <= T::epsilon() * acc.abs() * T::lit(1e-2) || n > 60 {
                return acc;
            }
            pow = pow * x;
            n += 1;
        }
    } else {
        x.ln_1p() - x
    }
}

/// det₂(1 + m₁²C) with eigenvalues summed up to Λ and a Weyl-law tail.
pub fn det2<T: Scalar>(model: &SurfaceModel<T>, m0_sq: T, m1_sq: T, lambda_max: T) -> Result<Det2Result<T>> {
    require_positive("m0^2", m0_sq)?;
    if !(m1_sq >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "m1^2",
            requirement: ">= 0",
            value: m1_sq.to_f64().unwrap_or(f64::NAN),
        });
    }
    let lines = spectrum(model, lambda_max)?;
    let mut acc = NeumaierSum::new();
    for line in &lines {
        let x = m1_sq / (m0_sq + line.eigenvalue);
        acc.add(T::from_u64(line.multiplicity).unwrap() * log1p_minus(x));
    }
    let truncated_log = acc.value();
    if m1_sq == T::zero() {
        return Ok(Det2Result {
            log_value: T::zero(),
            truncation: lambda_max,
            truncated_log,
            tail_correction: T::zero(),
            tail_bound: T::zero(),
        });
    }
    let w = model.weyl_density();
    let (alpha, beta) = model.weyl_error_envelope();
    let u = m0_sq + lambda_max;
    let x = m1_sq / u;
    let m1_4 = m1_sq * m1_sq;
    let m1_6 = m1_4 * m1_sq;
    let lam = lambda_max.max(T::epsilon());
    let envelope = alpha * lam.sqrt() + beta;
    // −Σ x²/2 replaced by its Weyl integral
    let tail_correction = -m1_4 * w / (T::lit(2.0) * u);
    // 0 ≤ ln(1+x) − x + x²/2 ≤ x³/3, each sum compared with its integral
    let cubic = w * m1_6 / (T::lit(6.0) * u * u)
        + T::lit(2.0) * x * x * x / T::lit(3.0) * envelope
        + alpha * m1_6 / (T::lit(15.0) * lam.powf(T::lit(2.5)));
    let fluctuation = x * x * envelope + alpha * m1_4 / (T::lit(6.0) * lam.powf(T::lit(1.5)));
    Ok(Det2Result {
        log_value: truncated_log + tail_correction,
        truncation: lambda_max,
        truncated_log,
        tail_correction,
        tail_bound: cubic + fluctuation,
    })
}

/// [`det2`] with Λ doubled from 10³ until the tail bound is below `target`.
pub fn det2_auto<T: Scalar>(model: &SurfaceModel<T>, m0_sq: T, m1_sq: T, target: T) -> Result<Det2Result<T>> {
    require_positive("target", target)?;
    let mut lambda_max = T::lit(1e3).max(T::lit(100.0) * (m0_sq + m1_sq));
    // keep the eigenvalue count desk-sized (≈ 10⁶ modes)
    let cap = T::lit(4e6) / model.weyl_density();
    loop {
        let r = det2(model, m0_sq, m1_sq, lambda_max)?;
        if r.tail_bound <= target {
            return Ok(r);
        }
        if lambda_max * T::lit(2.0) > cap {
            return Err(Error::ToleranceNotReached {
                requested: target.to_f64().unwrap_or(f64::NAN),
                achieved: r.tail_bound.to_f64().unwrap_or(f64::NAN),
            });
        }
        lambda_max = lambda_max * T::lit(2.0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FinitePartSource {
    HeatIntegral,
    ImageSum,
    LegendreSeries,
}

/// Mean over the surface of the diagonal finite part C_f(x, x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FinitePart<T> {
    pub gamma0: T,
    pub cf_mean: T,
    pub abs_error_bound: T,
    pub source: FinitePartSource,
}

/// C̄_f = I/A + γ₀ with I the heat integral.
pub fn cf_mean<T: Scalar>(model: &SurfaceModel<T>, m0_sq: T) -> Result<FinitePart<T>> {
    require_positive("m0^2", m0_sq)?;
    let g0 = gamma0(m0_sq.sqrt())?;
    let hi = heat_integral(model, m0_sq, T::lit(1e-9))?;
    let area = model.area();
    Ok(FinitePart {
        gamma0: g0,
        cf_mean: hi.value / area + g0,
        abs_error_bound: hi.abs_error_bound / area,
        source: FinitePartSource::HeatIntegral,
    })
}

/// Torus C_f from the periodized free Green's function:
/// (ln 2 − γ)/2π + (1/2π) Σ′ K₀(m₀‖(aL1, bL2)‖).
pub fn torus_cf_image_sum<T: Scalar>(l1: T, l2: T, m0: T) -> Result<FinitePart<T>> {
    require_positive("side length L1", l1)?;
    require_positive("side length L2", l2)?;
    require_positive("m0", m0)?;
    let two_pi = T::lit(2.0) * T::PI();
    let (images, bound) = image_sum(l1, l2, m0, [T::zero(), T::zero()], true);
    Ok(FinitePart {
        gamma0: gamma0(m0)?,
        cf_mean: (T::LN_2() - T::euler_gamma()) / two_pi + images / two_pi,
        abs_error_bound: bound / two_pi + T::lit(64.0) * T::epsilon(),
        source: FinitePartSource::ImageSum,
    })
}

/// Σ K₀(m₀‖r + (aL1, bL2)‖) over the lattice, optionally skipping the origin,
/// with a bound on the dropped shells.
fn image_sum<T: Scalar>(l1: T, l2: T, m0: T, r: [T; 2], skip_origin: bool) -> (T, T) {
    // shells with m₀·dist ≥ 42 contribute < K₀(42) ≈ 1e-19 each
    let cutoff = T::lit(42.0);
    let lmin = l1.min(l2);
    let n = ((cutoff / (m0 * lmin)).ceil().to_usize().unwrap_or(0) + 1) as i64;
    let mut acc = NeumaierSum::new();
    for a in -n..=n {
        for b in -n..=n {
            if skip_origin && a == 0 && b == 0 {
                continue;
            }
            let dx = r[0] + T::from_i64(a).unwrap() * l1;
            let dy = r[1] + T::from_i64(b).unwrap() * l2;
            let z = m0 * (dx * dx + dy * dy).sqrt();
            if z < cutoff + m0 * (l1 + l2) {
                acc.add(bessel_k0(z));
            }
        }
    }
    // remaining lattice points have ‖·‖ ≥ ρ = n·L_min − |r|; compare with
    // the area integral (1/L1L2)∫_{ρ−d}^∞ K₀(m₀s) 2πs ds, d = cell diameter
    let rho = T::from_i64(n).unwrap() * lmin - (r[0].abs() + r[1].abs()) - (l1 * l1 + l2 * l2).sqrt();
    let z = m0 * rho.max(T::zero());
    let tail = two_pi_k0_moment(z) / (m0 * m0 * l1 * l2);
    (acc.value(), tail)
}

/// ∫_z^∞ K₀(u) 2πu du bounded via K₀(u) ≤ √(π/2u)e^{−u}.
fn two_pi_k0_moment<T: Scalar>(z: T) -> T {
    let z = z.max(T::one());
    T::lit(2.0) * T::PI() * (T::PI() / T::lit(2.0)).sqrt() * (z.sqrt() + T::one()) * (-z).exp() * T::lit(2.0)
}

const SPHERE_SERIES_TERMS: usize = 4000;

/// Sphere C_f from the Legendre series of the Green's function:
/// (1/4π)[1/μ − 1 − μS] + (1/2π) ln(2m₀R) with μ = m₀²R² and
/// S = Σ_{k≥1} (2k+1)/(k(k+1)(μ + k(k+1))).
pub fn sphere_cf_series<T: Scalar>(radius: T, m0: T) -> Result<FinitePart<T>> {
    require_positive("radius R", radius)?;
    require_positive("m0", m0)?;
    let mu = m0 * m0 * radius * radius;
    let f = |k: T| {
        let kk = k * (k + T::one());
        (T::lit(2.0) * k + T::one()) / (kk * (mu + kk))
    };
    let mut acc = NeumaierSum::new();
    for k in 1..=SPHERE_SERIES_TERMS {
        acc.add(f(T::from_usize_lossy(k)));
    }
    let kf = T::from_usize_lossy(SPHERE_SERIES_TERMS);
    let y = kf * (kf + T::one());
    // Σ_{k>K} f = ∫_K^∞ f − f(K)/2 + O(f′), ∫ = (1/μ) ln(1 + μ/Y)
    let tail = (mu / y).ln_1p() / mu - f(kf) / T::lit(2.0);
    let s = acc.value() + tail;
    let four_pi = T::lit(4.0) * T::PI();
    let cf = (mu.recip() - T::one() - mu * s) / four_pi + (T::lit(2.0) * m0 * radius).ln() / (T::lit(2.0) * T::PI());
    // |f′(K)| ≤ 6/K⁴
    let bound = mu * T::lit(6.0) / (kf * kf * kf * kf) / four_pi + T::lit(64.0) * T::epsilon();
    Ok(FinitePart {
        gamma0: gamma0(m0)?,
        cf_mean: cf,
        abs_error_bound: bound,
        source: FinitePartSource::LegendreSeries,
    })
}

/// Pointwise covariance C(x, y) = (Δ + m₀²)⁻¹(x, y) for points off the
/// diagonal (distance at least 10⁻² of the model's length scale).
///
/// Sphere points are ambient vectors of norm R; torus points are
/// coordinates in [0, L1) × [0, L2).
pub fn green_pointwise<T: Scalar>(model: &SurfaceModel<T>, m0: T, x: &[T], y: &[T]) -> Result<T> {
    require_positive("m0", m0)?;
    let d = geodesic_distance(model, x, y)?;
    match model.geometry() {
        Geometry::Sphere { radius } => {
            if d < T::lit(1e-2) * radius {
                return Err(Error::InvalidCoordinates("points closer than 1e-2 R".into()));
            }
            let cos = (d / radius).cos();
            let mu = m0 * m0 * radius * radius;
            // massless part in closed form, the 1/k³ remainder by direct sum
            let mut acc = NeumaierSum::new();
            for (k, p) in LegendreIter::new(cos).enumerate().skip(1).take(20_000) {
                let kf = T::from_usize_lossy(k);
                let kk = kf * (kf + T::one());
                acc.add((T::lit(2.0) * kf + T::one()) * p / (kk * (mu + kk)));
            }
            let log_part = -((T::one() - cos) / T::lit(2.0)).ln() - T::one();
            Ok((mu.recip() + log_part - mu * acc.value()) / (T::lit(4.0) * T::PI()))
        }
        Geometry::RectTorus { l1, l2 } => {
            if d < T::lit(1e-2) * l1.min(l2) {
                return Err(Error::InvalidCoordinates("points closer than 1e-2 L".into()));
            }
            let r = [x[0] - y[0], x[1] - y[1]];
            let (sum, _) = image_sum(l1, l2, m0, r, false);
            Ok(sum / (T::lit(2.0) * T::PI()))
        }
    }
}
