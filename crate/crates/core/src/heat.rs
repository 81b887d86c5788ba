//! Heat traces θ(t) = tr e^{−tE} for E = Δ + m², their small-t coefficients
//! and the finite-part heat integral.
//!
//! Small-t behaviour: θ(t) = a₋₁/t + a₀ + O(t) with a₋₁ = A/4π and
//! a₀ = χ/6 − m²A/4π. The heat integral is the finite part at s = 0 of
//! Γ(1+s)⁻¹ ∫₀^∞ t^s θ(t) dt, i.e. the constant term c₀ of
//! tr (Δ+m²)^{−1−s} = a₋₁/s + c₀ + O(s). With a split point t* it reads
//!
//! ```text
//! c₀ = a₋₁(γ + ln t*) + ∫₀^{t*} (θ − a₋₁/t) dt + ∫_{t*}^∞ θ dt .
//! ```

use serde::Serialize;

use crate::error::{require_nonnegative, require_positive, Error, Result};
use crate::fit::least_squares;
use crate::quad::{LogQuadrature, QuadratureProfile, SegmentProfile};
use crate::spectra::{Geometry, SurfaceModel};
use crate::Scalar;

/// Exponent beyond which series terms are dropped (e^{−41} ≈ 1.6e-18).
const TERM_CUTOFF: f64 = 41.0;
const SPHERE_MAX_TERMS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatCoeffs<T> {
    /// Coefficient of 1/t.
    pub a_minus1: T,
    /// Constant term.
    pub a_0: T,
}

pub fn heat_coeffs<T: Scalar>(model: &SurfaceModel<T>, mass2: T) -> Result<HeatCoeffs<T>> {
    require_nonnegative("m^2", mass2)?;
    let density = model.weyl_density();
    Ok(HeatCoeffs {
        a_minus1: density,
        a_0: T::from_i32(model.euler_char()).unwrap() / T::lit(6.0) - mass2 * density,
    })
}

/// How the torus theta factors are summed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HeatMethod {
    /// Per factor, whichever of the two forms converges faster.
    Auto,
    /// Eigenvalue sums.
    Direct,
    /// Poisson-dual lattice image sums (torus only).
    ImageSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatTrace<T> {
    pub value: T,
    pub abs_bound: T,
    pub terms: usize,
    pub method: HeatMethod,
}

/// θ(t) for E = Δ + m² to relative accuracy `rel_tol` ∈ (0, 1e-3].
pub fn heat_trace<T: Scalar>(model: &SurfaceModel<T>, mass2: T, t: T, rel_tol: T) -> Result<HeatTrace<T>> {
    heat_trace_with(model, mass2, t, rel_tol, HeatMethod::Auto)
}

pub fn heat_trace_with<T: Scalar>(
    model: &SurfaceModel<T>,
    mass2: T,
    t: T,
    rel_tol: T,
    method: HeatMethod,
) -> Result<HeatTrace<T>> {
    require_positive("t", t)?;
    require_nonnegative("m^2", mass2)?;
    if !(rel_tol > T::zero() && rel_tol <= T::lit(1e-3)) {
        return Err(Error::InvalidParameter {
            name: "rel_tol",
            requirement: "in (0, 1e-3]",
            value: rel_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kernel = HeatKernel::new(*model, mass2, false).with_method(method)?;
    let eval = kernel.eval(t);
    let rounding = eval.theta * T::lit(8.0) * T::epsilon() * T::from_usize_lossy(eval.terms.max(1)).sqrt();
    let abs_bound = eval.tail_bound + rounding;
    if abs_bound > rel_tol * eval.theta {
        return Err(Error::ToleranceNotReached {
            requested: rel_tol.to_f64().unwrap_or(f64::NAN),
            achieved: (abs_bound / eval.theta).to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(HeatTrace {
        value: eval.theta,
        abs_bound,
        terms: eval.terms,
        method: kernel.method,
    })
}

/// One evaluation of the (possibly zero-mode-reduced) heat trace.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HeatEval<T> {
    /// θ̃(t) = θ_E(t) − n₀ e^{−m²t}.
    pub theta: T,
    /// θ̃(t) − a₋₁/t, evaluated without catastrophic cancellation where the
    /// Poisson form is available.
    pub reduced: T,
    pub tail_bound: T,
    pub terms: usize,
}

/// Heat trace of Δ + m², optionally with the constant mode removed.
#[derive(Debug, Clone, Copy)]
pub struct HeatKernel<T> {
    model: SurfaceModel<T>,
    mass2: T,
    exclude_zero_mode: bool,
    method: HeatMethod,
}

impl<T: Scalar> HeatKernel<T> {
    pub fn new(model: SurfaceModel<T>, mass2: T, exclude_zero_mode: bool) -> Self {
        Self {
            model,
            mass2,
            exclude_zero_mode,
            method: HeatMethod::Auto,
        }
    }

    pub fn with_method(mut self, method: HeatMethod) -> Result<Self> {
        if method == HeatMethod::ImageSum && matches!(self.model.geometry(), Geometry::Sphere { .. }) {
            return Err(Error::Unsupported("image-sum heat trace is only available on the torus".into()));
        }
        self.method = method;
        Ok(self)
    }

    /// Smallest exponent rate in θ̃: e^{−μ t} dominates at large t.
    pub fn decay_rate(&self) -> T {
        if self.exclude_zero_mode {
            self.mass2 + self.model.spectral_gap()
        } else {
            self.mass2
        }
    }

    pub fn theta(&self, t: T) -> T {
        self.eval(t).theta
    }

    pub fn reduced(&self, t: T) -> T {
        self.eval(t).reduced
    }

    pub(crate) fn eval(&self, t: T) -> HeatEval<T> {
        let n0 = if self.exclude_zero_mode { T::one() } else { T::zero() };
        let a_minus1 = self.model.weyl_density();
        let massless = match self.model.geometry() {
            Geometry::Sphere { radius } => sphere_massless(radius, t, self.exclude_zero_mode),
            Geometry::RectTorus { l1, l2 } => torus_massless(l1, l2, t, n0, self.method),
        };
        let decay = (-self.mass2 * t).exp();
        HeatEval {
            theta: decay * massless.theta,
            reduced: decay * massless.excess + a_minus1 * (-self.mass2 * t).exp_m1() / t,
            tail_bound: decay * massless.tail_bound,
            terms: massless.terms,
        }
    }
}

struct Massless<T> {
    /// θ_Δ − n₀
    theta: T,
    /// θ_Δ − n₀ − a₋₁/t
    excess: T,
    tail_bound: T,
    terms: usize,
}

fn sphere_massless<T: Scalar>(radius: T, t: T, exclude: bool) -> Massless<T> {
    let x = t / (radius * radius);
    let threshold = T::lit(TERM_CUTOFF) + (T::one() + x.recip()).ln();
    let mut acc = crate::sum::NeumaierSum::new();
    let mut k = if exclude { 1usize } else { 0 };
    let tail_bound;
    loop {
        let kf = T::from_usize_lossy(k);
        let exponent = x * kf * (kf + T::one());
        acc.add((T::lit(2.0) * kf + T::one()) * (-exponent).exp());
        // Σ_{k>K} (2k+1) e^{−x k(k+1)} ≤ e^{−x K(K+1)} / x
        if exponent > threshold || k >= SPHERE_MAX_TERMS {
            tail_bound = (-exponent).exp() / x;
            break;
        }
        k += 1;
    }
    let theta = acc.value();
    Massless {
        theta,
        excess: theta - x.recip(),
        tail_bound,
        terms: k + 1,
    }
}

struct Theta1<T> {
    /// θ₁ − 1
    minus_one: T,
    /// (prefactor L/√(4πt), image excess S) when evaluated in Poisson form
    poisson: Option<(T, T)>,
    tail_bound: T,
    terms: usize,
}

/// Σ_{p∈ℤ} e^{−4π²p²t/L²}.
fn theta1<T: Scalar>(l: T, t: T, method: HeatMethod) -> Theta1<T> {
    let rate = T::lit(4.0) * T::PI() * T::PI() * t / (l * l);
    let use_direct = match method {
        HeatMethod::Direct => true,
        HeatMethod::ImageSum => false,
        HeatMethod::Auto => rate >= T::PI(),
    };
    let cutoff = T::lit(TERM_CUTOFF);
    if use_direct {
        let (sum, bound, terms) = gaussian_tail_sum(rate, cutoff);
        Theta1 {
            minus_one: sum,
            poisson: None,
            tail_bound: bound,
            terms,
        }
    } else {
        let dual = l * l / (T::lit(4.0) * t);
        let (s, bound, terms) = gaussian_tail_sum(dual, cutoff);
        let prefactor = l / (T::lit(4.0) * T::PI() * t).sqrt();
        Theta1 {
            minus_one: prefactor * (T::one() + s) - T::one(),
            poisson: Some((prefactor, s)),
            tail_bound: prefactor * bound,
            terms,
        }
    }
}

/// 2 Σ_{n≥1} e^{−r n²} with a bound on the dropped terms.
fn gaussian_tail_sum<T: Scalar>(rate: T, cutoff: T) -> (T, T, usize) {
    let mut acc = crate::sum::NeumaierSum::new();
    let mut n = 1usize;
    loop {
        let nf = T::from_usize_lossy(n);
        let exponent = rate * nf * nf;
        acc.add(T::lit(2.0) * (-exponent).exp());
        if exponent > cutoff {
            // remaining terms: geometric domination by ratio e^{−r(2n+1)}
            let next = rate * (nf + T::one()) * (nf + T::one());
            let ratio = (-rate * (T::lit(2.0) * nf + T::lit(3.0))).exp();
            let bound = T::lit(2.0) * (-next).exp() / (T::one() - ratio);
            return (acc.value(), bound, n);
        }
        n += 1;
    }
}

fn torus_massless<T: Scalar>(l1: T, l2: T, t: T, n0: T, method: HeatMethod) -> Massless<T> {
    let f1 = theta1(l1, t, method);
    let f2 = theta1(l2, t, method);
    let (d1, d2) = (f1.minus_one, f2.minus_one);
    let theta = d1 * d2 + d1 + d2 + (T::one() - n0);
    let weyl = l1 * l2 / (T::lit(4.0) * T::PI() * t);
    let excess = match (f1.poisson, f2.poisson) {
        (Some((p1, s1)), Some((p2, s2))) => p1 * p2 * (s1 + s2 + s1 * s2) - n0,
        _ => theta - weyl,
    };
    let tail_bound = f1.tail_bound * (d2 + T::one()) + f2.tail_bound * (d1 + T::one()) + f1.tail_bound * f2.tail_bound;
    Massless {
        theta,
        excess,
        tail_bound,
        terms: f1.terms + f2.terms,
    }
}

/// Split points for the t-integrals: [0, t_lo] handled analytically,
/// [t_lo, split] and [split, t_hi] by quadrature, [t_hi, ∞) by a tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MellinSplit<T> {
    pub split: T,
    pub t_lo: Option<T>,
    pub t_hi: Option<T>,
}

impl<T: Scalar> Default for MellinSplit<T> {
    fn default() -> Self {
        Self {
            split: T::one(),
            t_lo: None,
            t_hi: None,
        }
    }
}

impl<T: Scalar> MellinSplit<T> {
    pub fn at(split: T) -> Self {
        Self {
            split,
            ..Self::default()
        }
    }

    pub(crate) fn resolve_t_lo(&self, model: &SurfaceModel<T>, mass2: T) -> T {
        self.t_lo.unwrap_or_else(|| {
            let mut scale = model.weyl_density().min(T::one());
            if mass2 > T::zero() {
                scale = scale.min(mass2.recip());
            }
            T::lit(1e-4) * scale.min(self.split)
        })
    }

    /// Upper cutoff where the remaining ∫ θ̃(t) w(t) dt is below `target`.
    pub(crate) fn resolve_t_hi<F: Fn(T, T) -> T>(&self, kernel: &HeatKernel<T>, tail_bound_at: F, target: T) -> Result<(T, T)> {
        if let Some(t_hi) = self.t_hi {
            let bound = tail_bound_at(t_hi, kernel.theta(t_hi));
            return Ok((t_hi, bound));
        }
        let mut t_hi = (self.split * T::lit(2.0)).max(T::lit(4.0) / kernel.decay_rate());
        loop {
            let bound = tail_bound_at(t_hi, kernel.theta(t_hi));
            if bound <= target {
                return Ok((t_hi, bound));
            }
            if t_hi > T::lit(1e12) {
                return Err(Error::ToleranceNotReached {
                    requested: target.to_f64().unwrap_or(f64::NAN),
                    achieved: bound.to_f64().unwrap_or(f64::NAN),
                });
            }
            t_hi = t_hi * T::lit(2.0);
        }
    }
}

/// Finite-part heat integral with its certified error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatIntegral<T> {
    pub value: T,
    pub abs_error_bound: T,
    pub quadrature_profile: QuadratureProfile,
}

/// Finite part c₀ of ∫₀^∞ (θ_E(t) − A/4πt) dt; see the module docs.
pub fn heat_integral<T: Scalar>(model: &SurfaceModel<T>, mass2: T, abs_tol: T) -> Result<HeatIntegral<T>> {
    heat_integral_with(model, mass2, abs_tol, &MellinSplit::default())
}

pub fn heat_integral_with<T: Scalar>(
    model: &SurfaceModel<T>,
    mass2: T,
    abs_tol: T,
    split: &MellinSplit<T>,
) -> Result<HeatIntegral<T>> {
    if !(mass2 > T::zero()) {
        return Err(Error::ZeroMode(
            "heat integral needs m^2 > 0 (Δ has a zero mode); use the massless zeta-determinant pathway".into(),
        ));
    }
    if !(abs_tol > T::zero() && abs_tol <= T::lit(1e-4)) {
        return Err(Error::InvalidParameter {
            name: "abs_tol",
            requirement: "in (0, 1e-4]",
            value: abs_tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kernel = HeatKernel::new(*model, mass2, false);
    let coeffs = heat_coeffs(model, mass2)?;
    let quad = LogQuadrature::default();
    let t_star = split.split;
    let t_lo = split.resolve_t_lo(model, mass2);
    let seg_tol = abs_tol * T::lit(0.05);

    // [0, t_lo]: reduced(t) = a₀ + a₁t + a₂t² + …; the midpoint rule is
    // exact to first order and trapezoid − midpoint bounds its error
    let r_lo = kernel.reduced(t_lo);
    let r_mid = kernel.reduced(t_lo * T::lit(0.5));
    let small = t_lo * r_mid;
    let small_bound = (t_lo * ((coeffs.a_0 + r_lo) * T::lit(0.5) - r_mid)).abs() + rounding_bound(&coeffs, t_lo) * t_lo;

    let near = quad.integrate("near: theta - a_{-1}/t", |t| kernel.reduced(t), t_lo, t_star, seg_tol)?;
    let mu = kernel.decay_rate();
    // ∫_{t_hi}^∞ θ dt ≤ θ(t_hi)/μ
    let (t_hi, tail_bound) = split.resolve_t_hi(&kernel, |_, theta| theta / mu, seg_tol)?;
    let far = quad.integrate("far: theta", |t| kernel.theta(t), t_star, t_hi, seg_tol)?;

    let value = coeffs.a_minus1 * (T::euler_gamma() + t_star.ln()) + small + near.value + far.value;
    // systematic rounding in the near-field integrand, ∫ ε a₋₁/t dt
    let near_rounding = rounding_bound(&coeffs, t_lo) * t_lo * (t_star / t_lo).ln();
    let abs_error_bound = small_bound + near.error + near_rounding + far.error + tail_bound;
    if abs_error_bound > abs_tol {
        return Err(Error::ToleranceNotReached {
            requested: abs_tol.to_f64().unwrap_or(f64::NAN),
            achieved: abs_error_bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut profile = QuadratureProfile::default();
    profile.push(analytic_segment("small-t expansion", T::zero(), t_lo, small_bound));
    profile.push(near.profile);
    profile.push(far.profile);
    profile.push(analytic_segment("tail bound", t_hi, T::infinity(), tail_bound));
    Ok(HeatIntegral {
        value,
        abs_error_bound,
        quadrature_profile: profile,
    })
}

/// Worst-case rounding in θ − a₋₁/t at time t: the spectral sum carries
/// O(ε) relative error per term, the subtraction cancels ~a₋₁/t.
pub(crate) fn rounding_bound<T: Scalar>(coeffs: &HeatCoeffs<T>, t: T) -> T {
    T::lit(8.0) * T::epsilon() * coeffs.a_minus1 / t
}

pub(crate) fn analytic_segment<T: Scalar>(label: &str, lo: T, hi: T, bound: T) -> SegmentProfile {
    SegmentProfile {
        label: label.to_string(),
        t_lo: lo.to_f64().unwrap_or(f64::NAN),
        t_hi: hi.to_f64().unwrap_or(f64::NAN),
        panels: 0,
        order: 0,
        evaluations: 0,
        error_estimate: bound.to_f64().unwrap_or(f64::NAN),
    }
}

/// Least-squares fit of θ(t) − a₋₁/t ≈ c₀ + c₁t + c₂t² over small t.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantTermFit<T> {
    pub constant: T,
    pub linear: T,
    pub quadratic: T,
    pub residual_rms: T,
    pub t_grid: Vec<T>,
}

pub fn fit_constant_term<T: Scalar>(
    model: &SurfaceModel<T>,
    mass2: T,
    t_grid: &[T],
    method: HeatMethod,
) -> Result<ConstantTermFit<T>> {
    if t_grid.len() < 4 {
        return Err(Error::DegenerateGrid("constant-term fit needs at least 4 t values".into()));
    }
    for &t in t_grid {
        require_positive("t", t)?;
    }
    let kernel = HeatKernel::new(*model, mass2, false).with_method(method)?;
    let rows: Vec<Vec<T>> = t_grid.iter().map(|&t| vec![T::one(), t, t * t]).collect();
    let y: Vec<T> = t_grid.iter().map(|&t| kernel.reduced(t)).collect();
    let (c, residual_rms) = least_squares(&rows, &y)?;
    Ok(ConstantTermFit {
        constant: c[0],
        linear: c[1],
        quadratic: c[2],
        residual_rms,
        t_grid: t_grid.to_vec(),
    })
}
