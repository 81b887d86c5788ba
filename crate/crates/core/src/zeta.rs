//! Spectral zeta functions ζ_E(s) = Σ mult·(λ + m²)^{−s} by Mellin
//! continuation of the heat trace, zeta-regularized determinants, and the
//! Dirichlet traces tr (Δ+m²)^{−1−s} with their Laurent fits at s = 0.
//!
//! With θ̃ the heat trace minus the excluded zero modes and a₀′ = a₀ − n₀,
//! splitting the Mellin integral at t* gives
//!
//! ```text
//! Γ(s)ζ(s) = a₋₁ t*^{s−1}/(s−1) + a₀′ t*^s/s + F(s) + G(s)
//! ζ(0)  = a₀′
//! ζ′(0) = −a₋₁/t* + F(0) + G(0) + a₀′ (ln t* + γ)
//! ```
//!
//! where F(0) = ∫₀^{t*} (θ̃ − a₋₁/t − a₀′) dt/t and G(0) = ∫_{t*}^∞ θ̃ dt/t.

use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::fit::{extrapolate_to_zero, least_squares};
use crate::heat::{analytic_segment, heat_coeffs, rounding_bound, HeatKernel, MellinSplit};
use crate::quad::{LogQuadrature, QuadratureProfile};
use crate::special::{gamma, power_tail_integral};
use crate::spectra::{Geometry, SurfaceModel};
use crate::sum::NeumaierSum;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaResult<T> {
    pub zeta0: T,
    pub zeta_prime0: T,
    /// exp(−ζ′(0)).
    pub det_zeta: T,
    /// ln det_ζ = −ζ′(0); preferred over `det_zeta` when composing identities.
    pub log_det: T,
    /// Certified absolute bound on ζ′(0), hence relative bound on det_ζ.
    pub err_bound: T,
    pub excluded_zero_modes: u64,
    pub profile: QuadratureProfile,
}

/// det_ζ(Δ + m²), or det′_ζ when the constant mode is excluded.
///
/// Requires m² > 0, or m² = 0 with `exclude_zero_mode`. `tol` ≤ 1e-4 is the
/// absolute target on ζ′(0).
pub fn zeta_det<T: Scalar>(model: &SurfaceModel<T>, mass2: T, exclude_zero_mode: bool, tol: T) -> Result<ZetaResult<T>> {
    zeta_det_with(model, mass2, exclude_zero_mode, tol, &MellinSplit::default())
}

pub fn zeta_det_with<T: Scalar>(
    model: &SurfaceModel<T>,
    mass2: T,
    exclude_zero_mode: bool,
    tol: T,
    split: &MellinSplit<T>,
) -> Result<ZetaResult<T>> {
    check_mass(mass2, exclude_zero_mode)?;
    if !(tol > T::zero() && tol <= T::lit(1e-4)) {
        return Err(Error::InvalidParameter {
            name: "tol",
            requirement: "in (0, 1e-4]",
            value: tol.to_f64().unwrap_or(f64::NAN),
        });
    }
    require_positive("split point t*", split.split)?;
    let kernel = HeatKernel::new(*model, mass2, exclude_zero_mode);
    let coeffs = heat_coeffs(model, mass2)?;
    let n0 = u64::from(exclude_zero_mode);
    let a0p = coeffs.a_0 - T::from_u64(n0).unwrap();
    let t_star = split.split;
    let t_lo = split.resolve_t_lo(model, mass2);
    let seg_tol = tol * T::lit(0.05);
    let quad = LogQuadrature::default();
    let remainder = |t: T| kernel.reduced(t) - a0p;

    // ∫₀^{t_lo} R(t)/t dt with R = a₁t + a₂t² + a₃t³ + …: fit the three
    // coefficients to R at t_lo, t_lo/2, t_lo/4 and integrate exactly; the
    // cubic correction to the two-point estimate 2R(t_lo/2) bounds the
    // neglected quartic term
    let a = remainder(t_lo);
    let b = T::lit(2.0) * remainder(t_lo * T::lit(0.5));
    let c = T::lit(4.0) * remainder(t_lo * T::lit(0.25));
    let cubic = T::lit(8.0) / T::lit(3.0) * (a - T::lit(3.0) * b + T::lit(2.0) * c);
    let small = b + cubic / T::lit(12.0);
    let eps_lo = rounding_bound(&coeffs, t_lo);
    let small_bound = (cubic / T::lit(12.0)).abs() + T::lit(16.0) * eps_lo;

    let near = quad.integrate("F(0): remainder/t", |t| remainder(t) / t, t_lo, t_star, seg_tol)?;
    let mu = kernel.decay_rate();
    let (t_hi, tail) = split.resolve_t_hi(&kernel, |t, theta| theta / (mu * t), seg_tol)?;
    let far = quad.integrate("G(0): theta/t", |t| kernel.theta(t) / t, t_star, t_hi, seg_tol)?;

    let zeta_prime0 = -coeffs.a_minus1 / t_star + small + near.value + far.value + a0p * (t_star.ln() + T::euler_gamma());
    // systematic rounding in the near-field integrand, ∫ ε a₋₁/t² dt
    let near_rounding = eps_lo;
    let err_bound = small_bound + near.error + near_rounding + far.error + tail;
    if err_bound > tol {
        return Err(Error::ToleranceNotReached {
            requested: tol.to_f64().unwrap_or(f64::NAN),
            achieved: err_bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut profile = QuadratureProfile::default();
    profile.push(analytic_segment("small-t expansion", T::zero(), t_lo, small_bound));
    profile.push(near.profile);
    profile.push(far.profile);
    profile.push(analytic_segment("tail bound", t_hi, T::infinity(), tail));
    Ok(ZetaResult {
        zeta0: a0p,
        zeta_prime0,
        det_zeta: (-zeta_prime0).exp(),
        log_det: -zeta_prime0,
        err_bound,
        excluded_zero_modes: n0,
        profile,
    })
}

fn check_mass<T: Scalar>(mass2: T, exclude_zero_mode: bool) -> Result<()> {
    if mass2 < T::zero() || mass2.is_nan() {
        return Err(Error::InvalidParameter {
            name: "m^2",
            requirement: ">= 0",
            value: mass2.to_f64().unwrap_or(f64::NAN),
        });
    }
    if mass2 == T::zero() && !exclude_zero_mode {
        return Err(Error::ZeroMode(
            "zeta function of the massless Laplacian needs the zero mode excluded".into(),
        ));
    }
    Ok(())
}

/// ζ_E(s) for real s > 0, s ≠ 1, by direct numerical Mellin continuation.
///
/// Unlike [`zeta_det`], only the 1/t singularity is subtracted
/// analytically; the constant term near t = 0 is extracted numerically, so
/// ζ(0) obtained by extrapolating this in s is an independent check of the
/// heat coefficient a₀. Returns (value, error estimate).
pub fn spectral_zeta<T: Scalar>(model: &SurfaceModel<T>, mass2: T, exclude_zero_mode: bool, s: T) -> Result<(T, T)> {
    check_mass(mass2, exclude_zero_mode)?;
    require_positive("s", s)?;
    if (s - T::one()).abs() < T::lit(1e-6) {
        return Err(Error::InvalidParameter {
            name: "s",
            requirement: "away from the pole at 1",
            value: s.to_f64().unwrap_or(f64::NAN),
        });
    }
    let kernel = HeatKernel::new(*model, mass2, exclude_zero_mode);
    let a_minus1 = model.weyl_density();
    let split = MellinSplit::default();
    let (t_star, t_lo) = (split.split, split.resolve_t_lo(model, mass2));
    let quad = LogQuadrature::default();
    let tol = T::lit(1e-13);

    // linear model r(t) ≈ r₀ + r₁t on [0, t_lo] from two samples
    let (r1s, r2s, r4s) = (
        kernel.reduced(t_lo),
        kernel.reduced(t_lo * T::lit(0.5)),
        kernel.reduced(t_lo * T::lit(0.25)),
    );
    let slope = (r1s - r2s) / (t_lo * T::lit(0.5));
    let r0 = r1s - slope * t_lo;
    let small = r0 * t_lo.powf(s) / s + slope * t_lo.powf(s + T::one()) / (s + T::one());
    let curvature = (r1s - T::lit(2.0) * r2s + r4s).abs();
    let small_err = curvature * t_lo.powf(s) / s + T::lit(64.0) * T::epsilon() * a_minus1 * t_lo.powf(s - T::one()) / s;

    let near = quad.integrate("near", |t| t.powf(s - T::one()) * kernel.reduced(t), t_lo, t_star, tol)?;
    let mu = kernel.decay_rate();
    let (t_hi, tail) = split.resolve_t_hi(&kernel, |t, theta| t.powf(s - T::one()) * theta / mu, tol)?;
    let far = quad.integrate("far", |t| t.powf(s - T::one()) * kernel.theta(t), t_star, t_hi, tol)?;
    let pole = a_minus1 * t_star.powf(s - T::one()) / (s - T::one());
    let inv_gamma = gamma(s).recip();
    let value = inv_gamma * (pole + small + near.value + far.value);
    let err = inv_gamma.abs() * (small_err + near.error + far.error + tail);
    Ok((value, err))
}

/// ζ(0) from [`spectral_zeta`] on s ∈ {4, 3, 2, 1}·10⁻³, extrapolated to 0.
pub fn zeta0_by_continuation<T: Scalar>(model: &SurfaceModel<T>, mass2: T, exclude_zero_mode: bool) -> Result<T> {
    let s: Vec<T> = (1..=4).map(|k| T::lit(1e-3) * T::from_usize_lossy(k)).collect();
    let values = s
        .iter()
        .map(|&si| spectral_zeta(model, mass2, exclude_zero_mode, si).map(|v| v.0))
        .collect::<Result<Vec<_>>>()?;
    extrapolate_to_zero(&s, &values)
}

/// Dirichlet trace tr (Δ+m²)^{−1−s} with its certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirichletTrace<T> {
    pub value: T,
    /// Analytic tail beyond the direct sum (Euler–Maclaurin).
    pub tail: T,
    pub bound: T,
}

const SPHERE_DIRECT_TERMS: usize = 4000;
const TORUS_INNER_TERMS: usize = 2000;
const TORUS_OUTER_TERMS: usize = 2000;

/// Σ mult·(m² + λ)^{−1−s} for s > 0, m² > 0.
pub fn dirichlet_trace<T: Scalar>(model: &SurfaceModel<T>, mass2: T, s: T) -> Result<DirichletTrace<T>> {
    require_positive("s", s)?;
    require_positive("m^2", mass2)?;
    Ok(match model.geometry() {
        Geometry::Sphere { radius } => sphere_dirichlet(radius, mass2, s),
        Geometry::RectTorus { l1, l2 } => torus_dirichlet(l1, l2, mass2, s),
    })
}

fn sphere_dirichlet<T: Scalar>(radius: T, mass2: T, s: T) -> DirichletTrace<T> {
    let r2 = radius * radius;
    let nu = T::one() + s;
    let g = |k: T| mass2 + k * (k + T::one()) / r2;
    let f = |k: T| (T::lit(2.0) * k + T::one()) * g(k).powf(-nu);
    let mut acc = NeumaierSum::new();
    for k in 0..=SPHERE_DIRECT_TERMS {
        acc.add(f(T::from_usize_lossy(k)));
    }
    let kk = T::from_usize_lossy(SPHERE_DIRECT_TERMS);
    // Σ_{k>K} f = ∫_K^∞ f − f(K)/2 − f′(K)/12 + R, and ∫_K^∞ f = R² g(K)^{−s}/s exactly
    let w = T::lit(2.0) * kk + T::one();
    let fprime = T::lit(2.0) * g(kk).powf(-nu) - nu * w * w * g(kk).powf(-nu - T::one()) / r2;
    let tail = r2 * g(kk).powf(-s) / s - f(kk) / T::lit(2.0) - fprime / T::lit(12.0);
    // f ~ 2R^{2ν} k^{−2ν+1}: |f‴| ≲ (2ν−1)(2ν)(2ν+1) f/k³, remainder ≤ ∫|f‴|/720
    let p = T::lit(2.0) * nu - T::one();
    let remainder = T::lit(2.0) * p * (p + T::one()) * (p + T::lit(2.0)) * f(kk) / (kk * kk * kk) * kk / (T::lit(720.0) * p.max(T::lit(0.5)));
    let value = acc.value() + tail;
    DirichletTrace {
        value,
        tail,
        bound: remainder + T::lit(16.0) * T::epsilon() * value,
    }
}

fn torus_dirichlet<T: Scalar>(l1: T, l2: T, mass2: T, s: T) -> DirichletTrace<T> {
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let alpha = four_pi2 / (l1 * l1);
    let beta = four_pi2 / (l2 * l2);
    let nu = T::one() + s;
    let two = T::lit(2.0);

    // rows with c_p ≥ 40.5β have exponentially small Poisson corrections
    // (e^{−2π√(c_p/β)} ≤ e^{−40}) and are summed in closed form
    let c_switch = beta * T::lit(40.5);
    let mut p0 = 0usize;
    while mass2 + alpha * T::from_usize_lossy(p0 * p0) < c_switch {
        p0 += 1;
    }

    let mut total = NeumaierSum::new();
    let mut tails = NeumaierSum::new();
    let mut bound = T::zero();
    let q = T::from_usize_lossy(TORUS_INNER_TERMS);
    for p in 0..p0 {
        let c = mass2 + alpha * T::from_usize_lossy(p * p);
        let h = |x: T| (c + beta * x * x).powf(-nu);
        let mut row = NeumaierSum::new();
        row.add(h(T::zero()));
        for j in 1..=TORUS_INNER_TERMS {
            row.add(two * h(T::from_usize_lossy(j)));
        }
        let hq = c + beta * q * q;
        let hprime = -nu * two * beta * q * hq.powf(-nu - T::one());
        let tail = two * (power_tail_integral(c, beta, nu, q) - h(q) / two - hprime / T::lit(12.0));
        // |h‴| ≲ (2ν)(2ν+1)(2ν+2) h/x³
        let p2 = two * nu;
        let rem = two * p2 * (p2 + T::one()) * (p2 + two) * h(q) / (q * q) / (T::lit(720.0) * (p2 + T::one()));
        let weight = if p == 0 { T::one() } else { two };
        total.add(weight * (row.value() + tail));
        tails.add(weight * tail);
        bound = bound + weight * rem;
    }

    // closed-form rows: Σ_q (c + βq²)^{−ν} ≈ √(π/β) Γ(ν−½)/Γ(ν) c^{½−ν}
    let prefactor = (T::PI() / beta).sqrt() * gamma(nu - T::lit(0.5)) / gamma(nu);
    let e = nu - T::lit(0.5);
    let row = |p: T| prefactor * (mass2 + alpha * p * p).powf(-e);
    let p1 = p0.max(1) + TORUS_OUTER_TERMS;
    for p in p0.max(1)..=p1 {
        total.add(two * row(T::from_usize_lossy(p)));
    }
    let pp = T::from_usize_lossy(p1);
    let cp = mass2 + alpha * pp * pp;
    let rprime = -e * two * alpha * pp * prefactor * cp.powf(-e - T::one());
    let outer_tail = two * (prefactor * power_tail_integral(mass2, alpha, e, pp) - row(pp) / two - rprime / T::lit(12.0));
    total.add(outer_tail);
    tails.add(outer_tail);
    let p2 = two * e;
    bound = bound + two * p2 * (p2 + T::one()) * (p2 + two) * row(pp) / (pp * pp) / (T::lit(720.0) * (p2 + T::one()));
    if p0 == 0 {
        // the p = 0 row itself was counted twice above
        let zero_row = prefactor * mass2.powf(-e);
        total.add(zero_row);
        tails.add(T::zero());
    }

    // Poisson corrections for the closed-form rows, with
    // K_μ(z) ≤ √(π/2z) e^{−z}(1 + 1/z) for μ ≤ 3/2
    let first = p0.max(1);
    let c = mass2 + alpha * T::from_usize_lossy(first * first);
    let z = two * T::PI() * (c / beta).sqrt();
    let per_row = two * (c / beta).sqrt() * c.powf(-nu) * two * T::PI().sqrt() / gamma(nu)
        * (z / two).powf(e)
        * (T::PI() / (two * z)).sqrt()
        * (-z).exp()
        * (T::one() + z.recip())
        * two;
    let decay = T::one() - (-two * T::PI() * (alpha / beta).sqrt()).exp();
    bound = bound + two * per_row / decay;

    let value = total.value();
    DirichletTrace {
        value,
        tail: tails.value(),
        bound: bound + T::lit(64.0) * T::epsilon() * value,
    }
}

/// Least-squares Laurent fit c₋₁/s + c₀ + c₁s of the Dirichlet trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentFit<T> {
    pub residue: T,
    pub finite_part: T,
    pub linear: T,
    pub fit_diagnostics: FitDiagnostics<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics<T> {
    pub s_grid: Vec<T>,
    pub values: Vec<T>,
    pub residual_rms: T,
}

/// Default grid for [`mainlemma_fit`].
pub fn default_s_grid<T: Scalar>() -> Vec<T> {
    [0.2, 0.1, 0.05, 0.025].iter().map(|&s| T::lit(s)).collect()
}

pub fn mainlemma_fit<T: Scalar>(model: &SurfaceModel<T>, mass2: T, s_grid: &[T]) -> Result<LaurentFit<T>> {
    if s_grid.len() < 4 {
        return Err(Error::DegenerateGrid("Laurent fit needs at least 4 s values".into()));
    }
    if s_grid.iter().any(|&s| !(s > T::zero() && s <= T::lit(0.5))) {
        return Err(Error::DegenerateGrid("s values must lie in (0, 0.5]".into()));
    }
    for (i, a) in s_grid.iter().enumerate() {
        if s_grid[..i].contains(a) {
            return Err(Error::DegenerateGrid("repeated s value".into()));
        }
    }
    let values = s_grid
        .iter()
        .map(|&s| dirichlet_trace(model, mass2, s).map(|d| d.value))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<T>> = s_grid.iter().map(|&s| vec![s.recip(), T::one(), s]).collect();
    let (c, residual_rms) = least_squares(&rows, &values)?;
    Ok(LaurentFit {
        residue: c[0],
        finite_part: c[1],
        linear: c[2],
        fit_diagnostics: FitDiagnostics {
            s_grid: s_grid.to_vec(),
            values,
            residual_rms,
        },
    })
}

/// Finite part of tr (Δ+m²)^{−1−s} at s = 0 with the residue pinned to
/// A/4π: the remainder tr − (A/4π)/s is analytic at 0 and extrapolated by
/// polynomial interpolation over `s_grid`.
pub fn dirichlet_finite_part<T: Scalar>(model: &SurfaceModel<T>, mass2: T, s_grid: &[T]) -> Result<T> {
    if s_grid.len() < 3 {
        return Err(Error::DegenerateGrid("extrapolation needs at least 3 s values".into()));
    }
    let residue = model.weyl_density();
    let values = s_grid
        .iter()
        .map(|&s| dirichlet_trace(model, mass2, s).map(|d| d.value - residue / s))
        .collect::<Result<Vec<_>>>()?;
    extrapolate_to_zero(s_grid, &values)
}
