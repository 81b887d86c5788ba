//! Truncated Gaussian free field in the eigenbasis of Δ, Wick-ordered mass
//! terms and a Monte-Carlo check of the det₂ change-of-measure formula.
//!
//! At a sharp cutoff Λ the field is a finite vector of independent centred
//! Gaussians φ_k with Var φ_k = 1/(m² + λ_k), and
//!
//! ```text
//! E_{m₀}[exp(−½ m₁² W_C)] = Π_{λ≤Λ} ((1 + x_k) e^{−x_k})^{−1/2},  x_k = m₁²/(m₀² + λ_k)
//! ```
//!
//! holds exactly, so it can be tested statistically.
//!
//! Random streams: sample `i` lives in chunk `i / CHUNK_SIZE`, and each chunk
//! draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `chunk`. Results
//! therefore do not depend on how chunks are scheduled across threads.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{require_positive, Error, Result};
use crate::green::{cf_mean, log1p_minus};
use crate::spectra::{spectrum, SurfaceModel};
use crate::sum::NeumaierSum;
use crate::Scalar;

pub const CHUNK_SIZE: usize = 4096;

/// Eigenvalue of every retained coefficient (lines expanded by multiplicity).
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable<T> {
    pub eigenvalues: Vec<T>,
    pub area: T,
}

impl<T: Scalar> ModeTable<T> {
    pub fn new(model: &SurfaceModel<T>, lambda_max: T) -> Result<Self> {
        let lines = spectrum(model, lambda_max)?;
        if lines.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "lambda_max",
                requirement: "large enough to cover at least 2 spectral lines",
                value: lambda_max.to_f64().unwrap_or(f64::NAN),
            });
        }
        let eigenvalues = lines
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.eigenvalue, l.multiplicity as usize))
            .collect();
        Ok(Self {
            eigenvalues,
            area: model.area(),
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSample<T> {
    pub coeffs: Vec<T>,
    #[serde(skip)]
    pub modes: Arc<ModeTable<T>>,
    pub mass2: T,
    pub seed: u64,
    /// RNG stream (chunk index) the sample was drawn from.
    pub stream: u64,
    /// Global sample index.
    pub index: u64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn draw<T: Scalar>(rng: &mut ChaCha8Rng, scales: &[T], out: &mut [T]) {
    for (c, &s) in out.iter_mut().zip(scales) {
        let z: f64 = rng.sample(StandardNormal);
        *c = T::lit(z) * s;
    }
}

fn std_devs<T: Scalar>(modes: &ModeTable<T>, mass2: T) -> Vec<T> {
    modes.eigenvalues.iter().map(|&l| (mass2 + l).sqrt().recip()).collect()
}

/// Sequential stream of samples; identical to the chunked parallel draws.
pub struct FieldStream<T> {
    modes: Arc<ModeTable<T>>,
    scales: Vec<T>,
    mass2: T,
    seed: u64,
    next: u64,
    n: u64,
    rng: Option<ChaCha8Rng>,
}

impl<T: Scalar> Iterator for FieldStream<T> {
    type Item = FieldSample<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.n {
            return None;
        }
        let chunk = self.next / CHUNK_SIZE as u64;
        if self.next.is_multiple_of(CHUNK_SIZE as u64) || self.rng.is_none() {
            self.rng = Some(chunk_rng(self.seed, chunk));
        }
        let mut coeffs = vec![T::zero(); self.scales.len()];
        draw(self.rng.as_mut().unwrap(), &self.scales, &mut coeffs);
        let sample = FieldSample {
            coeffs,
            modes: Arc::clone(&self.modes),
            mass2: self.mass2,
            seed: self.seed,
            stream: chunk,
            index: self.next,
        };
        self.next += 1;
        Some(sample)
    }
}

/// `n` independent truncated-field samples with Var φ_k = 1/(m² + λ_k).
pub fn sample_fields<T: Scalar>(model: &SurfaceModel<T>, mass2: T, lambda_max: T, seed: u64, n: usize) -> Result<FieldStream<T>> {
    check_mass(mass2)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            requirement: ">= 1",
            value: 0.0,
        });
    }
    let modes = Arc::new(ModeTable::new(model, lambda_max)?);
    let scales = std_devs(&modes, mass2);
    Ok(FieldStream {
        modes,
        scales,
        mass2,
        seed,
        next: 0,
        n: n as u64,
        rng: None,
    })
}

fn check_mass<T: Scalar>(mass2: T) -> Result<()> {
    if mass2 == T::zero() {
        return Err(Error::ZeroMode(
            "the massless field has a flat zero mode and cannot be sampled".into(),
        ));
    }
    require_positive("m^2", mass2)
}

/// Counterterm convention for the Wick-ordered mass term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WickOrdering<T> {
    /// Subtract the exact variance of each mode.
    C,
    /// Point-splitting ordering: the C-ordered term plus A·C̄_f.
    C0 { area_cf: T },
}

impl<T: Scalar> WickOrdering<T> {
    pub fn c0(model: &SurfaceModel<T>, m0_sq: T) -> Result<Self> {
        let cf = cf_mean(model, m0_sq)?;
        Ok(Self::C0 {
            area_cf: model.area() * cf.cf_mean,
        })
    }
}

/// W_C = Σ_k (φ_k² − 1/(m₀² + λ_k)), or W_C + A·C̄_f.
pub fn wick_mass_term<T: Scalar>(sample: &FieldSample<T>, m0_sq: T, ordering: WickOrdering<T>) -> T {
    let w = wick_c(&sample.coeffs, &sample.modes.eigenvalues, m0_sq);
    match ordering {
        WickOrdering::C => w,
        WickOrdering::C0 { area_cf } => w + area_cf,
    }
}

fn wick_c<T: Scalar>(coeffs: &[T], eigenvalues: &[T], m0_sq: T) -> T {
    let mut acc = NeumaierSum::new();
    for (&phi, &l) in coeffs.iter().zip(eigenvalues) {
        acc.add(phi * phi - (m0_sq + l).recip());
    }
    acc.value()
}

/// Heat-smoothed mass term Σ_k e^{−2tλ_k}(φ_k² − 1/(m₀² + λ_k)).
pub fn smoothed_wick<T: Scalar>(sample: &FieldSample<T>, m0_sq: T, t: T) -> Result<T> {
    if !(t >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "t",
            requirement: ">= 0",
            value: t.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut acc = NeumaierSum::new();
    for (&phi, &l) in sample.coeffs.iter().zip(&sample.modes.eigenvalues) {
        acc.add((T::lit(-2.0) * t * l).exp() * (phi * phi - (m0_sq + l).recip()));
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n_samples: u64,
    pub target: T,
    /// (mean − target)/stderr; 0 when the estimator is deterministic.
    pub z_score: T,
}

impl<T: Scalar> McEstimate<T> {
    fn new(mean: T, stderr: T, n_samples: u64, target: T) -> Self {
        let z_score = if stderr > T::zero() { (mean - target) / stderr } else { T::zero() };
        Self {
            mean,
            stderr,
            n_samples,
            target,
            z_score,
        }
    }
}

/// Per-chunk accumulators for weights kept in log space:
/// Σ e^{ℓ−s}, Σ e^{2(ℓ−s)}, Σ e^{ℓ−s} φ₀², Σ e^{2(ℓ−s)} φ₀⁴, Σ e^{2(ℓ−s)} φ₀²
/// with a common shift s.
#[derive(Debug, Clone, Copy)]
struct WeightAcc {
    shift: f64,
    w: f64,
    w2: f64,
    wy: f64,
    wy2: f64,
    w2y: f64,
    n: u64,
}

impl WeightAcc {
    fn empty() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            w: 0.0,
            w2: 0.0,
            wy: 0.0,
            wy2: 0.0,
            w2y: 0.0,
            n: 0,
        }
    }

    fn rescale(&mut self, shift: f64) {
        if self.shift == f64::NEG_INFINITY {
            self.shift = shift;
            return;
        }
        let f = (self.shift - shift).exp();
        self.w *= f;
        self.wy *= f;
        self.w2 *= f * f;
        self.wy2 *= f * f;
        self.w2y *= f * f;
        self.shift = shift;
    }

    fn push(&mut self, log_w: f64, y: f64) {
        if log_w > self.shift {
            self.rescale(log_w);
        }
        let e = (log_w - self.shift).exp();
        self.w += e;
        self.w2 += e * e;
        self.wy += e * y;
        self.wy2 += e * e * y * y;
        self.w2y += e * e * y;
        self.n += 1;
    }

    fn merge(mut self, mut other: Self) -> Self {
        let shift = self.shift.max(other.shift);
        self.rescale(shift);
        other.rescale(shift);
        self.w += other.w;
        self.w2 += other.w2;
        self.wy += other.wy;
        self.wy2 += other.wy2;
        self.w2y += other.w2y;
        self.n += other.n;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureIdentityReport<T> {
    /// E_{m₀}[exp(−½m₁²W_C)] against the truncated det₂^{−1/2}.
    pub identity: McEstimate<T>,
    /// E[wφ₀²]/E[w] against 1/(m₀² + m₁²).
    pub reweighted_variance: McEstimate<T>,
    /// Σ mult·[ln(1+x) − x] over the retained modes.
    pub truncated_log_det2: T,
    pub modes: usize,
}

/// Monte-Carlo check of the change-of-measure identity at truncation Λ.
/// `m0` and `m1` are masses; the identity involves their squares.
pub fn verify_measure_identity<T: Scalar>(
    model: &SurfaceModel<T>,
    m0: T,
    m1: T,
    lambda_max: T,
    n: usize,
    seed: u64,
) -> Result<MeasureIdentityReport<T>> {
    require_positive("m0", m0)?;
    if !(m1 >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "m1",
            requirement: ">= 0",
            value: m1.to_f64().unwrap_or(f64::NAN),
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "samples",
            requirement: ">= 2",
            value: n as f64,
        });
    }
    let (m0_sq, m1_sq) = (m0 * m0, m1 * m1);
    let modes = ModeTable::new(model, lambda_max)?;
    let scales = std_devs(&modes, m0_sq);
    let counter: Vec<T> = modes.eigenvalues.iter().map(|&l| (m0_sq + l).recip()).collect();
    let truncated_log_det2 = crate::sum::compensated_sum(counter.iter().map(|&c| log1p_minus(m1_sq * c)));
    let target = (-truncated_log_det2 / T::lit(2.0)).exp();
    let half_m1 = m1_sq.to_f64().unwrap_or(f64::NAN) * 0.5;

    let chunks = n.div_ceil(CHUNK_SIZE);
    let partials: Vec<WeightAcc> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut phi = vec![T::zero(); scales.len()];
            let mut acc = WeightAcc::empty();
            for _ in 0..count {
                draw(&mut rng, &scales, &mut phi);
                let w = wick_c(&phi, &modes.eigenvalues, m0_sq).to_f64().unwrap_or(f64::NAN);
                let y = (phi[0] * phi[0]).to_f64().unwrap_or(f64::NAN);
                acc.push(-half_m1 * w, y);
            }
            acc
        })
        .collect();
    let total = partials.into_iter().fold(WeightAcc::empty(), WeightAcc::merge);

    let nf = total.n as f64;
    let scale = total.shift.exp();
    let mean_w = total.w / nf;
    let var_w = (total.w2 / nf - mean_w * mean_w).max(0.0) * nf / (nf - 1.0);
    let identity = McEstimate::new(
        T::lit(mean_w * scale),
        T::lit((var_w / nf).sqrt() * scale),
        total.n,
        target,
    );
    // ratio estimator R = Σwy/Σw with delta-method variance
    // Var ≈ Σ w²(y − R)² / (Σw)²
    let ratio = total.wy / total.w;
    let resid = total.wy2 - 2.0 * ratio * total.w2y + ratio * ratio * total.w2;
    let ratio_err = resid.max(0.0).sqrt() / total.w;
    let reweighted_variance = McEstimate::new(T::lit(ratio), T::lit(ratio_err), total.n, (m0_sq + m1_sq).recip());
    Ok(MeasureIdentityReport {
        identity,
        reweighted_variance,
        truncated_log_det2,
        modes: modes.len(),
    })
}

/// Sample variance of every coefficient against 1/(m² + λ_k).
pub fn mode_variances<T: Scalar>(model: &SurfaceModel<T>, mass2: T, lambda_max: T, n: usize, seed: u64) -> Result<Vec<McEstimate<T>>> {
    check_mass(mass2)?;
    let modes = ModeTable::new(model, lambda_max)?;
    let scales = std_devs(&modes, mass2);
    let dim = scales.len();
    let chunks = n.div_ceil(CHUNK_SIZE);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let count = CHUNK_SIZE.min(n - c * CHUNK_SIZE);
            let mut phi = vec![T::zero(); dim];
            let (mut s1, mut s2) = (vec![0.0; dim], vec![0.0; dim]);
            for _ in 0..count {
                draw(&mut rng, &scales, &mut phi);
                for k in 0..dim {
                    let y = (phi[k] * phi[k]).to_f64().unwrap_or(f64::NAN);
                    s1[k] += y;
                    s2[k] += y * y;
                }
            }
            (s1, s2)
        })
        .collect();
    let nf = n as f64;
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        let s1: f64 = partials.iter().map(|p| p.0[k]).sum();
        let s2: f64 = partials.iter().map(|p| p.1[k]).sum();
        let mean = s1 / nf;
        let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        out.push(McEstimate::new(
            T::lit(mean),
            T::lit((var / nf).sqrt()),
            n as u64,
            (mass2 + modes.eigenvalues[k]).recip(),
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::det2;

    fn sphere() -> SurfaceModel<f64> {
        SurfaceModel::sphere(1.0).unwrap()
    }

    #[test]
    fn stream_is_reproducible_and_matches_chunks() {
        let a: Vec<_> = sample_fields(&sphere(), 1.0, 6.0, 7, 5000).unwrap().map(|s| s.coeffs).collect();
        let b: Vec<_> = sample_fields(&sphere(), 1.0, 6.0, 7, 5000).unwrap().map(|s| s.coeffs).collect();
        assert_eq!(a, b);
        let c: Vec<_> = sample_fields(&sphere(), 1.0, 6.0, 8, 10).unwrap().map(|s| s.coeffs).collect();
        assert_ne!(a[..10], c[..]);
        let last = sample_fields(&sphere(), 1.0, 6.0, 7, 5000).unwrap().last().unwrap();
        assert_eq!(last.stream, 1);
        assert_eq!(last.index, 4999);
        assert_eq!(last.coeffs.len(), 9);
    }

    #[test]
    fn sampling_preconditions() {
        assert!(matches!(sample_fields(&sphere(), 0.0, 6.0, 1, 10), Err(Error::ZeroMode(_))));
        assert!(sample_fields(&sphere(), 1.0, 1.0, 1, 10).is_err());
        assert!(sample_fields(&sphere(), 1.0, 6.0, 1, 0).is_err());
    }

    #[test]
    fn zero_mode_variance() {
        let v = mode_variances(&sphere(), 1.0, 6.0, 100_000, 11).unwrap();
        assert!(v[0].z_score.abs() < 4.0, "{:?}", v[0]);
        assert!((v[0].target - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_mode_variances() {
        let model = SurfaceModel::<f64>::torus(1.0, 1.5).unwrap();
        let v = mode_variances(&model, 0.7, 80.0, 100_000, 3).unwrap();
        assert!(v.len() > 5);
        for est in &v {
            assert!(est.z_score.abs() < 4.0, "{est:?}");
        }
    }

    #[test]
    fn wick_terms() {
        let modes = Arc::new(ModeTable { eigenvalues: vec![0.0], area: 4.0 * std::f64::consts::PI });
        let zero = FieldSample { coeffs: vec![0.0], modes, mass2: 1.0, seed: 0, stream: 0, index: 0 };
        assert_eq!(wick_mass_term(&zero, 1.0, WickOrdering::C), -1.0);
        let ord = WickOrdering::C0 { area_cf: 0.25 };
        assert_eq!(wick_mass_term(&zero, 1.0, ord), -0.75);

        let model = sphere();
        let c0 = WickOrdering::c0(&model, 1.0).unwrap();
        let area_cf = model.area() * cf_mean(&model, 1.0).unwrap().cf_mean;
        for s in sample_fields(&model, 1.0, 12.0, 5, 20).unwrap() {
            let wc = wick_mass_term(&s, 1.0, WickOrdering::C);
            assert_eq!(wick_mass_term(&s, 1.0, c0) - wc, (wc + area_cf) - wc);
        }
    }

    #[test]
    fn wick_term_is_centred() {
        let model = sphere();
        let ws: Vec<f64> = sample_fields(&model, 1.0, 12.0, 9, 50_000).unwrap().map(|s| wick_mass_term(&s, 1.0, WickOrdering::C)).collect();
        let n = ws.len() as f64;
        let mean = ws.iter().sum::<f64>() / n;
        let var = ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 * (var / n).sqrt(), "{mean}");
    }

    #[test]
    fn smoothing_limits() {
        let model = sphere();
        for s in sample_fields(&model, 1.0, 12.0, 2, 10).unwrap() {
            let wc = wick_mass_term(&s, 1.0, WickOrdering::C);
            assert_eq!(smoothed_wick(&s, 1.0, 0.0).unwrap(), wc);
            let late = smoothed_wick(&s, 1.0, 200.0).unwrap();
            assert!((late - (s.coeffs[0] * s.coeffs[0] - 1.0)).abs() < 1e-15);
            let t = 1e-4;
            let spread: f64 = s.coeffs.iter().zip(&s.modes.eigenvalues).map(|(p, l)| (p * p - 1.0 / (1.0 + l)).abs()).sum();
            let diff = (smoothed_wick(&s, 1.0, t).unwrap() - wc).abs();
            assert!(diff <= 2.0 * t * 12.0 * spread + 1e-15);
        }
        let s = sample_fields(&model, 1.0, 12.0, 2, 1).unwrap().next().unwrap();
        assert!(smoothed_wick(&s, 1.0, -1.0).is_err());
    }

    #[test]
    fn massless_shift_is_deterministic() {
        let r = verify_measure_identity(&sphere(), 1.0, 0.0, 12.0, 1000, 1).unwrap();
        assert_eq!(r.identity.mean, 1.0);
        assert_eq!(r.identity.stderr, 0.0);
        assert_eq!(r.identity.z_score, 0.0);
    }

    #[test]
    fn measure_identity_small_run() {
        let model = sphere();
        let r = verify_measure_identity(&model, 1.0, 1.0, 42.0, 100_000, 17).unwrap();
        assert_eq!(r.modes, 49);
        assert!(r.identity.z_score.abs() < 4.0, "{r:?}");
        assert!(r.reweighted_variance.z_score.abs() < 4.0, "{r:?}");
        let d = det2(&model, 1.0, 1.0, 42.0).unwrap();
        assert!((d.truncated_log - r.truncated_log_det2).abs() < 1e-12);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                verify_measure_identity(&sphere(), 1.0, 1.0, 20.0, 20_000, 4).unwrap()
            })
        };
        assert_eq!(run(1), run(3));
    }
}
