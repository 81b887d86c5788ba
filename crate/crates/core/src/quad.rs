//! Gauss–Legendre panel quadrature in the logarithmic variable u = ln t.
//!
//! The heat-trace integrands are analytic on (0, ∞) and vary on every scale
//! from the small-t singular regime to the exponential large-t tail, so all
//! t-integrals are mapped to u = ln t and integrated with composite
//! Gauss–Legendre panels. The panel count is doubled until two successive
//! rules agree; the difference is reported as the error estimate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;
use crate::Scalar;

/// Nodes and weights of an n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        let nf = T::from_usize_lossy(n);
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi initial guess, then Newton on P_n
            let theta = T::PI() * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5));
            let mut x = theta.cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫_a^b f using `panels` equal sub-intervals.
    pub fn composite<F: FnMut(T) -> T>(&self, mut f: F, a: T, b: T, panels: usize) -> T {
        let width = (b - a) / T::from_usize_lossy(panels);
        let half = width * T::lit(0.5);
        let mut acc = NeumaierSum::new();
        for p in 0..panels {
            let mid = a + width * (T::from_usize_lossy(p) + T::lit(0.5));
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc.add(*w * f(mid + half * *x));
            }
        }
        acc.value() * half
    }
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let k = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * k - T::one()) * x * p1 - (k - T::one()) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (T::one(), T::zero());
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Record of how one integral was computed, serialized into reports.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SegmentProfile {
    pub label: String,
    pub t_lo: f64,
    pub t_hi: f64,
    pub panels: usize,
    pub order: usize,
    pub evaluations: usize,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq)]
pub struct QuadratureProfile {
    pub segments: Vec<SegmentProfile>,
}

impl QuadratureProfile {
    pub fn push(&mut self, seg: SegmentProfile) {
        self.segments.push(seg);
    }

    pub fn extend(&mut self, other: QuadratureProfile) {
        self.segments.extend(other.segments);
    }
}

#[derive(Debug, Clone)]
pub struct LogQuadrature<T> {
    rule: GaussLegendre<T>,
    /// Initial panel density per unit of ln t.
    pub panels_per_unit: f64,
    pub max_panels: usize,
}

impl<T: Scalar> Default for LogQuadrature<T> {
    fn default() -> Self {
        Self {
            rule: GaussLegendre::new(20),
            panels_per_unit: 0.5,
            max_panels: 1 << 12,
        }
    }
}

/// Integral value together with its a-posteriori error estimate.
#[derive(Debug, Clone)]
pub struct QuadOutcome<T> {
    pub value: T,
    pub error: T,
    pub profile: SegmentProfile,
}

impl<T: Scalar> LogQuadrature<T> {
    /// ∫_{t_lo}^{t_hi} f(t) dt, integrated as ∫ f(e^u) e^u du.
    pub fn integrate<F: FnMut(T) -> T>(&self, label: &str, mut f: F, t_lo: T, t_hi: T, tol: T) -> Result<QuadOutcome<T>> {
        debug_assert!(t_lo > T::zero() && t_hi > t_lo);
        let (a, b) = (t_lo.ln(), t_hi.ln());
        let span = (b - a).to_f64().unwrap_or(1.0);
        let mut panels = ((span * self.panels_per_unit).ceil() as usize).max(2);
        let mut g = |u: T| {
            let t = u.exp();
            f(t) * t
        };
        let mut evaluations = panels * self.rule.order();
        let mut coarse = self.rule.composite(&mut g, a, b, panels);
        loop {
            let fine = self.rule.composite(&mut g, a, b, 2 * panels);
            evaluations += 2 * panels * self.rule.order();
            panels *= 2;
            let diff = (fine - coarse).abs();
            // floor at a few ulps of the magnitude: beyond that the
            // difference is rounding noise, not truncation
            let noise = T::epsilon() * T::lit(64.0) * fine.abs().max(T::one());
            if diff <= tol || diff <= noise {
                let error = diff.max(noise);
                return Ok(QuadOutcome {
                    value: fine,
                    error,
                    profile: SegmentProfile {
                        label: label.to_string(),
                        t_lo: t_lo.to_f64().unwrap_or(f64::NAN),
                        t_hi: t_hi.to_f64().unwrap_or(f64::NAN),
                        panels,
                        order: self.rule.order(),
                        evaluations,
                        error_estimate: error.to_f64().unwrap_or(f64::NAN),
                    },
                });
            }
            if panels >= self.max_panels {
                return Err(Error::ToleranceNotReached {
                    requested: tol.to_f64().unwrap_or(f64::NAN),
                    achieved: diff.to_f64().unwrap_or(f64::NAN),
                });
            }
            coarse = fine;
        }
    }
}
