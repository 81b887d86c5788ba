//! Small dense least-squares solver (Householder QR) and polynomial
//! extrapolation used by the Laurent and constant-term fits.

use crate::error::{Error, Result};
use crate::Scalar;

/// Solve min ‖X c − y‖₂ for a tall design matrix given row-wise.
///
/// Returns the coefficients and the root-mean-square residual.
#[allow(clippy::needless_range_loop)]
pub fn least_squares<T: Scalar>(rows: &[Vec<T>], y: &[T]) -> Result<(Vec<T>, T)> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if n == 0 || m < n || y.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::DegenerateGrid(format!("{m} rows for {n} unknowns")));
    }
    let mut a: Vec<Vec<T>> = rows.to_vec();
    let mut b = y.to_vec();
    for k in 0..n {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).fold(T::zero(), |s, v| s + v).sqrt();
        if norm <= T::epsilon() * T::lit(16.0) {
            return Err(Error::DegenerateGrid("rank-deficient design".into()));
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| a[i][k]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(T::zero(), |s, &x| s + x * x);
        if vnorm2 > T::zero() {
            for j in k..n {
                let dot = (k..m).fold(T::zero(), |s, i| s + v[i - k] * a[i][j]);
                let f = T::lit(2.0) * dot / vnorm2;
                for i in k..m {
                    a[i][j] = a[i][j] - f * v[i - k];
                }
            }
            let dot = (k..m).fold(T::zero(), |s, i| s + v[i - k] * b[i]);
            let f = T::lit(2.0) * dot / vnorm2;
            for i in k..m {
                b[i] = b[i] - f * v[i - k];
            }
        }
    }
    let mut c = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s = ((k + 1)..n).fold(b[k], |s, j| s - a[k][j] * c[j]);
        c[k] = s / a[k][k];
    }
    let sse = rows
        .iter()
        .zip(y)
        .map(|(r, &yi)| {
            let pred = r.iter().zip(&c).fold(T::zero(), |s, (&x, &ci)| s + x * ci);
            (pred - yi) * (pred - yi)
        })
        .fold(T::zero(), |s, v| s + v);
    Ok((c, (sse / T::from_usize_lossy(m)).sqrt()))
}

/// Value at x = 0 of the interpolating polynomial through (x_i, y_i)
/// (Neville's scheme; Richardson extrapolation when x_i are geometric).
pub fn extrapolate_to_zero<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DegenerateGrid("need at least two points to extrapolate".into()));
    }
    for i in 0..xs.len() {
        for j in 0..i {
            if xs[i] == xs[j] {
                return Err(Error::DegenerateGrid("repeated abscissa".into()));
            }
        }
    }
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..(n - level) {
            let (xa, xb) = (xs[i], xs[i + level]);
            p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
        }
    }
    Ok(p[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit_recovers_coefficients() {
        let xs = [0.2f64, 0.1, 0.05, 0.025];
        let rows: Vec<Vec<f64>> = xs.iter().map(|&s| vec![1.0 / s, 1.0, s]).collect();
        let y: Vec<f64> = xs.iter().map(|&s| 0.5 / s + 1.25 - 3.0 * s).collect();
        let (c, res) = least_squares(&rows, &y).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-13 && (c[1] - 1.25).abs() < 1e-12 && (c[2] + 3.0).abs() < 1e-11);
        assert!(res < 1e-13);
    }

    #[test]
    fn rejects_underdetermined() {
        let rows = vec![vec![1.0f64, 2.0]];
        assert!(least_squares(&rows, &[1.0]).is_err());
        let rows = vec![vec![1.0f64, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]];
        assert!(least_squares(&rows, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn neville_extrapolates_quadratic() {
        let xs = [0.04f64, 0.01, 0.0025];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 + 2.0 * x - 5.0 * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys).unwrap() - 3.0).abs() < 1e-14);
        assert!(extrapolate_to_zero(&[1.0f64, 1.0], &[1.0, 2.0]).is_err());
    }
}
