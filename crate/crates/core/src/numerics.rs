//! Small numerical helpers: stable sums, grids, finite differences and
//! straight-line least squares.

use crate::error::{Error, Result};

/// Evenly spaced grid with `n` points on `[start, end]`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}

/// Geometric grid with `n` points on `[start, end]`, both positive.
pub fn geomspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    linspace(start.ln(), end.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Pairwise (tree) summation; the reduction order depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// `ln Σ exp(x_i)` without overflow. Returns `-inf` for an empty input.
pub fn log_sum_exp(logs: &[f64]) -> f64 {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let shifted: Vec<f64> = logs.iter().map(|x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Central first derivative with one Richardson step (error O(h^4)).
pub fn richardson_first<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |s: f64| (f(x + s) - f(x - s)) / (2.0 * s);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Central second derivative with one Richardson step (error O(h^4)).
pub fn richardson_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |s: f64| (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Central finite-difference derivative of order 1..=4 on a five-point
/// stencil, Richardson-extrapolated once.
pub fn richardson_nth<F: Fn(f64) -> f64>(f: F, x: f64, h: f64, order: usize) -> Result<f64> {
    let stencil = |s: f64| -> Result<f64> {
        let fm2 = f(x - 2.0 * s);
        let fm1 = f(x - s);
        let f0 = f(x);
        let fp1 = f(x + s);
        let fp2 = f(x + 2.0 * s);
        Ok(match order {
            1 => (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * s),
            2 => (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * s * s),
            3 => (-fm2 + 2.0 * fm1 - 2.0 * fp1 + fp2) / (2.0 * s.powi(3)),
            4 => (fm2 - 4.0 * fm1 + 6.0 * f0 - 4.0 * fp1 + fp2) / s.powi(4),
            _ => return Err(Error::OrderCap { order, cap: 4 }),
        })
    };
    // The five-point first and second derivatives are O(h^4); orders 3 and 4 are O(h^2).
    let p = if order <= 2 { 4 } else { 2 };
    let scale = f64::from(1u32 << p);
    let coarse = stencil(h)?;
    let fine = stencil(h / 2.0)?;
    Ok((scale * fine - coarse) / (scale - 1.0))
}

/// Result of an ordinary least-squares straight-line fit `y = slope*x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::invalid("fit_line: x and y lengths differ"));
    }
    if x.len() < 2 {
        return Err(Error::FitWindowTooNarrow {
            points: x.len(),
            required: 2,
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit_line: all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms_residual: (ss / n).sqrt(),
    })
}

/// Log-log fit of `y ∝ x^p`; returns the line in `(ln x, ln y)`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Composite trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// Linear interpolation on an ascending grid; `None` outside the grid.
pub fn interpolate(x: &[f64], y: &[f64], at: f64) -> Option<f64> {
    if x.is_empty() || at < x[0] || at > x[x.len() - 1] {
        return None;
    }
    let idx = x.partition_point(|v| *v < at);
    if idx == 0 {
        return Some(y[0]);
    }
    let (x0, x1) = (x[idx - 1], x[idx]);
    let (y0, y1) = (y[idx - 1], y[idx]);
    if x1 == x0 {
        return Some(y1);
    }
    Some(y0 + (y1 - y0) * (at - x0) / (x1 - x0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_large_arguments() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn richardson_derivatives_of_exp() {
        let d1 = richardson_first(f64::exp, 0.3, 1e-3);
        let d2 = richardson_second(f64::exp, 0.3, 1e-3);
        assert!((d1 - 0.3f64.exp()).abs() < 1e-11);
        assert!((d2 - 0.3f64.exp()).abs() < 1e-7);
        for order in 1..=4 {
            let d = richardson_nth(f64::sin, 0.7, 1e-2, order).unwrap();
            let exact = [0.7f64.cos(), -0.7f64.sin(), -0.7f64.cos(), 0.7f64.sin()][order - 1];
            assert!((d - exact).abs() < 1e-6, "order {order}: {d} vs {exact}");
        }
        assert!(richardson_nth(f64::sin, 0.0, 1e-2, 5).is_err());
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = linspace(0.0, 1.0, 11);
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept + 2.0).abs() < 1e-12);
    }

    #[test]
    fn interpolate_inside_and_outside() {
        let x = [0.0, 1.0, 2.0];
        let y = [0.0, 10.0, 0.0];
        assert_eq!(interpolate(&x, &y, 0.5), Some(5.0));
        assert_eq!(interpolate(&x, &y, 2.5), None);
    }
}
