//! Least-squares estimate of the spreading rate from a variance series.

use crate::error::{QwalkError, Result};

use super::EnsembleResult;

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "a line fit needs two points");
    let n = xs.len() as f64;
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - x_bar) * (x - x_bar);
        sxy += (x - x_bar) * (y - y_bar);
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let stderr = if xs.len() > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit { slope, intercept, stderr }
}

/// Which part of the variance series enters the fit.
///
/// The window is `[max(min_start, ceil(multiplier / p)), steps]` and must
/// span at least `min_span` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    pub multiplier: f64,
    pub min_start: usize,
    pub min_span: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { multiplier: 3.0, min_start: 20, min_span: 100 }
    }
}

impl WindowSpec {
    /// `(t_lo, t_hi)` for a series that ends at `steps`.
    pub fn bounds(&self, p_effective: f64, steps: usize) -> Result<(usize, usize)> {
        if !(p_effective > 0.0) {
            return Err(QwalkError::Divergent(p_effective));
        }
        let guard = (self.multiplier / p_effective).ceil();
        let t_lo = if guard.is_finite() && guard < usize::MAX as f64 {
            self.min_start.max(guard as usize)
        } else {
            usize::MAX
        };
        if t_lo > steps || steps - t_lo < self.min_span {
            return Err(QwalkError::WindowTooShort { t_lo, t_hi: steps, min: self.min_span });
        }
        Ok((t_lo, steps))
    }
}

/// Fitted spreading rate with the window it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DqEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub window: (usize, usize),
}

/// Slope of `var_x(t)` over the asymptotic window.
pub fn estimate_dq(result: &EnsembleResult, p_effective: f64, window: &WindowSpec) -> Result<DqEstimate> {
    let steps = result.var_x.len().saturating_sub(1);
    let (t_lo, t_hi) = window.bounds(p_effective, steps)?;
    let ts: Vec<f64> = (t_lo..=t_hi).map(|t| t as f64).collect();
    let fit = fit_line(&ts, &result.var_x[t_lo..=t_hi]);
    Ok(DqEstimate { slope: fit.slope, intercept: fit.intercept, stderr: fit.stderr, window: (t_lo, t_hi) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn series(f: impl Fn(usize) -> f64, steps: usize) -> EnsembleResult {
        let var: Vec<f64> = (0..=steps).map(f).collect();
        EnsembleResult::from_series(vec![0.0; steps + 1], var)
    }

    #[test]
    fn exact_line() {
        let r = series(|t| if t == 0 { 0.0 } else { 3.0 + 2.0 * t as f64 }, 400);
        let est = estimate_dq(&r, 0.1, &WindowSpec::default()).unwrap();
        assert!((est.slope - 2.0).abs() < 1e-12);
        assert!((est.intercept - 3.0).abs() < 1e-9);
        assert!(est.stderr < 1e-12);
        assert_eq!(est.window, (30, 400));
    }

    #[test]
    fn noisy_line() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let noise: Vec<f64> = (0..=10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = series(|t| 2.0 * t as f64 + noise[t], 10_000);
        let est = estimate_dq(&r, 0.5, &WindowSpec::default()).unwrap();
        assert!((est.slope - 2.0).abs() < 0.01);
        // sigma / sqrt(S_xx) for unit noise
        assert!((est.stderr - (12.0f64 / 1e12).sqrt()).abs() < 0.2 * (12.0f64 / 1e12).sqrt());
    }

    #[test]
    fn window_guards() {
        let w = WindowSpec { multiplier: 10.0, ..WindowSpec::default() };
        assert_eq!(w.bounds(0.01, 1000), Err(QwalkError::WindowTooShort { t_lo: 1000, t_hi: 1000, min: 100 }));
        assert_eq!(w.bounds(0.1, 1000), Ok((100, 1000)));
        assert_eq!(w.bounds(0.5, 1000), Ok((20, 1000)));
        assert_eq!(w.bounds(0.0, 1000), Err(QwalkError::Divergent(0.0)));
        assert!(WindowSpec::default().bounds(0.01, 399).is_err());
        assert_eq!(WindowSpec::default().bounds(0.01, 400), Ok((300, 400)));
    }
}
