//! Two-step stopping detection on recorded MSE series.
//!
//! Raw MSE curves are volatile, so the validation series is smoothed with a
//! trailing moving average and a low-degree polynomial is fitted to expose
//! the trend. A stopping event fires when either
//!
//! - the fitted validation trend has risen over the last `W - 1` recorded
//!   values after attaining a local minimum (overfitting onset), or
//! - the raw training MSE has dropped below `initial / drop_factor`
//!   (the optimizer fell into a basin and further search is pointless).

use serde::{Deserialize, Serialize};

use crate::num::Real;

/// MSE snapshot taken every evaluation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseRecord<F> {
    pub iteration: usize,
    pub training_mse: F,
    pub validation_mse: F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StoppingKind {
    /// Fitted validation trend turned upward after a minimum.
    ValidationUpturn,
    /// Raw training MSE fell below its initial value divided by the drop factor.
    TrainingDrop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoppingEvent {
    /// Training iteration of the record that triggered the event.
    pub iteration: usize,
    pub kind: StoppingKind,
}

/// Detector settings; see [`crate::interpolator::TrainingConfig`] for the
/// training-level defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingConfig<F> {
    /// Moving-average window over the raw validation MSE.
    pub smoothing_window: usize,
    /// Degree of the trend polynomial.
    pub poly_degree: usize,
    /// Trend window: the event needs `trend_window - 1` rising fitted values
    /// after a minimum.
    pub trend_window: usize,
    /// Training-MSE drop threshold.
    pub drop_factor: F,
}

/// Trailing moving average with window `window`; shorter prefixes average
/// what is available, so the output has the same length as the input.
pub fn moving_average<F: Real>(series: &[F], window: usize) -> Vec<F> {
    assert!(window >= 1, "smoothing window must be at least 1");
    let mut out = Vec::with_capacity(series.len());
    let mut running = F::zero();
    for (j, &v) in series.iter().enumerate() {
        running += v;
        if j >= window {
            running -= series[j - window];
        }
        let len = window.min(j + 1);
        out.push(running / F::of(len as f64));
    }
    out
}

/// Least-squares polynomial fit over indices normalized to `[0, 1]`,
/// evaluated back at those indices. The effective degree is capped at
/// `len - 1`. Normal equations with partial pivoting; adequate for the low
/// degrees used here.
pub fn fitted_trend<F: Real>(series: &[F], degree: usize) -> Vec<F> {
    let m = series.len();
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![series[0]];
    }
    let deg = degree.min(m - 1);
    let xs: Vec<F> = (0..m)
        .map(|j| F::of(j as f64 / (m - 1) as f64))
        .collect();

    // Normal equations: (X^T X) c = X^T y over the monomial basis.
    let k = deg + 1;
    let mut ata = vec![F::zero(); k * k];
    let mut aty = vec![F::zero(); k];
    for (x, &y) in xs.iter().zip(series) {
        let mut pow = Vec::with_capacity(k);
        let mut p = F::one();
        for _ in 0..k {
            pow.push(p);
            p *= *x;
        }
        for r in 0..k {
            aty[r] += pow[r] * y;
            for c in 0..k {
                ata[r * k + c] += pow[r] * pow[c];
            }
        }
    }
    let coeffs = solve_dense(&mut ata, &mut aty, k);
    xs.iter()
        .map(|&x| {
            // Horner evaluation.
            let mut acc = F::zero();
            for &c in coeffs.iter().rev() {
                acc = acc * x + c;
            }
            acc
        })
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense `k x k` system.
fn solve_dense<F: Real>(a: &mut [F], b: &mut [F], k: usize) -> Vec<F> {
    for col in 0..k {
        let mut pivot = col;
        for row in col + 1..k {
            if a[row * k + col].abs() > a[pivot * k + col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * k + col];
        if diag == F::zero() {
            continue; // degenerate column; coefficient stays zero
        }
        for row in col + 1..k {
            let factor = a[row * k + col] / diag;
            if factor == F::zero() {
                continue;
            }
            for c in col..k {
                let v = a[col * k + c];
                a[row * k + c] -= factor * v;
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![F::zero(); k];
    for col in (0..k).rev() {
        let mut acc = b[col];
        for c in col + 1..k {
            acc -= a[col * k + c] * x[c];
        }
        let diag = a[col * k + col];
        x[col] = if diag == F::zero() { F::zero() } else { acc / diag };
    }
    x
}

/// Event check for the newest record only, fitting the trend over everything
/// recorded so far. The training loop calls this after each evaluation.
pub(crate) fn latest_stopping_event<F: Real>(
    records: &[MseRecord<F>],
    cfg: &StoppingConfig<F>,
) -> Option<StoppingEvent> {
    let m = records.len();
    if m < cfg.smoothing_window + cfg.trend_window {
        return None;
    }
    let last = &records[m - 1];

    if cfg.drop_factor > F::one()
        && last.training_mse < records[0].training_mse / cfg.drop_factor
    {
        return Some(StoppingEvent {
            iteration: last.iteration,
            kind: StoppingKind::TrainingDrop,
        });
    }

    let w = cfg.trend_window;
    if w < 2 || m < w {
        return None;
    }
    let raw: Vec<F> = records.iter().map(|r| r.validation_mse).collect();
    let trend = fitted_trend(&moving_average(&raw, cfg.smoothing_window), cfg.poly_degree);
    let start = m - w;
    let rising = trend[start..].windows(2).all(|p| p[1] > p[0]);
    let at_minimum = start == 0 || trend[start - 1] > trend[start];
    if rising && at_minimum {
        return Some(StoppingEvent {
            iteration: last.iteration,
            kind: StoppingKind::ValidationUpturn,
        });
    }
    None
}

/// Scans the trace from the beginning and reports the first stopping event,
/// fitting the trend incrementally exactly as the training loop sees it.
/// Returns `None` when fewer than `smoothing_window + trend_window` records
/// exist or no event occurs.
pub fn detect_stopping_event<F: Real>(
    records: &[MseRecord<F>],
    cfg: &StoppingConfig<F>,
) -> Option<StoppingEvent> {
    (1..=records.len()).find_map(|m| latest_stopping_event(&records[..m], cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn records(validation: &[f64], training: &[f64]) -> Vec<MseRecord<f64>> {
        validation
            .iter()
            .zip(training)
            .enumerate()
            .map(|(i, (&v, &t))| MseRecord {
                iteration: i * 50,
                training_mse: t,
                validation_mse: v,
            })
            .collect()
    }

    fn config(smoothing: usize, degree: usize, window: usize) -> StoppingConfig<f64> {
        StoppingConfig {
            smoothing_window: smoothing,
            poly_degree: degree,
            trend_window: window,
            drop_factor: 10.0,
        }
    }

    #[test]
    fn moving_average_keeps_length_and_averages_trailing_windows() {
        let s = [4.0, 2.0, 6.0, 8.0];
        let avg = moving_average(&s, 2);
        assert_eq!(avg.len(), 4);
        assert_eq!(avg, vec![4.0, 3.0, 4.0, 7.0]);
    }

    #[test]
    fn polynomial_fit_recovers_polynomial_data() {
        let xs: Vec<f64> = (0..30).map(|j| j as f64 / 29.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 3.0 * x + 0.5 * x * x).collect();
        let trend = fitted_trend(&ys, 6);
        for (a, b) in trend.iter().zip(&ys) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn strictly_decreasing_validation_never_fires() {
        // A line is represented exactly by the polynomial basis, so the fit
        // cannot wiggle upward.
        let validation: Vec<f64> = (0..40).map(|i| 100.0 - i as f64).collect();
        let training = vec![1.0; 40];
        let recs = records(&validation, &training);
        assert_eq!(detect_stopping_event(&recs, &config(10, 6, 4)), None);
        assert_eq!(detect_stopping_event(&recs, &config(1, 2, 4)), None);
    }

    #[test]
    fn v_shaped_validation_fires_at_the_upturn() {
        // Quadratic valley with its minimum at index 20. Degree-2 fit with no
        // smoothing reproduces it exactly, so the event must fire once the
        // trend has risen for trend_window - 1 = 3 records: at index 23.
        let validation: Vec<f64> = (0..41).map(|i| ((i as f64) - 20.0).powi(2) + 5.0).collect();
        let training = vec![1.0; 41];
        let recs = records(&validation, &training);
        let event = detect_stopping_event(&recs, &config(1, 2, 4)).unwrap();
        assert_eq!(event.kind, StoppingKind::ValidationUpturn);
        assert_eq!(event.iteration, recs[23].iteration);
    }

    #[test]
    fn training_drop_fires_where_the_mse_collapses() {
        let validation: Vec<f64> = (0..30).map(|i| 50.0 - i as f64).collect();
        let mut training = vec![1.0; 30];
        for t in training.iter_mut().skip(20) {
            *t = 0.01; // 100x drop at record 20
        }
        let recs = records(&validation, &training);
        let event = detect_stopping_event(&recs, &config(10, 6, 4)).unwrap();
        assert_eq!(event.kind, StoppingKind::TrainingDrop);
        assert_eq!(event.iteration, recs[20].iteration);
    }

    #[test]
    fn too_few_records_yield_no_event() {
        let validation = vec![5.0, 4.0, 3.0];
        let training = vec![1.0, 0.001, 0.001];
        let recs = records(&validation, &training);
        assert_eq!(detect_stopping_event(&recs, &config(10, 6, 4)), None);
    }
}
