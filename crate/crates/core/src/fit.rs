//! Least-squares fit of `y ≈ offset + amplitude · exp(-rate · x)`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDecayFit {
    pub amplitude: f64,
    pub rate: f64,
    pub offset: f64,
    pub r_squared: f64,
}

impl ExpDecayFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.offset + self.amplitude * (-self.rate * x).exp()
    }
}

// For a fixed rate the model is linear in (offset, amplitude).
fn fit_at_rate(xs: &[f64], ys: &[f64], rate: f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let e: Vec<f64> = xs.iter().map(|x| (-rate * x).exp()).collect();
    let se = e.iter().sum::<f64>();
    let sy = ys.iter().sum::<f64>();
    let see = e.iter().map(|v| v * v).sum::<f64>();
    let sey = e.iter().zip(ys).map(|(a, b)| a * b).sum::<f64>();
    let det = n * see - se * se;
    let (amplitude, offset) = if det.abs() < 1e-300 {
        (0.0, sy / n)
    } else {
        ((n * sey - se * sy) / det, (see * sy - se * sey) / det)
    };
    let sse = e
        .iter()
        .zip(ys)
        .map(|(ev, y)| (y - offset - amplitude * ev).powi(2))
        .sum::<f64>();
    (amplitude, offset, sse)
}

/// Fits the decay by a log-spaced scan of the rate followed by golden
/// section refinement. Needs at least three points.
pub fn fit_exponential_decay(xs: &[f64], ys: &[f64]) -> Option<ExpDecayFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return None;
    }
    let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    if span <= 0.0 {
        return None;
    }
    let sse = |log_rate: f64| fit_at_rate(xs, ys, log_rate.exp()).2;
    let (lo, hi) = ((1e-4 / span).ln(), (50.0 / span).ln());
    let steps = 2000;
    let h = (hi - lo) / steps as f64;
    let best_k = (0..=steps)
        .min_by(|&a, &b| sse(lo + a as f64 * h).total_cmp(&sse(lo + b as f64 * h)))
        .expect("non-empty scan");
    let (mut a, mut b) = (lo + (best_k as f64 - 1.0) * h, lo + (best_k as f64 + 1.0) * h);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if sse(c) < sse(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let rate = (0.5 * (a + b)).exp();
    let (amplitude, offset, sse) = fit_at_rate(xs, ys, rate);
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let sst = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>();
    let r_squared = if sst > 0.0 { 1.0 - sse / sst } else { 1.0 };
    Some(ExpDecayFit {
        amplitude,
        rate,
        offset,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_decay() {
        let xs: Vec<f64> = (2..=20).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.4 + 3.0 * (-0.3 * x).exp()).collect();
        let fit = fit_exponential_decay(&xs, &ys).unwrap();
        assert!((fit.rate - 0.3).abs() < 1e-5, "{fit:?}");
        assert!((fit.amplitude - 3.0).abs() < 1e-4);
        assert!((fit.offset - 0.4).abs() < 1e-5);
        assert!(fit.r_squared > 0.999_999);
    }

    #[test]
    fn straight_line_fits_poorly_when_noisy() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| if (*x as i32) % 2 == 0 { 1.0 } else { 0.0 })
            .collect();
        assert!(fit_exponential_decay(&xs, &ys).unwrap().r_squared < 0.5);
    }

    #[test]
    fn too_few_points() {
        assert!(fit_exponential_decay(&[1.0, 2.0], &[1.0, 0.5]).is_none());
    }
}
