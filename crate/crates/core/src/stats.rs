//! Small statistics helpers shared by the Monte Carlo estimators.

use serde::Serialize;

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub std_dev: f64,
    pub n: usize,
    /// Half-width of the 95% interval.
    pub half_width: f64,
}

impl MeanCi {
    pub fn lo(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn width(&self) -> f64 {
        2.0 * self.half_width
    }
}

/// Sample mean with a normal-approximation 95% interval.
pub fn mean_ci(values: &[f64]) -> MeanCi {
    let n = values.len();
    if n == 0 {
        return MeanCi { mean: f64::NAN, std_dev: f64::NAN, n, half_width: f64::NAN };
    }
    // shifted by the first value so that constant samples give an exact mean
    let v0 = values[0];
    let mean = v0 + values.iter().map(|v| v - v0).sum::<f64>() / n as f64;
    if n == 1 {
        return MeanCi { mean, std_dev: 0.0, n, half_width: 0.0 };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std_dev = var.sqrt();
    MeanCi { mean, std_dev, n, half_width: Z95 * std_dev / (n as f64).sqrt() }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, trials: u64) -> (f64, f64, f64) {
    if trials == 0 {
        return (f64::NAN, 0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (p, lo, hi)
}

/// Ordinary least squares `y ≈ intercept + slope·x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Empirical quantile of sorted data (lower order statistic).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((q.clamp(0.0, 1.0) * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Roughly `per_decade` integers per decade in `[lo, hi]`, always including both ends.
pub fn log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    let lo = lo.max(1);
    let mut out = vec![lo];
    let steps = ((hi as f64 / lo as f64).log10() * per_decade as f64).ceil() as usize;
    for i in 1..=steps {
        let v = (lo as f64 * 10f64.powf(i as f64 / per_decade as f64)).round() as u64;
        let v = v.min(hi);
        if v > *out.last().unwrap() {
            out.push(v);
        }
    }
    if *out.last().unwrap() < hi {
        out.push(hi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_width() {
        let ci = mean_ci(&[0.3; 10]);
        assert_eq!(ci.width(), 0.0);
        assert_eq!(ci.mean, 0.3);
    }

    #[test]
    fn wilson_contains_estimate() {
        let (p, lo, hi) = wilson(30, 100);
        assert!(lo < p && p < hi);
        let (_, lo0, _) = wilson(0, 100);
        assert_eq!(lo0, 0.0);
    }

    #[test]
    fn fit_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (s, c) = linear_fit(&xs, &ys).unwrap();
        assert!((s + 0.5).abs() < 1e-12 && (c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn grid_is_increasing_and_bounded() {
        let g = log_grid(100, 10_000, 10);
        assert_eq!(g[0], 100);
        assert_eq!(*g.last().unwrap(), 10_000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
