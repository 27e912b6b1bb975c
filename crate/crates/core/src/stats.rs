//! Small statistics toolbox: Kolmogorov-Smirnov distances, 95% bands,
//! normal CDF, and running mean / standard error.

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample KS statistic of `xs` against a reference CDF.
pub fn ks_one_sample(xs: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        worst = worst
            .max((c - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - c).abs());
    }
    worst
}

/// Two-sample KS statistic.
pub fn ks_two_sample(xs: &mut [f64], ys: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    worst
}

/// 95% acceptance band for the one-sample KS statistic.
pub fn ks_band_one_sample(n: usize) -> f64 {
    1.358 / (n as f64).sqrt()
}

/// 95% acceptance band for the two-sample KS statistic.
pub fn ks_band_two_sample(n: usize, m: usize) -> f64 {
    1.358 * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_cdf_reference_points() {
        assert_relative_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(normal_cdf(1.0), 0.841_344_746_068_542_9, epsilon = 1e-12);
        assert_relative_eq!(normal_cdf(-2.0), 0.022_750_131_948_179_2, epsilon = 1e-12);
    }

    #[test]
    fn ks_two_sample_known_values() {
        let mut a = vec![1.0, 1.0, 4.0, 4.0];
        let mut b = vec![1.0, 1.0, 1.0, 4.0];
        assert_relative_eq!(ks_two_sample(&mut a, &mut b), 0.25);

        let mut c = vec![1.0, 2.0, 3.0, 4.0];
        let mut d = vec![2.0, 1.0, 4.0, 3.0];
        assert_relative_eq!(ks_two_sample(&mut c, &mut d), 0.0);
    }

    #[test]
    fn ks_one_sample_uniform_grid() {
        // Points at (i+0.5)/n against the uniform CDF give KS = 1/(2n).
        let n = 10;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let ks = ks_one_sample(&mut xs, |x| x.clamp(0.0, 1.0));
        assert_relative_eq!(ks, 0.05, epsilon = 1e-12);
    }
}
