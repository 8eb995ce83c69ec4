//! Batch-means standard errors for ratio estimators.

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// NaN when fewer than two batches are available.
    pub stderr: f64,
}

impl Estimate {
    /// `|self - target|` in standard errors. Infinite when the standard
    /// error is zero and the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// `sum(y) / sum(x)` over batches, with the delta-method standard error
/// `sqrt(sum((y_k - R x_k)^2) / (K (K - 1))) / mean(x)`.
pub fn ratio_estimate<I>(pairs: I) -> Estimate
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let pairs: Vec<(f64, f64)> = pairs.into_iter().collect();
    let k = pairs.len();
    let sum_y: f64 = pairs.iter().map(|p| p.0).sum();
    let sum_x: f64 = pairs.iter().map(|p| p.1).sum();
    let mean = if sum_x > 0.0 { sum_y / sum_x } else { 0.0 };
    if k < 2 || sum_x <= 0.0 {
        return Estimate { mean, stderr: f64::NAN };
    }
    let ss: f64 = pairs
        .iter()
        .map(|&(y, x)| {
            let d = y - mean * x;
            d * d
        })
        .sum();
    let mean_x = sum_x / k as f64;
    Estimate {
        mean,
        stderr: (ss / (k as f64 * (k - 1) as f64)).sqrt() / mean_x,
    }
}

/// Per-batch accumulators of one simulation run.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Batch {
    pub duration: f64,
    pub area: f64,
    pub age_integral: f64,
    pub occupancy: [f64; 3],
    pub arrivals: f64,
    pub seen: [f64; 3],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_batches_have_zero_error() {
        let e = ratio_estimate(vec![(2.0, 1.0); 10]);
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert!(e.within(2.0, 3.0));
        assert!(!e.within(2.1, 3.0));
    }

    #[test]
    fn single_batch_has_no_error_estimate() {
        let e = ratio_estimate([(3.0, 2.0)]);
        assert_eq!(e.mean, 1.5);
        assert!(e.stderr.is_nan());
    }

    #[test]
    fn equal_weights_reduce_to_sample_mean_error() {
        let ys = [1.0, 2.0, 3.0, 4.0];
        let e = ratio_estimate(ys.iter().map(|&y| (y, 1.0)));
        assert_eq!(e.mean, 2.5);
        // sample sd 1.2910 over sqrt(4)
        assert!((e.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
