//! Running moments and the two-sample z-statistic used by the Monte Carlo
//! checks. Distribution functions (χ², Kolmogorov) live in the std crate.

#[allow(unused_imports)]
use num_traits::Float;

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanVar {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(&mut self, other: &MeanVar) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance (n − 1 denominator).
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl FromIterator<f64> for MeanVar {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = MeanVar::default();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl From<&MeanVar> for Estimate {
    fn from(m: &MeanVar) -> Self {
        Self { value: m.mean(), stderr: m.stderr() }
    }
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors. A zero standard
    /// error demands equality up to `1e-12`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr + 1e-12
    }
}

/// `(a − b)/sqrt(se_a² + se_b²)`, zero when both sides are exact and equal.
pub fn z_statistic(a: Estimate, b: Estimate) -> f64 {
    let se = (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    let diff = a.value - b.value;
    if se == 0.0 {
        if diff.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY * diff.signum()
        }
    } else {
        diff / se
    }
}

/// Paired Monte Carlo estimates of the two sides of a duality identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    pub estimate_left: f64,
    pub stderr_left: f64,
    pub estimate_right: f64,
    pub stderr_right: f64,
    pub z: f64,
}

impl DualityReport {
    pub fn new(left: Estimate, right: Estimate) -> Self {
        Self {
            estimate_left: left.value,
            stderr_left: left.stderr,
            estimate_right: right.value,
            stderr_right: right.stderr,
            z: z_statistic(left, right),
        }
    }

    /// `|z| < 3`.
    pub fn pass(&self) -> bool {
        self.z.abs() < 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64 * 0.5).collect();
        let m: MeanVar = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..57).map(|i| (i as f64).sin()).collect();
        let all: MeanVar = xs.iter().copied().collect();
        let mut left: MeanVar = xs[..20].iter().copied().collect();
        let right: MeanVar = xs[20..].iter().copied().collect();
        left.merge(&right);
        assert_eq!(left.count(), all.count());
        assert!((left.mean() - all.mean()).abs() < 1e-12);
        assert!((left.variance() - all.variance()).abs() < 1e-12);
    }

    #[test]
    fn z_statistic_of_exact_sides() {
        let a = Estimate { value: 0.5, stderr: 0.0 };
        assert_eq!(z_statistic(a, a), 0.0);
        assert!(z_statistic(a, Estimate { value: 0.4, stderr: 0.0 }).is_infinite());
        let b = Estimate { value: 0.3, stderr: 0.1 };
        assert!((z_statistic(a, b) - 2.0).abs() < 1e-12);
    }
}
