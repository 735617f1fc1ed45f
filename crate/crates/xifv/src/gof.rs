//! Goodness-of-fit tests used by the checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson chi-square test that the rows of a contingency table share one
/// distribution over the columns. Empty rows and columns are dropped.
/// Returns the statistic, the p-value and the degrees of freedom.
pub fn chi2_homogeneity(table: &[Vec<u64>]) -> Option<(TestResult, usize)> {
    let width = table.first()?.len();
    if table.iter().any(|r| r.len() != width) {
        return None;
    }
    let rows: Vec<&Vec<u64>> = table.iter().filter(|r| r.iter().any(|&c| c > 0)).collect();
    let col_tot: Vec<u64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum()).collect();
    let cols: Vec<usize> = (0..width).filter(|&j| col_tot[j] > 0).collect();
    if rows.len() < 2 || cols.len() < 2 {
        return None;
    }
    let total: u64 = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let row_tot: u64 = r.iter().sum();
        for &j in &cols {
            let expected = row_tot as f64 * col_tot[j] as f64 / total as f64;
            let d = r[j] as f64 - expected;
            stat += d * d / expected;
        }
    }
    let df = (rows.len() - 1) * (cols.len() - 1);
    let p = ChiSquared::new(df as f64).ok()?.sf(stat);
    Some((TestResult { statistic: stat, p_value: p }, df))
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`, the Kolmogorov tail.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value and the
/// usual small-sample correction of `λ`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Option<TestResult> {
    if a.is_empty() || b.is_empty() || a.iter().chain(b).any(|x| x.is_nan()) {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = (n * m / (n + m)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    Some(TestResult { statistic: d, p_value: kolmogorov_tail(lambda) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use xifv_core::seed::rng_from_seed;

    #[test]
    fn chi2_known_value() {
        // 2x2 table with a textbook statistic
        let (r, df) = chi2_homogeneity(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert_eq!(df, 1);
        assert!((r.statistic - 6.666_666_666_666_667).abs() < 1e-12);
        assert!((r.p_value - 0.009_823_274_507_519_235).abs() < 1e-9);
        assert!(chi2_homogeneity(&[vec![5, 0]]).is_none());
    }

    #[test]
    fn ks_detects_shift_and_accepts_same_law() {
        let mut rng = rng_from_seed(1);
        let a: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.random()).collect();
        let c: Vec<f64> = (0..2000).map(|_| rng.random::<f64>() + 0.1).collect();
        assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.001);
        assert!(ks_two_sample(&a, &c).unwrap().p_value < 1e-6);
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
    }

    #[test]
    fn kolmogorov_tail_values() {
        assert!((kolmogorov_tail(1.0) - 0.269_999_671_677_545_5).abs() < 1e-9);
        assert!((kolmogorov_tail(1.358) - 0.05).abs() < 1e-3);
    }
}
