use std::collections::HashMap;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{AttrValue, TrainingExample};

/// `(count + 1/m) / (n + 1)` per component.
pub fn smoothed_distribution(counts: &[u64], m: usize, n: u64) -> Vec<f64> {
    let prior = 1.0 / m as f64;
    let denom = n as f64 + 1.0;
    counts.iter().map(|&c| (c as f64 + prior) / denom).collect()
}

/// `1 - max p`.
pub fn classification_error(distribution: &[f64]) -> f64 {
    1.0 - distribution.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn entropy<I: IntoIterator<Item = u64>>(counts: I, total: f64) -> f64 {
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Normalized distance between the partition induced by attribute `k` and
/// the class partition:
/// `(I(A|C) + I(C|A)) / I(A ∩ C) = (2 I(A ∩ C) - I(A) - I(C)) / I(A ∩ C)`.
///
/// Returns 0 when the joint partition has a single cell.
pub fn partition_distance(examples: &[&TrainingExample], k: usize) -> f64 {
    if examples.is_empty() {
        return 0.0;
    }
    let mut joint: HashMap<(&AttrValue, usize), u64> = HashMap::new();
    let mut by_value: HashMap<&AttrValue, u64> = HashMap::new();
    let mut by_class: HashMap<usize, u64> = HashMap::new();
    for e in examples {
        *joint.entry((&e.values[k], e.label)).or_insert(0) += 1;
        *by_value.entry(&e.values[k]).or_insert(0) += 1;
        *by_class.entry(e.label).or_insert(0) += 1;
    }
    let n = examples.len() as f64;
    let i_joint = entropy(joint.into_values(), n);
    if i_joint <= 0.0 {
        return 0.0;
    }
    let i_attr = entropy(by_value.into_values(), n);
    let i_class = entropy(by_class.into_values(), n);
    ((2.0 * i_joint - i_attr - i_class) / i_joint).clamp(0.0, 1.0)
}

/// Pearson χ² homogeneity statistic of two label-count rows after adding
/// `1/m` to every cell.
pub fn chi2_statistic(a: &[u64], b: &[u64], m: usize) -> f64 {
    let s = 1.0 / m as f64;
    let rows: [Vec<f64>; 2] = [
        a.iter().map(|&c| c as f64 + s).collect(),
        b.iter().map(|&c| c as f64 + s).collect(),
    ];
    let row_tot: Vec<f64> = rows.iter().map(|r| r.iter().sum()).collect();
    let total: f64 = row_tot.iter().sum();
    let mut stat = 0.0;
    for j in 0..a.len() {
        let col: f64 = rows[0][j] + rows[1][j];
        for (r, rt) in rows.iter().zip(&row_tot) {
            let expected = rt * col / total;
            let d = r[j] - expected;
            stat += d * d / expected;
        }
    }
    stat
}

/// Upper-tail critical value of the χ² distribution with `df` degrees of
/// freedom at significance `alpha`.
pub fn chi2_critical(alpha: f64, df: usize) -> f64 {
    ChiSquared::new(df.max(1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(1.0 - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_examples() {
        assert_eq!(smoothed_distribution(&[0, 0], 2, 0), vec![0.5, 0.5]);
        assert_eq!(smoothed_distribution(&[2, 1], 2, 3), vec![0.625, 0.375]);
        let d = smoothed_distribution(&[7, 0, 3], 3, 10);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(d.iter().all(|p| *p > 0.0));
    }

    #[test]
    fn classification_error_examples() {
        assert!((classification_error(&[0.99, 0.01]) - 0.01).abs() < 1e-15);
        assert_eq!(classification_error(&[0.625, 0.375]), 0.375);
        assert!((classification_error(&[0.25; 4]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn chi2_identical_rows_is_zero() {
        assert!(chi2_statistic(&[10, 5], &[10, 5], 2).abs() < 1e-12);
        // Proportional but not identical rows: smoothing perturbs them slightly.
        let s = chi2_statistic(&[20, 10], &[10, 5], 2);
        assert!(s > 0.0 && s < 0.01 * chi2_critical(0.05, 1), "{s}");
    }

    #[test]
    fn chi2_opposed_rows() {
        // Smoothed cells 100.5 / 0.5; every expected count is 50.5.
        let stat = chi2_statistic(&[100, 0], &[0, 100], 2);
        assert!((stat - 4.0 * 50.0 * 50.0 / 50.5).abs() < 1e-9);
        assert!(stat > chi2_critical(0.05, 1));
    }

    #[test]
    fn critical_values_match_tables() {
        assert!((chi2_critical(0.05, 1) - 3.841).abs() < 1e-3);
        assert!((chi2_critical(0.05, 2) - 5.991).abs() < 1e-3);
        assert!((chi2_critical(0.05, 3) - 7.815).abs() < 1e-3);
    }
}
