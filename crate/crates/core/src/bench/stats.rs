//! Small statistics helpers for summaries and the rank test.

use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (`n − 1` denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    if values.len() < 2 {
        return Some(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

/// Median, averaging the two middle values for even lengths. `+∞` entries
/// are ordered last.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 || v[mid - 1] == v[mid] {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTest {
    /// `U` statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided p-value for "first sample tends to be larger".
    pub p_value: f64,
}

/// One-sided Mann–Whitney U test of `x > y` using the normal approximation
/// with tie correction and continuity correction.
pub fn mann_whitney_greater(x: &[f64], y: &[f64]) -> Option<RankTest> {
    let (n1, n2) = (x.len(), y.len());
    if n1 == 0 || n2 == 0 {
        return None;
    }
    let mut pooled: Vec<(f64, bool)> = x.iter().map(|&v| (v, true)).chain(y.iter().map(|&v| (v, false))).collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pooled.len();
    let mut rank_sum_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let count = (j - i) as f64;
        tie_term += count.powi(3) - count;
        rank_sum_x += avg_rank * pooled[i..j].iter().filter(|p| p.1).count() as f64;
        i = j;
    }
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u = rank_sum_x - n1f * (n1f + 1.0) / 2.0;
    let mean_u = n1f * n2f / 2.0;
    let var_u = n1f * n2f / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if !(var_u > 0.0) {
        return Some(RankTest {
            u,
            z: 0.0,
            p_value: 1.0,
        });
    }
    let z = (u - mean_u - 0.5) / var_u.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Some(RankTest {
        u,
        z,
        p_value: normal.sf(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0]), Some(3.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[1.0, f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
        assert_eq!(median(&[1.0, 2.0, f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn spread() {
        assert_eq!(std_dev(&[5.0]), Some(0.0));
        assert!((std_dev(&[1.0, 2.0, 3.0, 4.0]).unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rank_test_separated_samples() {
        // complete separation, n1 = n2 = 10: U = 100, z = (100 − 50 − ½)/√175
        let x: Vec<f64> = (10..20).map(f64::from).collect();
        let y: Vec<f64> = (0..10).map(f64::from).collect();
        let t = mann_whitney_greater(&x, &y).unwrap();
        assert_eq!(t.u, 100.0);
        assert!((t.z - 49.5 / 175f64.sqrt()).abs() < 1e-12);
        assert!((t.p_value / 9.133589555477501e-05 - 1.0).abs() < 1e-9);
        let rev = mann_whitney_greater(&y, &x).unwrap();
        assert_eq!(rev.u, 0.0);
        assert!(rev.p_value > 0.99);
    }

    #[test]
    fn rank_test_ties() {
        let t = mann_whitney_greater(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_eq!(t.u, 2.0);
        assert_eq!(t.p_value, 1.0);
        // scipy.stats.mannwhitneyu([1,2,2,3], [2,2,4], alternative="greater", method="asymptotic")
        let t = mann_whitney_greater(&[1.0, 2.0, 2.0, 3.0], &[2.0, 2.0, 4.0]).unwrap();
        assert_eq!(t.u, 4.0);
        assert!((t.p_value / 0.8352786119286905 - 1.0).abs() < 1e-9);
    }
}
