//! Order statistics and small numeric helpers.

/// Percentile by linear interpolation between order statistics (inclusive
/// convention): position `h = (n - 1) * q` in the sorted sample.
///
/// `q` is a fraction in `[0, 1]`. Returns `None` for an empty sample.
pub fn percentile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(percentile_sorted(&sorted, q))
}

/// Same as [`percentile`] on an already sorted, non-empty slice.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> Option<f64> {
    percentile(values, 0.5)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Running trapezoidal integral of `y` over `t`, starting at zero.
pub fn cumulative_trapezoid(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_matches_order_statistic_oracle() {
        // speeds 1..=100: h = 99 * 0.01 = 0.99 -> 1 + 0.99 * (2 - 1)
        let speeds: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!((percentile(&speeds, 0.01).unwrap() - 1.99).abs() < 1e-12);
        assert!((percentile(&speeds, 0.95).unwrap() - 95.05).abs() < 1e-12);
        assert_eq!(percentile(&speeds, 0.0), Some(1.0));
        assert_eq!(percentile(&speeds, 1.0), Some(100.0));
        assert_eq!(percentile(&[], 0.5), None);
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(&[6.0, 4.0, 5.0]), Some(5.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), Some(2.5));
    }

    #[test]
    fn trapezoid_triangle() {
        let t: Vec<f64> = (0..=10).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|&x| if x <= 5.0 { 0.4 * x } else { 0.4 * (10.0 - x) }).collect();
        let c = cumulative_trapezoid(&t, &y);
        assert!((c[10] - 10.0).abs() < 1e-12);
    }
}
