use std::collections::BTreeMap;

/// Metric name to value. Keys: `mse`/`r2` for regression,
/// `accuracy`/`precision`/`recall` for classification and recommendation.
pub type Metrics = BTreeMap<String, f64>;

/// `mse = mean((y - ŷ)²)`, `r2 = 1 - SS_res / SS_tot`, with `r2 = 0` when the
/// targets have zero variance.
pub fn regression_metrics(y: &[f64], y_hat: &[f64]) -> Metrics {
    let n = y.len().max(1) as f64;
    let mean = y.iter().sum::<f64>() / n;
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 };
    Metrics::from([("mse".to_string(), ss_res / n), ("r2".to_string(), r2)])
}

/// Accuracy, precision and recall of `probabilities >= 0.5` against 0/1
/// labels. Precision and recall are 0 when their denominator is 0.
pub fn classification_metrics(labels: &[f64], probabilities: &[f64]) -> Metrics {
    let (mut tp, mut fp, mut tn, mut fneg) = (0usize, 0usize, 0usize, 0usize);
    for (&y, &p) in labels.iter().zip(probabilities) {
        match (y >= 0.5, p >= 0.5) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
            (true, false) => fneg += 1,
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Metrics::from([
        ("accuracy".to_string(), ratio(tp + tn, tp + tn + fp + fneg)),
        ("precision".to_string(), ratio(tp, tp + fp)),
        ("recall".to_string(), ratio(tp, tp + fneg)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regression_by_hand() {
        let m = regression_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]);
        assert!((m["mse"] - 1.0 / 3.0).abs() < 1e-15);
        // ss_tot = 2, ss_res = 1
        assert!((m["r2"] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_target_r2_is_zero() {
        let m = regression_metrics(&[5.0, 5.0], &[5.0, 5.0]);
        assert_eq!(m["r2"], 0.0);
        assert_eq!(m["mse"], 0.0);
    }

    #[test]
    fn classification_by_hand() {
        let m = classification_metrics(&[1.0, 1.0, 0.0, 0.0], &[0.9, 0.2, 0.7, 0.1]);
        assert_eq!(m["accuracy"], 0.5);
        assert_eq!(m["precision"], 0.5);
        assert_eq!(m["recall"], 0.5);
        let none_predicted = classification_metrics(&[1.0, 0.0], &[0.1, 0.1]);
        assert_eq!(none_predicted["precision"], 0.0);
        assert_eq!(none_predicted["recall"], 0.0);
    }
}
