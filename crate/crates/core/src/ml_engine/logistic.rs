use super::{classification_metrics, split_indices, DesignMatrix, Metrics, MlError, TrainConfig, TrainedModel};

/// Binary logistic regression. Inputs are standardized with the stored
/// per-feature mean and standard deviation, so callers pass raw values.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub feature_order: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub config: TrainConfig,
}

impl LogisticModel {
    fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.means).zip(&self.stds).map(|((v, m), s)| (v - m) / s).collect()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let z = self.standardize(x);
        sigmoid(self.intercept + dot(&self.coefficients, &z))
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean binary cross-entropy of `σ(w·x + b)` over `rows` and its gradient
/// `(loss, ∂w, ∂b)`.
pub fn log_loss_and_gradient(weights: &[f64], bias: f64, rows: &[Vec<f64>], labels: &[f64]) -> (f64, Vec<f64>, f64) {
    let n = rows.len().max(1) as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, &y) in rows.iter().zip(labels) {
        let z = bias + dot(weights, x);
        // log(1 + e^z) computed stably
        let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += softplus - y * z;
        let err = sigmoid(z) - y;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * xi;
        }
        gb += err;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (loss / n, gw, gb / n)
}

/// Full-batch gradient descent on mean log-loss over standardized features.
/// Metrics are accuracy, precision and recall at 0.5 on the held-out split.
pub fn train_logistic_classifier(m: &DesignMatrix, config: &TrainConfig) -> Result<(TrainedModel, Metrics), MlError> {
    let y = m.target.as_deref().ok_or(MlError::UnknownColumn("<target>".into()))?;
    if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(MlError::NonBinaryTarget(*bad));
    }
    if y.iter().all(|v| *v == y[0]) {
        return Err(MlError::SingleClass);
    }
    let (train, test) = split_indices(m.n_rows(), config.test_fraction, config.seed);
    if train.len() < 2 {
        return Err(MlError::TooFewRows { needed: 2, available: train.len() });
    }
    let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
    if y_train.iter().all(|v| *v == y_train[0]) {
        return Err(MlError::SingleClass);
    }

    let f = m.n_features();
    let n = train.len() as f64;
    let mut means = vec![0.0; f];
    for &i in &train {
        for (mu, v) in means.iter_mut().zip(&m.rows[i]) {
            *mu += v / n;
        }
    }
    let mut stds = vec![0.0; f];
    for &i in &train {
        for ((s, v), mu) in stds.iter_mut().zip(&m.rows[i]).zip(&means) {
            *s += (v - mu).powi(2) / n;
        }
    }
    for s in &mut stds {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let standardized: Vec<Vec<f64>> = train
        .iter()
        .map(|&i| m.rows[i].iter().zip(&means).zip(&stds).map(|((v, mu), s)| (v - mu) / s).collect())
        .collect();

    let mut w = vec![0.0; f];
    let mut b = 0.0;
    for _ in 0..config.epochs {
        let (_, gw, gb) = log_loss_and_gradient(&w, b, &standardized, &y_train);
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= config.learning_rate * gi;
        }
        b -= config.learning_rate * gb;
    }
    if w.iter().chain(std::iter::once(&b)).any(|v| !v.is_finite()) {
        return Err(MlError::Diverged);
    }
    let model = LogisticModel {
        feature_order: m.feature_names.clone(),
        means,
        stds,
        coefficients: w,
        intercept: b,
        config: config.clone(),
    };
    let labels: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let probs: Vec<f64> = test.iter().map(|&i| model.predict_proba(&m.rows[i])).collect();
    Ok((TrainedModel::Logistic(model), classification_metrics(&labels, &probs)))
}
