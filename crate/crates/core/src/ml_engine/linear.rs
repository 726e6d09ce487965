use nalgebra::{DMatrix, DVector};

use super::{regression_metrics, split_indices, DesignMatrix, Metrics, MlError, TrainConfig, TrainedModel};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub feature_order: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub config: TrainConfig,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Ordinary least squares through the normal equations.
///
/// Columns of `[X | 1]` are scaled to unit L2 norm before forming the Gram
/// matrix, `config.ridge` is added to its diagonal and the system is solved by
/// Cholesky factorization. Metrics come from the held-out split.
pub fn train_linear_regression(m: &DesignMatrix, config: &TrainConfig) -> Result<(TrainedModel, Metrics), MlError> {
    let y = m.target.as_deref().ok_or(MlError::UnknownColumn("<target>".into()))?;
    let f = m.n_features();
    let (train, test) = split_indices(m.n_rows(), config.test_fraction, config.seed);
    if train.len() < f + 1 {
        return Err(MlError::TooFewRows { needed: f + 1, available: train.len() });
    }
    let (coefficients, intercept) = solve_ols(
        &train.iter().map(|&i| m.rows[i].as_slice()).collect::<Vec<_>>(),
        &train.iter().map(|&i| y[i]).collect::<Vec<_>>(),
        config.ridge,
    )?;
    let model = LinearModel { feature_order: m.feature_names.clone(), coefficients, intercept, config: config.clone() };
    let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
    let y_hat: Vec<f64> = test.iter().map(|&i| model.predict(&m.rows[i])).collect();
    let metrics = regression_metrics(&y_test, &y_hat);
    Ok((TrainedModel::Linear(model), metrics))
}

/// Returns `(coefficients, intercept)`.
pub(crate) fn solve_ols(rows: &[&[f64]], y: &[f64], ridge: f64) -> Result<(Vec<f64>, f64), MlError> {
    let n = rows.len();
    let f = rows.first().map_or(0, |r| r.len());
    let p = f + 1;
    let a = DMatrix::from_fn(n, p, |i, j| if j < f { rows[i][j] } else { 1.0 });
    let scale: Vec<f64> = (0..p)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let a_scaled = DMatrix::from_fn(n, p, |i, j| a[(i, j)] / scale[j]);
    let mut gram = a_scaled.transpose() * &a_scaled;
    for j in 0..p {
        gram[(j, j)] += ridge;
    }
    let rhs = a_scaled.transpose() * DVector::from_column_slice(y);
    let chol = gram.cholesky().ok_or(MlError::SingularSystem)?;
    let beta = chol.solve(&rhs);
    let mut coef: Vec<f64> = (0..p).map(|j| beta[j] / scale[j]).collect();
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(MlError::SingularSystem);
    }
    let intercept = coef.pop().unwrap_or(0.0);
    Ok((coef, intercept))
}
