//! Scaled-MAE evaluation against the mean-predictor baseline.
//!
//! All errors are computed on standardized targets so ELO and Bradley-Terry
//! results are directly comparable. The baseline predicts the training-mean
//! target vector, which is the zero vector in standardized space.

use super::dataset::{DatasetStandardizers, RegressionDataset};
use super::mlp::MlpError;
use crate::rating::RatingSystem;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalReport {
    pub system: RatingSystem,
    /// Scaled MAE of the model over validation users x target models.
    pub mae: f64,
    pub baseline_mae: f64,
    /// (baseline - model) / baseline.
    pub improvement: f64,
    /// Per-target-model MAE, aligned with the dataset's target models.
    pub per_model_mae: Vec<f64>,
    /// MAE over non-imputed entries only; absent when every validation entry
    /// was imputed.
    pub mae_excluding_imputed: Option<f64>,
    pub n_validation: usize,
    pub n_outputs: usize,
}

/// Scaled MAE of the mean predictor: with targets standardized by training
/// statistics this is exactly the mean absolute standardized target.
pub fn mean_predictor_baseline(
    dataset: &RegressionDataset,
    std: &DatasetStandardizers,
) -> Result<f64, MlpError> {
    let validation = dataset.validation_indices();
    if validation.is_empty() {
        return Err(MlpError::EmptyValidation);
    }
    let m = dataset.targets[0].len();
    let total: f64 = validation
        .iter()
        .map(|&i| {
            std.y
                .transform(&dataset.targets[i])
                .iter()
                .map(|v| v.abs())
                .sum::<f64>()
        })
        .sum();
    Ok(total / (validation.len() * m) as f64)
}

/// Evaluate a predictor mapping standardized features to standardized
/// targets.
pub fn evaluate<F>(
    predict: F,
    dataset: &RegressionDataset,
    std: &DatasetStandardizers,
) -> Result<EvalReport, MlpError>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let validation = dataset.validation_indices();
    if validation.is_empty() {
        return Err(MlpError::EmptyValidation);
    }
    let m = dataset.targets[0].len();
    let mut total = 0.0;
    let mut per_model = vec![0.0; m];
    let mut real_total = 0.0;
    let mut real_count = 0usize;
    for &i in &validation {
        let x = std.x.transform(&dataset.features[i]);
        let y = std.y.transform(&dataset.targets[i]);
        let pred = predict(&x);
        for (j, (p, t)) in pred.iter().zip(&y).enumerate() {
            let err = (p - t).abs();
            total += err;
            per_model[j] += err;
            if !dataset.imputed[i][j] {
                real_total += err;
                real_count += 1;
            }
        }
    }
    let n = validation.len();
    for v in per_model.iter_mut() {
        *v /= n as f64;
    }
    let mae = total / (n * m) as f64;
    let baseline_mae = mean_predictor_baseline(dataset, std)?;
    Ok(EvalReport {
        system: dataset.system,
        mae,
        baseline_mae,
        improvement: if baseline_mae > 0.0 {
            (baseline_mae - mae) / baseline_mae
        } else {
            0.0
        },
        per_model_mae: per_model,
        mae_excluding_imputed: if real_count > 0 {
            Some(real_total / real_count as f64)
        } else {
            None
        },
        n_validation: n,
        n_outputs: m,
    })
}
