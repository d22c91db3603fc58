//! Rating-vector regression from topic+style profiles.

pub mod dataset;
pub mod eval;
pub mod mlp;

pub use dataset::{
    build_dataset, fit_standardizers, DatasetError, DatasetStandardizers, RegressionDataset,
    Standardizer, MIN_USERS, TARGET_MODELS,
};
pub use eval::{evaluate, mean_predictor_baseline, EvalReport};
pub use mlp::{
    gradient_check, predict_ensemble, train_ensemble, train_mlp, Activation, Ensemble, EpochStats,
    Loss, Mlp, MlpConfig, MlpError, TrainedMlp,
};
