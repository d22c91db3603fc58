//! Query-text analysis: topic profiles, stylometric profiles, style topics,
//! user segmentation and projection.

pub mod kmeans;
pub mod lda;
pub mod pca;
pub mod quality;
pub mod style;
pub mod style_topics;
pub mod vocab;

pub use kmeans::{kmeans_cluster, mean_silhouette, ClusterAssignment, ClusterError, KmeansConfig};
pub use lda::{infer_topic_mixture, train_lda, user_topic_profile, InferredMixture, LdaConfig, LdaError, TopicModel};
pub use pca::{pca_project, PcaError, PcaProjection};
pub use quality::{npmi, topic_quality, TopicQuality};
pub use style::{extract_style_features, mean_style_vector, StyleVector, STYLE_DIM, STYLE_FEATURE_NAMES};
pub use style_topics::{style_topic_mixtures, StyleTopics, StyleTopicsConfig, StyleTopicsError};
pub use vocab::{tokenize, tokenize_folded, Vocabulary};
