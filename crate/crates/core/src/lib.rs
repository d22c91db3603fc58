//! Personalized model leaderboards from pairwise preference logs.
//!
//! The crate covers the full analysis pipeline:
//!
//! * [`battle`] — parsing comparison logs, filtering active users, per-user
//!   query corpora.
//! * [`rating`] — global and per-user ELO tables and Bradley-Terry fits,
//!   restricted to the models each user actually battled.
//! * [`stats`] — Spearman divergence between personal and global rankings,
//!   bootstrap confidence intervals, Wilcoxon signed-rank tests.
//! * [`text`] — topic profiles (collapsed-Gibbs LDA), deterministic
//!   stylometric profiles, style topics, k-means segmentation, PCA.
//! * [`predict`] — rating-vector regression from topic+style profiles with a
//!   from-scratch MLP trainer and mean-predictor baseline.
//! * [`synth`] — seeded synthetic populations with known ground truth, used
//!   as recovery and learnability oracles.
//!
//! Every randomized operation takes an explicit seed and is deterministic for
//! a fixed seed regardless of thread count.

pub mod battle;
pub mod linalg;
pub mod predict;
pub mod rating;
pub mod seeding;
pub mod stats;
pub mod synth;
pub mod text;
