//! Synthetic populations with known ground truth.
//!
//! Users carry latent feature vectors; a coupling matrix maps features to
//! per-user log-strength perturbations around a shared global preference.
//! Battle outcomes are sampled from the user's own Bradley-Terry
//! probabilities, and prompts are drawn from feature-tied word distributions
//! so topic and style profiles carry real signal for the predictor tests.
//! Everything is reproducible from the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::battle::{BattleLog, ModelId, Outcome, RawBattle};
use crate::rating::Subject;
use crate::seeding::derive_indexed_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Standard-normal feature vectors of `feature_dim`.
    Gaussian,
    /// One-hot feature per user: every user's perturbation is independent.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    UniformPairs,
    /// Cycle all unordered pairs for exact coverage in recovery tests.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PopulationConfig {
    pub models: usize,
    pub users: usize,
    pub battles_per_user: usize,
    /// Scale of the feature-coupled per-user perturbation; zero means all
    /// users share the global preference exactly.
    pub heterogeneity: f64,
    pub feature_dim: usize,
    pub feature_mode: FeatureMode,
    pub tie_rate: f64,
    pub schedule: Schedule,
    pub seed: u64,
}

impl PopulationConfig {
    pub fn new(models: usize, users: usize, battles_per_user: usize, seed: u64) -> Self {
        Self {
            models,
            users,
            battles_per_user,
            heterogeneity: 0.0,
            feature_dim: 8,
            feature_mode: FeatureMode::Gaussian,
            tie_rate: 0.0,
            schedule: Schedule::UniformPairs,
            seed,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SynthError {
    #[error("invalid population shape: {0}")]
    InvalidShape(String),
    #[error("brute-force fit supports at most 3 models, got {0}")]
    TooManyModels(usize),
    #[error("subject has no battles")]
    NoBattles,
}

#[derive(Debug, Clone)]
pub struct SyntheticPopulation {
    pub config: PopulationConfig,
    pub model_names: Vec<String>,
    pub user_names: Vec<String>,
    pub global_xi: Vec<f64>,
    /// Per-user ground-truth log-strengths: global + heterogeneity * C x_u.
    pub user_xi: Vec<Vec<f64>>,
    pub user_features: Vec<Vec<f64>>,
    /// Coupling matrix, models x feature_dim, entries N(0, 1/feature_dim).
    pub coupling: Vec<Vec<f64>>,
}

/// Draw a population: global strengths, user features, coupling, user
/// strengths.
pub fn generate_population(config: &PopulationConfig) -> Result<SyntheticPopulation, SynthError> {
    if config.models < 2 {
        return Err(SynthError::InvalidShape("need at least 2 models".into()));
    }
    if config.users < 1 || config.battles_per_user < 1 {
        return Err(SynthError::InvalidShape(
            "need at least 1 user and 1 battle per user".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.tie_rate) {
        return Err(SynthError::InvalidShape("tie_rate outside [0,1]".into()));
    }
    let feature_dim = match config.feature_mode {
        FeatureMode::Gaussian => {
            if config.feature_dim == 0 {
                return Err(SynthError::InvalidShape("feature_dim must be positive".into()));
            }
            config.feature_dim
        }
        FeatureMode::Orthogonal => config.users,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };

    let global_xi: Vec<f64> = (0..config.models).map(|_| normal(&mut rng)).collect();
    let scale = 1.0 / (feature_dim as f64).sqrt();
    let coupling: Vec<Vec<f64>> = (0..config.models)
        .map(|_| (0..feature_dim).map(|_| normal(&mut rng) * scale).collect())
        .collect();
    let user_features: Vec<Vec<f64>> = (0..config.users)
        .map(|u| match config.feature_mode {
            FeatureMode::Gaussian => (0..feature_dim).map(|_| normal(&mut rng)).collect(),
            FeatureMode::Orthogonal => {
                let mut one_hot = vec![0.0; feature_dim];
                one_hot[u] = 1.0;
                one_hot
            }
        })
        .collect();

    let user_xi = user_features
        .iter()
        .map(|x| {
            coupling
                .iter()
                .zip(&global_xi)
                .map(|(row, g)| {
                    g + config.heterogeneity * crate::linalg::dot(row, x)
                })
                .collect()
        })
        .collect();

    Ok(SyntheticPopulation {
        config: config.clone(),
        model_names: (0..config.models).map(|m| format!("model_{m:02}")).collect(),
        user_names: (0..config.users).map(|u| format!("user_{u:03}")).collect(),
        global_xi,
        user_xi,
        user_features,
        coupling,
    })
}

impl SyntheticPopulation {
    /// Ground-truth probability that `a` beats `b` for `user`.
    pub fn win_probability(&self, user: usize, a: usize, b: usize) -> f64 {
        let d = self.user_xi[user][a] - self.user_xi[user][b];
        1.0 / (1.0 + (-d).exp())
    }
}

const WORD_GROUPS: [[&str; 8]; 8] = [
    ["code", "function", "compiler", "debug", "loop", "crash", "syntax", "library"],
    ["poem", "story", "character", "metaphor", "novel", "verse", "drama", "plot"],
    ["history", "empire", "war", "treaty", "dynasty", "revolution", "ancient", "civilization"],
    ["physics", "quantum", "energy", "particle", "gravity", "relativity", "atom", "wave"],
    ["recipe", "cooking", "flavor", "ingredient", "bake", "spice", "dinner", "oven"],
    ["travel", "flight", "hotel", "itinerary", "visa", "luggage", "destination", "tour"],
    ["finance", "stock", "budget", "interest", "investment", "market", "tax", "loan"],
    ["health", "exercise", "sleep", "nutrition", "stress", "doctor", "symptom", "therapy"],
];

fn synth_prompt(features: &[f64], rng: &mut ChaCha8Rng) -> String {
    // group weights: softmax over the first 8 feature dims (wrapped)
    let mut logits = [0.0f64; 8];
    for (f, &x) in features.iter().enumerate() {
        logits[f % 8] += x;
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|&l| (2.0 * (l - max)).exp()).collect();
    let total: f64 = weights.iter().sum();

    let length = rng.gen_range(4..=9);
    let mut words = Vec::with_capacity(length);
    for _ in 0..length {
        let mut target = rng.gen::<f64>() * total;
        let mut group = 7;
        for (g, &w) in weights.iter().enumerate() {
            target -= w;
            if target <= 0.0 {
                group = g;
                break;
            }
        }
        words.push(WORD_GROUPS[group][rng.gen_range(0..8)]);
    }

    // style tied to the first feature: prose vs telegraphic fragments
    let prose = features.first().copied().unwrap_or(0.0) > 0.0;
    if prose {
        let mut text = String::from("Please explain the ");
        text.push_str(&words.join(" "));
        text.push('.');
        text
    } else {
        words.join(" ")
    }
}

/// Sample a full battle log from the population's ground-truth preference
/// probabilities. Records are user-major; each user's stream is drawn from
/// its own derived seed.
pub fn sample_battles(pop: &SyntheticPopulation) -> BattleLog {
    let cfg = &pop.config;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..cfg.models {
        for j in i + 1..cfg.models {
            pairs.push((i, j));
        }
    }
    let mut records = Vec::with_capacity(cfg.users * cfg.battles_per_user);
    for u in 0..cfg.users {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_indexed_seed(cfg.seed, "battles", u as u64));
        for b in 0..cfg.battles_per_user {
            let (a, bm) = match cfg.schedule {
                Schedule::UniformPairs => pairs[rng.gen_range(0..pairs.len())],
                Schedule::RoundRobin => pairs[b % pairs.len()],
            };
            let outcome = if cfg.tie_rate > 0.0 && rng.gen::<f64>() < cfg.tie_rate {
                Outcome::Tie
            } else if rng.gen::<f64>() < pop.win_probability(u, a, bm) {
                Outcome::AWins
            } else {
                Outcome::BWins
            };
            let prompt = synth_prompt(&pop.user_features[u], &mut rng);
            records.push(RawBattle {
                user_id: pop.user_names[u].clone(),
                model_a: pop.model_names[a].clone(),
                model_b: pop.model_names[bm].clone(),
                outcome,
                prompt,
            });
        }
    }
    BattleLog::build(records).expect("non-empty synthetic log")
}

/// Grid-search maximum likelihood for logs over at most 3 models: an
/// independent oracle for the Newton fit. The grid covers mean-zero
/// log-strengths in [-5, 5], refined down to sub-1e-3 steps.
#[derive(Debug, Clone)]
pub struct BruteForceFit {
    pub model_ids: Vec<ModelId>,
    pub xi: Vec<f64>,
}

pub fn brute_force_bt(
    log: &BattleLog,
    subject: Subject,
    l2_penalty: f64,
) -> Result<BruteForceFit, SynthError> {
    // independent outcome expansion: winner-directed weighted pairs
    let mut seen: Vec<ModelId> = Vec::new();
    let mut raw: Vec<(ModelId, ModelId, f64)> = Vec::new();
    for r in &log.records {
        if let Subject::User(user) = subject {
            if r.user != user {
                continue;
            }
        }
        seen.push(r.model_a);
        seen.push(r.model_b);
        match r.outcome {
            Outcome::AWins => raw.push((r.model_a, r.model_b, 1.0)),
            Outcome::BWins => raw.push((r.model_b, r.model_a, 1.0)),
            Outcome::Tie | Outcome::BothBad => {
                raw.push((r.model_a, r.model_b, 0.5));
                raw.push((r.model_b, r.model_a, 0.5));
            }
        }
    }
    if seen.is_empty() {
        return Err(SynthError::NoBattles);
    }
    seen.sort_unstable();
    seen.dedup();
    if seen.len() > 3 {
        return Err(SynthError::TooManyModels(seen.len()));
    }
    let index = |m: ModelId| seen.iter().position(|&x| x == m).unwrap();
    let pairs: Vec<(usize, usize, f64)> = raw
        .into_iter()
        .map(|(w, l, c)| (index(w), index(l), c))
        .collect();

    let objective = |xi: &[f64]| -> f64 {
        let mut obj = 0.0;
        for &(w, l, c) in &pairs {
            let d: f64 = xi[w] - xi[l];
            // log sigmoid, stable
            obj += c * if d >= 0.0 {
                -(-d).exp().ln_1p()
            } else {
                d - d.exp().ln_1p()
            };
        }
        obj - 0.5 * l2_penalty * xi.iter().map(|x| x * x).sum::<f64>()
    };

    let xi = match seen.len() {
        1 => vec![0.0],
        2 => {
            // xi = (t, -t), exhaustive over t
            let mut best = (f64::NEG_INFINITY, 0.0);
            let mut t = -5.0;
            while t <= 5.0 + 1e-12 {
                let obj = objective(&[t, -t]);
                if obj > best.0 {
                    best = (obj, t);
                }
                t += 5e-4;
            }
            vec![best.1, -best.1]
        }
        3 => {
            // free coordinates (x, y) with z = -x-y; coarse-to-fine grid
            let eval = |x: f64, y: f64| objective(&[x, y, -x - y]);
            let mut center = (0.0, 0.0);
            let mut best = (eval(0.0, 0.0), 0.0, 0.0);
            for (half_range, step) in [(5.0f64, 0.05f64), (0.06, 0.005), (0.006, 5e-4)] {
                best = (f64::NEG_INFINITY, center.0, center.1);
                let steps = (2.0 * half_range / step).round() as i64;
                for ix in 0..=steps {
                    let x = center.0 - half_range + ix as f64 * step;
                    for iy in 0..=steps {
                        let y = center.1 - half_range + iy as f64 * step;
                        let obj = eval(x, y);
                        if obj > best.0 {
                            best = (obj, x, y);
                        }
                    }
                }
                center = (best.1, best.2);
            }
            vec![best.1, best.2, -best.1 - best.2]
        }
        _ => unreachable!(),
    };

    Ok(BruteForceFit {
        model_ids: seen,
        xi,
    })
}
