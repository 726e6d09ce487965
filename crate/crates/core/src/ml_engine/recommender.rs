use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{classification_metrics, sigmoid, split_indices, Metrics, MlError, TrainConfig, TrainedModel};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interaction {
    pub user: String,
    pub item: String,
}

impl Interaction {
    pub fn new(user: impl Into<String>, item: impl Into<String>) -> Self {
        Self { user: user.into(), item: item.into() }
    }
}

/// Embedding recommender scoring a pair as `σ(w·(u ⊙ v) + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommenderModel {
    pub user_vocab: Vec<String>,
    pub item_vocab: Vec<String>,
    pub dim: usize,
    /// `user_vocab.len() × dim`, row-major.
    pub user_factors: Vec<f64>,
    /// `item_vocab.len() × dim`, row-major.
    pub item_factors: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Sorted item indices each user interacted with.
    pub seen: Vec<Vec<u32>>,
    pub config: TrainConfig,
}

/// Dense gradient of the summed batch loss with respect to every parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RecommenderGradient {
    pub user_factors: Vec<f64>,
    pub item_factors: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl RecommenderModel {
    fn user_row(&self, u: usize) -> &[f64] {
        &self.user_factors[u * self.dim..(u + 1) * self.dim]
    }

    fn item_row(&self, i: usize) -> &[f64] {
        &self.item_factors[i * self.dim..(i + 1) * self.dim]
    }

    fn logit(&self, u: usize, i: usize) -> f64 {
        let (pu, qi) = (self.user_row(u), self.item_row(i));
        self.bias + (0..self.dim).map(|k| self.weights[k] * pu[k] * qi[k]).sum::<f64>()
    }

    /// Preference probability for a (user index, item index) pair.
    pub fn score(&self, u: usize, i: usize) -> f64 {
        sigmoid(self.logit(u, i))
    }

    pub fn user_index(&self, user: &str) -> Option<usize> {
        self.user_vocab.binary_search_by(|v| v.as_str().cmp(user)).ok()
    }

    pub fn item_index(&self, item: &str) -> Option<usize> {
        self.item_vocab.binary_search_by(|v| v.as_str().cmp(item)).ok()
    }

    /// Binary cross-entropy summed over `(user, item, label)` triples, and its gradient.
    pub fn loss_and_gradient(&self, batch: &[(usize, usize, f64)]) -> (f64, RecommenderGradient) {
        let d = self.dim;
        let mut g = RecommenderGradient {
            user_factors: vec![0.0; self.user_factors.len()],
            item_factors: vec![0.0; self.item_factors.len()],
            weights: vec![0.0; d],
            bias: 0.0,
        };
        let mut loss = 0.0;
        for &(u, i, y) in batch {
            let z = self.logit(u, i);
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            loss += softplus - y * z;
            let err = sigmoid(z) - y;
            let (pu, qi) = (self.user_row(u), self.item_row(i));
            for k in 0..d {
                g.user_factors[u * d + k] += err * self.weights[k] * qi[k];
                g.item_factors[i * d + k] += err * self.weights[k] * pu[k];
                g.weights[k] += err * pu[k] * qi[k];
            }
            g.bias += err;
        }
        (loss, g)
    }

    fn apply(&mut self, g: &RecommenderGradient, lr: f64) {
        let step = |p: &mut [f64], d: &[f64]| p.iter_mut().zip(d).for_each(|(a, b)| *a -= lr * b);
        step(&mut self.user_factors, &g.user_factors);
        step(&mut self.item_factors, &g.item_factors);
        step(&mut self.weights, &g.weights);
        self.bias -= lr * g.bias;
    }

    pub fn recommend(&self, user_id: &str, k: usize) -> Result<Vec<(String, f64)>, MlError> {
        let u = self.user_index(user_id).ok_or_else(|| MlError::UnknownUser(user_id.to_string()))?;
        let seen = &self.seen[u];
        let mut scored: Vec<(usize, f64)> = (0..self.item_vocab.len())
            .filter(|i| seen.binary_search(&(*i as u32)).is_err())
            .map(|i| (i, self.score(u, i)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.item_vocab[a.0].cmp(&self.item_vocab[b.0]))
        });
        scored.truncate(k);
        Ok(scored.into_iter().map(|(i, s)| (self.item_vocab[i].clone(), s)).collect())
    }
}

/// Trains on observed pairs plus one uniformly sampled unobserved item per
/// positive (same user), using mini-batch gradient descent on binary
/// cross-entropy. Metrics come from a held-out share of the labeled pairs.
pub fn train_recommender(pairs: &[Interaction], config: &TrainConfig) -> Result<(TrainedModel, Metrics), MlError> {
    let user_vocab: Vec<String> = pairs.iter().map(|p| p.user.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let item_vocab: Vec<String> = pairs.iter().map(|p| p.item.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    if user_vocab.len() < 2 || item_vocab.len() < 2 {
        return Err(MlError::VocabTooSmall { users: user_vocab.len(), items: item_vocab.len() });
    }
    let uidx: BTreeMap<&str, usize> = user_vocab.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let iidx: BTreeMap<&str, usize> = item_vocab.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let positives: BTreeSet<(usize, usize)> =
        pairs.iter().map(|p| (uidx[p.user.as_str()], iidx[p.item.as_str()])).collect();

    let mut seen = vec![Vec::new(); user_vocab.len()];
    for &(u, i) in &positives {
        seen[u].push(i as u32);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_items = item_vocab.len();
    let mut labeled: Vec<(usize, usize, f64)> = Vec::with_capacity(positives.len() * 2);
    for &(u, i) in &positives {
        labeled.push((u, i, 1.0));
        if seen[u].len() < n_items {
            let neg = loop {
                let j = rng.random_range(0..n_items);
                if seen[u].binary_search(&(j as u32)).is_err() {
                    break j;
                }
            };
            labeled.push((u, neg, 0.0));
        }
    }
    labeled.shuffle(&mut rng);
    let (train_idx, test_idx) = split_indices(labeled.len(), config.test_fraction, config.seed);
    let mut train: Vec<(usize, usize, f64)> = train_idx.iter().map(|&i| labeled[i]).collect();
    let test: Vec<(usize, usize, f64)> = test_idx.iter().map(|&i| labeled[i]).collect();

    let d = config.embedding_dim.max(1);
    let normal = Normal::new(0.0, config.init_std.max(1e-6)).expect("positive std");
    let mut model = RecommenderModel {
        user_factors: (0..user_vocab.len() * d).map(|_| normal.sample(&mut rng)).collect(),
        item_factors: (0..n_items * d).map(|_| normal.sample(&mut rng)).collect(),
        weights: vec![1.0; d],
        bias: 0.0,
        user_vocab,
        item_vocab,
        dim: d,
        seen,
        config: config.clone(),
    };
    let batch = config.batch_size.max(1);
    for _ in 0..config.epochs {
        train.shuffle(&mut rng);
        for chunk in train.chunks(batch) {
            let (_, g) = model.loss_and_gradient(chunk);
            model.apply(&g, config.learning_rate);
        }
    }
    let params_finite = model
        .user_factors
        .iter()
        .chain(&model.item_factors)
        .chain(&model.weights)
        .chain(std::iter::once(&model.bias))
        .all(|v| v.is_finite());
    if !params_finite {
        return Err(MlError::Diverged);
    }
    let labels: Vec<f64> = test.iter().map(|t| t.2).collect();
    let probs: Vec<f64> = test.iter().map(|&(u, i, _)| model.score(u, i)).collect();
    Ok((TrainedModel::Recommender(model), classification_metrics(&labels, &probs)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml_engine::Algorithm;

    /// `events` interaction rows drawn with replacement from two blocks:
    /// users `0..u` with items `0..m`, users `u..2u` with items `m..2m`.
    fn block_events(users_per_block: usize, items_per_block: usize, events: usize, seed: u64) -> Vec<Interaction> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..events)
            .map(|_| {
                let u = rng.random_range(0..2 * users_per_block);
                let i = (u / users_per_block) * items_per_block + rng.random_range(0..items_per_block);
                Interaction::new(format!("u{u:02}"), format!("i{i:02}"))
            })
            .collect()
    }

    fn item_block(item: &str, items_per_block: usize) -> usize {
        item[1..].parse::<usize>().unwrap() / items_per_block
    }

    #[test]
    fn block_structure_is_learned() {
        let pairs = block_events(10, 10, 400, 42);
        let cfg = TrainConfig::for_algorithm(Algorithm::Recommender);
        let (_, metrics) = train_recommender(&pairs, &cfg).unwrap();
        assert!(metrics["accuracy"] >= 0.9, "{metrics:?}");
        for v in metrics.values() {
            assert!((0.0..=1.0).contains(v));
        }
    }

    #[test]
    fn recommendations_stay_in_block() {
        // sparser blocks leave every user at least five unseen in-block items
        let pairs = block_events(10, 20, 200, 42);
        let cfg = TrainConfig::for_algorithm(Algorithm::Recommender);
        let (model, _) = train_recommender(&pairs, &cfg).unwrap();
        let TrainedModel::Recommender(m) = &model else { panic!() };
        let u = m.user_index("u03").unwrap();
        assert!(m.seen[u].iter().filter(|&&i| item_block(&m.item_vocab[i as usize], 20) == 0).count() <= 15);
        let recs = super::super::recommend(&model, "u03", 5).unwrap();
        assert_eq!(recs.len(), 5);
        assert!(recs.iter().all(|(item, _)| item_block(item, 20) == 0), "{recs:?}");
        assert!(recs.windows(2).all(|w| w[0].1 >= w[1].1));
    }

    #[test]
    fn training_is_deterministic() {
        let pairs = block_events(4, 5, 60, 1);
        let cfg = TrainConfig::for_algorithm(Algorithm::Recommender);
        assert_eq!(train_recommender(&pairs, &cfg).unwrap(), train_recommender(&pairs, &cfg).unwrap());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let pairs: Vec<Interaction> = [("a", "x"), ("a", "y"), ("b", "y"), ("b", "z"), ("c", "x")]
            .iter()
            .map(|(u, i)| Interaction::new(*u, *i))
            .collect();
        let cfg = TrainConfig {
            epochs: 3,
            init_std: 0.5,
            embedding_dim: 4,
            ..TrainConfig::for_algorithm(Algorithm::Recommender)
        };
        let (TrainedModel::Recommender(model), _) = train_recommender(&pairs, &cfg).unwrap() else { panic!() };
        let batch = vec![(0, 0, 1.0), (0, 2, 0.0), (1, 1, 1.0), (2, 1, 0.0), (2, 0, 1.0), (1, 0, 0.0)];
        let (_, g) = model.loss_and_gradient(&batch);
        let h = 1e-5;
        let rel = |a: f64, n: f64| (a - n).abs() / a.abs().max(n.abs()).max(1e-7);
        let check = |perturb: &dyn Fn(&mut RecommenderModel, f64), analytic: f64| {
            let mut p = model.clone();
            perturb(&mut p, h);
            let mut m = model.clone();
            perturb(&mut m, -h);
            let num = (p.loss_and_gradient(&batch).0 - m.loss_and_gradient(&batch).0) / (2.0 * h);
            assert!(rel(analytic, num) < 1e-4, "{analytic} vs {num}");
        };
        for j in 0..model.user_factors.len() {
            check(&|m: &mut RecommenderModel, d| m.user_factors[j] += d, g.user_factors[j]);
        }
        for j in 0..model.item_factors.len() {
            check(&|m: &mut RecommenderModel, d| m.item_factors[j] += d, g.item_factors[j]);
        }
        for j in 0..model.weights.len() {
            check(&|m: &mut RecommenderModel, d| m.weights[j] += d, g.weights[j]);
        }
        check(&|m: &mut RecommenderModel, d| m.bias += d, g.bias);
    }

    #[test]
    fn single_user_is_too_small() {
        let pairs = vec![Interaction::new("u", "a"), Interaction::new("u", "b")];
        let cfg = TrainConfig::for_algorithm(Algorithm::Recommender);
        assert!(matches!(train_recommender(&pairs, &cfg), Err(MlError::VocabTooSmall { users: 1, items: 2 })));
    }

    #[test]
    fn user_with_everything_seen_gets_nothing() {
        let pairs: Vec<Interaction> =
            [("a", "x"), ("a", "y"), ("b", "x")].iter().map(|(u, i)| Interaction::new(*u, *i)).collect();
        let cfg = TrainConfig::for_algorithm(Algorithm::Recommender);
        let (model, _) = train_recommender(&pairs, &cfg).unwrap();
        assert!(super::super::recommend(&model, "a", 5).unwrap().is_empty());
        assert_eq!(super::super::recommend(&model, "b", 5).unwrap().len(), 1);
        assert!(matches!(super::super::recommend(&model, "9999", 5), Err(MlError::UnknownUser(_))));
    }
}
