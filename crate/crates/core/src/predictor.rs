// SPDX-License-Identifier: Apache-2.0

//! Popularity predictors trained by stochastic gradient descent.
//!
//! * LinearMRF: `P = α·E + β`, where `E` is the community energy.
//! * EdgeMRF: `P = Σ ω_e·E_e + ρ`, one weight per community edge.
//!
//! Both minimise `l = 1/(2n) Σ (P − real)²`. Training runs on z-scored
//! features and targets (statistics from the training set) and the learned
//! parameters are mapped back, so callers only ever see raw-scale models.

use std::collections::HashMap;
use std::fmt;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::energy::{self, EnergyError, EnergyFunction, EnergyModel};
use crate::graph::CommunityGraph;
use crate::par::{self, Exec};
use crate::stats::{self, StatsError};
use crate::topics::Topic;

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("no samples")]
    Empty,
    #[error("sample has {got} edge energies, model has {expected} edges")]
    EdgeSetMismatch { expected: usize, got: usize },
    #[error("non-finite gradient for {param}")]
    NonFiniteGradient { param: String },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("need at least 2 topics to split, got {0}")]
    TooFewTopics(usize),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    Linear,
    Edge,
}

impl PredictorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::Linear => "linear",
            PredictorKind::Edge => "edge",
        }
    }

    /// Name used in reports.
    pub fn label(self) -> &'static str {
        match self {
            PredictorKind::Linear => "LinearMRF",
            PredictorKind::Edge => "EdgeMRF",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(PredictorKind::Linear),
            "edge" => Ok(PredictorKind::Edge),
            other => Err(format!("unknown predictor {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearModel {
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeModel {
    /// Community edges, aligned with `weights` and with the samples'
    /// `edge_energies`.
    pub edges: Vec<(String, String)>,
    pub weights: Vec<f64>,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Edge(EdgeModel),
}

/// One topic's features and real popularity.
#[derive(Clone, Debug, PartialEq)]
pub struct TopicSample {
    pub hashtag: String,
    /// Per-edge clique energies in community edge order.
    pub edge_energies: Vec<f64>,
    /// Community energy, the sum of `edge_energies`.
    pub total: f64,
    pub target: f64,
}

impl TopicSample {
    pub fn new(hashtag: impl Into<String>, edge_energies: Vec<f64>, target: f64) -> Self {
        let total = par::pairwise_sum(&edge_energies);
        TopicSample {
            hashtag: hashtag.into(),
            edge_energies,
            total,
            target,
        }
    }
}

pub fn predict_linear(model: &LinearModel, energy: f64) -> f64 {
    model.alpha * energy + model.beta
}

pub fn predict_edge(model: &EdgeModel, sample: &TopicSample) -> Result<f64, PredictError> {
    if sample.edge_energies.len() != model.weights.len() {
        return Err(PredictError::EdgeSetMismatch {
            expected: model.weights.len(),
            got: sample.edge_energies.len(),
        });
    }
    let dot: f64 = model
        .weights
        .iter()
        .zip(&sample.edge_energies)
        .map(|(w, e)| w * e)
        .sum();
    Ok(dot + model.rho)
}

impl Model {
    pub fn kind(&self) -> PredictorKind {
        match self {
            Model::Linear(_) => PredictorKind::Linear,
            Model::Edge(_) => PredictorKind::Edge,
        }
    }

    pub fn predict(&self, sample: &TopicSample) -> Result<f64, PredictError> {
        match self {
            Model::Linear(m) => Ok(predict_linear(m, sample.total)),
            Model::Edge(m) => predict_edge(m, sample),
        }
    }

    /// Number of trainable parameters (slopes plus the intercept).
    pub fn parameter_count(&self) -> usize {
        match self {
            Model::Linear(_) => 2,
            Model::Edge(m) => m.weights.len() + 1,
        }
    }

    fn all_finite(&self) -> bool {
        match self {
            Model::Linear(m) => m.alpha.is_finite() && m.beta.is_finite(),
            Model::Edge(m) => m.rho.is_finite() && m.weights.iter().all(|w| w.is_finite()),
        }
    }
}

/// `1/(2n) Σ (P − real)²`.
pub fn loss(model: &Model, samples: &[TopicSample]) -> Result<f64, PredictError> {
    if samples.is_empty() {
        return Err(PredictError::Empty);
    }
    let mut sum = 0.0;
    for s in samples {
        let e = model.predict(s)? - s.target;
        sum += e * e;
    }
    Ok(sum / (2.0 * samples.len() as f64))
}

/// Gradient of [`loss`]; `slopes` holds `∂l/∂α` (linear) or `∂l/∂ω_e` (edge),
/// `intercept` holds `∂l/∂β` or `∂l/∂ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub slopes: Vec<f64>,
    pub intercept: f64,
}

fn residuals(model: &Model, samples: &[TopicSample]) -> Result<Vec<f64>, PredictError> {
    samples
        .iter()
        .map(|s| Ok(model.predict(s)? - s.target))
        .collect()
}

/// Below this many multiply-adds the gradient is accumulated inline.
const PARALLEL_GRADIENT_WORK: usize = 1 << 14;

fn gradient_with(model: &Model, samples: &[TopicSample], exec: Exec) -> Result<Gradient, PredictError> {
    if samples.is_empty() {
        return Err(PredictError::Empty);
    }
    let n = samples.len() as f64;
    let res = residuals(model, samples)?;
    let intercept = res.iter().sum::<f64>() / n;
    let slopes = match model {
        Model::Linear(_) => {
            vec![res.iter().zip(samples).map(|(r, s)| r * s.total).sum::<f64>() / n]
        }
        Model::Edge(m) => {
            let edges: Vec<usize> = (0..m.weights.len()).collect();
            let exec = if edges.len() * samples.len() >= PARALLEL_GRADIENT_WORK {
                exec
            } else {
                Exec::Sequential
            };
            // Each parameter sums over samples in input order, so the result
            // does not depend on the execution policy.
            par::map(exec, &edges, |&e| {
                res.iter()
                    .zip(samples)
                    .map(|(r, s)| r * s.edge_energies[e])
                    .sum::<f64>()
                    / n
            })
        }
    };
    Ok(Gradient { slopes, intercept })
}

pub fn gradient(model: &Model, samples: &[TopicSample]) -> Result<Gradient, PredictError> {
    gradient_with(model, samples, Exec::Sequential)
}

/// `∂l/∂ω_e = (1/n) Σ (P − real)·E_e`.
pub fn gradient_edge(model: &EdgeModel, samples: &[TopicSample], edge: usize) -> Result<f64, PredictError> {
    if samples.is_empty() {
        return Err(PredictError::Empty);
    }
    let mut sum = 0.0;
    for s in samples {
        sum += (predict_edge(model, s)? - s.target) * s.edge_energies[edge];
    }
    Ok(sum / samples.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init {
    Zeros,
    /// Every parameter drawn from U[lo, hi) with the config seed.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub init: Init,
    pub seed: u64,
    pub shuffle: bool,
    /// Samples per SGD step; 0 means full batch.
    pub batch_size: usize,
    /// Stop once the epoch loss (on the standardized scale) improves by
    /// less than this. `None` always runs every epoch.
    pub early_stop: Option<f64>,
    /// L2 penalty on the slopes, applied on the standardized scale.
    pub l2: f64,
    pub standardize: bool,
    pub exec: Exec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            epochs: 500,
            init: Init::Zeros,
            seed: 0,
            shuffle: true,
            batch_size: 1,
            early_stop: Some(1e-9),
            l2: 0.0,
            standardize: true,
            exec: Exec::default(),
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), PredictError> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(PredictError::InvalidConfig(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(PredictError::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(PredictError::InvalidConfig(format!("bad l2 penalty {}", self.l2)));
        }
        if let Init::Uniform { lo, hi } = self.init {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(PredictError::InvalidConfig(format!("bad init range [{lo}, {hi})")));
            }
        }
        Ok(())
    }
}

fn apply_step(model: &mut Model, batch: &[TopicSample], eta: f64, l2: f64, exec: Exec) -> Result<(), PredictError> {
    let grad = gradient_with(model, batch, exec)?;
    if !grad.intercept.is_finite() {
        return Err(PredictError::NonFiniteGradient {
            param: "intercept".into(),
        });
    }
    if let Some(i) = grad.slopes.iter().position(|g| !g.is_finite()) {
        return Err(PredictError::NonFiniteGradient {
            param: format!("slope {i}"),
        });
    }
    match model {
        Model::Linear(m) => {
            m.alpha -= eta * (grad.slopes[0] + l2 * m.alpha);
            m.beta -= eta * grad.intercept;
        }
        Model::Edge(m) => {
            for (w, g) in m.weights.iter_mut().zip(&grad.slopes) {
                *w -= eta * (g + l2 * *w);
            }
            m.rho -= eta * grad.intercept;
        }
    }
    Ok(())
}

/// One update `θ ← θ − η·∂l/∂θ` on `batch`, in the model's own scale.
pub fn sgd_step(model: &Model, batch: &[TopicSample], config: &TrainConfig) -> Result<Model, PredictError> {
    let mut next = model.clone();
    apply_step(&mut next, batch, config.learning_rate, config.l2, config.exec)?;
    Ok(next)
}

/// z-score parameters for features and target.
#[derive(Clone, Debug, PartialEq)]
struct Scaler {
    feature_mean: Vec<f64>,
    feature_scale: Vec<f64>,
    target_mean: f64,
    target_scale: f64,
}

fn mean_and_scale(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

impl Scaler {
    fn identity(kind: PredictorKind, edges: usize) -> Self {
        let p = match kind {
            PredictorKind::Linear => 1,
            PredictorKind::Edge => edges,
        };
        Scaler {
            feature_mean: vec![0.0; p],
            feature_scale: vec![1.0; p],
            target_mean: 0.0,
            target_scale: 1.0,
        }
    }

    fn fit(kind: PredictorKind, samples: &[TopicSample]) -> Self {
        let n = samples.len() as f64;
        let (feature_mean, feature_scale) = match kind {
            PredictorKind::Linear => {
                let (m, s) = mean_and_scale(samples.iter().map(|s| s.total), n);
                (vec![m], vec![s])
            }
            PredictorKind::Edge => {
                // An extra 1/√p keeps each sample's squared norm near 1, so a
                // per-sample step stays stable however many edges there are.
                let p = samples[0].edge_energies.len();
                let root_p = (p.max(1) as f64).sqrt();
                (0..p)
                    .map(|e| {
                        let (m, s) = mean_and_scale(samples.iter().map(|s| s.edge_energies[e]), n);
                        (m, s * root_p)
                    })
                    .unzip()
            }
        };
        let (target_mean, target_scale) = mean_and_scale(samples.iter().map(|s| s.target), n);
        Scaler {
            feature_mean,
            feature_scale,
            target_mean,
            target_scale,
        }
    }

    fn sample(&self, kind: PredictorKind, s: &TopicSample) -> TopicSample {
        let target = (s.target - self.target_mean) / self.target_scale;
        match kind {
            PredictorKind::Linear => TopicSample {
                hashtag: s.hashtag.clone(),
                edge_energies: Vec::new(),
                total: (s.total - self.feature_mean[0]) / self.feature_scale[0],
                target,
            },
            PredictorKind::Edge => {
                let z: Vec<f64> = s
                    .edge_energies
                    .iter()
                    .zip(self.feature_mean.iter().zip(&self.feature_scale))
                    .map(|(x, (m, sd))| (x - m) / sd)
                    .collect();
                TopicSample {
                    hashtag: s.hashtag.clone(),
                    total: par::pairwise_sum(&z),
                    edge_energies: z,
                    target,
                }
            }
        }
    }

    fn to_standard(&self, model: &Model) -> Model {
        let (my, sy) = (self.target_mean, self.target_scale);
        match model {
            Model::Linear(m) => {
                let (mx, sx) = (self.feature_mean[0], self.feature_scale[0]);
                Model::Linear(LinearModel {
                    alpha: m.alpha * sx / sy,
                    beta: (m.beta + m.alpha * mx - my) / sy,
                })
            }
            Model::Edge(m) => {
                let shift: f64 = m.weights.iter().zip(&self.feature_mean).map(|(w, mu)| w * mu).sum();
                Model::Edge(EdgeModel {
                    edges: m.edges.clone(),
                    weights: m
                        .weights
                        .iter()
                        .zip(&self.feature_scale)
                        .map(|(w, sd)| w * sd / sy)
                        .collect(),
                    rho: (m.rho + shift - my) / sy,
                })
            }
        }
    }

    fn to_raw(&self, model: &Model) -> Model {
        let (my, sy) = (self.target_mean, self.target_scale);
        match model {
            Model::Linear(m) => {
                let (mx, sx) = (self.feature_mean[0], self.feature_scale[0]);
                let alpha = m.alpha * sy / sx;
                Model::Linear(LinearModel {
                    alpha,
                    beta: sy * m.beta + my - alpha * mx,
                })
            }
            Model::Edge(m) => {
                let weights: Vec<f64> = m
                    .weights
                    .iter()
                    .zip(&self.feature_scale)
                    .map(|(w, sd)| w * sy / sd)
                    .collect();
                let shift: f64 = weights.iter().zip(&self.feature_mean).map(|(w, mu)| w * mu).sum();
                Model::Edge(EdgeModel {
                    edges: m.edges.clone(),
                    weights,
                    rho: sy * m.rho + my - shift,
                })
            }
        }
    }
}

fn initial_model(kind: PredictorKind, edges: &[(String, String)], init: Init, rng: &mut ChaCha8Rng) -> Model {
    let mut draw = || match init {
        Init::Zeros => 0.0,
        Init::Uniform { lo, hi } => rng.random_range(lo..hi),
    };
    match kind {
        PredictorKind::Linear => {
            let alpha = draw();
            Model::Linear(LinearModel { alpha, beta: draw() })
        }
        PredictorKind::Edge => {
            let weights: Vec<f64> = edges.iter().map(|_| draw()).collect();
            Model::Edge(EdgeModel {
                edges: edges.to_vec(),
                weights,
                rho: draw(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: Model,
    /// Raw-scale training loss after each epoch. If the last epoch made
    /// things worse its entry is the loss of the returned (earlier) model.
    pub loss_curve: Vec<f64>,
    pub stopped_early: bool,
}

/// Trains a predictor by SGD. `edges` names the community edges for an
/// EdgeMRF model and is ignored for LinearMRF.
pub fn train(
    kind: PredictorKind,
    edges: &[(String, String)],
    samples: &[TopicSample],
    config: &TrainConfig,
) -> Result<TrainOutcome, PredictError> {
    config.validate()?;
    if samples.is_empty() {
        return Err(PredictError::Empty);
    }
    if kind == PredictorKind::Edge {
        if let Some(s) = samples.iter().find(|s| s.edge_energies.len() != edges.len()) {
            return Err(PredictError::EdgeSetMismatch {
                expected: edges.len(),
                got: s.edge_energies.len(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let raw_init = initial_model(kind, edges, config.init, &mut rng);
    let scaler = if config.standardize {
        Scaler::fit(kind, samples)
    } else {
        Scaler::identity(kind, edges.len())
    };
    let scaled: Vec<TopicSample> = samples.iter().map(|s| scaler.sample(kind, s)).collect();
    let mut model = scaler.to_standard(&raw_init);

    let batch_size = if config.batch_size == 0 {
        scaled.len()
    } else {
        config.batch_size.min(scaled.len())
    };
    let mut order: Vec<usize> = (0..scaled.len()).collect();
    let mut batch: Vec<TopicSample> = Vec::with_capacity(batch_size);
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut previous = loss(&model, &scaled)?;
    let mut stopped_early = false;

    for epoch in 1..=config.epochs {
        let before = model.clone();
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        for chunk in order.chunks(batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| scaled[i].clone()));
            apply_step(&mut model, &batch, config.learning_rate, config.l2, config.exec)?;
        }
        let current = loss(&model, &scaled)?;
        let raw = scaler.to_raw(&model);
        let raw_loss = loss(&raw, samples)?;
        if !current.is_finite() || !raw_loss.is_finite() || !raw.all_finite() {
            return Err(PredictError::Diverged {
                epoch,
                loss: raw_loss,
            });
        }
        loss_curve.push(raw_loss);
        if let Some(tol) = config.early_stop {
            if previous - current < tol {
                stopped_early = epoch < config.epochs;
                if current > previous {
                    // keep the better parameters from the previous epoch
                    if let Some(last) = loss_curve.last_mut() {
                        *last = loss(&scaler.to_raw(&before), samples)?;
                    }
                    model = before;
                }
                break;
            }
        }
        previous = current;
    }

    Ok(TrainOutcome {
        model: scaler.to_raw(&model),
        loss_curve,
        stopped_early,
    })
}

/// Ordinary least squares for `P = α·E + β`. Verification oracle for SGD.
pub fn fit_linear_least_squares(samples: &[TopicSample]) -> Result<LinearModel, PredictError> {
    if samples.len() < 2 {
        return Err(PredictError::Empty);
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.total).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let (mx, my) = (stats::mean(&xs), stats::mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(StatsError::ConstantSeries("energy").into());
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let alpha = sxy / sxx;
    Ok(LinearModel {
        alpha,
        beta: my - alpha * mx,
    })
}

/// Uniform random partition with `⌈n/2⌉` train and `⌊n/2⌋` test items.
/// Both halves keep the input order.
pub fn split_train_test<T: Clone>(items: &[T], seed: u64) -> Result<(Vec<T>, Vec<T>), PredictError> {
    let n = items.len();
    if n < 2 {
        return Err(PredictError::TooFewTopics(n));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n.div_ceil(2);
    let mut train_idx = idx[..n_train].to_vec();
    let mut test_idx = idx[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((
        train_idx.into_iter().map(|i| items[i].clone()).collect(),
        test_idx.into_iter().map(|i| items[i].clone()).collect(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub hashtag: String,
    pub predicted: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub rse: f64,
    pub r_squared: f64,
    pub residuals: Vec<Residual>,
}

pub fn evaluate(model: &Model, samples: &[TopicSample]) -> Result<Evaluation, PredictError> {
    if samples.is_empty() {
        return Err(PredictError::Empty);
    }
    let predicted: Vec<f64> = samples.iter().map(|s| model.predict(s)).collect::<Result<_, _>>()?;
    let actual: Vec<f64> = samples.iter().map(|s| s.target).collect();
    let rse = stats::rse(&predicted, &actual)?;
    Ok(Evaluation {
        rse,
        r_squared: 1.0 - rse,
        residuals: samples
            .iter()
            .zip(predicted)
            .map(|(s, p)| Residual {
                hashtag: s.hashtag.clone(),
                predicted: p,
                actual: s.target,
            })
            .collect(),
    })
}

/// Per-topic samples: MRF edge energies under `function` and the topic's
/// popularity as target.
pub fn build_samples(
    topics: &[Topic],
    community: &CommunityGraph,
    vectors: &[crate::sentiment::SentimentVector],
    m: usize,
    function: EnergyFunction,
    exec: Exec,
) -> Result<Vec<TopicSample>, PredictError> {
    let mut by_topic: HashMap<&str, HashMap<&str, &[f64]>> = HashMap::new();
    for v in vectors {
        by_topic
            .entry(v.topic.as_str())
            .or_default()
            .insert(v.user.as_str(), v.values.as_slice());
    }
    let empty = HashMap::new();
    topics
        .iter()
        .map(|t| {
            let vs = by_topic.get(t.hashtag.as_str()).unwrap_or(&empty);
            let terms = energy::edge_terms(community, vs, m, EnergyModel::Mrf, function, exec)?;
            Ok(TopicSample::new(t.hashtag.clone(), terms, t.popularity as f64))
        })
        .collect()
}

/// Model file: `kind<TAB>linear` then `alpha<TAB>beta`; or `kind<TAB>edge`,
/// `rho<TAB>value`, then one `user_i<TAB>user_j<TAB>omega` row per edge.
pub fn model_to_tsv(model: &Model) -> String {
    let mut out = String::new();
    match model {
        Model::Linear(m) => {
            let _ = writeln!(out, "kind\tlinear");
            let _ = writeln!(out, "{}\t{}", m.alpha, m.beta);
        }
        Model::Edge(m) => {
            let _ = writeln!(out, "kind\tedge");
            let _ = writeln!(out, "rho\t{}", m.rho);
            for ((a, b), w) in m.edges.iter().zip(&m.weights) {
                let _ = writeln!(out, "{a}\t{b}\t{w}");
            }
        }
    }
    out
}

pub fn read_model(reader: impl BufRead) -> Result<Model, PredictError> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
    let mut next = |what: &str| -> Result<(usize, Vec<String>), PredictError> {
        let (line, text) = lines.next().ok_or_else(|| PredictError::Parse {
            line: 0,
            reason: format!("missing {what}"),
        })?;
        let text = text.map_err(|e| PredictError::Parse {
            line,
            reason: e.to_string(),
        })?;
        Ok((line, text.trim_end_matches('\r').split('\t').map(String::from).collect()))
    };
    let num = |line: usize, s: &str| -> Result<f64, PredictError> {
        s.parse::<f64>().map_err(|e| PredictError::Parse {
            line,
            reason: format!("{s:?}: {e}"),
        })
    };
    let (line, header) = next("header")?;
    match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["kind", "linear"] => {
            let (line, f) = next("alpha/beta row")?;
            let [a, b] = &f[..] else {
                return Err(PredictError::Parse {
                    line,
                    reason: "expected alpha<TAB>beta".into(),
                });
            };
            Ok(Model::Linear(LinearModel {
                alpha: num(line, a)?,
                beta: num(line, b)?,
            }))
        }
        ["kind", "edge"] => {
            let (line, f) = next("rho row")?;
            let rho = match &f[..] {
                [k, v] if k == "rho" => num(line, v)?,
                _ => {
                    return Err(PredictError::Parse {
                        line,
                        reason: "expected rho<TAB>value".into(),
                    })
                }
            };
            let mut edges = Vec::new();
            let mut weights = Vec::new();
            while let Ok((line, f)) = next("edge row") {
                let [a, b, w] = &f[..] else {
                    return Err(PredictError::Parse {
                        line,
                        reason: "expected user_i<TAB>user_j<TAB>omega".into(),
                    });
                };
                edges.push((a.clone(), b.clone()));
                weights.push(num(line, w)?);
            }
            Ok(Model::Edge(EdgeModel { edges, weights, rho }))
        }
        _ => Err(PredictError::Parse {
            line,
            reason: "expected kind<TAB>linear|edge header".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(energies: &[f64], target: f64) -> TopicSample {
        TopicSample::new("t", energies.to_vec(), target)
    }

    fn edge_model(weights: &[f64], rho: f64) -> EdgeModel {
        EdgeModel {
            edges: (0..weights.len()).map(|i| (format!("a{i}"), format!("b{i}"))).collect(),
            weights: weights.to_vec(),
            rho,
        }
    }

    #[test]
    fn linear_prediction() {
        assert_eq!(predict_linear(&LinearModel { alpha: 1.0, beta: 0.0 }, 5.0), 5.0);
        assert_eq!(predict_linear(&LinearModel { alpha: 0.0, beta: 4.0 }, 99.0), 4.0);
        assert_eq!(predict_linear(&LinearModel { alpha: 2.0, beta: 3.0 }, 10.0), 23.0);
    }

    #[test]
    fn edge_prediction() {
        let s = sample(&[0.5, 0.25, 1.0], 0.0);
        assert_eq!(predict_edge(&edge_model(&[0.0; 3], 7.0), &s).unwrap(), 7.0);
        assert_eq!(predict_edge(&edge_model(&[1.0; 3], 2.0), &s).unwrap(), s.total + 2.0);
        assert_eq!(
            predict_edge(&edge_model(&[1.0; 2], 0.0), &s).unwrap_err(),
            PredictError::EdgeSetMismatch { expected: 2, got: 3 }
        );
    }

    #[test]
    fn loss_arithmetic() {
        let m = Model::Linear(LinearModel { alpha: 1.0, beta: 0.0 });
        assert_eq!(loss(&m, &[sample(&[3.0], 3.0)]).unwrap(), 0.0);
        assert_eq!(loss(&m, &[sample(&[3.0], 1.0)]).unwrap(), 2.0);
        assert_eq!(loss(&m, &[]).unwrap_err(), PredictError::Empty);
    }

    #[test]
    fn gradient_single_sample_trace() {
        // P − real = 2 and E = 0.5 gives 1.0
        let m = edge_model(&[0.0], 2.0);
        let s = sample(&[0.5], 0.0);
        assert_eq!(gradient_edge(&m, std::slice::from_ref(&s), 0).unwrap(), 1.0);
        let g = gradient(&Model::Edge(m), &[s]).unwrap();
        assert_eq!(g.intercept, 2.0);
    }

    #[test]
    fn gradient_vanishes_at_perfect_fit() {
        let m = Model::Edge(edge_model(&[2.0, -1.0], 0.5));
        let samples: Vec<TopicSample> = [[0.1, 0.2], [0.9, 0.4], [0.3, 0.3]]
            .iter()
            .map(|e| sample(e, 2.0 * e[0] - e[1] + 0.5))
            .collect();
        let g = gradient(&m, &samples).unwrap();
        assert!(g.slopes.iter().all(|x| x.abs() < 1e-15));
        assert!(g.intercept.abs() < 1e-15);
    }

    #[test]
    fn sgd_step_moves_against_gradient() {
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..Default::default()
        };
        // prediction 1, target 0, feature 1: both gradients are 1
        let m = Model::Linear(LinearModel { alpha: 1.0, beta: 0.0 });
        let next = sgd_step(&m, &[sample(&[1.0], 0.0)], &cfg).unwrap();
        let Model::Linear(l) = next else { unreachable!() };
        assert!((l.alpha - 0.9).abs() < 1e-15);
        assert!((l.beta + 0.1).abs() < 1e-15);

        let fixed = Model::Linear(LinearModel { alpha: 2.0, beta: 1.0 });
        let perfect = sample(&[3.0], 7.0);
        assert_eq!(sgd_step(&fixed, &[perfect], &cfg).unwrap(), fixed);
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let m = Model::Linear(LinearModel { alpha: f64::MAX, beta: 0.0 });
        let err = sgd_step(&m, &[sample(&[f64::MAX], 0.0)], &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, PredictError::NonFiniteGradient { .. }));
    }

    #[test]
    fn zero_learning_rate_keeps_init() {
        let samples: Vec<TopicSample> = (0..6).map(|i| sample(&[i as f64], 3.0 * i as f64 + 1.0)).collect();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 5,
            init: Init::Uniform { lo: -1.0, hi: 1.0 },
            early_stop: None,
            ..Default::default()
        };
        let out = train(PredictorKind::Linear, &[], &samples, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let Model::Linear(init) = initial_model(PredictorKind::Linear, &[], cfg.init, &mut rng) else {
            unreachable!()
        };
        let Model::Linear(got) = out.model else { unreachable!() };
        assert!((got.alpha - init.alpha).abs() < 1e-12);
        assert!((got.beta - init.beta).abs() < 1e-12);
        assert_eq!(out.loss_curve.len(), 5);
        assert!(out.loss_curve.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn scaler_round_trip() {
        let samples: Vec<TopicSample> = (0..5)
            .map(|i| sample(&[i as f64 * 0.1, 1.0 - i as f64 * 0.05], 10.0 * i as f64))
            .collect();
        let scaler = Scaler::fit(PredictorKind::Edge, &samples);
        let m = Model::Edge(edge_model(&[1.5, -2.0], 4.0));
        let back = scaler.to_raw(&scaler.to_standard(&m));
        let (Model::Edge(a), Model::Edge(b)) = (&m, &back) else { unreachable!() };
        for (x, y) in a.weights.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.rho - b.rho).abs() < 1e-12);
        // predictions agree between the two scales
        let z = scaler.sample(PredictorKind::Edge, &samples[3]);
        let raw = m.predict(&samples[3]).unwrap();
        let std = scaler.to_standard(&m).predict(&z).unwrap();
        assert!((std * scaler.target_scale + scaler.target_mean - raw).abs() < 1e-9);
    }

    #[test]
    fn split_sizes_and_determinism() {
        let items: Vec<u32> = (0..7).collect();
        let (train, test) = split_train_test(&items, 42).unwrap();
        assert_eq!((train.len(), test.len()), (4, 3));
        assert_eq!(split_train_test(&items, 42).unwrap(), (train.clone(), test.clone()));
        let mut all: Vec<u32> = train.into_iter().chain(test).collect();
        all.sort_unstable();
        assert_eq!(all, items);
        let ten: Vec<u32> = (0..10).collect();
        let (a, b) = split_train_test(&ten, 1).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        assert_eq!(split_train_test(&[1], 0).unwrap_err(), PredictError::TooFewTopics(1));
    }

    #[test]
    fn evaluate_perfect_and_mean() {
        let samples: Vec<TopicSample> = (0..4).map(|i| sample(&[i as f64], 2.0 * i as f64)).collect();
        let perfect = Model::Linear(LinearModel { alpha: 2.0, beta: 0.0 });
        let e = evaluate(&perfect, &samples).unwrap();
        assert_eq!((e.rse, e.r_squared), (0.0, 1.0));
        assert_eq!(e.residuals.len(), 4);
        let mean = Model::Linear(LinearModel { alpha: 0.0, beta: 3.0 });
        assert_eq!(evaluate(&mean, &samples).unwrap().rse, 1.0);
    }

    #[test]
    fn model_files_round_trip() {
        let lin = Model::Linear(LinearModel { alpha: 3.25, beta: -0.1 });
        let text = model_to_tsv(&lin);
        assert_eq!(text, "kind\tlinear\n3.25\t-0.1\n");
        assert_eq!(read_model(text.as_bytes()).unwrap(), lin);
        let edge = Model::Edge(edge_model(&[0.5, 1e-20], 7.0));
        assert_eq!(read_model(model_to_tsv(&edge).as_bytes()).unwrap(), edge);
        assert!(read_model("kind\tcubic\n".as_bytes()).is_err());
        assert!(read_model("kind\tlinear\n1\n".as_bytes()).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            learning_rate: f64::NAN,
            ..Default::default()
        };
        assert!(train(PredictorKind::Linear, &[], &[sample(&[1.0], 1.0)], &bad).is_err());
        let bad = TrainConfig {
            epochs: 0,
            ..Default::default()
        };
        assert!(train(PredictorKind::Linear, &[], &[sample(&[1.0], 1.0)], &bad).is_err());
    }
}
