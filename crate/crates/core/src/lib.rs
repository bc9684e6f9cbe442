// SPDX-License-Identifier: Apache-2.0

//! Community sentiment energy of microblog topics.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`corpus`] parses line-delimited tweets and the emoticon lexicon.
//! 2. [`graph`] builds the undirected retweet-mention graph and cuts out a
//!    bounded-depth community around a seed user.
//! 3. [`topics`] turns hashtags in the test window into topics with a
//!    popularity count and top-m key phrases.
//! 4. [`sentiment`] scores each user's emoticon sentiment on each key phrase.
//! 5. [`energy`] sums pairwise clique energies (or binary edge entropies)
//!    over the community.
//!
//! [`stats`] measures how well energy tracks popularity, [`predictor`] fits
//! the LinearMRF / EdgeMRF regressors by SGD, and [`synth`] generates
//! corpora with planted ground truth.
//!
//! Data-parallel loops go through [`par`]. With the default `parallel`
//! feature they run on rayon; without it everything is sequential. Both
//! paths produce bit-identical results.

pub mod corpus;
pub mod energy;
pub mod graph;
pub mod par;
pub mod predictor;
pub mod sentiment;
pub mod stats;
pub mod synth;
pub mod topics;

pub use corpus::{CorpusWindow, EmoticonCounts, EmoticonLexicon, Polarity, Split, Tweet};
pub use energy::{CommunityEnergy, EnergyFunction, EnergyModel};
pub use graph::{CommunityGraph, SocialGraph};
pub use par::Exec;
pub use predictor::{EdgeModel, LinearModel, PredictorKind, TopicSample, TrainConfig};
pub use sentiment::SentimentVector;
pub use stats::{CorrelationReport, Strength};
pub use topics::{GapDataset, Topic};
