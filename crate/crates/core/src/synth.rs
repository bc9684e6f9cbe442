// SPDX-License-Identifier: Apache-2.0

//! Synthetic corpora with planted ground truth.
//!
//! A generated world has a connected user graph (a random recursive tree
//! plus extra random edges), one retweet or mention per edge, stance tweets
//! carrying each engaged user's emoticon sentiment on a topic's key phrases,
//! and a test window in which each topic's hashtag appears exactly
//! `popularity` times. Popularity is either independent of sentiment or
//! planted as a linear function of the community's MRF cosine energy (whole
//! community or per edge).

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::corpus::{CorpusWindow, EmoticonLexicon, Polarity, Tweet};
use crate::energy::{self, EnergyFunction, EnergyModel};
use crate::graph::{self, CommunityGraph, SocialGraph};
use crate::par::Exec;
use crate::predictor::TopicSample;
use crate::sentiment::{self, Normalization};
use crate::topics::Topic;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("expected.tsv line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// How topic popularity relates to community energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Planted {
    /// Popularity uniform in `[lo, hi]`, independent of sentiment.
    None { lo: u64, hi: u64 },
    /// `α·E + β + noise`.
    Linear { alpha: f64, beta: f64, noise: f64 },
    /// `Σ ω_e·E_e + ρ + noise`, with `ω_e ~ U[lo, hi)` (all `lo` when equal).
    EdgeWeights {
        weight_lo: f64,
        weight_hi: f64,
        rho: f64,
        noise: f64,
    },
}

impl Planted {
    /// Noise standard deviation as a fraction of mean noiseless popularity.
    fn noise(&self) -> f64 {
        match *self {
            Planted::None { .. } => 0.0,
            Planted::Linear { noise, .. } | Planted::EdgeWeights { noise, .. } => noise,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Planted::None { .. } => "none",
            Planted::Linear { .. } => "linear",
            Planted::EdgeWeights { .. } => "edge_weights",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_users: usize,
    /// Fraction of all user pairs that are edges (at least a spanning tree).
    pub edge_density: f64,
    pub n_topics: usize,
    /// Key phrases per topic.
    pub m: usize,
    /// Probability that a stance tweet carries emoticons.
    pub emoticon_rate: f64,
    /// Probability that a stance tweet mentions each key phrase (at least
    /// one is always mentioned). At 1.0 every engaged user's vector points
    /// along the all-ones direction, so MRF cosine energies are integers.
    pub phrase_coverage: f64,
    /// Per-topic probability that a user is engaged, drawn from this range.
    pub engagement: (f64, f64),
    pub planted: Planted,
    pub window: CorpusWindow,
    pub max_tweets: usize,
}

/// 2014-07-01, 2014-11-01, 2015-01-01 (UTC).
pub const DEFAULT_WINDOW: CorpusWindow = CorpusWindow {
    train_start: 1_404_172_800,
    train_end: 1_414_800_000,
    test_start: 1_414_800_000,
    test_end: 1_420_070_400,
};

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            n_users: 200,
            edge_density: 0.02,
            n_topics: 40,
            m: 10,
            emoticon_rate: 0.5,
            phrase_coverage: 1.0,
            engagement: (0.05, 0.6),
            planted: Planted::Linear {
                alpha: 3.0,
                beta: 5.0,
                noise: 0.0,
            },
            window: DEFAULT_WINDOW,
            max_tweets: 200_000,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        if self.n_users < 2 {
            return bad(format!("n_users = {} (need at least 2)", self.n_users));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return bad(format!("edge_density {} outside (0, 1]", self.edge_density));
        }
        if self.n_topics == 0 || self.m == 0 {
            return bad("n_topics and m must be positive".into());
        }
        for (name, v) in [
            ("emoticon_rate", self.emoticon_rate),
            ("phrase_coverage", self.phrase_coverage),
            ("engagement.lo", self.engagement.0),
            ("engagement.hi", self.engagement.1),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if self.engagement.0 > self.engagement.1 {
            return bad("engagement range is reversed".into());
        }
        match self.planted {
            Planted::None { lo, hi } if lo == 0 || lo > hi => {
                return bad(format!("popularity range [{lo}, {hi}] invalid"))
            }
            Planted::EdgeWeights {
                weight_lo,
                weight_hi,
                ..
            } if weight_lo > weight_hi => return bad("weight range is reversed".into()),
            _ => {}
        }
        if !(self.planted.noise() >= 0.0 && self.planted.noise().is_finite()) {
            return bad("noise must be finite and non-negative".into());
        }
        Ok(())
    }
}

/// Ground truth for one generated topic.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedTopic {
    pub hashtag: String,
    pub key_phrases: Vec<String>,
    /// MRF cosine community energy.
    pub energy: f64,
    /// Popularity before noise and rounding.
    pub noiseless: f64,
    /// Realized tweet count in the test window.
    pub popularity: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub seed: u64,
    pub planted: Planted,
    /// Absolute noise standard deviation that was applied.
    pub noise_sigma: f64,
    pub seed_user: String,
    /// Hop distance from the seed user to the farthest user.
    pub max_depth: u32,
    pub m: usize,
    pub window: CorpusWindow,
    pub topics: Vec<ExpectedTopic>,
    /// Planted `(user_i, user_j, ω)` per community edge; empty unless
    /// popularity was planted per edge.
    pub weights: Vec<(String, String, f64)>,
}

/// A generated corpus together with its ground truth.
#[derive(Clone, Debug)]
pub struct SynthWorld {
    pub tweets: Vec<Tweet>,
    pub lexicon: EmoticonLexicon,
    pub community: CommunityGraph,
    pub expected: Expected,
    /// Per-topic MRF cosine edge energies, aligned with `expected.topics`.
    pub edge_energies: Vec<Vec<f64>>,
}

fn synth_lexicon() -> EmoticonLexicon {
    let mut lex = EmoticonLexicon::new();
    for t in ["[smile]", "[laugh]", "[love]", "[clap]"] {
        lex.insert(t, Polarity::Positive);
    }
    for t in ["[cry]", "[angry]", "[sad]"] {
        lex.insert(t, Polarity::Negative);
    }
    for t in ["[think]", "[shrug]"] {
        lex.insert(t, Polarity::Neutral);
    }
    lex
}

const POSITIVE: [&str; 4] = ["[smile]", "[laugh]", "[love]", "[clap]"];
const NEGATIVE: [&str; 3] = ["[cry]", "[angry]", "[sad]"];
const NEUTRAL: [&str; 2] = ["[think]", "[shrug]"];

fn digits(n: usize) -> usize {
    n.max(1).to_string().len()
}

/// Spanning random recursive tree plus uniformly random extra pairs.
fn random_edges(n: usize, density: f64, rng: &mut ChaCha8Rng) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let parent = rng.random_range(0..i);
        edges.insert((parent, i));
    }
    let total = n * (n - 1) / 2;
    let target = ((density * total as f64).round() as usize).clamp(n - 1, total);
    if target * 2 <= total {
        while edges.len() < target {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.insert((a.min(b), a.max(b)));
            }
        }
    } else {
        let mut rest: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|p| !edges.contains(p))
            .collect();
        rest.shuffle(rng);
        let need = target - edges.len();
        edges.extend(rest.into_iter().take(need));
    }
    edges
}

struct Draft {
    user: usize,
    timestamp: i64,
    retweet_of: Option<usize>,
    text: String,
}

pub fn generate(config: &SynthConfig) -> Result<SynthWorld, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lexicon = synth_lexicon();
    let w = config.window;
    let user_width = digits(config.n_users - 1).max(4);
    let users: Vec<String> = (0..config.n_users)
        .map(|i| format!("u{i:0user_width$}"))
        .collect();
    let topic_width = digits(config.n_topics - 1).max(3);
    let phrase_width = digits(config.m - 1).max(2);

    let mut drafts: Vec<Draft> = Vec::new();
    let edges = random_edges(config.n_users, config.edge_density, &mut rng);
    for &(a, b) in &edges {
        let (from, to) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        let timestamp = rng.random_range(w.train_start..w.train_end);
        if rng.random_bool(0.5) {
            drafts.push(Draft {
                user: from,
                timestamp,
                retweet_of: None,
                text: format!("@{} hello", users[to]),
            });
        } else {
            drafts.push(Draft {
                user: from,
                timestamp,
                retweet_of: Some(to),
                text: "RT".to_string(),
            });
        }
    }

    let mut topics: Vec<Topic> = Vec::with_capacity(config.n_topics);
    for k in 0..config.n_topics {
        let hashtag = format!("topic{k:0topic_width$}");
        let phrases: Vec<String> = (0..config.m)
            .map(|n| format!("k{k:0topic_width$}w{n:0phrase_width$}"))
            .collect();
        let (lo, hi) = config.engagement;
        let engagement = if lo < hi { rng.random_range(lo..hi) } else { lo };
        for user in 0..config.n_users {
            if !rng.random_bool(engagement) {
                continue;
            }
            let mut chosen: Vec<&str> = phrases
                .iter()
                .filter(|_| rng.random_bool(config.phrase_coverage))
                .map(String::as_str)
                .collect();
            if chosen.is_empty() {
                chosen.push(&phrases[rng.random_range(0..config.m)]);
            }
            let mut text = chosen.join(" ");
            if rng.random_bool(config.emoticon_rate) {
                let positive = rng.random_bool(0.5);
                let strong = rng.random_range(1..=3usize);
                let weak = rng.random_range(0..strong);
                let (major, minor): (&[&str], &[&str]) = if positive {
                    (&POSITIVE, &NEGATIVE)
                } else {
                    (&NEGATIVE, &POSITIVE)
                };
                text.push(' ');
                for _ in 0..strong {
                    text.push_str(major[rng.random_range(0..major.len())]);
                }
                for _ in 0..weak {
                    text.push_str(minor[rng.random_range(0..minor.len())]);
                }
                if rng.random_bool(0.3) {
                    text.push_str(NEUTRAL[rng.random_range(0..NEUTRAL.len())]);
                }
            }
            drafts.push(Draft {
                user,
                timestamp: rng.random_range(w.train_start..w.train_end),
                retweet_of: None,
                text,
            });
        }
        topics.push(Topic {
            hashtag,
            start_time: w.test_start,
            popularity: 0,
            key_phrases: phrases,
        });
    }

    // Energies through the same code path the pipeline uses.
    let train: Vec<Tweet> = drafts
        .iter()
        .map(|d| {
            Tweet::from_parts(
                "",
                users[d.user].clone(),
                d.timestamp,
                d.retweet_of.map(|r| users[r].clone()),
                d.text.clone(),
                &lexicon,
            )
        })
        .collect();
    let social = graph::build_graph(&train, Exec::Parallel);
    let seed_user = users[0].clone();
    let max_depth = graph::eccentricity(&social, &seed_user).expect("seed is a node");
    let community = graph::extract_community(&social, &seed_user, max_depth).expect("seed is a node");
    debug_assert_eq!(community.members().len(), config.n_users);
    let vectors = sentiment::community_vectors(&topics, &community, &train, Normalization::AllTweets, Exec::Parallel);
    let mut edge_energies = Vec::with_capacity(topics.len());
    for topic in &topics {
        let vs = sentiment::vectors_for_topic(&vectors, &topic.hashtag);
        let terms = energy::edge_terms(
            &community,
            &vs,
            config.m,
            EnergyModel::Mrf,
            EnergyFunction::Cosine,
            Exec::Parallel,
        )
        .expect("vectors have length m");
        edge_energies.push(terms);
    }
    let samples: Vec<TopicSample> = topics
        .iter()
        .zip(&edge_energies)
        .map(|(t, e)| TopicSample::new(t.hashtag.clone(), e.clone(), 0.0))
        .collect();

    let mut weights = Vec::new();
    let noiseless: Vec<f64> = match config.planted {
        Planted::None { lo, hi } => samples
            .iter()
            .map(|_| rng.random_range(lo..=hi) as f64)
            .collect(),
        Planted::Linear { alpha, beta, .. } => {
            samples.iter().map(|s| alpha * s.total + beta).collect()
        }
        Planted::EdgeWeights {
            weight_lo,
            weight_hi,
            rho,
            ..
        } => {
            let omega: Vec<f64> = community
                .edges()
                .iter()
                .map(|_| {
                    if weight_lo < weight_hi {
                        rng.random_range(weight_lo..weight_hi)
                    } else {
                        weight_lo
                    }
                })
                .collect();
            weights = community
                .edge_names()
                .zip(&omega)
                .map(|((a, b), &w)| (a.to_string(), b.to_string(), w))
                .collect();
            samples
                .iter()
                .map(|s| s.edge_energies.iter().zip(&omega).map(|(e, w)| e * w).sum::<f64>() + rho)
                .collect()
        }
    };
    if let Some((t, v)) = topics.iter().zip(&noiseless).find(|(_, v)| **v < 1.0) {
        return Err(SynthError::Infeasible(format!(
            "planted popularity of {} is {v} (< 1)",
            t.hashtag
        )));
    }
    let mean = noiseless.iter().sum::<f64>() / noiseless.len() as f64;
    let noise_sigma = config.planted.noise() * mean;
    let normal = Normal::new(0.0, noise_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let popularity: Vec<u64> = noiseless
        .iter()
        .map(|&v| {
            let noisy = if noise_sigma > 0.0 { v + normal.sample(&mut rng) } else { v };
            noisy.round().max(1.0) as u64
        })
        .collect();

    let total: u64 = popularity.iter().sum::<u64>() + drafts.len() as u64;
    if total > config.max_tweets as u64 {
        return Err(SynthError::Infeasible(format!(
            "{total} tweets exceed the limit of {}",
            config.max_tweets
        )));
    }

    for (topic, &count) in topics.iter_mut().zip(&popularity) {
        topic.popularity = count;
        let text = format!("#{}# {}", topic.hashtag, topic.key_phrases.join(" "));
        for i in 0..count {
            let timestamp = if i == 0 {
                w.test_start
            } else {
                rng.random_range(w.test_start..w.test_end)
            };
            drafts.push(Draft {
                user: rng.random_range(0..config.n_users),
                timestamp,
                retweet_of: None,
                text: text.clone(),
            });
        }
    }

    drafts.sort_by_key(|d| d.timestamp);
    let id_width = digits(drafts.len());
    let tweets: Vec<Tweet> = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            Tweet::from_parts(
                format!("t{i:0id_width$}"),
                users[d.user].clone(),
                d.timestamp,
                d.retweet_of.map(|r| users[r].clone()),
                d.text,
                &lexicon,
            )
        })
        .collect();

    let expected = Expected {
        seed: config.seed,
        planted: config.planted,
        noise_sigma,
        seed_user,
        max_depth,
        m: config.m,
        window: w,
        topics: topics
            .iter()
            .zip(&samples)
            .zip(&noiseless)
            .map(|((t, s), &nl)| ExpectedTopic {
                hashtag: t.hashtag.clone(),
                key_phrases: t.key_phrases.clone(),
                energy: s.total,
                noiseless: nl,
                popularity: t.popularity,
            })
            .collect(),
        weights,
    };
    Ok(SynthWorld {
        tweets,
        lexicon,
        community,
        expected,
        edge_energies,
    })
}

impl SynthWorld {
    pub fn corpus_text(&self) -> String {
        let mut out = String::new();
        for t in &self.tweets {
            out.push_str(&t.to_line());
            out.push('\n');
        }
        out
    }

    /// One sample per topic with MRF cosine edge energies and the realized
    /// popularity as target.
    pub fn samples(&self) -> Vec<TopicSample> {
        self.expected
            .topics
            .iter()
            .zip(&self.edge_energies)
            .map(|(t, e)| TopicSample::new(t.hashtag.clone(), e.clone(), t.popularity as f64))
            .collect()
    }

    pub fn edge_names(&self) -> Vec<(String, String)> {
        self.community
            .edge_names()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    /// The full social graph of the generated corpus.
    pub fn social_graph(&self) -> SocialGraph {
        graph::build_graph(&self.tweets, Exec::Parallel)
    }

    /// Writes `corpus.tsv`, `lexicon.tsv` and `expected.tsv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), SynthError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("corpus.tsv"), self.corpus_text())?;
        fs::write(dir.join("lexicon.tsv"), self.lexicon.to_tsv())?;
        fs::write(dir.join("expected.tsv"), self.expected.to_tsv())?;
        Ok(())
    }
}

impl Expected {
    /// Rows tagged `param`, `topic` or `weight` in the first column.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let mut param = |k: &str, v: String| {
            let _ = writeln!(out, "param\t{k}\t{v}");
        };
        param("seed", self.seed.to_string());
        param("planted", self.planted.name().to_string());
        match self.planted {
            Planted::None { lo, hi } => {
                param("popularity_lo", lo.to_string());
                param("popularity_hi", hi.to_string());
            }
            Planted::Linear { alpha, beta, noise } => {
                param("alpha", alpha.to_string());
                param("beta", beta.to_string());
                param("noise", noise.to_string());
            }
            Planted::EdgeWeights {
                weight_lo,
                weight_hi,
                rho,
                noise,
            } => {
                param("weight_lo", weight_lo.to_string());
                param("weight_hi", weight_hi.to_string());
                param("rho", rho.to_string());
                param("noise", noise.to_string());
            }
        }
        param("noise_sigma", self.noise_sigma.to_string());
        param("seed_user", self.seed_user.clone());
        param("max_depth", self.max_depth.to_string());
        param("m", self.m.to_string());
        param("window", self.window.to_string());
        for t in &self.topics {
            let _ = writeln!(
                out,
                "topic\t{}\t{}\t{}\t{}\t{}",
                t.hashtag,
                t.energy,
                t.noiseless,
                t.popularity,
                t.key_phrases.join(",")
            );
        }
        for (a, b, w) in &self.weights {
            let _ = writeln!(out, "weight\t{a}\t{b}\t{w}");
        }
        out
    }

    pub fn read(reader: impl BufRead) -> Result<Self, SynthError> {
        use std::collections::HashMap;
        let mut params: HashMap<String, String> = HashMap::new();
        let mut topics = Vec::new();
        let mut weights = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let bad = |reason: String| SynthError::Parse {
                line: lineno,
                reason,
            };
            let f: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
            match f[..] {
                [] | [""] => {}
                ["param", k, v] => {
                    params.insert(k.to_string(), v.to_string());
                }
                ["topic", tag, e, nl, pop, phrases] => topics.push(ExpectedTopic {
                    hashtag: tag.to_string(),
                    key_phrases: phrases.split(',').map(String::from).collect(),
                    energy: num(e)?,
                    noiseless: num(nl)?,
                    popularity: pop.parse().map_err(|e| bad(format!("popularity: {e}")))?,
                }),
                ["weight", a, b, w] => weights.push((a.to_string(), b.to_string(), num(w)?)),
                _ => return Err(bad("unrecognised row".into())),
            }
        }
        let get = |k: &str| {
            params.get(k).cloned().ok_or_else(|| SynthError::Parse {
                line: 0,
                reason: format!("missing param {k}"),
            })
        };
        let f = |k: &str| -> Result<f64, SynthError> {
            get(k)?.parse::<f64>().map_err(|e| SynthError::Parse {
                line: 0,
                reason: format!("param {k}: {e}"),
            })
        };
        let u = |k: &str| -> Result<u64, SynthError> {
            get(k)?.parse::<u64>().map_err(|e| SynthError::Parse {
                line: 0,
                reason: format!("param {k}: {e}"),
            })
        };
        let planted = match get("planted")?.as_str() {
            "none" => Planted::None {
                lo: u("popularity_lo")?,
                hi: u("popularity_hi")?,
            },
            "linear" => Planted::Linear {
                alpha: f("alpha")?,
                beta: f("beta")?,
                noise: f("noise")?,
            },
            "edge_weights" => Planted::EdgeWeights {
                weight_lo: f("weight_lo")?,
                weight_hi: f("weight_hi")?,
                rho: f("rho")?,
                noise: f("noise")?,
            },
            other => {
                return Err(SynthError::Parse {
                    line: 0,
                    reason: format!("unknown planted kind {other:?}"),
                })
            }
        };
        Ok(Expected {
            seed: u("seed")?,
            planted,
            noise_sigma: f("noise_sigma")?,
            seed_user: get("seed_user")?,
            max_depth: u("max_depth")? as u32,
            m: u("m")? as usize,
            window: get("window")?.parse().map_err(|e| SynthError::Parse {
                line: 0,
                reason: format!("window: {e}"),
            })?,
            topics,
            weights,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_users_full_density_is_one_edge() {
        let cfg = SynthConfig {
            n_users: 2,
            edge_density: 1.0,
            n_topics: 1,
            m: 2,
            planted: Planted::None { lo: 1, hi: 5 },
            ..Default::default()
        };
        let world = generate(&cfg).unwrap();
        let g = world.social_graph();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.names(), &["u0000", "u0001"]);
    }

    #[test]
    fn exact_edge_count_from_density() {
        let cfg = SynthConfig {
            n_users: 30,
            edge_density: 50.0 / 435.0,
            n_topics: 2,
            ..Default::default()
        };
        let world = generate(&cfg).unwrap();
        assert_eq!(world.community.edge_count(), 50);
        assert_eq!(world.community.members().len(), 30);
    }

    #[test]
    fn config_validation() {
        for cfg in [
            SynthConfig { n_users: 1, ..Default::default() },
            SynthConfig { edge_density: 0.0, ..Default::default() },
            SynthConfig { emoticon_rate: 1.5, ..Default::default() },
            SynthConfig { engagement: (0.6, 0.1), ..Default::default() },
        ] {
            assert!(matches!(generate(&cfg), Err(SynthError::InvalidConfig(_))));
        }
        let tiny = SynthConfig { max_tweets: 10, ..Default::default() };
        assert!(matches!(generate(&tiny), Err(SynthError::Infeasible(_))));
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SynthConfig {
            n_users: 40,
            n_topics: 5,
            ..Default::default()
        };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.corpus_text(), b.corpus_text());
        assert_eq!(a.expected.to_tsv(), b.expected.to_tsv());
        let c = generate(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.corpus_text(), c.corpus_text());
    }

    #[test]
    fn expected_file_round_trip() {
        let cfg = SynthConfig {
            n_users: 20,
            n_topics: 3,
            planted: Planted::EdgeWeights {
                weight_lo: 1.0,
                weight_hi: 4.0,
                rho: 10.0,
                noise: 0.02,
            },
            ..Default::default()
        };
        let world = generate(&cfg).unwrap();
        let text = world.expected.to_tsv();
        let back = Expected::read(text.as_bytes()).unwrap();
        assert_eq!(back, world.expected);
        assert_eq!(back.weights.len(), world.community.edge_count());
    }

    #[test]
    fn popularity_is_tweet_multiplicity() {
        let world = generate(&SynthConfig {
            n_users: 30,
            n_topics: 4,
            ..Default::default()
        })
        .unwrap();
        for t in &world.expected.topics {
            let count = world
                .tweets
                .iter()
                .filter(|tw| tw.hashtags.contains(&t.hashtag))
                .count() as u64;
            assert_eq!(count, t.popularity);
        }
    }
}
