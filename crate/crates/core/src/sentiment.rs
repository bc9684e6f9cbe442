// SPDX-License-Identifier: Apache-2.0

//! Emoticon-based sentiment of users on a topic's key phrases.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::corpus::Tweet;
use crate::graph::CommunityGraph;
use crate::par::{self, Exec};
use crate::topics::Topic;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SentimentError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// What a user's per-phrase sentiment sum is divided by.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    /// All of the user's train tweets.
    #[default]
    AllTweets,
    /// Only the user's tweets that contain the phrase.
    MatchingTweets,
}

/// A user's sentiment on each of a topic's key phrases, entries in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct SentimentVector {
    pub topic: String,
    pub user: String,
    pub values: Vec<f64>,
}

impl SentimentVector {
    pub fn zeros(topic: impl Into<String>, user: impl Into<String>, m: usize) -> Self {
        SentimentVector {
            topic: topic.into(),
            user: user.into(),
            values: vec![0.0; m],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// `(pos − neg) / (pos + neg)`; a tweet without polar emoticons scores 0.
pub fn tweet_sentiment(pos: u32, neg: u32) -> f64 {
    if pos + neg == 0 {
        return 0.0;
    }
    (pos as f64 - neg as f64) / (pos + neg) as f64
}

/// The tweet's sentiment if its text contains `phrase`, otherwise 0.
pub fn phrase_sentiment(tweet: &Tweet, phrase: &str) -> f64 {
    if tweet.text.contains(phrase) {
        tweet_sentiment(tweet.emoticons.pos, tweet.emoticons.neg)
    } else {
        0.0
    }
}

/// Mean phrase sentiment over all of a user's tweets (0 for no tweets).
pub fn user_phrase_sentiment(user_tweets: &[&Tweet], phrase: &str) -> f64 {
    user_phrase_sentiment_with(user_tweets, phrase, Normalization::AllTweets)
}

pub fn user_phrase_sentiment_with(
    user_tweets: &[&Tweet],
    phrase: &str,
    norm: Normalization,
) -> f64 {
    let mut sum = 0.0;
    let mut matching = 0usize;
    for tweet in user_tweets {
        if tweet.text.contains(phrase) {
            sum += tweet_sentiment(tweet.emoticons.pos, tweet.emoticons.neg);
            matching += 1;
        }
    }
    let denom = match norm {
        Normalization::AllTweets => user_tweets.len(),
        Normalization::MatchingTweets => matching,
    };
    if denom == 0 {
        0.0
    } else {
        sum / denom as f64
    }
}

pub fn user_topic_vector(user: &str, topic: &Topic, user_tweets: &[&Tweet]) -> SentimentVector {
    user_topic_vector_with(user, topic, user_tweets, Normalization::AllTweets)
}

pub fn user_topic_vector_with(
    user: &str,
    topic: &Topic,
    user_tweets: &[&Tweet],
    norm: Normalization,
) -> SentimentVector {
    SentimentVector {
        topic: topic.hashtag.clone(),
        user: user.to_string(),
        values: topic
            .key_phrases
            .iter()
            .map(|p| user_phrase_sentiment_with(user_tweets, p, norm))
            .collect(),
    }
}

pub fn group_by_user(tweets: &[Tweet]) -> HashMap<&str, Vec<&Tweet>> {
    let mut by_user: HashMap<&str, Vec<&Tweet>> = HashMap::new();
    for tweet in tweets {
        by_user.entry(tweet.user.as_str()).or_default().push(tweet);
    }
    by_user
}

/// Nonzero sentiment vectors of every community member on every topic,
/// grouped by topic (input order), then by member (lexicographic).
///
/// Members are processed in parallel.
pub fn community_vectors(
    topics: &[Topic],
    community: &CommunityGraph,
    train_tweets: &[Tweet],
    norm: Normalization,
    exec: Exec,
) -> Vec<SentimentVector> {
    let by_user = group_by_user(train_tweets);
    let per_member: Vec<Vec<(usize, SentimentVector)>> =
        par::map(exec, community.members(), |member| {
            let Some(tweets) = by_user.get(member.as_str()) else {
                return Vec::new();
            };
            topics
                .iter()
                .enumerate()
                .map(|(k, topic)| (k, user_topic_vector_with(member, topic, tweets, norm)))
                .filter(|(_, v)| !v.is_zero())
                .collect()
        });
    let mut by_topic: Vec<Vec<SentimentVector>> = vec![Vec::new(); topics.len()];
    for (k, v) in per_member.into_iter().flatten() {
        by_topic[k].push(v);
    }
    by_topic.into_iter().flatten().collect()
}

/// user → values for one topic.
pub fn vectors_for_topic<'a>(
    vectors: &'a [SentimentVector],
    topic: &str,
) -> HashMap<&'a str, &'a [f64]> {
    vectors
        .iter()
        .filter(|v| v.topic == topic)
        .map(|v| (v.user.as_str(), v.values.as_slice()))
        .collect()
}

/// `hashtag<TAB>user<TAB>v1,…,v_m`, zero vectors omitted.
pub fn vectors_to_tsv(vectors: &[SentimentVector]) -> String {
    let mut out = String::new();
    for v in vectors.iter().filter(|v| !v.is_zero()) {
        let values: Vec<String> = v.values.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "{}\t{}\t{}", v.topic, v.user, values.join(","));
    }
    out
}

pub fn read_vectors(reader: impl BufRead) -> Result<Vec<SentimentVector>, SentimentError> {
    let mut vectors = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let bad = |reason: String| SentimentError::Parse {
            line: lineno,
            reason,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [topic, user, values] = fields[..] else {
            return Err(bad(format!("expected 3 fields, found {}", fields.len())));
        };
        let values = values
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| bad(format!("value: {e}")))?;
        if let Some(x) = values.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
            return Err(bad(format!("sentiment {x} outside [-1, 1]")));
        }
        vectors.push(SentimentVector {
            topic: topic.to_string(),
            user: user.to_string(),
            values,
        });
    }
    Ok(vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{EmoticonCounts, EmoticonLexicon};

    fn tweet(text: &str, pos: u32, neg: u32) -> Tweet {
        let mut t = Tweet::from_parts("1", "u", 0, None, text, &EmoticonLexicon::new());
        t.emoticons = EmoticonCounts { pos, neg, neu: 0 };
        t
    }

    fn topic(phrases: &[&str]) -> Topic {
        Topic {
            hashtag: "t".into(),
            start_time: 0,
            popularity: 1,
            key_phrases: phrases.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn tweet_sentiment_values() {
        assert_eq!(tweet_sentiment(2, 1), 1.0 / 3.0);
        assert_eq!(tweet_sentiment(3, 0), 1.0);
        assert_eq!(tweet_sentiment(0, 3), -1.0);
        assert_eq!(tweet_sentiment(0, 0), 0.0);
    }

    #[test]
    fn phrase_sentiment_requires_containment() {
        assert_eq!(phrase_sentiment(&tweet("gold medal", 2, 1), "gold"), 1.0 / 3.0);
        assert_eq!(phrase_sentiment(&tweet("gold medal", 2, 1), "silver"), 0.0);
        assert_eq!(phrase_sentiment(&tweet("gold medal", 0, 0), "gold"), 0.0);
    }

    #[test]
    fn user_mean_over_all_tweets() {
        let ts = [tweet("gold", 1, 0), tweet("x", 1, 0), tweet("y", 0, 1), tweet("z", 0, 0)];
        let refs: Vec<&Tweet> = ts.iter().collect();
        assert_eq!(user_phrase_sentiment(&refs, "gold"), 0.25);
        assert_eq!(user_phrase_sentiment(&refs, "none"), 0.0);
        assert_eq!(user_phrase_sentiment(&[], "gold"), 0.0);
        assert_eq!(
            user_phrase_sentiment_with(&refs, "gold", Normalization::MatchingTweets),
            1.0
        );
    }

    #[test]
    fn vector_with_phrases_one_and_three() {
        let t = tweet("p1 and p3 here", 1, 0);
        let v = user_topic_vector("u", &topic(&["p1", "p2", "p3", "p4"]), &[&t]);
        assert_eq!(v.values, vec![1.0, 0.0, 1.0, 0.0]);
        let empty = user_topic_vector("u", &topic(&["p1", "p2"]), &[]);
        assert!(empty.is_zero());
        assert_eq!(empty.values.len(), 2);
    }

    #[test]
    fn vectors_tsv_round_trip_skips_zero() {
        let vs = vec![
            SentimentVector {
                topic: "t".into(),
                user: "a".into(),
                values: vec![1.0 / 3.0, -0.25],
            },
            SentimentVector::zeros("t", "b", 2),
        ];
        let text = vectors_to_tsv(&vs);
        assert_eq!(text.lines().count(), 1);
        assert_eq!(read_vectors(text.as_bytes()).unwrap(), vs[..1]);
        assert!(read_vectors("t\ta\t1.5\n".as_bytes()).is_err());
    }
}
