// SPDX-License-Identifier: Apache-2.0

//! Hashtag topics: popularity counting, filtering, gap datasets and
//! frequency-ranked key phrases.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use crate::corpus::{bracketed_tokens, Tweet};
use crate::par::{self, Exec};

/// Number of key phrases per topic used throughout the experiments.
pub const DEFAULT_KEY_PHRASES: usize = 10;
/// Topics with fewer test-window tweets than this are dropped.
pub const DEFAULT_MIN_POPULARITY: u64 = 100;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopicError {
    #[error("topic {hashtag:?}: need {needed} key phrase candidates, found {available} ({} short)", needed - available)]
    TooFewCandidates {
        hashtag: String,
        needed: usize,
        available: usize,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topic {
    pub hashtag: String,
    /// Earliest test-window timestamp bearing the hashtag.
    pub start_time: i64,
    /// Number of test-window tweets bearing the hashtag.
    pub popularity: u64,
    /// Top-m key phrases; empty until [`assign_key_phrases`] runs.
    pub key_phrases: Vec<String>,
}

/// Topics whose popularity differences are all at least `gap`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapDataset {
    pub gap: u64,
    /// Sorted by popularity ascending.
    pub topics: Vec<Topic>,
}

fn by_popularity(a: &Topic, b: &Topic) -> std::cmp::Ordering {
    a.popularity
        .cmp(&b.popularity)
        .then_with(|| a.hashtag.cmp(&b.hashtag))
}

/// One topic per hashtag that first appears before `first_month_end`, with
/// popularity counted over all of `test_tweets`. A tweet carrying several
/// hashtags counts once toward each. Output is sorted by popularity, then
/// hashtag.
pub fn extract_topics(test_tweets: &[Tweet], first_month_end: i64, min_popularity: u64) -> Vec<Topic> {
    let mut stats: HashMap<&str, (i64, u64)> = HashMap::new();
    for tweet in test_tweets {
        for tag in tweet.distinct_hashtags() {
            let entry = stats.entry(tag).or_insert((tweet.timestamp, 0));
            entry.0 = entry.0.min(tweet.timestamp);
            entry.1 += 1;
        }
    }
    let mut topics: Vec<Topic> = stats
        .into_iter()
        .filter(|&(_, (start, count))| start < first_month_end && count >= min_popularity)
        .map(|(tag, (start, count))| Topic {
            hashtag: tag.to_string(),
            start_time: start,
            popularity: count,
            key_phrases: Vec::new(),
        })
        .collect();
    topics.sort_by(by_popularity);
    topics
}

/// Keeps one topic per popularity value: the lexicographically smallest
/// hashtag. Output is sorted by popularity.
pub fn dedupe_equal_popularity(topics: &[Topic]) -> Vec<Topic> {
    let mut keep: BTreeMap<u64, &Topic> = BTreeMap::new();
    for topic in topics {
        keep.entry(topic.popularity)
            .and_modify(|cur| {
                if topic.hashtag < cur.hashtag {
                    *cur = topic;
                }
            })
            .or_insert(topic);
    }
    keep.into_values().cloned().collect()
}

/// Greedy ascending scan: keep the least popular topic, then every topic
/// at least `gap` above the last one kept.
pub fn gap_filter(topics: &[Topic], gap: u64) -> GapDataset {
    let mut sorted: Vec<&Topic> = topics.iter().collect();
    sorted.sort_by(|a, b| by_popularity(a, b));
    let mut kept: Vec<Topic> = Vec::new();
    for topic in sorted {
        let ok = kept
            .last()
            .is_none_or(|last| topic.popularity >= last.popularity.saturating_add(gap));
        if ok {
            kept.push(topic.clone());
        }
    }
    GapDataset { gap, topics: kept }
}

/// Removes `#tag#` spans, `[emoticon]` tokens and `@mentions`, leaving the
/// free text that key phrases are drawn from.
fn strip_markup(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    // paired '#' spans
    let mut in_tag = false;
    let mut pending = String::new();
    for ch in text.chars() {
        if ch == '#' {
            if in_tag {
                pending.clear();
                out.push(' ');
            }
            in_tag = !in_tag;
        } else if in_tag {
            pending.push(ch);
        } else {
            out.push(ch);
        }
    }
    // an unpaired trailing '#' leaves its text in place
    out.push_str(&pending);

    let mut cleaned = String::with_capacity(out.len());
    let mut cursor = 0;
    for token in bracketed_tokens(&out) {
        let start = token.as_ptr() as usize - out.as_ptr() as usize;
        cleaned.push_str(&out[cursor..start]);
        cleaned.push(' ');
        cursor = start + token.len();
    }
    cleaned.push_str(&out[cursor..]);

    let mut result = String::with_capacity(cleaned.len());
    let mut chars = cleaned.chars().peekable();
    while let Some(ch) = chars.next() {
        if ch == '@' {
            while chars
                .peek()
                .is_some_and(|&c| c.is_alphanumeric() || c == '_' || c == '-')
            {
                chars.next();
            }
            result.push(' ');
        } else {
            result.push(ch);
        }
    }
    result
}

/// Unicode word tokens: maximal runs of alphanumeric characters or `_`.
pub fn tokenize(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|t| !t.is_empty())
}

/// Top `m` tokens of the topic document by frequency, ties broken
/// lexicographically. Hashtag spans, emoticons, mentions, stopwords and the
/// topic's own hashtag are excluded.
pub fn extract_key_phrases<S: AsRef<str>>(
    topic_texts: &[S],
    hashtag: &str,
    m: usize,
    stopwords: &HashSet<String>,
) -> Result<Vec<String>, TopicError> {
    let mut counts: HashMap<String, u64> = HashMap::new();
    for text in topic_texts {
        let cleaned = strip_markup(text.as_ref());
        for token in tokenize(&cleaned) {
            if token == hashtag || stopwords.contains(token) {
                continue;
            }
            *counts.entry(token.to_string()).or_insert(0) += 1;
        }
    }
    if counts.len() < m {
        return Err(TopicError::TooFewCandidates {
            hashtag: hashtag.to_string(),
            needed: m,
            available: counts.len(),
        });
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked.into_iter().take(m).map(|(t, _)| t).collect())
}

/// Fills in key phrases for every topic from the tweets bearing its
/// hashtag. Topics are processed in parallel.
pub fn assign_key_phrases(
    topics: &[Topic],
    test_tweets: &[Tweet],
    m: usize,
    stopwords: &HashSet<String>,
    exec: Exec,
) -> Result<Vec<Topic>, TopicError> {
    let wanted: HashSet<&str> = topics.iter().map(|t| t.hashtag.as_str()).collect();
    let mut docs: HashMap<&str, Vec<&str>> = HashMap::new();
    for tweet in test_tweets {
        for tag in tweet.distinct_hashtags() {
            if wanted.contains(tag) {
                docs.entry(tag).or_default().push(&tweet.text);
            }
        }
    }
    par::try_map(exec, topics, |topic| {
        let texts = docs.get(topic.hashtag.as_str()).map_or(&[][..], Vec::as_slice);
        let key_phrases = extract_key_phrases(texts, &topic.hashtag, m, stopwords)?;
        Ok(Topic {
            key_phrases,
            ..topic.clone()
        })
    })
}

pub fn load_stopwords(reader: impl BufRead) -> std::io::Result<HashSet<String>> {
    let mut words = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let word = line.trim();
        if !word.is_empty() {
            words.insert(word.to_string());
        }
    }
    Ok(words)
}

/// `hashtag<TAB>popularity<TAB>start_time<TAB>phrase1,…,phrase_m`
pub fn catalog_to_tsv(topics: &[Topic]) -> String {
    let mut out = String::new();
    for t in topics {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            t.hashtag,
            t.popularity,
            t.start_time,
            t.key_phrases.join(",")
        );
    }
    out
}

pub fn read_catalog(reader: impl BufRead) -> Result<Vec<Topic>, TopicError> {
    let mut topics = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let bad = |reason: String| TopicError::Parse {
            line: lineno,
            reason,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [hashtag, popularity, start, phrases] = fields[..] else {
            return Err(bad(format!("expected 4 fields, found {}", fields.len())));
        };
        let popularity = popularity
            .parse::<u64>()
            .map_err(|e| bad(format!("popularity: {e}")))?;
        let start_time = start
            .parse::<i64>()
            .map_err(|e| bad(format!("start_time: {e}")))?;
        let key_phrases = if phrases.is_empty() {
            Vec::new()
        } else {
            phrases.split(',').map(String::from).collect()
        };
        topics.push(Topic {
            hashtag: hashtag.to_string(),
            start_time,
            popularity,
            key_phrases,
        });
    }
    Ok(topics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EmoticonLexicon;

    fn topic(tag: &str, popularity: u64) -> Topic {
        Topic {
            hashtag: tag.into(),
            start_time: 0,
            popularity,
            key_phrases: vec![],
        }
    }

    fn tweets(rows: &[(i64, &str)]) -> Vec<Tweet> {
        let lex = EmoticonLexicon::new();
        rows.iter()
            .enumerate()
            .map(|(i, &(ts, text))| Tweet::from_parts(i.to_string(), "u", ts, None, text, &lex))
            .collect()
    }

    #[test]
    fn late_topics_are_excluded() {
        let ts = tweets(&[(5, "#early#"), (50, "#late#"), (60, "#early#")]);
        let topics = extract_topics(&ts, 30, 1);
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].hashtag, "early");
        assert_eq!(topics[0].popularity, 2);
        assert_eq!(topics[0].start_time, 5);
    }

    #[test]
    fn min_popularity_threshold() {
        let mut rows = vec![(0, "#a#"); 100];
        rows.extend(vec![(0, "#b#"); 99]);
        let topics = extract_topics(&tweets(&rows), 1, 100);
        assert_eq!(topics.len(), 1);
        assert_eq!(topics[0].hashtag, "a");
        assert_eq!(topics[0].popularity, 100);
    }

    #[test]
    fn multi_hashtag_tweet_counts_for_each() {
        let topics = extract_topics(&tweets(&[(0, "#a# #b# #a#"), (1, "#b#")]), 10, 1);
        let pops: Vec<_> = topics.iter().map(|t| (t.hashtag.as_str(), t.popularity)).collect();
        assert_eq!(pops, vec![("a", 1), ("b", 2)]);
    }

    #[test]
    fn dedupe_keeps_smallest_hashtag() {
        let out = dedupe_equal_popularity(&[topic("b", 100), topic("a", 100), topic("c", 200)]);
        let tags: Vec<_> = out.iter().map(|t| (t.hashtag.as_str(), t.popularity)).collect();
        assert_eq!(tags, vec![("a", 100), ("c", 200)]);
    }

    #[test]
    fn dedupe_leaves_distinct_unchanged() {
        let input = vec![topic("x", 1), topic("y", 2)];
        assert_eq!(dedupe_equal_popularity(&input), input);
    }

    #[test]
    fn gap_filter_greedy_trace() {
        let input: Vec<Topic> = [100, 105, 220, 500]
            .iter()
            .enumerate()
            .map(|(i, &p)| topic(&format!("t{i}"), p))
            .collect();
        let pops: Vec<u64> = gap_filter(&input, 100).topics.iter().map(|t| t.popularity).collect();
        assert_eq!(pops, vec![100, 220, 500]);
        assert_eq!(gap_filter(&input, 1).topics.len(), 4);
    }

    #[test]
    fn key_phrases_by_frequency() {
        let none = HashSet::new();
        assert_eq!(extract_key_phrases(&["a a b c"], "t", 2, &none).unwrap(), vec!["a", "b"]);
        let stop: HashSet<String> = ["a".to_string()].into();
        assert_eq!(extract_key_phrases(&["a a b c"], "t", 2, &stop).unwrap(), vec!["b", "c"]);
    }

    #[test]
    fn key_phrases_skip_markup_and_own_hashtag() {
        let texts = ["#Rio# Rio gold [smile] @bob gold", "medal gold #other tag#"];
        let phrases = extract_key_phrases(&texts, "Rio", 2, &HashSet::new()).unwrap();
        assert_eq!(phrases, vec!["gold", "medal"]);
    }

    #[test]
    fn key_phrase_deficit() {
        let err = extract_key_phrases(&["a b"], "t", 3, &HashSet::new()).unwrap_err();
        assert_eq!(
            err,
            TopicError::TooFewCandidates {
                hashtag: "t".into(),
                needed: 3,
                available: 2
            }
        );
        assert!(err.to_string().contains("1 short"));
    }

    #[test]
    fn assign_uses_only_topic_tweets() {
        let ts = tweets(&[(0, "#a# x y"), (0, "#b# z w"), (0, "#a# x")]);
        let topics = vec![topic("a", 2), topic("b", 1)];
        let out = assign_key_phrases(&topics, &ts, 2, &HashSet::new(), Exec::Parallel).unwrap();
        assert_eq!(out[0].key_phrases, vec!["x", "y"]);
        assert_eq!(out[1].key_phrases, vec!["w", "z"]);
    }

    #[test]
    fn catalog_round_trip() {
        let mut t = topic("Rio2016", 321);
        t.start_time = 77;
        t.key_phrases = vec!["gold".into(), "medal".into()];
        let text = catalog_to_tsv(&[t.clone()]);
        assert_eq!(text, "Rio2016\t321\t77\tgold,medal\n");
        assert_eq!(read_catalog(text.as_bytes()).unwrap(), vec![t]);
        assert!(read_catalog("x\t1\t2\n".as_bytes()).is_err());
    }

    #[test]
    fn stopword_file() {
        let words = load_stopwords("the\n\n a \n".as_bytes()).unwrap();
        assert_eq!(words.len(), 2);
        assert!(words.contains("a"));
    }
}
