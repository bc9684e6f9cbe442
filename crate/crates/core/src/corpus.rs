// SPDX-License-Identifier: Apache-2.0

//! Tweet corpus and emoticon lexicon ingestion.
//!
//! Corpus records are one per line:
//!
//! ```text
//! id<TAB>user<TAB>timestamp<TAB>retweet_of_or_dash<TAB>text
//! ```
//!
//! Hashtags (`#tag#`), mentions (`@name`) and emoticons (`[token]`) are
//! extracted from the text at parse time.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::par::{self, Exec};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: duplicate emoticon token {token}")]
    DuplicateToken { line: usize, token: String },
    #[error("line {line}: unknown polarity label {label:?}")]
    UnknownPolarity { line: usize, label: String },
    #[error("invalid corpus window: {0}")]
    InvalidWindow(String),
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn parse(line: usize, reason: impl Into<String>) -> Self {
        CorpusError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
    Neutral,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Neutral => "neutral",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Polarity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "positive" => Ok(Polarity::Positive),
            "negative" => Ok(Polarity::Negative),
            "neutral" => Ok(Polarity::Neutral),
            other => Err(other.to_string()),
        }
    }
}

/// Emoticon token → polarity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmoticonLexicon {
    entries: BTreeMap<String, Polarity>,
}

/// A valid token is `[…]` with a non-empty body free of brackets and
/// whitespace.
fn is_valid_token(token: &str) -> bool {
    let Some(body) = token.strip_prefix('[').and_then(|t| t.strip_suffix(']')) else {
        return false;
    };
    !body.is_empty() && !body.chars().any(|c| c == '[' || c == ']' || c.is_whitespace())
}

impl EmoticonLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a token; returns `false` if it was already present.
    pub fn insert(&mut self, token: impl Into<String>, polarity: Polarity) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry(token.into()) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(polarity);
                true
            }
        }
    }

    pub fn get(&self, token: &str) -> Option<Polarity> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Polarity)> {
        self.entries.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Parses the `token<TAB>polarity` format. Blank lines are skipped.
    pub fn parse(reader: impl BufRead) -> Result<Self, CorpusError> {
        let mut lexicon = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| CorpusError::parse(lineno, e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (token, label) = line
                .split_once('\t')
                .ok_or_else(|| CorpusError::parse(lineno, "expected token<TAB>polarity"))?;
            if !is_valid_token(token) {
                return Err(CorpusError::parse(
                    lineno,
                    format!("malformed emoticon token {token:?}"),
                ));
            }
            let polarity = label
                .trim()
                .parse::<Polarity>()
                .map_err(|label| CorpusError::UnknownPolarity {
                    line: lineno,
                    label,
                })?;
            if !lexicon.insert(token, polarity) {
                return Err(CorpusError::DuplicateToken {
                    line: lineno,
                    token: token.to_string(),
                });
            }
        }
        Ok(lexicon)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (token, polarity) in self.iter() {
            out.push_str(token);
            out.push('\t');
            out.push_str(polarity.as_str());
            out.push('\n');
        }
        out
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<EmoticonLexicon, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    EmoticonLexicon::parse(BufReader::new(file))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EmoticonCounts {
    pub pos: u32,
    pub neg: u32,
    pub neu: u32,
}

impl EmoticonCounts {
    pub fn total(&self) -> u32 {
        self.pos + self.neg + self.neu
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tweet {
    pub id: String,
    pub user: String,
    pub timestamp: i64,
    pub text: String,
    pub hashtags: Vec<String>,
    pub mentions: Vec<String>,
    pub retweet_of: Option<String>,
    pub emoticons: EmoticonCounts,
}

impl Tweet {
    /// Builds a tweet from raw fields, extracting entities from `text`.
    pub fn from_parts(
        id: impl Into<String>,
        user: impl Into<String>,
        timestamp: i64,
        retweet_of: Option<String>,
        text: impl Into<String>,
        lexicon: &EmoticonLexicon,
    ) -> Self {
        let text = text.into();
        Tweet {
            id: id.into(),
            user: user.into(),
            timestamp,
            hashtags: extract_hashtags(&text),
            mentions: extract_mentions(&text),
            emoticons: count_emoticons(&text, lexicon),
            retweet_of,
            text,
        }
    }

    /// Serializes back to the corpus line format (no trailing newline).
    pub fn to_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.id,
            self.user,
            self.timestamp,
            self.retweet_of.as_deref().unwrap_or("-"),
            self.text
        )
    }

    /// Distinct hashtags in first-occurrence order.
    pub fn distinct_hashtags(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::with_capacity(self.hashtags.len());
        for tag in &self.hashtags {
            if !seen.contains(&tag.as_str()) {
                seen.push(tag);
            }
        }
        seen
    }
}

/// Hashtags are the spans between consecutive pairs of `#`. An unpaired
/// trailing `#` yields nothing; blank spans are dropped.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut open: Option<usize> = None;
    for (idx, ch) in text.char_indices() {
        if ch != '#' {
            continue;
        }
        match open.take() {
            None => open = Some(idx + 1),
            Some(start) => {
                let tag = text[start..idx].trim();
                if !tag.is_empty() {
                    tags.push(tag.to_string());
                }
            }
        }
    }
    tags
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

/// `@name` tokens; the name ends at the first whitespace or punctuation
/// character other than `_` and `-`.
pub fn extract_mentions(text: &str) -> Vec<String> {
    let mut mentions = Vec::new();
    let mut rest = text;
    while let Some(at) = rest.find('@') {
        let after = &rest[at + 1..];
        let end = after
            .char_indices()
            .find(|&(_, c)| !is_name_char(c))
            .map_or(after.len(), |(i, _)| i);
        if end > 0 {
            mentions.push(after[..end].to_string());
        }
        rest = &after[end..];
    }
    mentions
}

/// Bracketed tokens `[…]` in order of appearance. An unclosed `[` is
/// dropped and scanning resumes at the next `[`.
pub fn bracketed_tokens(text: &str) -> Vec<&str> {
    let mut tokens = Vec::new();
    let mut open: Option<usize> = None;
    for (idx, ch) in text.char_indices() {
        match ch {
            '[' => open = Some(idx),
            ']' => {
                if let Some(start) = open.take() {
                    tokens.push(&text[start..=idx]);
                }
            }
            _ => {}
        }
    }
    tokens
}

pub fn count_emoticons(text: &str, lexicon: &EmoticonLexicon) -> EmoticonCounts {
    let mut counts = EmoticonCounts::default();
    for token in bracketed_tokens(text) {
        match lexicon.get(token) {
            Some(Polarity::Positive) => counts.pos += 1,
            Some(Polarity::Negative) => counts.neg += 1,
            Some(Polarity::Neutral) => counts.neu += 1,
            None => {}
        }
    }
    counts
}

/// Parses one corpus record. `lineno` is 1-based and only used in errors.
pub fn parse_tweet_line(
    line: &str,
    lineno: usize,
    lexicon: &EmoticonLexicon,
) -> Result<Tweet, CorpusError> {
    let line = line.strip_suffix('\r').unwrap_or(line);
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(CorpusError::parse(
            lineno,
            format!("expected 5 tab-separated fields, found {}", fields.len()),
        ));
    }
    let (id, user, ts, rt, text) = (fields[0], fields[1], fields[2], fields[3], fields[4]);
    if id.is_empty() {
        return Err(CorpusError::parse(lineno, "empty tweet id"));
    }
    if user.is_empty() || user == "-" {
        return Err(CorpusError::parse(lineno, "missing user"));
    }
    let timestamp = ts
        .parse::<i64>()
        .map_err(|_| CorpusError::parse(lineno, format!("bad timestamp {ts:?}")))?;
    let retweet_of = match rt {
        "-" => None,
        "" => return Err(CorpusError::parse(lineno, "empty retweet field (use '-')")),
        other => Some(other.to_string()),
    };
    Ok(Tweet::from_parts(id, user, timestamp, retweet_of, text, lexicon))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// Train and test intervals, both half-open `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusWindow {
    pub train_start: i64,
    pub train_end: i64,
    pub test_start: i64,
    pub test_end: i64,
}

impl CorpusWindow {
    pub fn new(
        train_start: i64,
        train_end: i64,
        test_start: i64,
        test_end: i64,
    ) -> Result<Self, CorpusError> {
        if train_start >= train_end {
            return Err(CorpusError::InvalidWindow("empty train interval".into()));
        }
        if test_start >= test_end {
            return Err(CorpusError::InvalidWindow("empty test interval".into()));
        }
        if train_end > test_start {
            return Err(CorpusError::InvalidWindow(
                "train interval overlaps test interval".into(),
            ));
        }
        Ok(CorpusWindow {
            train_start,
            train_end,
            test_start,
            test_end,
        })
    }

    pub fn split_of(&self, timestamp: i64) -> Option<Split> {
        if (self.train_start..self.train_end).contains(&timestamp) {
            Some(Split::Train)
        } else if (self.test_start..self.test_end).contains(&timestamp) {
            Some(Split::Test)
        } else {
            None
        }
    }

    pub fn contains(&self, split: Split, timestamp: i64) -> bool {
        self.split_of(timestamp) == Some(split)
    }
}

impl FromStr for CorpusWindow {
    type Err = CorpusError;

    /// `train_start,train_end,test_start,test_end` in UTC seconds.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CorpusError::InvalidWindow(format!("{s:?}: {e}")))?;
        match parts[..] {
            [a, b, c, d] => CorpusWindow::new(a, b, c, d),
            _ => Err(CorpusError::InvalidWindow(format!(
                "{s:?}: expected four comma-separated timestamps"
            ))),
        }
    }
}

impl fmt::Display for CorpusWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.train_start, self.train_end, self.test_start, self.test_end
        )
    }
}

/// Streaming reader over one split of a corpus file, in file order.
pub struct CorpusStream<'a> {
    lines: io::Lines<BufReader<File>>,
    path: PathBuf,
    lineno: usize,
    window: CorpusWindow,
    split: Split,
    lexicon: &'a EmoticonLexicon,
}

impl Iterator for CorpusStream<'_> {
    type Item = Result<Tweet, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(line) => line,
                Err(e) => return Some(Err(CorpusError::io(&self.path, e))),
            };
            self.lineno += 1;
            if line.trim().is_empty() {
                continue;
            }
            match parse_tweet_line(&line, self.lineno, self.lexicon) {
                Ok(tweet) if self.window.contains(self.split, tweet.timestamp) => {
                    return Some(Ok(tweet))
                }
                Ok(_) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

pub fn stream_corpus<'a>(
    path: impl AsRef<Path>,
    window: CorpusWindow,
    split: Split,
    lexicon: &'a EmoticonLexicon,
) -> Result<CorpusStream<'a>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(CorpusStream {
        lines: BufReader::new(file).lines(),
        path: path.to_path_buf(),
        lineno: 0,
        window,
        split,
        lexicon,
    })
}

/// Parses a whole corpus held in memory; lines are parsed in parallel and
/// returned in file order. Blank lines are skipped.
pub fn parse_corpus(
    contents: &str,
    lexicon: &EmoticonLexicon,
    exec: Exec,
) -> Result<Vec<Tweet>, CorpusError> {
    let lines: Vec<(usize, &str)> = contents
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l))
        .collect();
    par::try_map(exec, &lines, |&(lineno, line)| {
        parse_tweet_line(line, lineno, lexicon)
    })
}

pub fn read_corpus(
    path: impl AsRef<Path>,
    lexicon: &EmoticonLexicon,
    exec: Exec,
) -> Result<Vec<Tweet>, CorpusError> {
    let path = path.as_ref();
    let contents = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    parse_corpus(&contents, lexicon, exec)
}

/// Tweets of one split, in file order.
pub fn load_split(
    path: impl AsRef<Path>,
    window: CorpusWindow,
    split: Split,
    lexicon: &EmoticonLexicon,
    exec: Exec,
) -> Result<Vec<Tweet>, CorpusError> {
    let mut tweets = read_corpus(path, lexicon, exec)?;
    tweets.retain(|t| window.contains(split, t.timestamp));
    Ok(tweets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lexicon() -> EmoticonLexicon {
        let mut lex = EmoticonLexicon::new();
        lex.insert("[smile]", Polarity::Positive);
        lex.insert("[cry]", Polarity::Negative);
        lex.insert("[shrug]", Polarity::Neutral);
        lex
    }

    #[test]
    fn parses_hashtags_and_emoticons() {
        let line = "1\talice\t100\t-\tgreat #Rio2016# [smile][smile][cry]";
        let t = parse_tweet_line(line, 1, &lexicon()).unwrap();
        assert_eq!(t.hashtags, vec!["Rio2016"]);
        assert_eq!(t.emoticons, EmoticonCounts { pos: 2, neg: 1, neu: 0 });
        assert_eq!(t.retweet_of, None);
    }

    #[test]
    fn plain_text_has_no_entities() {
        let t = parse_tweet_line("1\tu\t5\t-\tjust words here", 1, &lexicon()).unwrap();
        assert!(t.hashtags.is_empty());
        assert!(t.mentions.is_empty());
        assert_eq!(t.emoticons, EmoticonCounts::default());
    }

    #[test]
    fn two_hashtags_and_unpaired_tail() {
        assert_eq!(extract_hashtags("#a# mid #b#"), vec!["a", "b"]);
        assert_eq!(extract_hashtags("#a# dangling #tail"), vec!["a"]);
        assert!(extract_hashtags("## empty").is_empty());
    }

    #[test]
    fn mentions_stop_at_punctuation() {
        assert_eq!(
            extract_mentions("hi @bob, and @carol_x! @ alone @李明:"),
            vec!["bob", "carol_x", "李明"]
        );
    }

    #[test]
    fn unknown_brackets_are_ignored() {
        let c = count_emoticons("[smile][what][shrug] [[cry]", &lexicon());
        assert_eq!(c, EmoticonCounts { pos: 1, neg: 1, neu: 1 });
    }

    #[test]
    fn retweet_field() {
        let t = parse_tweet_line("9\ta\t1\tbob\tRT something", 1, &lexicon()).unwrap();
        assert_eq!(t.retweet_of.as_deref(), Some("bob"));
        assert_eq!(t.to_line(), "9\ta\t1\tbob\tRT something");
    }

    #[test]
    fn malformed_records_carry_line_numbers() {
        let lex = lexicon();
        let err = parse_tweet_line("1\tu\t5\ttext only four", 7, &lex).unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 7, .. }), "{err}");
        let err = parse_tweet_line("1\tu\tnoon\t-\tx", 3, &lex).unwrap_err();
        assert!(matches!(err, CorpusError::Parse { line: 3, .. }));
        assert!(parse_tweet_line("\tu\t1\t-\tx", 1, &lex).is_err());
        assert!(parse_tweet_line("1\t\t1\t-\tx", 1, &lex).is_err());
    }

    #[test]
    fn lexicon_two_rows() {
        let lex = EmoticonLexicon::parse("[smile]\tpositive\n[cry]\tnegative\n".as_bytes()).unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get("[cry]"), Some(Polarity::Negative));
    }

    #[test]
    fn lexicon_rejects_duplicates_and_bad_labels() {
        let err = EmoticonLexicon::parse("[smile]\tpositive\n[smile]\tnegative\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateToken { line: 2, .. }));
        let err = EmoticonLexicon::parse("[smile]\tgood\n".as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownPolarity { line: 1, .. }));
        assert!(EmoticonLexicon::parse("smile\tpositive\n".as_bytes()).is_err());
    }

    #[test]
    fn window_is_half_open() {
        let w = CorpusWindow::new(0, 100, 100, 200).unwrap();
        assert_eq!(w.split_of(0), Some(Split::Train));
        assert_eq!(w.split_of(99), Some(Split::Train));
        assert_eq!(w.split_of(100), Some(Split::Test));
        assert_eq!(w.split_of(200), None);
        assert_eq!(w.split_of(-1), None);
    }

    #[test]
    fn window_validation() {
        assert!(CorpusWindow::new(0, 0, 1, 2).is_err());
        assert!(CorpusWindow::new(0, 10, 5, 20).is_err());
        assert!(CorpusWindow::new(0, 10, 20, 20).is_err());
        let w: CorpusWindow = "0,10,10,20".parse().unwrap();
        assert_eq!(w.to_string(), "0,10,10,20");
        assert!("0,10,10".parse::<CorpusWindow>().is_err());
    }
}
