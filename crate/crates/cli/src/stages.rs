// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use commenergy::corpus::{self, parse_corpus, CorpusWindow, EmoticonLexicon, Split, Tweet};
use commenergy::energy::{self, CommunityEnergy, EnergyFunction, EnergyModel};
use commenergy::graph::{self, CommunityGraph};
use commenergy::predictor::{self, Model, PredictorKind, TopicSample, TrainConfig};
use commenergy::sentiment::{self, Normalization, SentimentVector};
use commenergy::stats;
use commenergy::synth::{self, SynthConfig};
use commenergy::topics::{self, Topic};
use commenergy::Exec;

use crate::manifest::{sha256_file, Workdir};

pub const TRAIN_TWEETS: &str = "tweets_train.tsv";
pub const TEST_TWEETS: &str = "tweets_test.tsv";
pub const LEXICON: &str = "lexicon.tsv";
pub const GRAPH: &str = "graph.tsv";
pub const COMMUNITY: &str = "community.tsv";
pub const MEMBERS: &str = "members.txt";
pub const CATALOG: &str = "catalog.tsv";
pub const VECTORS: &str = "vectors.tsv";
pub const ENERGY: &str = "energy.tsv";
pub const CORRELATION: &str = "correlation.tsv";
pub const TRAINING: &str = "training.tsv";
pub const EVALUATION: &str = "evaluation.tsv";

const DAY: i64 = 86_400;

type Config = BTreeMap<String, String>;
type Inputs = BTreeMap<String, String>;

fn config<const N: usize>(pairs: [(&str, String); N]) -> Config {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn lines_of(tweets: &[Tweet]) -> String {
    let mut out = String::new();
    for t in tweets {
        out.push_str(&t.to_line());
        out.push('\n');
    }
    out
}

/// Reads checked workdir artifacts, recording their digests as inputs.
struct Reader<'a> {
    wd: &'a Workdir,
    inputs: Inputs,
}

impl<'a> Reader<'a> {
    fn new(wd: &'a Workdir) -> Self {
        Reader {
            wd,
            inputs: Inputs::new(),
        }
    }

    fn text(&mut self, name: &str) -> Result<String> {
        let (text, digest) = self.wd.read_checked(name)?;
        self.inputs.insert(name.to_string(), digest);
        Ok(text)
    }

    fn lexicon(&mut self) -> Result<EmoticonLexicon> {
        let text = self.text(LEXICON)?;
        Ok(EmoticonLexicon::parse(text.as_bytes())?)
    }

    fn tweets(&mut self, name: &str, lexicon: &EmoticonLexicon, exec: Exec) -> Result<Vec<Tweet>> {
        let text = self.text(name)?;
        parse_corpus(&text, lexicon, exec).with_context(|| format!("parsing {name}"))
    }

    fn community(&mut self) -> Result<CommunityGraph> {
        let cfg = self
            .wd
            .config_of("graph")
            .ok_or_else(|| anyhow!("missing upstream stage graph"))?;
        let seed = cfg["seed_user"].clone();
        let depth: u32 = cfg["max_depth"].parse()?;
        let members = self.text(MEMBERS)?;
        let edges = self.text(COMMUNITY)?;
        Ok(CommunityGraph::read(&seed, depth, members.as_bytes(), edges.as_bytes())?)
    }

    fn catalog(&mut self) -> Result<Vec<Topic>> {
        let text = self.text(CATALOG)?;
        Ok(topics::read_catalog(text.as_bytes())?)
    }

    fn vectors(&mut self) -> Result<Vec<SentimentVector>> {
        let text = self.text(VECTORS)?;
        Ok(sentiment::read_vectors(text.as_bytes())?)
    }
}

pub struct IngestArgs<'a> {
    pub corpus: &'a Path,
    pub lexicon: &'a Path,
    pub window: CorpusWindow,
}

pub fn ingest(wd: &mut Workdir, args: IngestArgs, exec: Exec) -> Result<()> {
    let lexicon = corpus::load_lexicon(args.lexicon)?;
    let tweets = corpus::read_corpus(args.corpus, &lexicon, exec)?;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for t in tweets {
        match args.window.split_of(t.timestamp) {
            Some(Split::Train) => train.push(t),
            Some(Split::Test) => test.push(t),
            None => {}
        }
    }
    let inputs = Inputs::from([
        (args.corpus.display().to_string(), sha256_file(args.corpus)?),
        (args.lexicon.display().to_string(), sha256_file(args.lexicon)?),
    ]);
    wd.commit(
        "ingest",
        config([("window", args.window.to_string())]),
        inputs,
        vec![
            (TRAIN_TWEETS.into(), lines_of(&train)),
            (TEST_TWEETS.into(), lines_of(&test)),
            (LEXICON.into(), lexicon.to_tsv()),
        ],
    )
}

pub fn graph(wd: &mut Workdir, seed_user: &str, max_depth: u32, exec: Exec) -> Result<()> {
    let mut r = Reader::new(wd);
    let lexicon = r.lexicon()?;
    let train = r.tweets(TRAIN_TWEETS, &lexicon, exec)?;
    let g = graph::build_graph(&train, exec);
    let community = graph::extract_community(&g, seed_user, max_depth)?;
    let inputs = r.inputs;
    wd.commit(
        "graph",
        config([
            ("seed_user", seed_user.to_string()),
            ("max_depth", max_depth.to_string()),
        ]),
        inputs,
        vec![
            (GRAPH.into(), g.to_edge_tsv()),
            (COMMUNITY.into(), community.to_edge_tsv()),
            (MEMBERS.into(), community.members_text()),
        ],
    )
}

pub struct TopicsArgs<'a> {
    pub m: usize,
    pub min_popularity: u64,
    pub first_month_end: Option<i64>,
    pub stopwords: Option<&'a Path>,
}

pub fn topics(wd: &mut Workdir, args: TopicsArgs, exec: Exec) -> Result<()> {
    let window: CorpusWindow = wd
        .config_of("ingest")
        .ok_or_else(|| anyhow!("missing upstream stage ingest"))?["window"]
        .parse()?;
    let first_month_end = args.first_month_end.unwrap_or(window.test_start + 30 * DAY);
    let mut r = Reader::new(wd);
    let lexicon = r.lexicon()?;
    let test = r.tweets(TEST_TWEETS, &lexicon, exec)?;
    let stopwords = match args.stopwords {
        Some(path) => {
            r.inputs.insert(path.display().to_string(), sha256_file(path)?);
            let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            topics::load_stopwords(std::io::BufReader::new(file))?
        }
        None => HashSet::new(),
    };
    let found = topics::extract_topics(&test, first_month_end, args.min_popularity);
    let distinct = topics::dedupe_equal_popularity(&found);
    let catalog = topics::assign_key_phrases(&distinct, &test, args.m, &stopwords, exec)?;
    let inputs = r.inputs;
    wd.commit(
        "topics",
        config([
            ("m", args.m.to_string()),
            ("min_popularity", args.min_popularity.to_string()),
            ("first_month_end", first_month_end.to_string()),
        ]),
        inputs,
        vec![(CATALOG.into(), topics::catalog_to_tsv(&catalog))],
    )
}

pub fn sentiment(wd: &mut Workdir, norm: Normalization, exec: Exec) -> Result<()> {
    let mut r = Reader::new(wd);
    let lexicon = r.lexicon()?;
    let train = r.tweets(TRAIN_TWEETS, &lexicon, exec)?;
    let community = r.community()?;
    let catalog = r.catalog()?;
    let vectors = sentiment::community_vectors(&catalog, &community, &train, norm, exec);
    let inputs = r.inputs;
    let norm = match norm {
        Normalization::AllTweets => "all",
        Normalization::MatchingTweets => "matching",
    };
    wd.commit(
        "sentiment",
        config([("normalization", norm.to_string())]),
        inputs,
        vec![(VECTORS.into(), sentiment::vectors_to_tsv(&vectors))],
    )
}

pub fn energy(
    wd: &mut Workdir,
    models: &[EnergyModel],
    functions: &[EnergyFunction],
    exec: Exec,
) -> Result<()> {
    let mut r = Reader::new(wd);
    let community = r.community()?;
    let catalog = r.catalog()?;
    let vectors = r.vectors()?;
    let mut report: Vec<CommunityEnergy> = Vec::new();
    for topic in &catalog {
        let vs = sentiment::vectors_for_topic(&vectors, &topic.hashtag);
        for &model in models {
            for &function in functions {
                report.push(energy::community_energy(
                    &topic.hashtag,
                    &community,
                    &vs,
                    topic.key_phrases.len(),
                    model,
                    function,
                    exec,
                )?);
            }
        }
    }
    let inputs = r.inputs;
    wd.commit(
        "energy",
        config([("models", join(models)), ("functions", join(functions))]),
        inputs,
        vec![(ENERGY.into(), energy::report_to_tsv(&report))],
    )
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        x.to_string()
    }
}

pub fn correlate(wd: &mut Workdir, gaps: &[u64]) -> Result<()> {
    let mut r = Reader::new(wd);
    let catalog = r.catalog()?;
    let energies = energy::read_report(r.text(ENERGY)?.as_bytes())?;
    let mut by_key: HashMap<(&str, EnergyModel, EnergyFunction), f64> = HashMap::new();
    let mut combos: Vec<(EnergyModel, EnergyFunction)> = Vec::new();
    for e in &energies {
        by_key.insert((e.topic.as_str(), e.model, e.function), e.value);
        if !combos.contains(&(e.model, e.function)) {
            combos.push((e.model, e.function));
        }
    }
    combos.sort_by_key(|&(m, f)| (m.as_str(), f.as_str()));

    let mut out = String::from("gap\tn\tmodel\tfunction\tr\tp\tstrength\n");
    for &gap in gaps {
        let subset = topics::gap_filter(&catalog, gap);
        for &(model, function) in &combos {
            let mut xs = Vec::with_capacity(subset.topics.len());
            let mut ys = Vec::with_capacity(subset.topics.len());
            for t in &subset.topics {
                let e = by_key
                    .get(&(t.hashtag.as_str(), model, function))
                    .ok_or_else(|| anyhow!("{ENERGY} has no {model}/{function} row for {}", t.hashtag))?;
                xs.push(*e);
                ys.push(t.popularity as f64);
            }
            let (r, p, strength) = match stats::correlate(&xs, &ys) {
                Ok(rep) => (rep.r, rep.p, rep.strength.to_string()),
                Err(e) => (f64::NAN, f64::NAN, format!("undefined ({e})")),
            };
            let _ = writeln!(
                out,
                "{gap}\t{}\t{model}\t{function}\t{}\t{}\t{strength}",
                xs.len(),
                fmt_num(r),
                fmt_num(p)
            );
        }
    }
    let inputs = r.inputs;
    wd.commit(
        "correlate",
        config([("gaps", join(gaps))]),
        inputs,
        vec![(CORRELATION.into(), out)],
    )
}

pub struct TrainArgs<'a> {
    pub predictors: &'a [PredictorKind],
    pub function: EnergyFunction,
    pub gaps: &'a [u64],
    pub eta: f64,
    pub epochs: usize,
    pub seed: u64,
}

fn split_name(gap: u64) -> String {
    format!("split_gap{gap}.tsv")
}

fn model_name(kind: PredictorKind, gap: u64) -> String {
    format!("model_{}_gap{gap}.tsv", kind.as_str())
}

struct Prepared {
    samples: Vec<TopicSample>,
    edges: Vec<(String, String)>,
}

fn prepare(r: &mut Reader, function: EnergyFunction, exec: Exec) -> Result<Prepared> {
    let community = r.community()?;
    let catalog = r.catalog()?;
    let vectors = r.vectors()?;
    let m = catalog.first().map_or(0, |t| t.key_phrases.len());
    if catalog.iter().any(|t| t.key_phrases.len() != m) {
        bail!("{CATALOG} topics have differing key-phrase counts");
    }
    let samples = predictor::build_samples(&catalog, &community, &vectors, m, function, exec)?;
    let edges = community
        .edge_names()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    Ok(Prepared { samples, edges })
}

fn gap_samples(all: &[TopicSample], catalog_gap: &[Topic]) -> Vec<TopicSample> {
    let keep: HashSet<&str> = catalog_gap.iter().map(|t| t.hashtag.as_str()).collect();
    all.iter()
        .filter(|s| keep.contains(s.hashtag.as_str()))
        .cloned()
        .collect()
}

pub fn train(wd: &mut Workdir, args: TrainArgs, exec: Exec) -> Result<()> {
    let mut r = Reader::new(wd);
    let prepared = prepare(&mut r, args.function, exec)?;
    let catalog = topics::read_catalog(r.wd.read_checked(CATALOG)?.0.as_bytes())?;
    let cfg = TrainConfig {
        learning_rate: args.eta,
        epochs: args.epochs,
        seed: args.seed,
        exec,
        ..Default::default()
    };
    let mut outputs = Vec::new();
    let mut summary = String::from("gap\tpredictor\tfunction\tn_train\tn_test\tepochs\ttrain_loss\tstatus\n");
    for &gap in args.gaps {
        let subset = topics::gap_filter(&catalog, gap);
        let samples = gap_samples(&prepared.samples, &subset.topics);
        let split = predictor::split_train_test(&samples, args.seed);
        let (train_set, test_set) = match split {
            Ok(s) => s,
            Err(e) => {
                for &kind in args.predictors {
                    let _ = writeln!(summary, "{gap}\t{kind}\t{}\t0\t0\t0\tNaN\terror: {e}", args.function);
                }
                continue;
            }
        };
        let mut split_text = String::new();
        for s in &train_set {
            let _ = writeln!(split_text, "{}\ttrain", s.hashtag);
        }
        for s in &test_set {
            let _ = writeln!(split_text, "{}\ttest", s.hashtag);
        }
        outputs.push((split_name(gap), split_text));
        for &kind in args.predictors {
            match predictor::train(kind, &prepared.edges, &train_set, &cfg) {
                Ok(outcome) => {
                    let final_loss = outcome.loss_curve.last().copied().unwrap_or(f64::NAN);
                    let _ = writeln!(
                        summary,
                        "{gap}\t{kind}\t{}\t{}\t{}\t{}\t{}\tok",
                        args.function,
                        train_set.len(),
                        test_set.len(),
                        outcome.loss_curve.len(),
                        fmt_num(final_loss)
                    );
                    outputs.push((model_name(kind, gap), predictor::model_to_tsv(&outcome.model)));
                }
                Err(e) => {
                    let _ = writeln!(
                        summary,
                        "{gap}\t{kind}\t{}\t{}\t{}\t0\tNaN\terror: {e}",
                        args.function,
                        train_set.len(),
                        test_set.len()
                    );
                }
            }
        }
    }
    outputs.push((TRAINING.into(), summary));
    let inputs = r.inputs;
    wd.commit(
        "train",
        config([
            ("predictors", join(args.predictors)),
            ("function", args.function.to_string()),
            ("gaps", join(args.gaps)),
            ("eta", args.eta.to_string()),
            ("epochs", args.epochs.to_string()),
            ("seed", args.seed.to_string()),
        ]),
        inputs,
        outputs,
    )
}

pub fn evaluate(wd: &mut Workdir, exec: Exec) -> Result<()> {
    let train_cfg = wd
        .config_of("train")
        .ok_or_else(|| anyhow!("missing upstream stage train"))?
        .clone();
    let function: EnergyFunction = train_cfg["function"].parse()?;
    let gaps: Vec<u64> = train_cfg["gaps"]
        .split(',')
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    let predictors: Vec<PredictorKind> = train_cfg["predictors"]
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<PredictorKind>().map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;
    let produced: HashSet<String> = wd.outputs_of("train").into_iter().collect();

    let mut r = Reader::new(wd);
    let prepared = prepare(&mut r, function, exec)?;
    let by_tag: HashMap<&str, &TopicSample> =
        prepared.samples.iter().map(|s| (s.hashtag.as_str(), s)).collect();
    r.text(TRAINING)?;

    let mut out = String::from("gap\tpredictor\tfunction\tn_test\trse\tr_squared\n");
    for &gap in &gaps {
        let split_file = split_name(gap);
        let test_set: Vec<TopicSample> = if produced.contains(&split_file) {
            r.text(&split_file)?
                .lines()
                .filter_map(|l| l.strip_suffix("\ttest"))
                .map(|tag| {
                    by_tag
                        .get(tag)
                        .map(|s| (*s).clone())
                        .ok_or_else(|| anyhow!("{split_file}: unknown topic {tag}"))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        for &kind in &predictors {
            let name = model_name(kind, gap);
            let (rse, r2) = if produced.contains(&name) {
                let model: Model = predictor::read_model(r.text(&name)?.as_bytes())?;
                match predictor::evaluate(&model, &test_set) {
                    Ok(ev) => (ev.rse, ev.r_squared),
                    Err(_) => (f64::NAN, f64::NAN),
                }
            } else {
                (f64::NAN, f64::NAN)
            };
            let _ = writeln!(
                out,
                "{gap}\t{kind}\t{function}\t{}\t{}\t{}",
                test_set.len(),
                fmt_num(rse),
                fmt_num(r2)
            );
        }
    }
    let inputs = r.inputs;
    wd.commit(
        "evaluate",
        config([]),
        inputs,
        vec![(EVALUATION.into(), out)],
    )
}

pub fn synth(wd: &mut Workdir, cfg: &SynthConfig) -> Result<()> {
    let world = synth::generate(cfg)?;
    let settings = config([
        ("seed", cfg.seed.to_string()),
        ("users", cfg.n_users.to_string()),
        ("edge_density", cfg.edge_density.to_string()),
        ("topics", cfg.n_topics.to_string()),
        ("m", cfg.m.to_string()),
        ("emoticon_rate", cfg.emoticon_rate.to_string()),
        ("phrase_coverage", cfg.phrase_coverage.to_string()),
        ("engagement", format!("{},{}", cfg.engagement.0, cfg.engagement.1)),
        ("planted", format!("{:?}", cfg.planted)),
        ("window", cfg.window.to_string()),
    ]);
    wd.commit(
        "synth",
        settings,
        Inputs::new(),
        vec![
            ("corpus.tsv".into(), world.corpus_text()),
            (LEXICON.into(), world.lexicon.to_tsv()),
            ("expected.tsv".into(), world.expected.to_tsv()),
        ],
    )
}
