// SPDX-License-Identifier: Apache-2.0

//! `commenergy`: staged pipeline from a raw corpus to correlation and
//! prediction reports. Every stage reads and writes TSV artifacts in a work
//! directory and records their digests in `manifest.json`.

mod manifest;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use commenergy::corpus::CorpusWindow;
use commenergy::energy::{EnergyFunction, EnergyModel};
use commenergy::predictor::PredictorKind;
use commenergy::sentiment::Normalization;
use commenergy::synth::{Planted, SynthConfig, DEFAULT_WINDOW};
use commenergy::topics::{DEFAULT_KEY_PHRASES, DEFAULT_MIN_POPULARITY};
use commenergy::Exec;

use manifest::Workdir;

#[derive(Parser)]
#[command(name = "commenergy", version, about = "Community sentiment energy and topic popularity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Directory holding the stage artifacts and manifest.json.
    #[arg(long, default_value = "work")]
    workdir: PathBuf,
    /// Run every stage on one thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Mrf,
    Entropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    Cosine,
    Avglen,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictorArg {
    Linear,
    Edge,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    All,
    Matching,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlantedArg {
    None,
    Linear,
    Edge,
}

impl From<ModelArg> for EnergyModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Mrf => EnergyModel::Mrf,
            ModelArg::Entropy => EnergyModel::Entropy,
        }
    }
}

impl From<FunctionArg> for EnergyFunction {
    fn from(f: FunctionArg) -> Self {
        match f {
            FunctionArg::Cosine => EnergyFunction::Cosine,
            FunctionArg::Avglen => EnergyFunction::AverageLength,
        }
    }
}

impl From<PredictorArg> for PredictorKind {
    fn from(p: PredictorArg) -> Self {
        match p {
            PredictorArg::Linear => PredictorKind::Linear,
            PredictorArg::Edge => PredictorKind::Edge,
        }
    }
}

fn parse_window(s: &str) -> Result<CorpusWindow, String> {
    s.parse().map_err(|e| format!("{e}"))
}

#[derive(Subcommand)]
enum Command {
    /// Parse the corpus and split it into train and test windows.
    Ingest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        /// train_start,train_end,test_start,test_end (UTC seconds)
        #[arg(long, value_parser = parse_window)]
        window: CorpusWindow,
    },
    /// Build the retweet-mention graph and the seed user's community.
    Graph {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed_user: String,
        #[arg(long, default_value_t = 3)]
        max_depth: u32,
    },
    /// Extract test-window topics and their key phrases.
    Topics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_KEY_PHRASES)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_POPULARITY)]
        min_popularity: u64,
        /// Topics must start before this time (default: 30 days after test start).
        #[arg(long)]
        first_month_end: Option<i64>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Sentiment vectors of community members on each topic.
    Sentiment {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        normalization: NormArg,
    },
    /// Community energies per topic (all model/function pairs by default).
    Energy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, value_enum)]
        function: Option<FunctionArg>,
    },
    /// Correlation between energy and popularity per gap dataset.
    Correlate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        gaps: Vec<u64>,
    },
    /// Fit popularity predictors per gap dataset.
    Train {
        #[command(flatten)]
        common: Common,
        /// Omit to train both predictors.
        #[arg(long, value_enum)]
        predictor: Option<PredictorArg>,
        #[arg(long, value_enum, default_value = "cosine")]
        function: FunctionArg,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        gaps: Vec<u64>,
        #[arg(long, default_value_t = 0.01)]
        eta: f64,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Relative squared error of trained predictors on their test halves.
    Evaluate {
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic corpus with planted ground truth.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        users: usize,
        #[arg(long, default_value_t = 0.02)]
        edge_density: f64,
        #[arg(long, default_value_t = 40)]
        topics: usize,
        #[arg(long, default_value_t = DEFAULT_KEY_PHRASES)]
        m: usize,
        #[arg(long, default_value_t = 0.5)]
        emoticon_rate: f64,
        #[arg(long, default_value_t = 1.0)]
        phrase_coverage: f64,
        #[arg(long, value_enum, default_value = "linear")]
        planted: PlantedArg,
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        #[arg(long, default_value_t = 5.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        weight_lo: f64,
        #[arg(long, default_value_t = 10.0)]
        weight_hi: f64,
        #[arg(long, default_value_t = 20.0)]
        rho: f64,
        /// Noise standard deviation as a fraction of mean popularity.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 100)]
        popularity_lo: u64,
        #[arg(long, default_value_t = 300)]
        popularity_hi: u64,
        #[arg(long, value_parser = parse_window)]
        window: Option<CorpusWindow>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest {
            common,
            corpus,
            lexicon,
            window,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            let args = stages::IngestArgs {
                corpus: &corpus,
                lexicon: &lexicon,
                window,
            };
            stages::ingest(&mut wd, args, common.exec())
        }
        Command::Graph {
            common,
            seed_user,
            max_depth,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            stages::graph(&mut wd, &seed_user, max_depth, common.exec())
        }
        Command::Topics {
            common,
            m,
            min_popularity,
            first_month_end,
            stopwords,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            let args = stages::TopicsArgs {
                m,
                min_popularity,
                first_month_end,
                stopwords: stopwords.as_deref(),
            };
            stages::topics(&mut wd, args, common.exec())
        }
        Command::Sentiment {
            common,
            normalization,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            let norm = match normalization {
                NormArg::All => Normalization::AllTweets,
                NormArg::Matching => Normalization::MatchingTweets,
            };
            stages::sentiment(&mut wd, norm, common.exec())
        }
        Command::Energy {
            common,
            model,
            function,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            let models = model.map_or(EnergyModel::ALL.to_vec(), |m| vec![m.into()]);
            let functions = function.map_or(EnergyFunction::ALL.to_vec(), |f| vec![f.into()]);
            stages::energy(&mut wd, &models, &functions, common.exec())
        }
        Command::Correlate { common, gaps } => {
            let mut wd = Workdir::open(&common.workdir)?;
            stages::correlate(&mut wd, &gaps)
        }
        Command::Train {
            common,
            predictor,
            function,
            gaps,
            eta,
            epochs,
            seed,
        } => {
            let mut wd = Workdir::open(&common.workdir)?;
            let predictors =
                predictor.map_or(vec![PredictorKind::Linear, PredictorKind::Edge], |p| vec![p.into()]);
            let args = stages::TrainArgs {
                predictors: &predictors,
                function: function.into(),
                gaps: &gaps,
                eta,
                epochs,
                seed,
            };
            stages::train(&mut wd, args, common.exec())
        }
        Command::Evaluate { common } => {
            let mut wd = Workdir::open(&common.workdir)?;
            stages::evaluate(&mut wd, common.exec())
        }
        Command::Synth {
            common,
            seed,
            users,
            edge_density,
            topics,
            m,
            emoticon_rate,
            phrase_coverage,
            planted,
            alpha,
            beta,
            weight_lo,
            weight_hi,
            rho,
            noise,
            popularity_lo,
            popularity_hi,
            window,
        } => {
            let planted = match planted {
                PlantedArg::None => Planted::None {
                    lo: popularity_lo,
                    hi: popularity_hi,
                },
                PlantedArg::Linear => Planted::Linear { alpha, beta, noise },
                PlantedArg::Edge => Planted::EdgeWeights {
                    weight_lo,
                    weight_hi,
                    rho,
                    noise,
                },
            };
            let cfg = SynthConfig {
                seed,
                n_users: users,
                edge_density,
                n_topics: topics,
                m,
                emoticon_rate,
                phrase_coverage,
                planted,
                window: window.unwrap_or(DEFAULT_WINDOW),
                ..Default::default()
            };
            let mut wd = Workdir::open(&common.workdir)?;
            stages::synth(&mut wd, &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
