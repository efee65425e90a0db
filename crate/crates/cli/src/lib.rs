//! Command-line front end: `prepare`, `train`, `evaluate`, `compare`,
//! `predict` and `alert`.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use senti_risk::alert::{alerts_to_jsonl, detect_inflections, AlertRuleConfig};
use senti_risk::config::RunConfig;
use senti_risk::data::{
    prepare, read_market_csv, read_prepared, read_text_jsonl, write_prepared, Lexicon, PreparedDataset,
    SplitName, WindowSample,
};
use senti_risk::model::{build_model, load_checkpoint, save_checkpoint, ArchKind, Model, ModelConfig};
use senti_risk::train::{
    compare_ablations, daily_predictions_to_jsonl, evaluate, export_predictions, parse_daily_predictions, predict,
    train, write_history,
};
use senti_risk::Error;

pub const SEED_ENV: &str = "SENTI_RISK_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "senti-risk", version, about = "Market-sentiment forecasting and risk alerts")]
struct Cli {
    /// JSON run configuration (flat keys; see README)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides the config seed and the SENTI_RISK_SEED variable
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    arch: Option<ArchArg>,
    #[arg(long, global = true, value_enum)]
    attention: Option<OnOff>,
    /// Checkpoint to read [default: <data-dir>/model.ckpt.json]
    #[arg(long, global = true, value_name = "PATH")]
    model_in: Option<PathBuf>,
    /// Checkpoint to write [default: <data-dir>/model.ckpt.json]
    #[arg(long, global = true, value_name = "PATH")]
    model_out: Option<PathBuf>,
    /// Directory holding inputs and prepared files
    #[arg(long, global = true, value_name = "PATH", default_value = ".")]
    data_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Clean, label, align and window market.csv + text.jsonl into a prepared dataset
    Prepare {
        /// Market CSV [default: <data-dir>/market.csv]
        #[arg(long, value_name = "PATH")]
        market: Option<PathBuf>,
        /// Text JSONL [default: <data-dir>/text.jsonl, optional]
        #[arg(long, value_name = "PATH")]
        text: Option<PathBuf>,
        /// Positive word list (requires --lexicon-negative)
        #[arg(long, value_name = "PATH", requires = "lexicon_negative")]
        lexicon_positive: Option<PathBuf>,
        /// Negative word list (requires --lexicon-positive)
        #[arg(long, value_name = "PATH", requires = "lexicon_positive")]
        lexicon_negative: Option<PathBuf>,
    },
    /// Train one architecture and write a checkpoint
    Train {
        /// Per-epoch history [default: <data-dir>/history.jsonl]
        #[arg(long, value_name = "PATH")]
        history: Option<PathBuf>,
    },
    /// Print metrics for each split as JSON
    Evaluate,
    /// Train CNN, GRU and CNN+GRU with identical seeds and print the comparison table
    Compare {
        /// Also write the full report as JSON
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Export date,true_close,pred_close and per-day class probabilities
    Predict {
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Price CSV [default: <data-dir>/predictions.csv]
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Daily prediction JSONL [default: <data-dir>/daily_predictions.jsonl]
        #[arg(long, value_name = "PATH")]
        daily_out: Option<PathBuf>,
    },
    /// Emit alert JSONL from daily predictions
    Alert {
        /// Daily prediction JSONL [default: <data-dir>/daily_predictions.jsonl]
        #[arg(long, value_name = "PATH")]
        predictions: Option<PathBuf>,
        /// Overrides the configured risk threshold
        #[arg(long)]
        risk_threshold: Option<f64>,
        /// Write alerts here instead of standard output
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ArchArg {
    Cnn,
    Gru,
    CnnGru,
}

impl From<ArchArg> for ArchKind {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Cnn => ArchKind::CnnOnly,
            ArchArg::Gru => ArchKind::GruOnly,
            ArchArg::CnnGru => ArchKind::CnnGru,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) => match e {
                Error::Data(_) | Error::TokenOutOfRange { .. } | Error::Checkpoint(_) | Error::Io { .. } | Error::Json(_) => EXIT_DATA,
                Error::Numeric(_) | Error::Shape { .. } | Error::InvalidArgument(_) => EXIT_RUNTIME,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .is_test(cfg!(test))
        .try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("senti-risk: {e}");
            e.exit_code()
        }
    }
}

/// Config file, then `SENTI_RISK_SEED`, then flags.
fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::read(p)?,
        None => RunConfig::default(),
    };
    match (cli.seed, std::env::var(SEED_ENV)) {
        (Some(seed), _) => cfg.seed = seed,
        (None, Ok(v)) => {
            cfg.seed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a non-negative integer")))?;
        }
        (None, Err(_)) => {}
    }
    if let Some(a) = cli.arch {
        cfg.arch = a.into();
    }
    if let Some(a) = cli.attention {
        cfg.attention = matches!(a, OnOff::On);
    }
    Ok(cfg)
}

fn default_in(dir: &Path, given: &Option<PathBuf>, name: &str) -> PathBuf {
    given.clone().unwrap_or_else(|| dir.join(name))
}

fn model_config_for(cfg: &RunConfig, data: &PreparedDataset) -> CliResult<ModelConfig> {
    let mut m = cfg.model_config(data.vocab.len());
    if let Some(len) = data.max_doc_len() {
        m.max_doc_len = len;
    }
    if let Some(s) = data.all_samples().next() {
        if s.window() != cfg.window {
            return Err(Error::Data(format!(
                "prepared samples use a window of {} but the config says {}",
                s.window(),
                cfg.window
            ))
            .into());
        }
    }
    m.validate().map_err(|e| Error::Data(format!("model config: {e}")))?;
    Ok(m)
}

fn load_model_for(path: &Path, data: &PreparedDataset) -> CliResult<Model> {
    let model = load_checkpoint(path)?;
    if model.config.vocab_size != data.vocab.len() {
        return Err(Error::Data(format!(
            "checkpoint vocabulary has {} ids but the prepared data has {}",
            model.config.vocab_size,
            data.vocab.len()
        ))
        .into());
    }
    Ok(model)
}

fn split_of(data: &PreparedDataset, s: SplitArg) -> (&[WindowSample], SplitName) {
    match s {
        SplitArg::Train => (&data.splits.train, SplitName::Train),
        SplitArg::Val => (&data.splits.val, SplitName::Val),
        SplitArg::Test => (&data.splits.test, SplitName::Test),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli)?;
    let dir = &cli.data_dir;
    match &cli.command {
        Command::Prepare {
            market,
            text,
            lexicon_positive,
            lexicon_negative,
        } => {
            let bars = read_market_csv(&default_in(dir, market, "market.csv"))?;
            let text_path = default_in(dir, text, "text.jsonl");
            let docs = if text.is_some() || text_path.exists() {
                read_text_jsonl(&text_path)?
            } else {
                Vec::new()
            };
            let lexicon = match (lexicon_positive, lexicon_negative) {
                (Some(p), Some(n)) => Lexicon::from_files(p, n)?,
                _ => Lexicon::bundled(),
            };
            let data = prepare(&bars, &docs, &lexicon, &cfg.prepare_config()?)?;
            write_prepared(dir, &data)?;
            eprintln!(
                "prepared {} samples (train {}, val {}, test {}), vocabulary {}, {} documents dropped",
                data.all_samples().count(),
                data.splits.train.len(),
                data.splits.val.len(),
                data.splits.test.len(),
                data.vocab.len(),
                data.dropped_docs
            );
        }
        Command::Train { history } => {
            let data = read_prepared(dir)?;
            let model = build_model(&model_config_for(&cfg, &data)?, cfg.arch)?;
            eprintln!("training {} with {} parameters", cfg.arch, model.params.count());
            let outcome = train(&model, &data.splits.train, &data.splits.val, &cfg.train_config())?;
            let out = default_in(dir, &cli.model_out, "model.ckpt.json");
            save_checkpoint(&outcome.model, &out)?;
            write_history(&default_in(dir, history, "history.jsonl"), &outcome.history)?;
            eprintln!(
                "best epoch {} of {}, val loss {:.6}; wrote {}",
                outcome.best_epoch,
                outcome.history.len(),
                outcome.best_val_loss,
                out.display()
            );
        }
        Command::Evaluate => {
            let data = read_prepared(dir)?;
            let model = load_model_for(&default_in(dir, &cli.model_in, "model.ckpt.json"), &data)?;
            let mut report = serde_json::Map::new();
            for s in [SplitArg::Train, SplitArg::Val, SplitArg::Test] {
                let (samples, name) = split_of(&data, s);
                if !samples.is_empty() {
                    report.insert(name.to_string(), serde_json::to_value(evaluate(&model, samples)?).map_err(Error::from)?);
                }
            }
            println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
        }
        Command::Compare { report } => {
            let data = read_prepared(dir)?;
            let mcfg = model_config_for(&cfg, &data)?;
            let result = compare_ablations(&data.splits, &mcfg, &cfg.train_config())?;
            print!("{}", result.render());
            if let Some(p) = report {
                write_file(p, &(serde_json::to_string_pretty(&result).map_err(Error::from)? + "\n"))?;
            }
        }
        Command::Predict { split, out, daily_out } => {
            let data = read_prepared(dir)?;
            let model = load_model_for(&default_in(dir, &cli.model_in, "model.ckpt.json"), &data)?;
            let (samples, name) = split_of(&data, *split);
            if samples.is_empty() {
                return Err(Error::Data(format!("the {name} split is empty")).into());
            }
            let csv_path = default_in(dir, out, "predictions.csv");
            let rows = export_predictions(&model, samples, Some(&data.norm_stats), &csv_path)?;
            let daily = predict(&model, samples)?;
            write_file(&default_in(dir, daily_out, "daily_predictions.jsonl"), &daily_predictions_to_jsonl(&daily)?)?;
            eprintln!("wrote {rows} {name} predictions to {}", csv_path.display());
        }
        Command::Alert {
            predictions,
            risk_threshold,
            out,
        } => {
            let rules = match risk_threshold {
                Some(t) => AlertRuleConfig::new(*t).map_err(|e| CliError::Usage(e.to_string()))?,
                None => cfg.alert_rules(),
            };
            let path = default_in(dir, predictions, "daily_predictions.jsonl");
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            let preds = parse_daily_predictions(&text)?;
            let alerts = detect_inflections(&preds, &rules)?;
            let body = alerts_to_jsonl(&alerts)?;
            match out {
                Some(p) => write_file(p, &body)?,
                None => print!("{body}"),
            }
            eprintln!("{} alerts from {} days", alerts.len(), preds.len());
        }
    }
    Ok(())
}
