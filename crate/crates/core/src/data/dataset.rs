//! End-to-end preparation and the on-disk prepared-dataset directory.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::align::{align_days, LabeledDoc, MARKET_FEATURES};
use super::text::{clean_text, label_sentiment, Lexicon};
use super::vocab::{build_vocab, encode_doc, Vocabulary};
use super::window::{make_windows, split_chronological, NormStats, SplitRatios, Splits, WindowSample, DEFAULT_WINDOW};
use super::{MarketBar, RawTextDoc};
use crate::error::{Error, Result};

pub const VOCAB_FILE: &str = "vocab.txt";
pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const NORM_STATS_FILE: &str = "norm_stats.json";

#[derive(Debug, Clone, PartialEq)]
pub struct PrepareConfig {
    pub window: usize,
    pub max_doc_len: usize,
    pub min_freq: usize,
    pub max_vocab: usize,
    pub ratios: SplitRatios,
}

impl Default for PrepareConfig {
    fn default() -> Self {
        PrepareConfig {
            window: DEFAULT_WINDOW,
            max_doc_len: 32,
            min_freq: 1,
            max_vocab: 20_000,
            ratios: SplitRatios::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDataset {
    pub vocab: Vocabulary,
    pub norm_stats: NormStats,
    /// Normalized samples.
    pub splits: Splits<WindowSample>,
    pub dropped_docs: usize,
}

impl PreparedDataset {
    pub fn max_doc_len(&self) -> Option<usize> {
        self.all_samples()
            .flat_map(|s| &s.inputs)
            .flat_map(|d| &d.docs)
            .map(Vec::len)
            .next()
    }

    pub fn all_samples(&self) -> impl Iterator<Item = &WindowSample> {
        self.splits.train.iter().chain(&self.splits.val).chain(&self.splits.test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        })
    }
}

/// Clean, label, align, window, split and normalize.
///
/// The vocabulary is built only from documents attached to days that some
/// training window reads, so val/test text never shapes the token ids.
pub fn prepare(bars: &[MarketBar], docs: &[RawTextDoc], lexicon: &Lexicon, cfg: &PrepareConfig) -> Result<PreparedDataset> {
    if cfg.max_doc_len == 0 {
        return Err(Error::invalid("max_doc_len must be at least 1"));
    }
    let cleaned: Vec<String> = docs.iter().map(|d| clean_text(&d.text)).collect();
    let labels: Vec<_> = docs
        .iter()
        .zip(&cleaned)
        .map(|(d, c)| d.label.unwrap_or_else(|| label_sentiment(c, lexicon)))
        .collect();

    // first pass carries document indices to find which ones training reads
    let indexed: Vec<LabeledDoc> = docs
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(i, (d, &label))| LabeledDoc {
            timestamp: d.timestamp,
            tokens: vec![i as u32],
            label,
        })
        .collect();
    let probe = align_days(bars, &indexed)?;
    let n_days = probe.days.len();
    if n_days <= cfg.window {
        return Err(Error::data(format!(
            "{n_days} trading days is too short for a window of {}",
            cfg.window
        )));
    }
    let n_train = split_chronological((0..n_days - cfg.window).collect::<Vec<_>>(), cfg.ratios)?.train.len();
    let train_days = if n_train == 0 { 0 } else { n_train - 1 + cfg.window };
    let train_corpus: Vec<&str> = probe.days[..train_days]
        .iter()
        .flat_map(|d| &d.docs)
        .map(|ids| cleaned[ids[0] as usize].as_str())
        .collect();
    let vocab = build_vocab(&train_corpus, cfg.min_freq, cfg.max_vocab)?;

    let encoded: Vec<LabeledDoc> = indexed
        .into_iter()
        .zip(&cleaned)
        .map(|(d, c)| LabeledDoc {
            tokens: encode_doc(c, &vocab, cfg.max_doc_len),
            ..d
        })
        .collect();
    let aligned = align_days(bars, &encoded)?;
    let samples = make_windows(&aligned.days, cfg.window)?;
    let raw = split_chronological(samples, cfg.ratios)?;
    let norm_stats = NormStats::fit(&raw.train)?;
    let apply = |v: &[WindowSample]| v.iter().map(|s| norm_stats.apply(s)).collect();
    let splits = Splits {
        train: apply(&raw.train),
        val: apply(&raw.val),
        test: apply(&raw.test),
    };
    Ok(PreparedDataset {
        vocab,
        norm_stats,
        splits,
        dropped_docs: aligned.dropped.len(),
    })
}

#[derive(Serialize)]
struct SampleRecordOut<'a> {
    split: SplitName,
    #[serde(flatten)]
    sample: &'a WindowSample,
}

#[derive(Deserialize)]
struct SampleRecordIn {
    split: SplitName,
    #[serde(flatten)]
    sample: WindowSample,
}

/// `samples.jsonl`: one normalized sample per line, tagged with its split.
pub fn samples_to_jsonl(splits: &Splits<WindowSample>) -> Result<String> {
    let mut out = String::new();
    for (split, items) in [
        (SplitName::Train, &splits.train),
        (SplitName::Val, &splits.val),
        (SplitName::Test, &splits.test),
    ] {
        for sample in items {
            out.push_str(&serde_json::to_string(&SampleRecordOut { split, sample })?);
            out.push('\n');
        }
    }
    Ok(out)
}

/// Parses `samples.jsonl`, requiring train, val, test order and a consistent
/// window length and market width.
pub fn parse_samples_jsonl(input: &str) -> Result<Splits<WindowSample>> {
    let mut splits = Splits {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    let mut last_split = SplitName::Train;
    let mut window = None;
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::data(format!("samples line {}: {msg}", n + 1));
        let rec: SampleRecordIn = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        if (rec.split as u8) < (last_split as u8) {
            return Err(at(format!("{} sample after {} samples", rec.split, last_split)));
        }
        last_split = rec.split;
        let s = rec.sample;
        if s.inputs.is_empty() || *window.get_or_insert(s.inputs.len()) != s.inputs.len() {
            return Err(at("inconsistent window length".into()));
        }
        if s.inputs.iter().any(|d| d.market.rows() != MARKET_FEATURES) {
            return Err(at(format!("market features must have {MARKET_FEATURES} rows")));
        }
        if s.inputs.windows(2).any(|w| w[1].date <= w[0].date) || s.target_date <= s.last_input_date() {
            return Err(at("dates are not strictly increasing".into()));
        }
        let prices = [s.prev_close, s.target_close];
        if !s.target_return.is_finite() || prices.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(at("targets must be finite with positive prices".into()));
        }
        match rec.split {
            SplitName::Train => splits.train.push(s),
            SplitName::Val => splits.val.push(s),
            SplitName::Test => splits.test.push(s),
        }
    }
    Ok(splits)
}

pub fn write_prepared(dir: &Path, data: &PreparedDataset) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    data.vocab.write(&dir.join(VOCAB_FILE))?;
    data.norm_stats.write(&dir.join(NORM_STATS_FILE))?;
    let path = dir.join(SAMPLES_FILE);
    std::fs::write(&path, samples_to_jsonl(&data.splits)?).map_err(|e| Error::io(&path, e))
}

pub fn read_prepared(dir: &Path) -> Result<PreparedDataset> {
    let vocab = Vocabulary::read(&dir.join(VOCAB_FILE))?;
    let norm_stats = NormStats::read(&dir.join(NORM_STATS_FILE))?;
    let path = dir.join(SAMPLES_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let splits = parse_samples_jsonl(&text)?;
    let data = PreparedDataset {
        vocab,
        norm_stats,
        splits,
        dropped_docs: 0,
    };
    let vocab_size = data.vocab.len();
    let mut doc_len = None;
    for doc in data.all_samples().flat_map(|s| &s.inputs).flat_map(|d| &d.docs) {
        if *doc_len.get_or_insert(doc.len()) != doc.len() || doc.is_empty() {
            return Err(Error::data("encoded documents must share one non-zero length"));
        }
        if let Some(&id) = doc.iter().find(|&&id| id as usize >= vocab_size) {
            return Err(Error::TokenOutOfRange {
                id: id as usize,
                vocab_size,
            });
        }
    }
    Ok(data)
}
