//! Seeded synthetic data for tests, benchmarks and demos.

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{make_windows, AlignedDay, MarketBar, Sentiment, WindowSample, MARKET_FEATURES};
use crate::error::Result;
use crate::model::ModelConfig;
use crate::numeric::Matrix;

fn start_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).expect("valid date")
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

/// A window of random days shaped for `cfg`: 0 to 2 docs per day with random
/// token ids (some padding), standard-normal market features.
pub fn random_sample<R: Rng>(cfg: &ModelConfig, rng: &mut R) -> WindowSample {
    let inputs = (0..cfg.window)
        .map(|i| {
            let n_docs = rng.random_range(0..3usize);
            let docs: Vec<Vec<u32>> = (0..n_docs)
                .map(|_| {
                    let live = rng.random_range(1..=cfg.max_doc_len);
                    (0..cfg.max_doc_len)
                        .map(|p| if p < live { rng.random_range(1..cfg.vocab_size as u32) } else { 0 })
                        .collect()
                })
                .collect();
            let mut market: Vec<f64> = (0..cfg.market_dim).map(|_| standard_normal(rng)).collect();
            if let Some(last) = market.last_mut() {
                *last = if docs.is_empty() { 0.0 } else { 1.0 };
            }
            AlignedDay {
                date: start_date() + Days::new(i as u64),
                close: 100.0,
                market: Matrix::column(&market).expect("finite"),
                has_text: !docs.is_empty(),
                docs,
                label: Sentiment::ALL[rng.random_range(0..3)],
            }
        })
        .collect();
    WindowSample {
        inputs,
        target_return: standard_normal(rng),
        target_class: Sentiment::ALL[rng.random_range(0..3)],
        target_date: start_date() + Days::new(cfg.window as u64),
        prev_close: 100.0,
        target_close: 100.0,
    }
}

/// Token ids used by [`ablation_dataset`]: 0 pad, 1 unknown, 2..=4 the pattern
/// tokens `a b c`, then filler.
pub const ABLATION_PATTERN_TOKENS: [u32; 3] = [2, 3, 4];
pub const ABLATION_FILLER_TOKENS: u32 = 10;
pub const ABLATION_VOCAB: usize = 5 + ABLATION_FILLER_TOKENS as usize;
pub const ABLATION_DOC_LEN: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationSpec {
    pub episodes: usize,
    /// Days at the start of each episode whose classes are drawn at random.
    pub warmup: usize,
    /// Days after the warm-up whose class follows the count rule.
    pub rule_days: usize,
    pub seed: u64,
}

impl Default for AblationSpec {
    fn default() -> Self {
        AblationSpec {
            episodes: 200,
            warmup: 20,
            rule_days: 5,
            seed: 7,
        }
    }
}

/// Class implied by the number of positive days in the trailing window. The
/// negative band is split in two, so no single linear threshold on the count
/// separates the classes.
pub fn count_rule(positives: usize) -> Sentiment {
    match positives {
        7..=10 => Sentiment::Positive,
        11..=13 => Sentiment::Neutral,
        _ => Sentiment::Negative,
    }
}

/// A document whose class is carried only by the order of three tokens:
/// `a b c` positive, `c b a` negative, `b a c` neutral, placed at a
/// stride-aligned offset among filler. Every class uses the same bag of
/// tokens, so averaging embeddings cannot tell them apart.
pub fn pattern_doc<R: Rng>(class: Sentiment, rng: &mut R) -> Vec<u32> {
    let [a, b, c] = ABLATION_PATTERN_TOKENS;
    let pattern = match class {
        Sentiment::Positive => [a, b, c],
        Sentiment::Negative => [c, b, a],
        Sentiment::Neutral => [b, a, c],
    };
    let mut doc: Vec<u32> = (0..ABLATION_DOC_LEN)
        .map(|_| 5 + rng.random_range(0..ABLATION_FILLER_TOKENS))
        .collect();
    let slot = 3 * rng.random_range(0..ABLATION_DOC_LEN / 3);
    doc[slot..slot + 3].copy_from_slice(&pattern);
    doc
}

/// Dual-signal dataset: day classes are visible only through token order,
/// and each target class is [`count_rule`] of the positives in its input
/// window.
///
/// Episodes are independent. Each starts with `warmup` days whose positive
/// rate is drawn per episode, followed by `rule_days` days labeled by the
/// rule; one window is cut per rule day, so windows never span episodes.
/// Market features and returns are noise plus a faint count signal.
pub fn ablation_dataset(spec: &AblationSpec, window: usize) -> Result<Vec<WindowSample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut samples = Vec::new();
    let mut date = start_date();
    for _ in 0..spec.episodes {
        let p_pos: f64 = rng.random();
        let mut classes: Vec<Sentiment> = Vec::with_capacity(spec.warmup + spec.rule_days);
        for _ in 0..spec.warmup {
            let c = if rng.random::<f64>() < p_pos {
                Sentiment::Positive
            } else if rng.random::<bool>() {
                Sentiment::Negative
            } else {
                Sentiment::Neutral
            };
            classes.push(c);
        }
        for t in spec.warmup..spec.warmup + spec.rule_days {
            let from = t.saturating_sub(window);
            let positives = classes[from..t].iter().filter(|&&c| c == Sentiment::Positive).count();
            classes.push(count_rule(positives));
        }
        let mut close = 100.0;
        let mut days = Vec::with_capacity(classes.len());
        for (t, &class) in classes.iter().enumerate() {
            let from = t.saturating_sub(window);
            let positives = classes[from..t].iter().filter(|&&c| c == Sentiment::Positive).count();
            let r = 0.002 * (positives as f64 - 10.0) / 10.0 + 0.01 * standard_normal(&mut rng);
            close *= f64::exp(r);
            let mut market = vec![0.0; MARKET_FEATURES];
            market[0] = r / 0.01;
            for v in &mut market[1..MARKET_FEATURES - 1] {
                *v = standard_normal(&mut rng);
            }
            market[MARKET_FEATURES - 1] = 1.0;
            days.push(AlignedDay {
                date,
                close,
                market: Matrix::column(&market)?,
                docs: vec![pattern_doc(class, &mut rng)],
                label: class,
                has_text: true,
            });
            date = date + Days::new(1);
        }
        let windows = make_windows(&days, window)?;
        samples.extend(windows.into_iter().map(|mut s| {
            s.target_return /= 0.01;
            s
        }));
    }
    Ok(samples)
}

/// Gapless bars tracing `base + amplitude * sin(2 pi t / period)` plus
/// Gaussian noise of standard deviation `noise`.
pub fn sinusoid_bars(days: usize, base: f64, amplitude: f64, period: f64, noise: f64, seed: u64) -> Vec<MarketBar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut prev = base;
    (0..days)
        .map(|t| {
            let close = base + amplitude * (2.0 * std::f64::consts::PI * t as f64 / period).sin() + noise * standard_normal(&mut rng);
            let open = prev;
            let wiggle = 0.1 * noise * standard_normal(&mut rng).abs();
            let bar = MarketBar {
                date: start_date() + Days::new(t as u64),
                open,
                high: open.max(close) + wiggle,
                low: open.min(close) - wiggle,
                close,
                volume: 1_000_000.0 * (1.0 + 0.1 * standard_normal(&mut rng).abs()),
            };
            prev = close;
            bar
        })
        .collect()
}
