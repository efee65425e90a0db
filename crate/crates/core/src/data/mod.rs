//! Ingestion, cleaning, labeling, alignment and windowing.

pub mod align;
pub mod dataset;
pub mod docs;
pub mod market;
pub mod sentiment;
pub mod text;
pub mod vocab;
pub mod window;

pub use align::{align_days, AlignedDay, Alignment, LabeledDoc, MARKET_FEATURES};
pub use dataset::{prepare, read_prepared, write_prepared, PrepareConfig, PreparedDataset, SplitName};
pub use docs::{parse_text_jsonl, read_text_jsonl, write_text_jsonl, RawTextDoc};
pub use market::{parse_market_csv, read_market_csv, write_market_csv, MarketBar};
pub use sentiment::Sentiment;
pub use text::{clean_text, label_sentiment, Lexicon};
pub use vocab::{build_vocab, encode_doc, Vocabulary, PAD_ID, UNK_ID};
pub use window::{make_windows, split_chronological, NormStats, SplitRatios, Splits, WindowSample};
