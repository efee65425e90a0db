//! Text cleaning and lexicon labeling.

use std::collections::HashSet;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;

use super::Sentiment;
use crate::error::{Error, Result};

static URL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?:[a-z][a-z0-9+.\-]*://|www\.)[^ \t\n\r\x0c]*").expect("url pattern")
});
static TICKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\$+([a-z])").expect("ticker pattern"));

fn is_kept(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c.is_ascii_whitespace() || c == '$'
}

/// Lowercases, drops URLs, strips everything outside `[a-z0-9 $]`, turns
/// `$ticker` into `ticker`, and collapses whitespace.
///
/// The passes repeat until nothing changes, so the result is a fixed point and
/// cleaning twice is the same as cleaning once.
pub fn clean_text(raw: &str) -> String {
    let mut s = raw.to_lowercase();
    loop {
        let no_urls = URL.replace_all(&s, "");
        let kept: String = no_urls.chars().filter(|&c| is_kept(c)).collect();
        let next = TICKER.replace_all(&kept, "${1}").into_owned();
        if next == s {
            break;
        }
        s = next;
    }
    s.split_ascii_whitespace().collect::<Vec<_>>().join(" ")
}

/// Positive and negative word sets for the fallback labeler.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    pub positive: HashSet<String>,
    pub negative: HashSet<String>,
}

const BUNDLED_POSITIVE: &str = include_str!("lexicon/positive.txt");
const BUNDLED_NEGATIVE: &str = include_str!("lexicon/negative.txt");

impl Lexicon {
    pub fn new<I, J, S, T>(positive: I, negative: J) -> Self
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: Into<String>,
        T: Into<String>,
    {
        Lexicon {
            positive: positive.into_iter().map(Into::into).collect(),
            negative: negative.into_iter().map(Into::into).collect(),
        }
    }

    /// Small finance word list shipped with the crate.
    pub fn bundled() -> Self {
        Lexicon::from_word_lists(BUNDLED_POSITIVE, BUNDLED_NEGATIVE)
            .expect("bundled lexicon is well formed")
    }

    /// Parses two one-token-per-line lists. Blank lines and `#` comments are
    /// skipped; tokens are passed through [`clean_text`] so they match cleaned
    /// documents.
    pub fn from_word_lists(positive: &str, negative: &str) -> Result<Self> {
        let parse = |src: &str, which: &str| -> Result<HashSet<String>> {
            let mut out = HashSet::new();
            for (n, line) in src.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let token = clean_text(line);
                if token.is_empty() || token.contains(' ') {
                    return Err(Error::data(format!(
                        "{which} lexicon line {}: {line:?} is not a single token",
                        n + 1
                    )));
                }
                out.insert(token);
            }
            Ok(out)
        };
        Ok(Lexicon {
            positive: parse(positive, "positive")?,
            negative: parse(negative, "negative")?,
        })
    }

    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Lexicon::from_word_lists(&read(positive)?, &read(negative)?)
    }

    pub fn score(&self, cleaned: &str) -> i64 {
        cleaned
            .split_ascii_whitespace()
            .map(|tok| {
                i64::from(self.positive.contains(tok)) - i64::from(self.negative.contains(tok))
            })
            .sum()
    }
}

/// Sign of (#positive tokens - #negative tokens); zero is neutral.
pub fn label_sentiment(cleaned: &str, lexicon: &Lexicon) -> Sentiment {
    match lexicon.score(cleaned) {
        s if s > 0 => Sentiment::Positive,
        s if s < 0 => Sentiment::Negative,
        _ => Sentiment::Neutral,
    }
}
