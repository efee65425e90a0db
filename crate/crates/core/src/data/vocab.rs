use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

pub const PAD_ID: u32 = 0;
pub const UNK_ID: u32 = 1;

/// Token to id map with `0 = <pad>` and `1 = <unk>` reserved.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary whose ids `2..` follow the order of `tokens`.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            tokens: vec!["<pad>".into(), "<unk>".into()],
            ids: HashMap::from([("<pad>".into(), PAD_ID), ("<unk>".into(), UNK_ID)]),
        };
        for tok in tokens {
            let tok = tok.into();
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(Error::data(format!("invalid vocabulary token {tok:?}")));
            }
            let id = vocab.tokens.len() as u32;
            if vocab.ids.insert(tok.clone(), id).is_some() {
                return Err(Error::data(format!("duplicate vocabulary token {tok:?}")));
            }
            vocab.tokens.push(tok);
        }
        Ok(vocab)
    }

    /// Total size including the two reserved ids.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> u32 {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Non-reserved tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens[2..]
    }

    /// `vocab.txt` contents: one token per line, line `i` holds id `i + 2`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for tok in self.tokens() {
            out.push_str(tok);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        Vocabulary::from_tokens(text.lines())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Vocabulary::parse(&text)
    }
}

/// Keeps tokens seen at least `min_freq` times, ranked by descending frequency
/// then ascending token, capped so the total size with reserved ids is at most
/// `max_size`.
pub fn build_vocab<S: AsRef<str>>(corpus: &[S], min_freq: usize, max_size: usize) -> Result<Vocabulary> {
    if min_freq == 0 {
        return Err(Error::invalid("min_freq must be at least 1"));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for tok in doc.as_ref().split_ascii_whitespace() {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_freq).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_size.saturating_sub(2));
    Vocabulary::from_tokens(ranked.into_iter().map(|(t, _)| t))
}

/// Whitespace tokens mapped through `vocab` (unknown -> 1), truncated or
/// right-padded with 0 to `max_len`.
pub fn encode_doc(cleaned: &str, vocab: &Vocabulary, max_len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = cleaned
        .split_ascii_whitespace()
        .take(max_len)
        .map(|t| vocab.id(t))
        .collect();
    ids.resize(max_len, PAD_ID);
    ids
}
