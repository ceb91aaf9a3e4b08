//! Rule-based sentence segmentation.
//!
//! A sentence ends at a whitespace-delimited token whose final non-closing
//! character is `.`, `!` or `?`, or at end of text. Tokens ending in `.` do not
//! end a sentence when they are a guarded abbreviation (`Mr.`), a single-letter
//! initial (`J.`) or a dotted acronym (`U.S.`). An ellipsis followed by a
//! lowercase word does not end one either.

use std::collections::HashSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::text::normalize_whitespace;

/// Abbreviations that never terminate a sentence, lowercase and without the final dot.
pub const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "mt", "vs", "etc", "e.g", "i.e", "inc",
    "ltd", "corp", "gen", "col", "lt", "sgt", "capt", "gov", "sen", "rep", "rev", "jan", "feb",
    "aug", "sept", "oct", "nov", "dec", "approx", "dept", "fig", "u.s", "u.k",
];

const CLOSERS: &[char] = &['"', '\'', ')', ']', '}', '\u{201d}', '\u{2019}', '\u{bb}'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '{', '\u{201c}', '\u{2018}', '\u{ab}'];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct SentenceSplitter {
    abbreviations: HashSet<String>,
}

impl Default for SentenceSplitter {
    fn default() -> Self {
        Self::with_abbreviations(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl SentenceSplitter {
    pub fn with_abbreviations<I, S>(abbreviations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            abbreviations: abbreviations
                .into_iter()
                .map(|a| a.as_ref().trim_end_matches('.').to_lowercase())
                .collect(),
        }
    }

    pub fn split(&self, text: &str) -> Vec<Sentence> {
        let normalized = normalize_whitespace(text);
        let mut sentences = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        let mut tokens = normalized.split(' ').filter(|t| !t.is_empty()).peekable();
        while let Some(token) = tokens.next() {
            current.push(token);
            let trailing = tokens.peek().is_some_and(|next| next.starts_with(char::is_lowercase));
            if self.ends_sentence(token) && !(trailing && is_ellipsis(token)) {
                sentences.push(Sentence { text: current.join(" "), index: sentences.len() });
                current.clear();
            }
        }
        if !current.is_empty() {
            sentences.push(Sentence { text: current.join(" "), index: sentences.len() });
        }
        sentences
    }

    fn ends_sentence(&self, token: &str) -> bool {
        let core = token.trim_end_matches(CLOSERS);
        match core.chars().last() {
            Some('!') | Some('?') => true,
            Some('.') => !self.is_guarded(core),
            _ => false,
        }
    }

    fn is_guarded(&self, core: &str) -> bool {
        let word = core.trim_start_matches(OPENERS).trim_end_matches('.');
        if word.is_empty() || word.ends_with('.') {
            // Bare dots or an ellipsis.
            return false;
        }
        let lower = word.to_lowercase();
        if self.abbreviations.contains(&lower) {
            return true;
        }
        let mut chars = word.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            return c.is_alphabetic() && c.is_uppercase();
        }
        // Dotted acronyms such as "U.S" or "a.m".
        word.split('.').all(|part| {
            let mut cs = part.chars();
            matches!((cs.next(), cs.next()), (Some(c), None) if c.is_alphabetic())
        }) && word.contains('.')
    }
}

fn is_ellipsis(token: &str) -> bool {
    let core = token.trim_end_matches(CLOSERS);
    core.ends_with("...") || core.ends_with('\u{2026}')
}

static DEFAULT_SPLITTER: LazyLock<SentenceSplitter> = LazyLock::new(SentenceSplitter::default);

/// Splits `text` with the default abbreviation guard list.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    DEFAULT_SPLITTER.split(text)
}

/// Sentence texts only.
pub fn sentence_texts(text: &str) -> Vec<String> {
    split_sentences(text).into_iter().map(|s| s.text).collect()
}
